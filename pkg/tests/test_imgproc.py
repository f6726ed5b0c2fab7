import math

import numpy as np
import pytest

from onionprint.config import MatchConfig
from onionprint.errors import InvalidInputError, PreconditionError
from onionprint.imgproc import (
    bifurcation_direction,
    binarize,
    despeckle,
    detect_minutiae,
    extract,
    is_thin,
    merge_close,
    otsu_threshold,
    remove_border_minutiae,
    thin,
)
from onionprint.minutiae import Minutia, MinutiaKind
from oracles import (
    count_components_8,
    has_full_2x2_block,
    merge_groups_unionfind,
    otsu_threshold_bruteforce,
)


def _E(x, y, theta=0.0):
    return Minutia(x=x, y=y, theta=theta, kind=MinutiaKind.ENDING)


def _B(x, y, theta=0.0):
    return Minutia(x=x, y=y, theta=theta, kind=MinutiaKind.BIFURCATION)


def _y_skeleton():
    """Perfect one-pixel Y: branches at 90 (up), 225 and 315 (down diagonals)."""
    sk = np.zeros((17, 17), np.uint8)
    for k in range(1, 7):
        sk[8 - k, 8] = 1
        sk[8 + k, 8 - k] = 1
        sk[8 + k, 8 + k] = 1
    sk[8, 8] = 1
    return sk


# ---------------------------------------------------------------------------
# binarize
# ---------------------------------------------------------------------------


def test_binarize_uniform_above_threshold_is_background():
    img = np.full((5, 7), 200, np.uint8)
    assert binarize(img, "fixed", 128).sum() == 0


def test_binarize_checkerboard():
    img = (np.indices((6, 6)).sum(axis=0) % 2) * 255
    out = binarize(img, "fixed", 128)
    assert np.array_equal(out, (img == 0).astype(np.uint8))


def test_binarize_rejects_empty_and_unknown_method():
    with pytest.raises(InvalidInputError):
        binarize(np.zeros((0, 4), np.uint8))
    with pytest.raises(InvalidInputError):
        binarize(np.zeros((4, 4), np.uint8), "adaptive")


def test_otsu_matches_exhaustive_search():
    rng = np.random.default_rng(911)
    bimodal = np.where(rng.random((20, 20)) < 0.5, 50, 200).astype(np.uint8)
    cases = [
        bimodal,
        np.array([[50] * 10 + [200] * 10] * 4, np.uint8),
        rng.integers(0, 256, size=(30, 30)).astype(np.uint8),
        rng.normal(120, 30, size=(25, 25)).clip(0, 255).astype(np.uint8),
    ]
    for img in cases:
        t = otsu_threshold(img)
        assert t == otsu_threshold_bruteforce(img)
        assert np.array_equal(binarize(img, "otsu"), (img < t).astype(np.uint8))


def test_otsu_tie_breaks_toward_smaller_threshold():
    # a gap in the histogram makes every threshold inside it equally good
    img = np.array([[10] * 6 + [240] * 6], np.uint8)
    assert otsu_threshold(img) == 11


# ---------------------------------------------------------------------------
# thinning
# ---------------------------------------------------------------------------


def test_thin_diagonal_line_unchanged():
    img = np.zeros((10, 10), np.uint8)
    for i in range(2, 8):
        img[i, i] = 1
    assert np.array_equal(thin(img), img)


def test_thin_bar_collapses_to_line():
    bar = np.zeros((9, 26), np.uint8)
    bar[3:6, 3:23] = 1
    sk = thin(bar)
    assert is_thin(sk)
    assert np.array_equal(thin(sk), sk)
    assert np.all(bar[sk == 1] == 1)
    assert not has_full_2x2_block(sk)
    assert count_components_8(sk) == 1
    # one pixel tall over nearly the full span
    rows = np.unique(np.nonzero(sk)[0])
    assert len(rows) == 1
    assert sk.sum() >= 15


def test_thin_disk_one_pixel_wide_connected():
    yy, xx = np.indices((40, 40))
    disk = ((xx - 20) ** 2 + (yy - 20) ** 2 <= 15 * 15).astype(np.uint8)
    sk = thin(disk)
    assert sk.sum() > 0
    assert count_components_8(sk) == 1
    assert not has_full_2x2_block(sk)
    assert is_thin(sk)


def test_thin_all_background_stays_background():
    assert thin(np.zeros((8, 8), np.uint8)).sum() == 0


def test_thin_random_blobs_properties():
    rng = np.random.default_rng(912)
    for _ in range(12):
        img = np.zeros((48, 48), np.uint8)
        for _ in range(int(rng.integers(2, 5))):
            cy, cx = rng.integers(8, 40, 2)
            r = int(rng.integers(3, 8))
            yy, xx = np.indices(img.shape)
            img |= ((xx - cx) ** 2 + (yy - cy) ** 2 <= r * r).astype(np.uint8)
        sk = thin(img)
        assert np.all(img[sk == 1] == 1)
        assert np.array_equal(thin(sk), sk)
        assert count_components_8(sk) == count_components_8(img)


# ---------------------------------------------------------------------------
# despeckle
# ---------------------------------------------------------------------------


def test_despeckle_drops_isolated_and_fills_holes():
    img = np.zeros((7, 7), np.uint8)
    img[1, 1] = 1  # lone speck
    img[3:6, 3:6] = 1
    img[4, 4] = 0  # enclosed hole
    out = despeckle(img)
    assert out[1, 1] == 0
    assert out[4, 4] == 1
    assert out[3, 3] == 1


# ---------------------------------------------------------------------------
# detection and orientation
# ---------------------------------------------------------------------------


def test_detect_straight_segment():
    sk = np.zeros((7, 20), np.uint8)
    sk[3, 2:18] = 1
    ms = detect_minutiae(sk)
    assert [(m.x, m.y, m.kind) for m in ms] == [
        (2.0, 3.0, MinutiaKind.ENDING),
        (17.0, 3.0, MinutiaKind.ENDING),
    ]
    # left end points rightward along the ridge, right end leftward
    assert ms[0].theta == 0.0
    assert ms[1].theta == 180.0


def test_detect_vertical_top_ending_is_270():
    sk = np.zeros((20, 7), np.uint8)
    sk[2:18, 3] = 1
    ms = detect_minutiae(sk)
    assert ms[0].theta == 270.0
    assert ms[1].theta == 90.0


def test_detect_y_junction():
    ms = detect_minutiae(_y_skeleton())
    bifs = [m for m in ms if m.kind is MinutiaKind.BIFURCATION]
    ends = [m for m in ms if m.kind is MinutiaKind.ENDING]
    assert len(bifs) == 1 and len(ends) == 3
    assert (bifs[0].x, bifs[0].y) == (8.0, 8.0)
    # closest branch pair (225, 315) bisects to 270, away from the up branch
    assert bifs[0].theta == 270.0


def test_detect_ignores_isolated_pixels():
    sk = np.zeros((5, 5), np.uint8)
    sk[2, 2] = 1
    assert detect_minutiae(sk) == []


def test_detect_rejects_non_thin_input():
    fat = np.zeros((8, 8), np.uint8)
    fat[2:6, 2:6] = 1
    with pytest.raises(PreconditionError):
        detect_minutiae(fat)


def test_detect_locality():
    # presence and kind depend only on the 3x3 block around each pixel
    base = np.zeros((9, 30), np.uint8)
    base[4, 2:28] = 1
    before = [(m.x, m.y, m.kind) for m in detect_minutiae(base)]
    edited = base.copy()
    edited[0, 10] = 1  # far from both endings
    after = [(m.x, m.y, m.kind) for m in detect_minutiae(edited)]
    assert [p for p in after if p[1] == 4.0] == before


def test_bifurcation_direction_examples():
    assert bifurcation_direction([90.0, 210.0, 330.0]) == 270.0
    assert bifurcation_direction([0.0, 40.0, 180.0]) == 20.0
    # equally-close pairs: prefer the one excluding the smallest angle
    assert bifurcation_direction([0.0, 90.0, 180.0]) == 135.0
    # bisector takes the short arc even across the wraparound
    assert bifurcation_direction([350.0, 10.0, 180.0]) == 0.0


# ---------------------------------------------------------------------------
# merge_close
# ---------------------------------------------------------------------------


def test_merge_two_close_endings_to_midpoint():
    out = merge_close([_E(0.0, 0.0, 10.0), _E(3.0, 0.0, 50.0)], 5.0)
    assert len(out) == 1
    assert (out[0].x, out[0].y) == (1.5, 0.0)
    assert out[0].kind is MinutiaKind.ENDING


def test_merge_far_pair_retained():
    out = merge_close([_E(0.0, 0.0), _E(10.0, 0.0)], 5.0)
    assert len(out) == 2


def test_merge_chain_is_transitive():
    chain = [_E(0.0, 0.0), _E(4.0, 0.0), _B(8.0, 0.0)]
    out = merge_close(chain, 5.0)
    assert len(out) == 1
    assert out[0].kind is MinutiaKind.BIFURCATION
    assert out[0].x == 4.0


def test_merge_orientation_from_member_nearest_centroid():
    out = merge_close([_E(0.0, 0.0, 11.0), _E(2.0, 0.0, 22.0), _E(2.5, 0.0, 33.0)], 5.0)
    assert len(out) == 1
    assert out[0].theta == 22.0  # centroid 1.5, nearest member is x=2


def test_merge_rejects_negative_radius():
    with pytest.raises(InvalidInputError):
        merge_close([_E(0.0, 0.0)], -1.0)


def _iterated_unionfind_positions(minutiae, rm):
    """Reapply the union-find grouping until stable, tracking centroids."""
    pos = [(m.x, m.y) for m in minutiae]
    while True:
        groups = merge_groups_unionfind(pos, rm)
        if all(len(g) == 1 for g in groups):
            return sorted(pos)
        pos = sorted(
            (
                float(np.mean([pos[i][0] for i in g])),
                float(np.mean([pos[i][1] for i in g])),
            )
            for g in groups
        )


def test_merge_matches_unionfind_oracle():
    rng = np.random.default_rng(913)
    for _ in range(25):
        n = int(rng.integers(2, 25))
        ms = [
            Minutia(
                x=float(rng.uniform(0, 60)),
                y=float(rng.uniform(0, 60)),
                theta=float(rng.uniform(0, 360)),
                kind=MinutiaKind.ENDING if rng.random() < 0.5 else MinutiaKind.BIFURCATION,
            )
            for _ in range(n)
        ]
        rm = float(rng.uniform(1.0, 12.0))
        out = merge_close(ms, rm)
        got = sorted((m.x, m.y) for m in out)
        want = _iterated_unionfind_positions(ms, rm)
        assert len(got) == len(want)
        for (gx, gy), (wx, wy) in zip(got, want):
            assert math.isclose(gx, wx, abs_tol=1e-9)
            assert math.isclose(gy, wy, abs_tol=1e-9)
        # all surviving pairs are strictly farther apart than rm
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                assert math.dist((out[i].x, out[i].y), (out[j].x, out[j].y)) > rm


# ---------------------------------------------------------------------------
# border removal and full extraction
# ---------------------------------------------------------------------------


def test_remove_border_minutiae():
    ms = [_E(5.0, 30.0), _E(30.0, 30.0), _E(30.0, 58.0)]
    kept = remove_border_minutiae(ms, (60, 60), 12.0)
    assert [(m.x, m.y) for m in kept] == [(30.0, 30.0)]


def test_extract_all_background_is_empty():
    assert len(extract(np.full((30, 30), 255, np.uint8))) == 0


def test_extract_straight_ridge_two_endings():
    img = np.full((40, 60), 220, np.uint8)
    img[19:22, 5:55] = 30
    out = extract(img, MatchConfig(border_margin=2.0))
    assert len(out) == 2
    assert all(m.kind is MinutiaKind.ENDING for m in out)


def test_extract_y_ridge_three_endings_one_bifurcation():
    img = np.full((64, 64), 230, np.uint8)
    for k in range(22):
        for t in (-1, 0, 1):
            img[32 - k, 32 + t] = 20
            img[32 + k // 2, 32 - round(k * 0.87) + t] = 20
            img[32 + k // 2, 32 + round(k * 0.87) + t] = 20
    out = extract(img, MatchConfig(border_margin=0.0))
    assert sorted(m.kind.value for m in out) == ["B", "E", "E", "E"]


def test_extract_border_margin_removes_frame_minutiae():
    img = np.full((40, 60), 220, np.uint8)
    img[19:22, 0:60] = 30  # ridge runs edge to edge
    assert len(extract(img, MatchConfig(border_margin=12.0))) == 0


def test_extract_deterministic():
    rng = np.random.default_rng(914)
    img = rng.integers(0, 256, size=(50, 50)).astype(np.uint8)
    a = extract(img, source="img")
    b = extract(img.copy(), source="img")
    assert a == b
