"""Grayscale fingerprint image to cleaned minutia set.

Pipeline: binarize (ridges are dark, so foreground means intensity
below threshold), optional despeckle, Zhang-Suen thinning, neighbor
count classification on the skeleton, spurious-minutia cleanup.
Coordinates are screen pixels (origin top-left, y down); angles are
degrees counterclockwise from +x in image space, so "up" is 270.
"""

import math

import numpy as np

from . import kernels
from .config import MatchConfig
from .errors import InvalidInputError, PreconditionError
from .minutiae import Minutia, MinutiaKind, MinutiaSet

# ridge-following horizon for orientation estimation, in skeleton steps
TRACE_STEPS = 10

# 8-neighborhood in raster order
_OFFSETS = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


def _as_gray(img):
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError("expected a nonempty 2-D grayscale image")
    return arr


def _as_binary(img):
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError("expected a nonempty 2-D binary image")
    return (arr != 0).astype(np.uint8)


def otsu_threshold(img) -> int:
    """Threshold maximizing between-class variance; ties pick the smallest.

    Classes are {p < t} and {p >= t} for t in 0..255.
    """
    hist = np.bincount(_as_gray(img).astype(np.uint8).ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    idx = np.arange(256, dtype=np.float64)
    below = np.concatenate(([0.0], np.cumsum(hist)))[:256]
    below_moment = np.concatenate(([0.0], np.cumsum(hist * idx)))[:256]
    above = total - below
    above_moment = float(np.sum(hist * idx)) - below_moment
    var_between = np.zeros(256)
    ok = (below > 0) & (above > 0)
    mu0 = below_moment[ok] / below[ok]
    mu1 = above_moment[ok] / above[ok]
    var_between[ok] = below[ok] * above[ok] * (mu0 - mu1) ** 2
    return int(np.argmax(var_between))


def binarize(img, method="otsu", threshold=128):
    """Foreground mask: pixels strictly below the threshold are ridges."""
    gray = _as_gray(img)
    if method == "otsu":
        t = otsu_threshold(gray)
    elif method == "fixed":
        t = int(threshold)
    else:
        raise InvalidInputError(f"unknown binarization method {method!r}")
    return (gray < t).astype(np.uint8)


def _neighbor_counts(binary):
    """Count of foreground 8-neighbors at every pixel."""
    p = np.pad(binary, 1).astype(np.int32)
    return (
        p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
        + p[1:-1, :-2] + p[1:-1, 2:]
        + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
    )


def despeckle(binary):
    """Drop isolated foreground pixels and fill fully enclosed holes."""
    b = _as_binary(binary)
    counts = _neighbor_counts(b)
    out = b.copy()
    out[(b == 1) & (counts == 0)] = 0
    out[(b == 0) & (counts == 8)] = 1
    return out


def thin(binary):
    """Zhang-Suen thinning to a one-pixel-wide skeleton."""
    b = _as_binary(binary)
    h, w = b.shape
    padded = np.zeros((h + 2, w + 2), np.uint8)
    padded[1:-1, 1:-1] = b
    while True:
        changed = kernels.zhang_suen_pass(padded, 0)
        changed += kernels.zhang_suen_pass(padded, 1)
        if changed == 0:
            break
    return padded[1:-1, 1:-1].copy()


def is_thin(skeleton) -> bool:
    """True when one more thinning iteration would delete nothing."""
    b = _as_binary(skeleton)
    h, w = b.shape
    padded = np.zeros((h + 2, w + 2), np.uint8)
    padded[1:-1, 1:-1] = b
    return kernels.zhang_suen_pass(padded, 0) + kernels.zhang_suen_pass(padded, 1) == 0


def _fg_neighbors(sk, x, y):
    h, w = sk.shape
    out = []
    for dx, dy in _OFFSETS:
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and sk[ny, nx]:
            out.append((nx, ny))
    return out


def _trace_ridge(sk, start, prev, steps):
    """Follow unambiguous ridge pixels away from prev; stop at junctions."""
    path = [start]
    cur = start
    for _ in range(steps):
        nxt = [q for q in _fg_neighbors(sk, *cur) if q != prev]
        if len(nxt) != 1:
            break
        prev, cur = cur, nxt[0]
        path.append(cur)
    return path


def _angle_from(p, q) -> float:
    # y grows downward, angles grow counterclockwise
    return math.degrees(math.atan2(-(q[1] - p[1]), q[0] - p[0])) % 360.0


def bifurcation_direction(branch_angles) -> float:
    """Bisector of the two most alike branch directions, in [0, 360).

    Ties between pairs go to the pair whose leftover branches contain
    the smallest angle; the bisector follows the short arc.
    """
    angles = sorted(float(a) % 360.0 for a in branch_angles)
    if len(angles) < 2:
        raise PreconditionError("bifurcation needs at least 2 branch directions")
    best = None
    for i in range(len(angles)):
        for j in range(i + 1, len(angles)):
            gap = abs(angles[i] - angles[j])
            gap = min(gap, 360.0 - gap)
            rest = [angles[k] for k in range(len(angles)) if k != i and k != j]
            key = (gap, min(rest) if rest else 0.0, i, j)
            if best is None or key < best[0]:
                best = (key, angles[i], angles[j])
    _, a, b = best
    delta = (b - a) % 360.0
    if delta <= 180.0:
        return (a + delta / 2.0) % 360.0
    return (b + (360.0 - delta) / 2.0) % 360.0


def estimate_orientation(sk, p, kind, trace_steps=TRACE_STEPS):
    """Minutia direction in degrees plus a low-confidence flag.

    Endings point along the ridge toward its interior. Bifurcations
    point down the bisector of their two closest branches, away from
    the lone one.
    """
    sk = np.asarray(sk)
    x, y = int(p[0]), int(p[1])
    if kind is MinutiaKind.ENDING:
        path = _trace_ridge(sk, (x, y), None, trace_steps)
        if len(path) < 2:
            return 0.0, True
        return _angle_from((x, y), path[-1]), False
    branch_angles = []
    for nbr in _fg_neighbors(sk, x, y):
        path = _trace_ridge(sk, nbr, (x, y), trace_steps - 1)
        tip = path[-1]
        if tip != (x, y):
            branch_angles.append(_angle_from((x, y), tip))
    if len(branch_angles) < 2:
        return 0.0, True
    return bifurcation_direction(branch_angles), False


def detect_minutiae(sk, trace_steps=TRACE_STEPS):
    """Classify skeleton pixels by foreground neighbor count.

    1 neighbor is an ending, more than 2 a bifurcation, exactly 2 an
    ordinary ridge pixel, 0 an ignored speck. Output is in raster
    order, which already matches the canonical (y, x) sort.
    """
    sk = _as_binary(sk)
    if not is_thin(sk):
        raise PreconditionError("detect_minutiae requires a fully thinned skeleton")
    counts = _neighbor_counts(sk)
    out = []
    for y, x in zip(*np.nonzero(sk)):
        c = counts[y, x]
        if c == 1:
            kind = MinutiaKind.ENDING
        elif c > 2:
            kind = MinutiaKind.BIFURCATION
        else:
            continue
        theta, _ = estimate_orientation(sk, (x, y), kind, trace_steps)
        out.append(Minutia(x=float(x), y=float(y), theta=theta, kind=kind))
    return out


def merge_close(ms, rm):
    """Collapse groups of minutiae linked by distances <= rm.

    Grouping is the transitive closure of the distance relation. Each
    group becomes one minutia at the centroid, carrying the orientation
    of the member nearest the centroid (ties to lowest (y, x)) and kind
    Bifurcation if any member was one. Merged centroids can re-enter
    each other's radius, so the pass repeats until stable; the result
    therefore keeps all pairwise distances above rm.
    """
    if rm < 0:
        raise InvalidInputError(f"rm must be nonnegative, got {rm}")
    cur = list(ms)
    while len(cur) > 1:
        pos = np.array([[m.x, m.y] for m in cur])
        d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        adj = d2 <= rm * rm
        np.fill_diagonal(adj, False)
        groups = _components(adj)
        if all(len(g) == 1 for g in groups):
            break
        merged = []
        for g in groups:
            if len(g) == 1:
                merged.append(cur[g[0]])
                continue
            centroid = pos[g].mean(axis=0)
            rep_idx = min(
                g,
                key=lambda i: (float(((pos[i] - centroid) ** 2).sum()), cur[i].y, cur[i].x),
            )
            kind = (
                MinutiaKind.BIFURCATION
                if any(cur[i].kind is MinutiaKind.BIFURCATION for i in g)
                else MinutiaKind.ENDING
            )
            merged.append(
                Minutia(x=float(centroid[0]), y=float(centroid[1]), theta=cur[rep_idx].theta, kind=kind)
            )
        cur = merged
    return sorted(cur, key=lambda m: m.sort_key)


def _components(adj):
    n = len(adj)
    seen = [False] * n
    groups = []
    for i in range(n):
        if seen[i]:
            continue
        stack = [i]
        seen[i] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in np.nonzero(adj[v])[0]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
        groups.append(sorted(comp))
    return groups


def remove_border_minutiae(ms, shape, margin):
    """Drop minutiae closer than margin to the image frame."""
    h, w = shape
    return [
        m
        for m in ms
        if margin <= m.x <= (w - 1) - margin and margin <= m.y <= (h - 1) - margin
    ]


def raw_minutiae(img, cfg=None):
    """Image through detection, before any cleanup: (minutiae, shape).

    Split out from extract so parameter sweeps can cache this expensive
    stage per image and rerun only the cleanup below it.
    """
    cfg = cfg if cfg is not None else MatchConfig()
    binary = binarize(img, cfg.binarize, cfg.fixed_threshold)
    if cfg.despeckle:
        binary = despeckle(binary)
    sk = thin(binary)
    return detect_minutiae(sk), sk.shape


def clean_minutiae(detected, shape, cfg=None, source=None) -> MinutiaSet:
    """Border removal, merging, and 3-decimal quantization.

    Quantization makes a set round-trip exactly through the text format.
    """
    cfg = cfg if cfg is not None else MatchConfig()
    ms = remove_border_minutiae(detected, shape, cfg.border_margin)
    ms = merge_close(ms, cfg.rm)
    quantized = [
        Minutia(
            x=round(m.x, 3),
            y=round(m.y, 3),
            theta=round(m.theta, 3) % 360.0,
            kind=m.kind,
        )
        for m in ms
    ]
    return MinutiaSet.from_iterable(quantized, source=source)


def extract(img, cfg=None, source=None) -> MinutiaSet:
    """Full image-to-minutiae pipeline, deterministic for equal inputs."""
    cfg = cfg if cfg is not None else MatchConfig()
    detected, shape = raw_minutiae(img, cfg)
    return clean_minutiae(detected, shape, cfg, source)
