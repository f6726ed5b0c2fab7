"""Seeded synthetic fingerprint corpus.

Fingers are random well-separated minutia sets; impressions of a finger
are rigid motions of it with Gaussian position and orientation jitter,
a fraction of minutiae deleted, and a fraction of spurious ones
inserted. Everything derives from one seed, so a corpus is reproducible
byte for byte.
"""

import math

import numpy as np

from .minutiae import Minutia, MinutiaKind, MinutiaSet

BOX = 400.0
MIN_SEPARATION = 14.0


def _random_minutia(rng, taken, margin=30.0):
    while True:
        x = float(rng.uniform(margin, BOX - margin))
        y = float(rng.uniform(margin, BOX - margin))
        if all((x - px) ** 2 + (y - py) ** 2 > MIN_SEPARATION**2 for px, py in taken):
            taken.append((x, y))
            return Minutia(
                x=x,
                y=y,
                theta=float(rng.uniform(0.0, 360.0)),
                kind=MinutiaKind.ENDING if rng.random() < 0.6 else MinutiaKind.BIFURCATION,
            )


def synthetic_finger(rng, n_min=30, n_max=60):
    """Latent template: n random minutiae, pairwise farther than 14 px."""
    n = int(rng.integers(n_min, n_max + 1))
    taken = []
    return [_random_minutia(rng, taken) for _ in range(n)]


def jittered_impression(
    rng,
    finger,
    pos_sigma=3.0,
    angle_sigma=5.0,
    delete_frac=0.1,
    insert_frac=0.1,
    max_rotation=25.0,
    max_shift=15.0,
) -> MinutiaSet:
    """One noisy capture of a latent finger."""
    dtheta = float(rng.uniform(-max_rotation, max_rotation)) % 360.0
    dx = float(rng.uniform(-max_shift, max_shift))
    dy = float(rng.uniform(-max_shift, max_shift))
    rad = math.radians(dtheta)
    cosv, sinv = math.cos(rad), math.sin(rad)
    cx = cy = BOX / 2.0

    n = len(finger)
    n_del = int(round(delete_frac * n))
    drop = set(rng.choice(n, size=n_del, replace=False).tolist()) if n_del else set()

    out = []
    taken = []
    for idx, m in enumerate(finger):
        if idx in drop:
            continue
        # rotate about the box center, translate, then jitter
        rx = cosv * (m.x - cx) - sinv * (m.y - cy) + cx + dx
        ry = sinv * (m.x - cx) + cosv * (m.y - cy) + cy + dy
        out.append(
            Minutia(
                x=rx + float(rng.normal(0.0, pos_sigma)),
                y=ry + float(rng.normal(0.0, pos_sigma)),
                theta=(m.theta + dtheta + float(rng.normal(0.0, angle_sigma))) % 360.0,
                kind=m.kind,
            )
        )
        taken.append((out[-1].x, out[-1].y))
    n_ins = int(round(insert_frac * n))
    for _ in range(n_ins):
        out.append(_random_minutia(rng, taken))
    return MinutiaSet.from_iterable(out)


def synthetic_corpus(seed, fingers=20, impressions=4, n_min=30, n_max=60):
    """[(finger_id, impression_id, MinutiaSet)] with ids starting at 1."""
    rng = np.random.default_rng(seed)
    out = []
    for f in range(1, fingers + 1):
        latent = synthetic_finger(rng, n_min, n_max)
        for i in range(1, impressions + 1):
            out.append((f, i, jittered_impression(rng, latent)))
    return out
