"""Hot numeric kernels: numba-jitted loops with pure-numpy fallbacks.

Three kernels dominate runtime: the thinning subiteration, the
exhaustive alignment search over minutia-pair hypotheses, and the
critical-shift scan of the turning-function distance. Each exists in two
variants computing identical results: a ``*_numba`` scalar loop and a
``*_numpy`` vectorized fallback. The unsuffixed module-level names
dispatch to the numba variant when numba imports and the
``ONIONPRINT_NUMBA`` environment variable is not 0/false/no.
``benchmarks/bench_kernels.py`` times the variants side by side.
"""

import math
import os

import numpy as np

TWO_PI = 2.0 * math.pi

# Merged-partition cells narrower than this are rounding slivers: two
# breakpoints that coincide in exact arithmetic but differ by float
# noise (~1e-15). Integrating across them would floor every distance
# between congruent shapes near sqrt(noise); dropping them costs
# O(eps) accuracy on genuine gaps, which are many orders wider.
SNAP_EPS = 1e-12

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a regular dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


USE_NUMBA = HAVE_NUMBA and os.environ.get("ONIONPRINT_NUMBA", "1").lower() not in (
    "0",
    "false",
    "no",
)


# ---------------------------------------------------------------------------
# Zhang-Suen thinning subiteration
#
# Operates on a zero-padded uint8 image in place and returns the number
# of deleted pixels. `step` selects the subiteration (0 or 1). Deletion
# is simultaneous: pixels are marked first, then cleared.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def zhang_suen_pass_numba(img, step):
    h, w = img.shape
    mark = np.zeros((h, w), np.uint8)
    deleted = 0
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            if img[y, x] == 0:
                continue
            p2 = img[y - 1, x]
            p3 = img[y - 1, x + 1]
            p4 = img[y, x + 1]
            p5 = img[y + 1, x + 1]
            p6 = img[y + 1, x]
            p7 = img[y + 1, x - 1]
            p8 = img[y, x - 1]
            p9 = img[y - 1, x - 1]
            b = int(p2) + int(p3) + int(p4) + int(p5) + int(p6) + int(p7) + int(p8) + int(p9)
            if b < 2 or b > 6:
                continue
            a = 0
            if p2 == 0 and p3 == 1:
                a += 1
            if p3 == 0 and p4 == 1:
                a += 1
            if p4 == 0 and p5 == 1:
                a += 1
            if p5 == 0 and p6 == 1:
                a += 1
            if p6 == 0 and p7 == 1:
                a += 1
            if p7 == 0 and p8 == 1:
                a += 1
            if p8 == 0 and p9 == 1:
                a += 1
            if p9 == 0 and p2 == 1:
                a += 1
            if a != 1:
                continue
            if step == 0:
                if p2 * p4 * p6 != 0 or p4 * p6 * p8 != 0:
                    continue
            else:
                if p2 * p4 * p8 != 0 or p2 * p6 * p8 != 0:
                    continue
            mark[y, x] = 1
            deleted += 1
    if deleted > 0:
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                if mark[y, x] == 1:
                    img[y, x] = 0
    return deleted


def zhang_suen_pass_numpy(img, step):
    """Vectorized subiteration on a padded uint8 image, in place."""
    c = img[1:-1, 1:-1]
    p2 = img[:-2, 1:-1]
    p3 = img[:-2, 2:]
    p4 = img[1:-1, 2:]
    p5 = img[2:, 2:]
    p6 = img[2:, 1:-1]
    p7 = img[2:, :-2]
    p8 = img[1:-1, :-2]
    p9 = img[:-2, :-2]
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)
    b = np.zeros(c.shape, np.int32)
    for p in ring:
        b += p
    a = np.zeros(c.shape, np.int32)
    for cur, nxt in zip(ring, ring[1:] + ring[:1]):
        a += (cur == 0) & (nxt == 1)
    if step == 0:
        side = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
    else:
        side = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
    kill = (c == 1) & (b >= 2) & (b <= 6) & (a == 1) & side
    c[kill] = 0
    return int(kill.sum())


# ---------------------------------------------------------------------------
# Alignment search
#
# Every minutia pair (a, b) proposes a transform: rotate the first set by
# the angle-label difference, then translate a onto b. Pairs passing both
# tolerances are matched greedily in order of increasing spatial
# distance, ties broken by generation order (a-index major). The winning
# candidate maximizes the matched count, then minimizes the summed
# matched distance, then comes earliest in (a, b) order.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _candidate_pairs(xi, yi, ti, xj, yj, tj, ki, kj, strict, r2, theta0, cosv, sinv, dx, dy, dth, sd_buf, ii_buf, jj_buf):
    m = xi.shape[0]
    n = xj.shape[0]
    cnt = 0
    for i in range(m):
        px = cosv * xi[i] - sinv * yi[i] + dx
        py = sinv * xi[i] + cosv * yi[i] + dy
        tr = (ti[i] + dth) % 360.0
        for j in range(n):
            ddx = px - xj[j]
            ddy = py - yj[j]
            d2 = ddx * ddx + ddy * ddy
            if d2 > r2:
                continue
            if strict and ki[i] != kj[j]:
                continue
            diff = abs(tr - tj[j])
            if diff > 180.0:
                diff = 360.0 - diff
            if diff > theta0:
                continue
            sd_buf[cnt] = math.sqrt(d2)
            ii_buf[cnt] = i
            jj_buf[cnt] = j
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def _greedy_accept(cnt, sd_buf, ii_buf, jj_buf, used_i, used_j, out_i, out_j, record):
    for i in range(used_i.shape[0]):
        used_i[i] = False
    for j in range(used_j.shape[0]):
        used_j[j] = False
    order = np.argsort(sd_buf[:cnt], kind="mergesort")
    k = 0
    ssum = 0.0
    for o in range(cnt):
        idx = order[o]
        i = ii_buf[idx]
        j = jj_buf[idx]
        if used_i[i] or used_j[j]:
            continue
        used_i[i] = True
        used_j[j] = True
        if record:
            out_i[k] = i
            out_j[k] = j
        ssum += sd_buf[idx]
        k += 1
    return k, ssum


@njit(cache=True, nogil=True)
def best_alignment_numba(xi, yi, ti, xj, yj, tj, ki, kj, strict, r0, theta0):
    m = xi.shape[0]
    n = xj.shape[0]
    r2 = r0 * r0
    sd_buf = np.empty(m * n, np.float64)
    ii_buf = np.empty(m * n, np.int64)
    jj_buf = np.empty(m * n, np.int64)
    used_i = np.empty(m, np.bool_)
    used_j = np.empty(n, np.bool_)
    cap = m if m < n else n
    out_i = np.empty(cap, np.int64)
    out_j = np.empty(cap, np.int64)
    best_k = -1
    best_sum = np.inf
    best_a = 0
    best_b = 0
    for a in range(m):
        for b in range(n):
            dth = (tj[b] - ti[a]) % 360.0
            rad = dth * math.pi / 180.0
            cosv = math.cos(rad)
            sinv = math.sin(rad)
            dx = xj[b] - (cosv * xi[a] - sinv * yi[a])
            dy = yj[b] - (sinv * xi[a] + cosv * yi[a])
            cnt = _candidate_pairs(
                xi, yi, ti, xj, yj, tj, ki, kj, strict, r2, theta0, cosv, sinv, dx, dy, dth, sd_buf, ii_buf, jj_buf
            )
            k, ssum = _greedy_accept(cnt, sd_buf, ii_buf, jj_buf, used_i, used_j, out_i, out_j, False)
            if k > best_k or (k == best_k and ssum < best_sum):
                best_k = k
                best_sum = ssum
                best_a = a
                best_b = b
    # rebuild the matching of the winning candidate
    dth = (tj[best_b] - ti[best_a]) % 360.0
    rad = dth * math.pi / 180.0
    cosv = math.cos(rad)
    sinv = math.sin(rad)
    dx = xj[best_b] - (cosv * xi[best_a] - sinv * yi[best_a])
    dy = yj[best_b] - (sinv * xi[best_a] + cosv * yi[best_a])
    cnt = _candidate_pairs(
        xi, yi, ti, xj, yj, tj, ki, kj, strict, r2, theta0, cosv, sinv, dx, dy, dth, sd_buf, ii_buf, jj_buf
    )
    k, ssum = _greedy_accept(cnt, sd_buf, ii_buf, jj_buf, used_i, used_j, out_i, out_j, True)
    return best_a, best_b, out_i[:k].copy(), out_j[:k].copy(), ssum


def best_alignment_numpy(xi, yi, ti, xj, yj, tj, ki, kj, strict, r0, theta0):
    """Vectorized-per-candidate fallback with identical tie-breaking."""
    m = xi.shape[0]
    n = xj.shape[0]
    r2 = r0 * r0

    def candidate_match(a, b):
        dth = (tj[b] - ti[a]) % 360.0
        # same expression as the jitted variant so the two agree bitwise
        rad = dth * math.pi / 180.0
        cosv, sinv = math.cos(rad), math.sin(rad)
        dx = xj[b] - (cosv * xi[a] - sinv * yi[a])
        dy = yj[b] - (sinv * xi[a] + cosv * yi[a])
        px = cosv * xi - sinv * yi + dx
        py = sinv * xi + cosv * yi + dy
        d2 = (px[:, None] - xj[None, :]) ** 2 + (py[:, None] - yj[None, :]) ** 2
        diff = np.abs((ti[:, None] + dth) % 360.0 - tj[None, :])
        diff = np.minimum(diff, 360.0 - diff)
        ok = (d2 <= r2) & (diff <= theta0)
        if strict:
            ok &= ki[:, None] == kj[None, :]
        ii, jj = np.nonzero(ok)  # row-major: i-major, j-minor
        sd = np.sqrt(d2[ii, jj])
        order = np.argsort(sd, kind="stable")
        used_i = np.zeros(m, bool)
        used_j = np.zeros(n, bool)
        pi, pj = [], []
        ssum = 0.0
        for idx in order:
            i, j = ii[idx], jj[idx]
            if used_i[i] or used_j[j]:
                continue
            used_i[i] = True
            used_j[j] = True
            pi.append(i)
            pj.append(j)
            ssum += sd[idx]
        return len(pi), ssum, pi, pj

    best = (-1, np.inf, 0, 0)
    for a in range(m):
        for b in range(n):
            k, ssum, _, _ = candidate_match(a, b)
            if k > best[0] or (k == best[0] and ssum < best[1]):
                best = (k, ssum, a, b)
    _, ssum, pi, pj = candidate_match(best[2], best[3])
    return best[2], best[3], np.asarray(pi, np.int64), np.asarray(pj, np.int64), ssum


# ---------------------------------------------------------------------------
# Turning-distance critical-shift scan
#
# Both turning functions are step functions on [0, 1). At a fixed shift
# the optimal rotation has a closed form for the L2 norm, and the
# shift-minimum is attained where two breakpoints align, so only the
# m*n critical shifts need evaluation. The moments of the difference are
# integrated exactly over the merged breakpoint partition.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _diff_sweep(fs, fa, gs, ga, t, bp, bv, mean, squared):
    """Integrate (shifted f - g - mean), or its square, over [0, 1).

    Called twice per shift: once to get the mean offset (the optimal
    rotation is its negation), then with that mean to accumulate only
    nonnegative squared deviations, which avoids the cancellation of
    the textbook E[h^2] - E[h]^2 form.
    """
    m = fs.shape[0]
    n = gs.shape[0]
    k0 = 0
    for i in range(m):
        if fs[i] < t:
            k0 += 1
        else:
            break
    c = 0
    for idx in range(k0, m):
        bp[c] = fs[idx] - t
        bv[c] = fa[idx]
        c += 1
    for idx in range(k0):
        bp[c] = fs[idx] - t + 1.0
        bv[c] = fa[idx] + TWO_PI
        c += 1
    # value on the gap before the first break wraps from the last break
    fv = bv[m - 1] - TWO_PI
    gv = ga[n - 1] - TWO_PI
    acc = 0.0
    s = 0.0
    pf = 0
    pg = 0
    while True:
        nf = bp[pf] if pf < m else 2.0
        ng = gs[pg] if pg < n else 2.0
        nxt = nf if nf <= ng else ng
        if nxt >= 1.0:
            nxt = 1.0
        w = nxt - s
        if w > SNAP_EPS:
            h = fv - gv - mean
            if squared:
                acc += h * h * w
            else:
                acc += h * w
        if nxt >= 1.0:
            break
        while pf < m and bp[pf] <= nxt:
            fv = bv[pf]
            pf += 1
        while pg < n and gs[pg] <= nxt:
            gv = ga[pg]
            pg += 1
        s = nxt
    return acc


@njit(cache=True, nogil=True)
def min_turning_distance_numba(fs, fa, gs, ga):
    m = fs.shape[0]
    n = gs.shape[0]
    bp = np.empty(m, np.float64)
    bv = np.empty(m, np.float64)
    best_d2 = np.inf
    best_t = 0.0
    best_i1 = 0.0
    for i in range(m):
        for j in range(n):
            t = (fs[i] - gs[j]) % 1.0
            i1 = _diff_sweep(fs, fa, gs, ga, t, bp, bv, 0.0, False)
            d2 = _diff_sweep(fs, fa, gs, ga, t, bp, bv, i1, True)
            if d2 < best_d2:
                best_d2 = d2
                best_t = t
                best_i1 = i1
    if best_d2 < 0.0:
        best_d2 = 0.0
    return math.sqrt(best_d2), best_t, -best_i1


def min_turning_distance_numpy(fs, fa, gs, ga):
    """All critical shifts at once via a sorted merged-break table."""
    m = fs.shape[0]
    n = gs.shape[0]
    shifts = (fs[:, None] - gs[None, :]).ravel() % 1.0  # i-major like the loop
    ns = shifts.shape[0]
    pos_f = (fs[None, :] - shifts[:, None]) % 1.0
    val_f = fa[None, :] + TWO_PI * (fs[None, :] < shifts[:, None])
    tot = m + n
    pos = np.concatenate([pos_f, np.broadcast_to(gs, (ns, n))], axis=1)
    val = np.concatenate([val_f, np.broadcast_to(ga, (ns, n))], axis=1)
    isf = np.zeros((ns, tot), bool)
    isf[:, :m] = True
    order = np.argsort(pos, axis=1, kind="stable")
    pos = np.take_along_axis(pos, order, 1)
    val = np.take_along_axis(val, order, 1)
    isf = np.take_along_axis(isf, order, 1)

    col = np.arange(tot)[None, :]
    f_idx = np.maximum.accumulate(np.where(isf, col, -1), axis=1)
    g_idx = np.maximum.accumulate(np.where(~isf, col, -1), axis=1)
    fv = np.take_along_axis(val, np.maximum(f_idx, 0), 1)
    gv = np.take_along_axis(val, np.maximum(g_idx, 0), 1)
    # before the first break of a function its value wraps around from
    # the last break minus a full turn
    k0 = (fs[None, :] < shifts[:, None]).sum(axis=1)
    f_init = np.where(k0 > 0, fa[np.maximum(k0 - 1, 0)] + TWO_PI, fa[m - 1]) - TWO_PI
    g_init = ga[n - 1] - TWO_PI
    fv = np.where(f_idx < 0, f_init[:, None], fv)
    gv = np.where(g_idx < 0, g_init, gv)

    widths = np.empty((ns, tot))
    widths[:, :-1] = pos[:, 1:] - pos[:, :-1]
    widths[:, -1] = 1.0 - pos[:, -1]
    widths[widths <= SNAP_EPS] = 0.0
    h = fv - gv
    i1 = (h * widths).sum(axis=1)
    # two-pass form: summing squared deviations sidesteps the
    # cancellation of E[h^2] - E[h]^2 near zero distances
    dev = h - i1[:, None]
    d2 = (dev * dev * widths).sum(axis=1)
    best = int(np.argmin(d2))  # first minimum, same tie rule as the loop
    return math.sqrt(max(d2[best], 0.0)), float(shifts[best]), float(-i1[best])


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    zhang_suen_pass = zhang_suen_pass_numba
    best_alignment = best_alignment_numba
    min_turning_distance = min_turning_distance_numba
else:
    zhang_suen_pass = zhang_suen_pass_numpy
    best_alignment = best_alignment_numpy
    min_turning_distance = min_turning_distance_numpy
