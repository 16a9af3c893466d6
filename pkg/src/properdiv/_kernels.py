"""Batch kernels: one divergence per replicate row of sorted samples.

Each kernel has a numba implementation (row loop, parallel over rows) and a
numpy implementation (vectorized across rows). ``USE_JIT`` picks the one
exported under the public name; both stay importable for benchmarking and
cross-checking.
"""

import numpy as np

from ._accel import USE_JIT, njit, prange
from .divergences import seg_abs, seg_pow, seg_sq
from .measures import eval_left, eval_right, quantile_minus, quantile_plus

KIND_IQ, KIND_WIQ, KIND_AV, KIND_KS = 0, 1, 2, 3

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


# --- scalar helpers (compiled when numba is active) ------------------------------


@njit
def _f_right(x, lo, hi, t):
    n = x.shape[0]
    i = np.searchsorted(x, t, side="right") - 1
    if i < 0:
        return 0.0
    if i >= n - 1:
        return 1.0
    return hi[i] + (lo[i + 1] - hi[i]) * (t - x[i]) / (x[i + 1] - x[i])


@njit
def _f_left(x, lo, hi, t):
    n = x.shape[0]
    i = np.searchsorted(x, t, side="left")
    if i <= 0:
        return 0.0
    if i >= n:
        return 1.0
    return hi[i - 1] + (lo[i] - hi[i - 1]) * (t - x[i - 1]) / (x[i] - x[i - 1])


@njit
def _seg_abs1(a, b, h):
    if a * b >= 0.0:
        return h * (abs(a) + abs(b)) / 2.0
    return h * (a * a + b * b) / (2.0 * (abs(a) + abs(b)))


@njit
def _seg_pow1(a, b, h, p, nodes, weights):
    aa = abs(a)
    ab = abs(b)
    if a * b < 0.0:
        t0 = h * aa / (aa + ab)
        return (t0 * aa**p + (h - t0) * ab**p) / (p + 1.0)
    lo = min(aa, ab)
    hi = max(aa, ab)
    if hi == lo:
        return h * hi**p
    if hi - lo > 1e-6 * hi:
        return h * (hi ** (p + 1.0) - lo ** (p + 1.0)) / ((p + 1.0) * (hi - lo))
    acc = 0.0
    for q in range(nodes.shape[0]):
        s = (nodes[q] + 1.0) / 2.0
        acc += weights[q] * abs(a + (b - a) * s) ** p
    return h * acc / 2.0


@njit
def _cdf_row(fx, flo, fhi, gx, wx, wlev, s, kind):
    k = s.shape[0]
    ng = gx.shape[0]
    i = 0
    j = 0
    acc = 0.0
    ks = 0.0
    prev_z = 0.0
    prev_dr = 0.0
    first = True
    while i < ng or j < k:
        if i < ng and (j >= k or gx[i] <= s[j]):
            z = gx[i]
        else:
            z = s[j]
        below = j
        while j < k and s[j] == z:
            j += 1
        while i < ng and gx[i] == z:
            i += 1
        dl = _f_left(fx, flo, fhi, z) - below / k
        dr = _f_right(fx, flo, fhi, z) - j / k
        if not first:
            h = z - prev_z
            a = prev_dr
            b = dl
            if kind == KIND_IQ:
                acc += h * (a * a + a * b + b * b) / 3.0
            elif kind == KIND_WIQ:
                mid = (z + prev_z) / 2.0
                w = 0.0
                m = np.searchsorted(wx, mid, side="right") - 1
                if m >= 0 and m < wlev.shape[0]:
                    w = wlev[m]
                acc += w * h * (a * a + a * b + b * b) / 3.0
            elif kind == KIND_AV:
                acc += _seg_abs1(a, b, h)
        ks = max(ks, abs(dl), abs(dr))
        prev_z = z
        prev_dr = dr
        first = False
    if kind == KIND_KS:
        return ks
    return acc


@njit(parallel=True)
def _cdf_batch_jit(fx, flo, fhi, gx, wx, wlev, S, kind):
    R = S.shape[0]
    out = np.empty(R)
    for r in prange(R):
        out[r] = _cdf_row(fx, flo, fhi, gx, wx, wlev, S[r], kind)
    return out


@njit(parallel=True)
def _quantile_batch_jit(qa, qb, h, level, S, p, nodes, weights):
    R = S.shape[0]
    n = h.shape[0]
    out = np.empty(R)
    for r in prange(R):
        acc = 0.0
        for m in range(n):
            y = S[r, level[m]]
            a = qa[m] - y
            b = qb[m] - y
            if p == 1.0:
                acc += _seg_abs1(a, b, h[m])
            elif p == 2.0:
                acc += h[m] * (a * a + a * b + b * b) / 3.0
            else:
                acc += _seg_pow1(a, b, h[m], p, nodes, weights)
        out[r] = np.sqrt(acc) if p == 2.0 else acc ** (1.0 / p)
    return out


# --- numpy implementations -----------------------------------------------------------


def _cdf_batch_numpy(fx, flo, fhi, gx, wx, wlev, S, kind):
    R, k = S.shape
    ng = gx.shape[0]
    N = k + ng
    Z = np.concatenate([S, np.broadcast_to(gx, (R, ng))], axis=1)
    is_sample = np.concatenate([np.ones(k), np.zeros(ng)])
    order = np.argsort(Z, axis=1, kind="stable")
    Z = np.take_along_axis(Z, order, axis=1)
    tag = is_sample[order]
    cum = np.cumsum(tag, axis=1)
    # tie groups: first and last position of each run of equal values
    starts = np.ones((R, N), dtype=bool)
    starts[:, 1:] = Z[:, 1:] != Z[:, :-1]
    ends = np.ones((R, N), dtype=bool)
    ends[:, :-1] = starts[:, 1:]
    pos = np.arange(N)
    first = np.maximum.accumulate(np.where(starts, pos, 0), axis=1)
    last = np.minimum.accumulate(np.where(ends, pos, N - 1)[:, ::-1], axis=1)[:, ::-1]
    n_le = np.take_along_axis(cum, last, axis=1)
    n_lt = np.take_along_axis(cum, first, axis=1) - np.take_along_axis(tag, first, axis=1)
    dr = eval_right(fx, flo, fhi, Z) - n_le / k
    dl = eval_left(fx, flo, fhi, Z) - n_lt / k
    if kind == KIND_KS:
        return np.maximum(np.abs(dr).max(axis=1), np.abs(dl).max(axis=1))
    h = np.diff(Z, axis=1)
    a, b = dr[:, :-1], dl[:, 1:]
    if kind == KIND_AV:
        return seg_abs(a, b, h).sum(axis=1)
    vals = seg_sq(a, b, h)
    if kind == KIND_WIQ:
        mid = (Z[:, :-1] + Z[:, 1:]) / 2.0
        m = np.searchsorted(wx, mid, side="right") - 1
        inside = (m >= 0) & (m < wlev.shape[0])
        vals = vals * np.where(inside, wlev[np.clip(m, 0, wlev.shape[0] - 1)], 0.0)
    return vals.sum(axis=1)


def _quantile_batch_numpy(qa, qb, h, level, S, p, nodes=None, weights=None):
    Y = S[:, level]
    a = qa[None, :] - Y
    b = qb[None, :] - Y
    if p == 1.0:
        return seg_abs(a, b, h).sum(axis=1)
    if p == 2.0:
        return np.sqrt(seg_sq(a, b, h).sum(axis=1))
    return seg_pow(a, b, h, p).sum(axis=1) ** (1.0 / p)


# --- public entry points ---------------------------------------------------------------


def _fixed_grid(F, weight):
    gx = F.breakpoints
    if weight is not None:
        gx = np.union1d(gx, weight.breakpoints)
    return np.ascontiguousarray(gx, dtype=float)


def cdf_batch(F, S, kind, weight=None, use_jit=None):
    """IQ / WIQ / AV / KS between F and the empirical measure of each sorted row of S."""
    S = np.ascontiguousarray(S, dtype=float)
    gx = _fixed_grid(F, weight)
    if weight is not None:
        wx, wlev = weight.breakpoints, weight.levels
    else:
        wx, wlev = np.zeros(1), np.zeros(0)
    args = (F.breakpoints, F.values_left, F.values_right, gx, wx, wlev, S, kind)
    if USE_JIT if use_jit is None else use_jit:
        return _cdf_batch_jit(*(np.ascontiguousarray(a, dtype=float) for a in args[:-1]), kind)
    return _cdf_batch_numpy(*args)


def quantile_plan(F, k):
    """Quantile segments shared by every replicate of size k."""
    U, T = F.quantile_knots()
    u = np.union1d(U, np.arange(k + 1) / k)
    lo, hi = u[:-1], u[1:]
    h = np.diff(u)
    keep = h > 0
    lo, hi, h = lo[keep], hi[keep], h[keep]
    level = np.searchsorted(np.arange(k + 1) / k, (lo + hi) / 2.0, side="left") - 1
    qa = quantile_plus(U, T, lo)
    qb = quantile_minus(U, T, hi)
    return qa, qb, h, level.astype(np.int64)


def wasserstein_batch(F, S, p, use_jit=None):
    S = np.ascontiguousarray(S, dtype=float)
    qa, qb, h, level = quantile_plan(F, S.shape[1])
    if USE_JIT if use_jit is None else use_jit:
        return _quantile_batch_jit(qa, qb, h, level, S, float(p), _GL_NODES, _GL_WEIGHTS)
    return _quantile_batch_numpy(qa, qb, h, level, S, float(p))
