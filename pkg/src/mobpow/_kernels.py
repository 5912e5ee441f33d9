"""Escape-depth kernels: a numba scalar kernel and a vectorized numpy twin.

Both kernels run the same float64 log-polar recurrence, stage by stage:
stage k applies the Moebius map with t_k, tests the closed-disk condition
(the power step preserves it, so testing right after the Moebius step is
exact), then raises to the q_k-th power.  Working with (log magnitude,
argument) keeps the power a single multiplication, so huge exponents cannot
overflow; stages whose t underflows float64 switch to the limit form
log(image) = cp * (1 - 1/z) with cp = C*p.

depth = index of the first failing stage (0 also covers points outside the
closed unit disk); a point that passes every stage gets max_depth + 1, so
the level-n compact set is exactly the mask {depth > n}.

NaNs (e.g. a point collapsing onto a singularity direction) are counted as
escapes.
"""

from __future__ import annotations

import os

import numpy as np

_TWO_PI = 2.0 * np.pi


def numba_available():
    if os.environ.get("MOBPOW_FORCE_NUMPY", "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def depth_grid_numpy(X, Y, tv, qv, cpv, max_depth, eps):
    """Vectorized escape depths for pixel-center coordinate grids X, Y."""
    r2 = X * X + Y * Y
    depth = np.zeros(X.shape, dtype=np.uint16)
    active = r2 <= 1.0 + eps
    depth[active] = np.uint16(max_depth + 1)
    with np.errstate(all="ignore"):
        log_r = np.where(active & (r2 > 0.0),
                         0.5 * np.log(np.where(r2 > 0.0, r2, 1.0)),
                         -np.inf)
    theta = np.where(active, np.arctan2(Y, X), 0.0)
    idx = np.flatnonzero(active)
    lr = log_r.ravel()[idx]
    th = theta.ravel()[idx]
    flat_depth = depth.ravel()
    for k in range(max_depth + 1):
        if idx.size == 0:
            break
        t = tv[k]
        with np.errstate(all="ignore"):
            if t > 0.0:
                ratio = t * np.exp(-lr)
                wr = 1.0 - ratio * np.cos(th)
                wi = ratio * np.sin(th)
                m2 = wr * wr + wi * wi
                lr_m = 0.5 * np.log(m2) - np.log1p(-t)
                escaped = ~(lr_m <= eps)  # catches +inf and NaN
                if k < max_depth:
                    lr = qv[k] * lr_m
                    th = qv[k] * np.arctan2(wi, wr)
            else:
                inv = np.exp(-lr)
                lr_new = cpv[k] * (1.0 - inv * np.cos(th))
                escaped = ~(lr_new <= eps)
                if k < max_depth:
                    th = cpv[k] * (inv * np.sin(th))
                    lr = lr_new
            th = th - _TWO_PI * np.rint(th / _TWO_PI)
        if escaped.any():
            flat_depth[idx[escaped]] = np.uint16(k)
            keep = ~escaped
            idx = idx[keep]
            lr = lr[keep]
            th = th[keep]
    return depth


def _point_depth_py(x, y, tv, qv, cpv, max_depth, eps):
    r2 = x * x + y * y
    if r2 > 1.0 + eps:
        return 0
    lr = 0.5 * np.log(r2)
    th = np.arctan2(y, x)
    for k in range(max_depth + 1):
        t = tv[k]
        if t > 0.0:
            ratio = t * np.exp(-lr)
            wr = 1.0 - ratio * np.cos(th)
            wi = ratio * np.sin(th)
            m2 = wr * wr + wi * wi
            lr_m = 0.5 * np.log(m2) - np.log1p(-t)
            if not (lr_m <= eps):
                return k
            if k < max_depth:
                lr = qv[k] * lr_m
                th = qv[k] * np.arctan2(wi, wr)
        else:
            inv = np.exp(-lr)
            lr_new = cpv[k] * (1.0 - inv * np.cos(th))
            if not (lr_new <= eps):
                return k
            if k < max_depth:
                th = cpv[k] * (inv * np.sin(th))
                lr = lr_new
        th = th - _TWO_PI * np.rint(th / _TWO_PI)
    return max_depth + 1


def _rows_py(xs, ys, tv, qv, cpv, max_depth, eps, out):
    for i in range(ys.shape[0]):
        y = ys[i]
        for j in range(xs.shape[0]):
            out[i, j] = _point_depth_py(xs[j], y, tv, qv, cpv, max_depth, eps)


_NUMBA_ROWS = None


def _numba_rows():
    global _NUMBA_ROWS
    if _NUMBA_ROWS is None:
        import numba

        point = numba.njit(cache=True)(_point_depth_py)

        @numba.njit(parallel=True, cache=True)
        def rows(xs, ys, tv, qv, cpv, max_depth, eps, out):
            for i in numba.prange(ys.shape[0]):
                y = ys[i]
                for j in range(xs.shape[0]):
                    out[i, j] = point(xs[j], y, tv, qv, cpv, max_depth, eps)

        _NUMBA_ROWS = rows
    return _NUMBA_ROWS


def depth_grid_rows(xs, ys, tv, qv, cpv, max_depth, eps, backend):
    """Row-parallel scalar kernel over pixel-center axes xs (cols), ys (rows)."""
    out = np.empty((ys.shape[0], xs.shape[0]), dtype=np.uint16)
    if backend == "numba":
        _numba_rows()(xs, ys, tv, qv, cpv, max_depth, eps, out)
    else:
        _rows_py(xs, ys, tv, qv, cpv, max_depth, eps, out)
    return out
