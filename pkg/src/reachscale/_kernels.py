"""Numeric inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with identical semantics.  The active
backend is picked once at import time:

    REACHSCALE_BACKEND=numpy   force the numpy path
    REACHSCALE_BACKEND=numba   require numba (ImportError if missing)

Unset means numba if importable, numpy otherwise.  Both implementations are
always reachable as ``numpy_impl`` / ``numba_impl`` so tests and the
benchmark can compare them directly.
"""
import math
import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _np_points_free(px, py, cx, cy, r, width, height):
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    ok = (px >= 0.0) & (px <= width) & (py >= 0.0) & (py <= height)
    for i in range(len(cx)):
        dx = px - cx[i]
        dy = py - cy[i]
        ok &= dx * dx + dy * dy >= r[i] * r[i]
    return ok


def _np_segments_free(ax, ay, bx, by, cx, cy, r, width, height):
    """Vectorised over segments; exact point-to-segment distance per circle."""
    ax = np.asarray(ax, dtype=float)
    ay = np.asarray(ay, dtype=float)
    bx = np.asarray(bx, dtype=float)
    by = np.asarray(by, dtype=float)
    ok = ((ax >= 0.0) & (ax <= width) & (ay >= 0.0) & (ay <= height)
          & (bx >= 0.0) & (bx <= width) & (by >= 0.0) & (by <= height))
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    degenerate = l2 == 0.0
    safe_l2 = np.where(degenerate, 1.0, l2)
    for i in range(len(cx)):
        t = ((cx[i] - ax) * dx + (cy[i] - ay) * dy) / safe_l2
        t = np.where(degenerate, 0.0, np.minimum(np.maximum(t, 0.0), 1.0))
        qx = ax + t * dx - cx[i]
        qy = ay + t * dy - cy[i]
        ok &= qx * qx + qy * qy > r[i] * r[i]
    return ok


def _np_windowed_argmin(px, py, lo, hi, x, y):
    dx = px[lo:hi] - x
    dy = py[lo:hi] - y
    return lo + int(np.argmin(dx * dx + dy * dy))


def _np_moving_average(a, n):
    a = np.asarray(a, dtype=float)
    m = len(a)
    half = (n - 1) // 2
    csum = np.concatenate(([0.0], np.cumsum(a)))
    idx = np.arange(m)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, m)
    return (csum[hi] - csum[lo]) / (hi - lo)


def _np_min_assign(alpha, lo, hi, vals):
    out = np.array(alpha, dtype=float, copy=True)
    for k in range(len(vals)):
        seg = out[lo[k]:hi[k]]
        np.minimum(seg, vals[k], out=seg)
    return out


def _np_rrt_star(samples, sx, sy, cx, cy, r, width, height, step, radius):
    n_iter = samples.shape[0]
    nx = np.empty(n_iter + 1)
    ny = np.empty(n_iter + 1)
    parent = np.full(n_iter + 1, -1, dtype=np.int64)
    cost = np.zeros(n_iter + 1)
    nx[0] = sx
    ny[0] = sy
    n = 1
    rad2 = radius * radius
    for it in range(n_iter):
        qx = samples[it, 0]
        qy = samples[it, 1]
        dx = nx[:n] - qx
        dy = ny[:n] - qy
        d2 = dx * dx + dy * dy
        near_i = int(np.argmin(d2))
        d = math.sqrt(d2[near_i])
        if d == 0.0:
            continue
        if d > step:
            f = step / d
            qx = nx[near_i] + (qx - nx[near_i]) * f
            qy = ny[near_i] + (qy - ny[near_i]) * f
        if not _np_points_free(np.array([qx]), np.array([qy]), cx, cy, r, width, height)[0]:
            continue
        if not _np_segments_free(np.array([nx[near_i]]), np.array([ny[near_i]]),
                                 np.array([qx]), np.array([qy]),
                                 cx, cy, r, width, height)[0]:
            continue
        dx = nx[:n] - qx
        dy = ny[:n] - qy
        d2 = dx * dx + dy * dy
        near = np.nonzero(d2 <= rad2)[0]
        edge = np.sqrt(d2[near])
        cand = cost[near] + edge
        free = _np_segments_free(nx[near], ny[near], np.full(len(near), qx),
                                 np.full(len(near), qy), cx, cy, r, width, height)
        ddx = nx[near_i] - qx
        ddy = ny[near_i] - qy
        best = near_i
        best_c = cost[near_i] + math.sqrt(ddx * ddx + ddy * ddy)
        m = cand[free].min()
        if m < best_c:
            best = int(near[np.nonzero(free & (cand == m))[0][0]])
            best_c = m
        k = n
        nx[k] = qx
        ny[k] = qy
        parent[k] = best
        cost[k] = best_c
        n += 1
        for idx in range(len(near)):
            j = int(near[idx])
            if j == best or not free[idx]:
                continue
            c = best_c + edge[idx]
            if c < cost[j]:
                parent[j] = k
                cost[j] = c
                stack = [j]
                while stack:
                    q = stack.pop()
                    for ch in np.nonzero(parent[:n] == q)[0]:
                        ex = nx[ch] - nx[q]
                        ey = ny[ch] - ny[q]
                        cost[ch] = cost[q] + math.sqrt(ex * ex + ey * ey)
                        stack.append(int(ch))
    return nx[:n].copy(), ny[:n].copy(), parent[:n].copy(), cost[:n].copy()


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _nb_point_free(x, y, cx, cy, r, width, height):
    if x < 0.0 or x > width or y < 0.0 or y > height:
        return False
    for i in range(cx.shape[0]):
        dx = x - cx[i]
        dy = y - cy[i]
        if dx * dx + dy * dy < r[i] * r[i]:
            return False
    return True


def _nb_segment_free(ax, ay, bx, by, cx, cy, r, width, height):
    if ax < 0.0 or ax > width or ay < 0.0 or ay > height:
        return False
    if bx < 0.0 or bx > width or by < 0.0 or by > height:
        return False
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    for i in range(cx.shape[0]):
        if l2 == 0.0:
            t = 0.0
        else:
            t = ((cx[i] - ax) * dx + (cy[i] - ay) * dy) / l2
            t = min(max(t, 0.0), 1.0)
        qx = ax + t * dx - cx[i]
        qy = ay + t * dy - cy[i]
        if not (qx * qx + qy * qy > r[i] * r[i]):
            return False
    return True


def _nb_points_free(px, py, cx, cy, r, width, height):
    out = np.empty(px.shape[0], dtype=np.bool_)
    for k in range(px.shape[0]):
        out[k] = _point_free_scalar(px[k], py[k], cx, cy, r, width, height)
    return out


def _nb_segments_free(ax, ay, bx, by, cx, cy, r, width, height):
    out = np.empty(ax.shape[0], dtype=np.bool_)
    for k in range(ax.shape[0]):
        out[k] = _segment_free_scalar(ax[k], ay[k], bx[k], by[k], cx, cy, r, width, height)
    return out


def _nb_windowed_argmin(px, py, lo, hi, x, y):
    best = lo
    bd = np.inf
    for j in range(lo, hi):
        dx = px[j] - x
        dy = py[j] - y
        d2 = dx * dx + dy * dy
        if d2 < bd:
            bd = d2
            best = j
    return best


def _nb_moving_average(a, n):
    m = a.shape[0]
    half = (n - 1) // 2
    csum = np.zeros(m + 1)
    acc = 0.0
    for i in range(m):
        acc += a[i]
        csum[i + 1] = acc
    out = np.empty(m)
    for i in range(m):
        lo = max(i - half, 0)
        hi = min(i + half + 1, m)
        out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return out


def _nb_min_assign(alpha, lo, hi, vals):
    out = alpha.copy()
    for k in range(vals.shape[0]):
        v = vals[k]
        for j in range(lo[k], hi[k]):
            if v < out[j]:
                out[j] = v
    return out


def _nb_rrt_star(samples, sx, sy, cx, cy, r, width, height, step, radius):
    n_iter = samples.shape[0]
    nx = np.empty(n_iter + 1)
    ny = np.empty(n_iter + 1)
    parent = np.full(n_iter + 1, -1, dtype=np.int64)
    cost = np.zeros(n_iter + 1)
    near = np.empty(n_iter + 1, dtype=np.int64)
    edge = np.empty(n_iter + 1)
    free = np.empty(n_iter + 1, dtype=np.bool_)
    stack = np.empty(n_iter + 1, dtype=np.int64)
    nx[0] = sx
    ny[0] = sy
    n = 1
    rad2 = radius * radius
    for it in range(n_iter):
        qx = samples[it, 0]
        qy = samples[it, 1]
        near_i = 0
        bd = np.inf
        for j in range(n):
            dx = nx[j] - qx
            dy = ny[j] - qy
            d2 = dx * dx + dy * dy
            if d2 < bd:
                bd = d2
                near_i = j
        d = math.sqrt(bd)
        if d == 0.0:
            continue
        if d > step:
            f = step / d
            qx = nx[near_i] + (qx - nx[near_i]) * f
            qy = ny[near_i] + (qy - ny[near_i]) * f
        if not _point_free_scalar(qx, qy, cx, cy, r, width, height):
            continue
        if not _segment_free_scalar(nx[near_i], ny[near_i], qx, qy, cx, cy, r, width, height):
            continue
        n_near = 0
        for j in range(n):
            dx = nx[j] - qx
            dy = ny[j] - qy
            d2 = dx * dx + dy * dy
            if d2 <= rad2:
                near[n_near] = j
                edge[n_near] = math.sqrt(d2)
                free[n_near] = _segment_free_scalar(nx[j], ny[j], qx, qy, cx, cy, r, width, height)
                n_near += 1
        ddx = nx[near_i] - qx
        ddy = ny[near_i] - qy
        best = near_i
        best_c = cost[near_i] + math.sqrt(ddx * ddx + ddy * ddy)
        m = np.inf
        m_idx = -1
        for a in range(n_near):
            if free[a]:
                c = cost[near[a]] + edge[a]
                if c < m:
                    m = c
                    m_idx = near[a]
        if m < best_c:
            best = m_idx
            best_c = m
        k = n
        nx[k] = qx
        ny[k] = qy
        parent[k] = best
        cost[k] = best_c
        n += 1
        for a in range(n_near):
            j = near[a]
            if j == best or not free[a]:
                continue
            c = best_c + edge[a]
            if c < cost[j]:
                parent[j] = k
                cost[j] = c
                top = 0
                stack[top] = j
                top += 1
                while top > 0:
                    top -= 1
                    q = stack[top]
                    for ch in range(n):
                        if parent[ch] == q:
                            ex = nx[ch] - nx[q]
                            ey = ny[ch] - ny[q]
                            cost[ch] = cost[q] + math.sqrt(ex * ex + ey * ey)
                            stack[top] = ch
                            top += 1
    return nx[:n].copy(), ny[:n].copy(), parent[:n].copy(), cost[:n].copy()


numpy_impl = SimpleNamespace(
    name="numpy",
    points_free=_np_points_free,
    segments_free=_np_segments_free,
    windowed_argmin=_np_windowed_argmin,
    moving_average=_np_moving_average,
    min_assign=_np_min_assign,
    rrt_star=_np_rrt_star,
)

if HAVE_NUMBA:
    _jit = numba.njit(cache=True)
    _point_free_scalar = _jit(_nb_point_free)
    _segment_free_scalar = _jit(_nb_segment_free)
    numba_impl = SimpleNamespace(
        name="numba",
        points_free=_jit(_nb_points_free),
        segments_free=_jit(_nb_segments_free),
        windowed_argmin=_jit(_nb_windowed_argmin),
        moving_average=_jit(_nb_moving_average),
        min_assign=_jit(_nb_min_assign),
        rrt_star=_jit(_nb_rrt_star),
    )
else:  # pragma: no cover
    numba_impl = None


def _select():
    choice = os.environ.get("REACHSCALE_BACKEND", "").strip().lower()
    if choice == "numpy":
        return numpy_impl
    if choice == "numba":
        if numba_impl is None:
            raise ImportError("REACHSCALE_BACKEND=numba but numba is not installed")
        return numba_impl
    if choice not in ("", "auto"):
        raise ValueError(f"unknown REACHSCALE_BACKEND {choice!r}")
    return numba_impl if numba_impl is not None else numpy_impl


backend = _select()


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def points_free(px, py, cx, cy, r, width, height, impl=None):
    impl = impl or backend
    return impl.points_free(_as_f64(px), _as_f64(py), _as_f64(cx), _as_f64(cy),
                            _as_f64(r), float(width), float(height))


def segments_free(ax, ay, bx, by, cx, cy, r, width, height, impl=None):
    impl = impl or backend
    return impl.segments_free(_as_f64(ax), _as_f64(ay), _as_f64(bx), _as_f64(by),
                              _as_f64(cx), _as_f64(cy), _as_f64(r),
                              float(width), float(height))


def windowed_argmin(px, py, lo, hi, x, y, impl=None):
    impl = impl or backend
    return int(impl.windowed_argmin(px, py, int(lo), int(hi), float(x), float(y)))


def moving_average(a, n, impl=None):
    impl = impl or backend
    return impl.moving_average(_as_f64(a), int(n))


def min_assign(alpha, lo, hi, vals, impl=None):
    impl = impl or backend
    return impl.min_assign(_as_f64(alpha), np.ascontiguousarray(lo, dtype=np.int64),
                           np.ascontiguousarray(hi, dtype=np.int64), _as_f64(vals))


def rrt_star(samples, start, cx, cy, r, width, height, step, radius, impl=None):
    """Grow an RRT* tree over pre-drawn samples.

    Returns node x, node y, parent index (-1 for the root) and cost-to-come.
    """
    impl = impl or backend
    return impl.rrt_star(_as_f64(samples), float(start[0]), float(start[1]),
                         _as_f64(cx), _as_f64(cy), _as_f64(r), float(width),
                         float(height), float(step), float(radius))
