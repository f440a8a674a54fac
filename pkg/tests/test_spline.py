import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reachscale.planner import WaypointPath
from reachscale.spline import (CircleArc, IrregularSpline, SplineCollision, SplineRef,
                               arclen_at, build_grid, chord_knots, fit_spline, tau_at_arclen)
from reachscale.workspace import CircleObstacle, Workspace
from reachscale._io import read_csv


class Parabola:
    """p(tau) = (tau, tau^2) with closed-form arc length."""
    tau_end = 1.0

    def eval(self, tau):
        t = np.asarray(tau, dtype=float)
        p = np.stack((t, t * t), axis=-1)
        dp = np.stack((np.ones_like(t), 2 * t), axis=-1)
        ddp = np.stack((np.zeros_like(t), 2 * np.ones_like(t)), axis=-1)
        return p, dp, ddp

    @staticmethod
    def length(t):
        return t * math.sqrt(1 + 4 * t * t) / 2 + math.asinh(2 * t) / 4


def natural_spline_oracle(x, y, xq):
    """Dense-solve natural cubic spline (second-derivative form), one axis."""
    n = len(x) - 1
    h = np.diff(x)
    A = np.zeros((n + 1, n + 1))
    b = np.zeros(n + 1)
    A[0, 0] = A[n, n] = 1.0
    for i in range(1, n):
        A[i, i - 1] = h[i - 1]
        A[i, i] = 2 * (h[i - 1] + h[i])
        A[i, i + 1] = h[i]
        b[i] = 6 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1])
    m = np.linalg.solve(A, b)
    i = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, n - 1)
    t0, t1 = xq - x[i], x[i + 1] - xq
    hi = h[i]
    return (m[i] * t1 ** 3 / (6 * hi) + m[i + 1] * t0 ** 3 / (6 * hi)
            + (y[i] / hi - m[i] * hi / 6) * t1 + (y[i + 1] / hi - m[i + 1] * hi / 6) * t0)


waypoint_lists = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=2, max_size=12)


def _distinct(pts):
    wp = np.array(pts, dtype=float)
    seg = np.hypot(*np.diff(wp, axis=0).T)
    return wp if np.all(seg > 1e-3) else None


def test_two_point_spline_is_linear(line_grid):
    ref = line_grid.ref
    p, dp, ddp = ref.eval(1.0)
    np.testing.assert_allclose(p, [0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(dp, [0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(ddp, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(ref.eval(0.0)[0], [0, 0], atol=0)
    np.testing.assert_allclose(ref.eval(2.0)[0], [1, 0], atol=1e-15)
    assert ref.tau_end == 2.0 and ref.knots[-1] == 2.0


def test_linear_grid_length_and_lookup(line_grid):
    assert abs(line_grid.total_length - 1.0) <= 1e-9
    assert abs(arclen_at(line_grid, 1.0) - 0.5) <= 1e-12
    assert tau_at_arclen(line_grid, 5.0) == line_grid.tau_end
    assert tau_at_arclen(line_grid, -1.0) == 0.0
    assert len(line_grid) == 150_000 and line_grid.tau[0] == 0.0


def test_collinear_waypoints_constant_speed():
    ref = fit_spline(WaypointPath([[0, 0], [0.5, 0.5], [1, 1]]), 2.0)
    _, dp, _ = ref.eval(np.linspace(0, 2, 5001))
    speed = np.hypot(dp[:, 0], dp[:, 1])
    assert np.ptp(speed) <= 1e-9


def test_eval_range_and_fit_errors(line_grid):
    with pytest.raises(ValueError):
        line_grid.ref.eval(2.0 + 1e-9)
    with pytest.raises(ValueError):
        line_grid.ref.eval(-1e-9)
    with pytest.raises(ValueError):
        line_grid.ref.eval_point(3.0)
    with pytest.raises(ValueError):
        fit_spline(WaypointPath([[0, 0], [0, 0], [1, 0]]))
    with pytest.raises(ValueError):
        fit_spline(WaypointPath([[0, 0]]))
    with pytest.raises(ValueError):
        fit_spline(WaypointPath([[0, 0], [1, 0]]), horizon=0.0)


def test_chord_knots():
    k = chord_knots([[0, 0], [3, 4], [3, 9]], 2.0)
    np.testing.assert_allclose(k, [0.0, 1.0, 2.0])


@pytest.mark.parametrize("R", [0.1, 0.25])
def test_quarter_circle_length(R):
    arc = CircleArc((0.25, 0.25), R, omega=math.pi / 4, tau_end=2.0)
    g = build_grid(arc, 150_000)
    assert abs(g.total_length - math.pi * R / 2) <= 1e-6
    # non-uniform speed along the same quarter circle
    arc2 = CircleArc((0.25, 0.25), R, omega=math.pi / 8, tau_end=2.0, accel=math.pi / 8)
    g2 = build_grid(arc2, 150_000)
    assert abs(g2.total_length - math.pi * R / 2) <= 1e-6


def test_trapezoid_convergence_order():
    errs = [abs(build_grid(Parabola(), M).total_length - Parabola.length(1.0))
            for M in (501, 1001, 2001, 4001)]
    ratios = [a / b for a, b in zip(errs[:-1], errs[1:])]
    for r in ratios:
        assert 3.5 < r < 4.5      # halving the step quarters the error


def test_arclength_matches_closed_form_at_interior_points():
    g = build_grid(Parabola(), 150_000)
    for t in (0.1, 0.37, 0.8):
        assert abs(arclen_at(g, t) - Parabola.length(t)) <= 1e-9


def _spline_from(seed, n=9):
    rng = np.random.default_rng(seed)
    wp = np.cumsum(rng.uniform(0.02, 0.08, (n, 2)) * rng.choice([-1, 1], (n, 2)), axis=0)
    return fit_spline(WaypointPath(wp), 2.0), wp


def test_roundtrip_within_two_grid_steps():
    ref, _ = _spline_from(1)
    g = build_grid(ref, 150_000)
    tau = np.random.default_rng(2).uniform(0, g.tau_end, 1000)
    back = tau_at_arclen(g, arclen_at(g, tau))
    assert np.max(np.abs(back - tau)) <= 2 * g.tau_end / 150_000


def test_matches_independent_natural_spline():
    ref, wp = _spline_from(5)
    tq = np.linspace(0, 2, 777)
    p, _, _ = ref.eval(tq)
    for ax in range(2):
        np.testing.assert_allclose(p[:, ax], natural_spline_oracle(ref.knots, wp[:, ax], tq),
                                   atol=1e-12)


def _knot_jumps(ref):
    k, c = ref.knots, ref.coeffs
    out = []
    for i in range(1, len(k) - 1):
        h = k[i] - k[i - 1]
        a, b, cc, d = c[:, i - 1]
        left = (((a * h + b) * h + cc) * h + d, (3 * a * h + 2 * b) * h + cc, 6 * a * h + 2 * b)
        a, b, cc, d = c[:, i]
        right = (d, cc, 2 * b)
        out.append([np.abs(l - r).max() for l, r in zip(left, right)])
    return np.array(out).reshape(-1, 3)


@given(waypoint_lists)
def test_interpolation_and_c2(pts):
    wp = _distinct(pts)
    if wp is None:
        return
    ref = fit_spline(WaypointPath(wp), 2.0)
    p, _, ddp = ref.eval(ref.knots)
    assert np.max(np.abs(p - wp)) <= 1e-10
    assert np.all(np.diff(ref.knots) > 0) and ref.knots[0] == 0 and ref.knots[-1] == 2.0
    if len(wp) > 2:
        jumps = _knot_jumps(ref)
        scale = max(1.0, float(np.abs(ref.eval(np.linspace(0, 2, 2001))[2]).max()))
        assert jumps[:, 0].max() <= 1e-10
        assert jumps[:, 1].max() <= 1e-8 * max(1.0, float(np.abs(ref.coeffs[2]).max()))
        assert jumps[:, 2].max() <= 1e-8 * scale
    np.testing.assert_allclose(ddp[[0, -1]], 0.0, atol=1e-9)   # natural ends


def test_eval_point_matches_eval():
    ref, _ = _spline_from(3)
    for t in np.linspace(0, 2, 37):
        (px, py), (dx, dy) = ref.eval_point(float(t))
        p, dp, _ = ref.eval(float(t))
        np.testing.assert_allclose([px, py, dx, dy], [*p, *dp], rtol=0, atol=1e-15)


def test_grid_invariants():
    ref, _ = _spline_from(7)
    g = build_grid(ref, 20_000)
    assert g.arclen[0] == 0.0 and np.all(np.diff(g.arclen) > 0)
    assert np.all(np.diff(g.tau) > 0)
    assert not g.arclen.flags.writeable


def test_grid_collision_and_irregular():
    ref = fit_spline(WaypointPath([[0.05, 0.05], [0.45, 0.45]]), 2.0)
    w = Workspace(0.5, 0.5, [CircleObstacle((0.25, 0.25), 0.05)])
    with pytest.raises(SplineCollision) as e:
        build_grid(ref, 1000, w)
    assert 0.0 < e.value.tau < 2.0
    stall = SplineRef(np.array([0.0, 1.0]), np.zeros((4, 1, 2)), 1.0)
    with pytest.raises(IrregularSpline):
        build_grid(stall, 100)


def test_grid_csv(line_grid):
    g = build_grid(line_grid.ref, 11)
    buf = io.StringIO()
    g.to_csv(buf, {"seed": 1})
    lines = buf.getvalue().splitlines()
    assert lines[1] == "tau,px,py,dpx,dpy,ddpx,ddpy,arclen"
    assert len(lines) == 13
    vals = [float(v) for v in lines[2 + 4].split(",")]
    assert vals[0] == g.tau[4] and vals[-1] == g.arclen[4]
