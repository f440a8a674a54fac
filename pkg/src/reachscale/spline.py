"""C2 cubic reference spline, dense evaluation grid, and arc-length tables."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels


class SplineCollision(RuntimeError):
    """A sample of the fitted spline lies outside free space."""

    def __init__(self, msg, tau=None):
        super().__init__(msg)
        self.tau = tau


class IrregularSpline(RuntimeError):
    """The fitted spline has a vanishing tangent somewhere on the grid."""


@dataclass(frozen=True)
class SplineRef:
    """Piecewise cubic p(tau) with per-interval local coefficients.

    ``coeffs`` has shape (4, n_intervals, 2); on interval i,
    p(tau) = sum_m coeffs[m, i] * (tau - knots[i]) ** (3 - m).
    """
    knots: np.ndarray
    coeffs: np.ndarray
    tau_end: float

    @property
    def coeffs_x(self):
        return self.coeffs[:, :, 0]

    @property
    def coeffs_y(self):
        return self.coeffs[:, :, 1]

    def _interval(self, tau):
        i = np.searchsorted(self.knots, tau, side="right") - 1
        return np.clip(i, 0, len(self.knots) - 2)

    def eval(self, tau):
        """Position, first and second tau-derivatives at ``tau``.

        Scalar input gives (2,) arrays; array input gives (n, 2) arrays.
        """
        t = np.asarray(tau, dtype=float)
        if np.any(t < 0.0) or np.any(t > self.tau_end):
            raise ValueError(f"tau outside [0, {self.tau_end}]")
        i = self._interval(t)
        h = (t - self.knots[i])[..., None]
        a, b, c, d = (self.coeffs[m, i] for m in range(4))
        p = ((a * h + b) * h + c) * h + d
        dp = (3.0 * a * h + 2.0 * b) * h + c
        ddp = 6.0 * a * h + 2.0 * b
        return p, dp, ddp

    def eval_point(self, tau):
        """Scalar fast path: (p, dp) as tuples of floats."""
        if tau < 0.0 or tau > self.tau_end:
            raise ValueError(f"tau outside [0, {self.tau_end}]")
        i = int(self._interval(tau))
        h = tau - self.knots[i]
        a, b, c, d = self.coeffs[:, i, 0]
        px = ((a * h + b) * h + c) * h + d
        dpx = (3.0 * a * h + 2.0 * b) * h + c
        a, b, c, d = self.coeffs[:, i, 1]
        py = ((a * h + b) * h + c) * h + d
        dpy = (3.0 * a * h + 2.0 * b) * h + c
        return (px, py), (dpx, dpy)


def chord_knots(waypoints, horizon):
    wp = np.asarray(waypoints, dtype=float)
    seg = np.hypot(*np.diff(wp, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    knots = horizon * s / s[-1]
    knots[-1] = horizon
    return knots


def fit_spline(path, horizon=2.0, bc_type="natural"):
    """Interpolating cubic spline through the waypoints.

    Knots follow cumulative chord length, scaled so the last knot equals
    ``horizon``.  ``bc_type`` is passed to scipy (default natural).
    """
    wp = np.asarray(getattr(path, "waypoints", path), dtype=float)
    if len(wp) < 2:
        raise ValueError("need at least two waypoints")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    knots = chord_knots(wp, horizon)
    if np.any(np.diff(knots) <= 0):
        raise ValueError("duplicate knots; dedupe the waypoint path first")
    cs = CubicSpline(knots, wp, bc_type=bc_type, axis=0)
    return SplineRef(knots, np.array(cs.c), float(horizon))


@dataclass(frozen=True)
class CircleArc:
    """Analytic reference on a circle, angle(tau) = theta0 + omega*tau + 0.5*accel*tau^2.

    Used as an exact oracle for the grid, arc-length and look-ahead code.
    """
    center: tuple
    radius: float
    omega: float
    tau_end: float
    theta0: float = 0.0
    accel: float = 0.0

    def _angle(self, t):
        return (self.theta0 + self.omega * t + 0.5 * self.accel * t * t,
                self.omega + self.accel * t)

    def eval(self, tau):
        t = np.asarray(tau, dtype=float)
        th, w = self._angle(t)
        c, s = np.cos(th)[..., None], np.sin(th)[..., None]
        w = np.asarray(w)[..., None]
        R = self.radius
        u = np.concatenate((c, s), axis=-1)
        n = np.concatenate((-s, c), axis=-1)
        p = np.asarray(self.center) + R * u
        dp = R * w * n
        ddp = -R * w * w * u + R * self.accel * n
        return p, dp, ddp

    def eval_point(self, tau):
        th, w = self._angle(tau)
        c, s = math.cos(th), math.sin(th)
        R = self.radius
        return ((self.center[0] + R * c, self.center[1] + R * s),
                (-R * w * s, R * w * c))

    def arc_length(self, tau):
        th, _ = self._angle(tau)
        return self.radius * abs(th - self.theta0)


@dataclass(frozen=True)
class PathGrid:
    """Dense uniform-in-tau samples of a reference with its arc-length table."""
    tau: np.ndarray
    p: np.ndarray
    dp: np.ndarray
    ddp: np.ndarray
    arclen: np.ndarray
    ref: object

    @property
    def tau_end(self):
        return float(self.tau[-1])

    @property
    def total_length(self):
        return float(self.arclen[-1])

    @property
    def dtau(self):
        return float(self.tau[1] - self.tau[0])

    def __len__(self):
        return len(self.tau)

    def to_csv(self, fh, meta=None):
        from ._io import write_csv
        cols = ["tau", "px", "py", "dpx", "dpy", "ddpx", "ddpy", "arclen"]
        data = np.column_stack((self.tau, self.p, self.dp, self.ddp, self.arclen))
        write_csv(fh, cols, data, meta)


def build_grid(ref, M=150_000, w=None, inflation=0.0):
    """Sample ``ref`` on M uniform tau points and integrate arc length.

    With a workspace ``w``, every sample must be free or SplineCollision is
    raised.  A zero tangent anywhere raises IrregularSpline.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    tau = np.linspace(0.0, ref.tau_end, M)
    p, dp, ddp = ref.eval(tau)
    speed = np.hypot(dp[:, 0], dp[:, 1])
    if not np.all(speed > 0):
        raise IrregularSpline(f"tangent vanishes at tau={tau[np.argmin(speed)]:.6g}")
    arclen = np.empty(M)
    arclen[0] = 0.0
    np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(tau), out=arclen[1:])
    if w is not None:
        cx, cy, r = w.circles(inflation)
        free = _kernels.points_free(p[:, 0], p[:, 1], cx, cy, r, w.width, w.height)
        if not np.all(free):
            bad = int(np.argmin(free))
            raise SplineCollision(f"spline sample at tau={tau[bad]:.6g}, p={p[bad]} is not free",
                                  float(tau[bad]))
    for a in (tau, p, dp, ddp, arclen):
        a.setflags(write=False)
    return PathGrid(tau, p, dp, ddp, arclen, ref)


def arclen_at(g, tau):
    """S(tau) by linear interpolation on the grid table; tau is clamped."""
    return np.interp(tau, g.tau, g.arclen)


def tau_at_arclen(g, s):
    """Inverse of the interpolated arc-length table; s is clamped to [0, L]."""
    return np.interp(s, g.arclen, g.tau)
