"""Look-ahead geometry, one-step reachability margin and the two-branch control law."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .spline import arclen_at, tau_at_arclen

FEASIBLE = "feasible"
QP = "qp"


@dataclass(frozen=True)
class TrackerConfig:
    t_s: float = 0.0125
    v_max: float = 1.0
    a_max: float = 2.5
    eps_p: float = 0.00125
    eps_v: float = 0.1
    # velocity-error weight of the QP branch; it carries units of s^2, so the
    # defaults sit at the t_s^2 scale where position and velocity terms compete
    c0: float = 3e-4
    c_min: float = 1e-6
    c_max: float = 1e-2
    search_window: int = 2000

    def __post_init__(self):
        if not self.t_s > 0:
            raise ValueError("t_s must be positive")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if self.eps_p < 0 or self.eps_v < 0:
            raise ValueError("disturbance bounds must be non-negative")
        if not self.a_max > self.sigma:
            raise ValueError(f"a_max={self.a_max} leaves no acceleration above "
                             f"the disturbance offset sigma={self.sigma}")
        if not 0 < self.c_min <= self.c_max:
            raise ValueError("need 0 < c_min <= c_max")
        if self.search_window < 1:
            raise ValueError("search_window must be >= 1")

    @property
    def sigma(self):
        return disturbance_offset(self.eps_p, self.eps_v, self.t_s)

    @property
    def a_avail(self):
        return self.a_max - self.sigma


@dataclass
class TrackerState:
    p: np.ndarray
    v: np.ndarray
    tau_clock: float = 0.0
    closest_hint: int = None   # None requests a global closest-point search
    c_k: float = 0.0


@dataclass(frozen=True)
class StepDiagnostics:
    tau_c: float
    index: int
    tau_dot: float
    tau_la: float
    p_la: np.ndarray
    s_la: float
    u_req: float
    delta: float
    mismatch: np.ndarray
    v_ref: np.ndarray
    u_star: np.ndarray
    u_applied: np.ndarray
    clipped: bool
    branch: str
    c_k: float = field(default=0.0)


def closest_point(g, p, hint=None, window=None):
    """Grid sample nearest to ``p``; returns (tau_c, index).

    With a ``hint`` the search is restricted to ``hint +- window`` grid
    points; without one (or window=None) the whole grid is searched.  Ties go
    to the smaller index.
    """
    m = len(g.tau)
    if hint is None or window is None:
        lo, hi = 0, m
    else:
        lo, hi = max(0, hint - window), min(m, hint + window + 1)
    j = _kernels.windowed_argmin(g.p[:, 0], g.p[:, 1], lo, hi, p[0], p[1])
    return float(g.tau[j]), j


def _lookahead(g, tau_c, tau_dot, cfg):
    _, dp_c = g.ref.eval_point(tau_c)
    v_la = min(cfg.v_max, tau_dot * math.hypot(dp_c[0], dp_c[1]))
    s_la = v_la * cfg.t_s
    tau_la = min(g.tau_end, float(tau_at_arclen(g, arclen_at(g, tau_c) + s_la)))
    p_la, dp_la = g.ref.eval_point(tau_la)
    return tau_la, np.array(p_la), s_la, np.array(dp_la)


def lookahead(g, tau_c, tau_dot, cfg):
    """Advance one step of look-ahead arc length from ``tau_c``.

    Returns (tau_la, p_la, s_la).
    """
    tau_la, p_la, s_la, _ = _lookahead(g, tau_c, tau_dot, cfg)
    return tau_la, p_la, s_la


def required_accel(p, v, p_la, t_s):
    """Residual r = p_la - p - t_s v and the one-step acceleration 2|r|/t_s^2."""
    r = np.asarray(p_la, dtype=float) - np.asarray(p, dtype=float) - t_s * np.asarray(v, dtype=float)
    return r, 2.0 / (t_s * t_s) * math.hypot(r[0], r[1])


def disturbance_offset(eps_p, eps_v, t_s):
    if eps_p < 0 or eps_v < 0:
        raise ValueError("disturbance bounds must be non-negative")
    return 2.0 * eps_p / t_s + eps_v


def margin(u_req, a_max, sigma):
    """delta = u_req - (a_max - sigma); non-positive means one-step feasible."""
    return u_req - (a_max - sigma)


def adaptive_weight(delta, cfg):
    """Velocity weight growing with the margin violation, clamped to [c_min, c_max]."""
    c = cfg.c0 * max(delta, 0.0) / cfg.a_avail
    return min(max(c, cfg.c_min), cfg.c_max)


def feasible_control(e_p, t_s):
    return 2.0 / (t_s * t_s) * np.asarray(e_p, dtype=float)


def qp_control(e_p, e_v, c_k, t_s):
    """Closed-form minimizer over u of
    0.5 |e_p - 0.5 t_s^2 u|^2 + 0.5 C |e_v - t_s u|^2."""
    return ((np.asarray(e_p, dtype=float) + (2.0 * c_k / t_s) * np.asarray(e_v, dtype=float))
            / (0.5 * t_s * t_s + 2.0 * c_k))


def clip_command(u_star, v, cfg):
    """Scale to |u| <= a_max, then shrink along u so |v + t_s u| <= v_max.

    If the current speed already exceeds v_max so that no scaling of u helps,
    the command brakes straight back toward the speed limit instead.
    """
    u = np.array(u_star, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = math.hypot(u[0], u[1])
    if nu > cfg.a_max:
        u *= cfg.a_max / nu
    nxt = v + cfg.t_s * u
    vmax2 = cfg.v_max * cfg.v_max
    if nxt[0] * nxt[0] + nxt[1] * nxt[1] <= vmax2:
        return u
    w = cfg.t_s * u
    a = w[0] * w[0] + w[1] * w[1]
    b = 2.0 * (v[0] * w[0] + v[1] * w[1])
    c = v[0] * v[0] + v[1] * v[1] - vmax2
    if c <= 0.0:
        # largest beta in [0, 1] with a beta^2 + b beta + c <= 0
        root = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
        beta = -2.0 * c / (b + root) if b >= 0.0 else (-b + root) / (2.0 * a)
        beta = min(max(beta, 0.0), 1.0)
        return beta * u
    speed = math.hypot(v[0], v[1])
    brake = -(1.0 - cfg.v_max / speed) * v / cfg.t_s
    nb = math.hypot(brake[0], brake[1])
    if nb > cfg.a_max:
        brake *= cfg.a_max / nb
    return brake


def chord_tangent_mismatch(p, v, p_la, v_ref, t_s):
    return (2.0 * (np.asarray(p_la, dtype=float) - np.asarray(p, dtype=float))
            - t_s * (np.asarray(v, dtype=float) + np.asarray(v_ref, dtype=float)))


def control_step(state, g, profile, cfg):
    """One controller update; returns (u, StepDiagnostics).

    ``profile`` supplies ``alpha_at(tau)``; None means alpha = 1 everywhere.
    The state is not modified.
    """
    p, v = state.p, state.v
    tau_c, idx = closest_point(g, p, state.closest_hint, cfg.search_window)
    tau_dot = 1.0 if profile is None else profile.alpha_at(state.tau_clock)
    tau_la, p_la, s_la, dp_la = _lookahead(g, tau_c, tau_dot, cfg)
    r, u_req = required_accel(p, v, p_la, cfg.t_s)
    delta = margin(u_req, cfg.a_max, cfg.sigma)
    # the reference is parked at the goal once the look-ahead clamps at tau_end
    v_ref = np.zeros(2) if tau_la >= g.tau_end else tau_dot * dp_la
    e_p = r
    if delta <= 0.0:
        u_star = feasible_control(e_p, cfg.t_s)
        branch = FEASIBLE
        c_k = state.c_k
    else:
        c_k = adaptive_weight(delta, cfg)
        u_star = qp_control(e_p, v_ref - v, c_k, cfg.t_s)
        branch = QP
    u = clip_command(u_star, v, cfg)
    diag = StepDiagnostics(
        tau_c=tau_c, index=idx, tau_dot=tau_dot, tau_la=tau_la, p_la=p_la, s_la=s_la,
        u_req=u_req, delta=delta,
        mismatch=chord_tangent_mismatch(p, v, p_la, v_ref, cfg.t_s),
        v_ref=v_ref, u_star=u_star, u_applied=u,
        clipped=not np.array_equal(u, u_star), branch=branch, c_k=c_k)
    return u, diag
