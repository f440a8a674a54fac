"""Offline reachability-aware time scaling of a reference path.

A nominal closed-loop run (alpha = 1, no freeze, no disturbance realization)
logs the one-step margin at every sample.  Each violating sample slows the
reference around its look-ahead arc length by the square-root ratio of
available to required acceleration; overlapping slowdowns keep the smallest
value.  The profile is then smoothed and floored at alpha_min.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._io import write_csv
from .simulator import REACHED, SimConfig, run_trial


class BaselineDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class BaselineLog:
    index: np.ndarray
    tau_c: np.ndarray
    delta: np.ndarray
    u_req: np.ndarray
    s_la_arclen: np.ndarray
    tau_dot: np.ndarray
    a_avail: float

    def __len__(self):
        return len(self.index)

    @property
    def n_violations(self):
        return int(np.count_nonzero(self.delta > 0))


@dataclass(frozen=True)
class ScalingProfile:
    tau: np.ndarray
    alpha: np.ndarray
    alpha_min: float = 0.1
    w_n: float = 0.02
    n_smooth: int = 201

    def __post_init__(self):
        if len(self.tau) != len(self.alpha):
            raise ValueError("profile and grid lengths differ")
        if not 0 < self.alpha_min <= 1:
            raise ValueError("alpha_min must lie in (0, 1]")

    def alpha_at(self, tau):
        """Piecewise-constant lookup: value of the grid cell containing tau."""
        i = int(np.searchsorted(self.tau, tau, side="right")) - 1
        return float(self.alpha[min(max(i, 0), len(self.alpha) - 1)])

    def to_csv(self, fh, meta=None):
        write_csv(fh, ("tau", "alpha"), zip(self.tau, self.alpha), meta)

    @classmethod
    def unit(cls, g, alpha_min=0.1, w_n=0.02, n_smooth=201):
        return cls(g.tau, np.ones(len(g.tau)), alpha_min, w_n, n_smooth)


def record_baseline(g, cfg, sim=None, profile=None, w=None):
    """Run the disturbance-free, freeze-free tracker and log the margin signal.

    ``profile`` None gives the nominal alpha = 1 run; passing a profile
    re-records on a scaled reference.
    """
    sim = sim or SimConfig()
    sim = replace(sim, eps_p=0.0, eps_v=0.0, freeze_duration=0.0)
    res = run_trial(w, g, profile, cfg, sim)
    if res.status != REACHED:
        raise BaselineDiverged(f"baseline run did not reach the goal in {sim.max_steps} steps")
    return BaselineLog(
        index=np.arange(len(res)), tau_c=res.tau_c, delta=res.delta, u_req=res.u_req,
        s_la_arclen=res.s_la_arclen, tau_dot=res.tau_dot, a_avail=cfg.a_avail)


def sqrt_ratio_update(alpha_i, u_req, a_avail):
    """Scale that brings u_req down to a_avail under the quadratic law."""
    return alpha_i * math.sqrt(a_avail / u_req)


def apply_local_updates(log, g, profile_init, a_avail=None):
    """Min-assign the square-root-ratio slowdown over arc-length neighborhoods.

    Every sample with delta > 0 lowers alpha at all grid points whose arc
    length is within w_n of the sample's look-ahead arc length.
    """
    a_avail = log.a_avail if a_avail is None else a_avail
    if not a_avail > 0:
        raise ValueError("a_avail must be positive")
    bad = np.nonzero(log.delta > 0)[0]
    vals = np.array([sqrt_ratio_update(log.tau_dot[i], log.u_req[i], a_avail) for i in bad])
    s = log.s_la_arclen[bad]
    lo = np.searchsorted(g.arclen, s - profile_init.w_n, side="left")
    hi = np.searchsorted(g.arclen, s + profile_init.w_n, side="right")
    alpha = _kernels.min_assign(profile_init.alpha, lo, hi, vals)
    alpha = np.maximum(alpha, profile_init.alpha_min)
    return replace(profile_init, alpha=alpha)


def smooth_profile(p):
    """Centered moving average of length n_smooth, window truncated at the ends."""
    if p.n_smooth < 1 or p.n_smooth % 2 == 0:
        raise ValueError("n_smooth must be a positive odd integer")
    alpha = _kernels.moving_average(p.alpha, p.n_smooth)
    return replace(p, alpha=np.clip(alpha, p.alpha_min, 1.0))


def scaled_reference(g, p):
    """Per-grid reference velocity alpha_j * p'_ref(tau_j)."""
    return p.alpha[:, None] * g.dp


def profile_stats(p):
    a = np.asarray(p.alpha)
    return {
        "min_alpha": float(a.min()),
        "mean_alpha": float(a.mean()),
        "modified_pct": 100.0 * np.count_nonzero(a < 1.0 - 1e-12) / len(a),
    }


def build_profile(g, cfg, sim=None, alpha_min=0.1, w_n=0.02, n_smooth=201, repeat=1, w=None):
    """Full offline procedure; returns (profile, nominal baseline log).

    ``repeat`` > 1 re-records on the current profile and applies further
    min-updates on top of it.
    """
    profile = ScalingProfile.unit(g, alpha_min, w_n, n_smooth)
    first = None
    current = None
    for _ in range(max(1, repeat)):
        log = record_baseline(g, cfg, sim, current, w)
        if first is None:
            first = log
        profile = smooth_profile(apply_local_updates(log, g, profile, cfg.a_avail))
        current = profile
    return profile, first
