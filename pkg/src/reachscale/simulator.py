"""Closed-loop trials of the sampled double integrator with freeze-resume."""
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import tracker as trk
from ._io import write_csv

REACHED = "reached"
TIMEOUT = "timeout"
FROZEN = "frozen"


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    max_steps: int = 3200
    goal_tol: float = 0.005
    freeze_start: float = 0.8
    freeze_duration: float = 0.5
    eps_p: float = 0.00125
    eps_v: float = 0.1

    def __post_init__(self):
        if self.freeze_start < 0 or self.freeze_duration < 0:
            raise ValueError("freeze_start and freeze_duration must be non-negative")
        if not self.goal_tol > 0:
            raise ValueError("goal_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.eps_p < 0 or self.eps_v < 0:
            raise ValueError("disturbance bounds must be non-negative")

    def freeze_window(self, t_s):
        """Sample indices [k_f, k_r) that are frozen."""
        k_f = int(round(self.freeze_start / t_s))
        return k_f, k_f + int(round(self.freeze_duration / t_s))


def step_dynamics(p, v, u, n_p, n_v, t_s):
    """Forward-Euler update of the disturbed double integrator."""
    a = u + n_v
    v_next = v + a * t_s
    p_next = p + (v + n_p) * t_s + 0.5 * a * (t_s * t_s)
    return p_next, v_next


def sample_disturbance(rng, eps_p, eps_v):
    """Uniform draws on the discs of radius eps_p and eps_v.

    Four uniforms are consumed per call regardless of the bounds, so runs with
    different bounds share the same random stream.
    """
    a_p, r_p, a_v, r_v = rng.random(4)
    rp = eps_p * math.sqrt(r_p)
    rv = eps_v * math.sqrt(r_v)
    th_p = 2.0 * math.pi * a_p
    th_v = 2.0 * math.pi * a_v
    return (np.array([rp * math.cos(th_p), rp * math.sin(th_p)]),
            np.array([rv * math.cos(th_v), rv * math.sin(th_v)]))


def advance_tau(tau, alpha, t_s, tau_end):
    return min(tau_end, tau + alpha * t_s)


@dataclass
class TrialResult:
    t_s: float
    tau_end: float
    goal: np.ndarray
    goal_tol: float
    time: np.ndarray
    p: np.ndarray
    v: np.ndarray
    u: np.ndarray
    frozen: np.ndarray
    tau_clock: np.ndarray
    tau_c: np.ndarray
    tau_la: np.ndarray
    s_la_arclen: np.ndarray
    u_req: np.ndarray
    delta: np.ndarray
    mismatch: np.ndarray
    tau_dot: np.ndarray
    branch: list
    clipped: np.ndarray
    status: str
    p_final: np.ndarray
    v_final: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.time)

    CSV_COLUMNS = ("k", "t", "frozen", "px", "py", "vx", "vy", "ux", "uy", "tau_clock",
                   "tau_c", "tau_la", "u_req", "delta", "branch", "clipped")

    def rows(self):
        for k in range(len(self)):
            yield (k, self.time[k], bool(self.frozen[k]), self.p[k, 0], self.p[k, 1],
                   self.v[k, 0], self.v[k, 1], self.u[k, 0], self.u[k, 1],
                   self.tau_clock[k], self.tau_c[k], self.tau_la[k], self.u_req[k],
                   self.delta[k], self.branch[k], bool(self.clipped[k]))

    def to_csv(self, fh, meta=None):
        write_csv(fh, self.CSV_COLUMNS, self.rows(), meta)


def run_trial(w, g, profile, tcfg, scfg):
    """Simulate one trial from the start of the reference.

    Frozen samples hold position with zero velocity and command while the
    path clock keeps advancing.  The run stops once the clock has reached
    tau_end and the robot is within goal_tol of the goal, or after max_steps.
    """
    t_s = tcfg.t_s
    tau_end = g.tau_end
    goal = np.array(w.goal if w is not None else g.p[-1], dtype=float)
    start = np.array(w.start if w is not None else g.p[0], dtype=float)
    rng = np.random.default_rng([int(scfg.seed), 2])
    k_f, k_r = scfg.freeze_window(t_s)

    state = trk.TrackerState(p=start.copy(), v=np.zeros(2))
    rec = {k: [] for k in ("p", "v", "u", "frozen", "tau_clock", "tau_c", "tau_la", "s_la",
                           "u_req", "delta", "mismatch", "tau_dot", "branch", "clipped")}
    nan2 = np.full(2, np.nan)
    status = TIMEOUT
    freeze_p = None
    for k in range(scfg.max_steps):
        if state.tau_clock >= tau_end and math.dist(state.p, goal) <= scfg.goal_tol:
            status = REACHED
            break
        alpha = 1.0 if profile is None else profile.alpha_at(state.tau_clock)
        if k_f <= k < k_r:
            if freeze_p is None:
                freeze_p = state.p.copy()
            state.p = freeze_p.copy()
            state.v = np.zeros(2)
            rec["p"].append(state.p.copy())
            rec["v"].append(state.v.copy())
            rec["u"].append(np.zeros(2))
            rec["frozen"].append(True)
            rec["tau_clock"].append(state.tau_clock)
            for key in ("tau_c", "tau_la", "s_la", "u_req", "delta"):
                rec[key].append(np.nan)
            rec["mismatch"].append(nan2)
            rec["tau_dot"].append(alpha)
            rec["branch"].append(FROZEN)
            rec["clipped"].append(False)
            state.closest_hint = None
            state.tau_clock = advance_tau(state.tau_clock, alpha, t_s, tau_end)
            continue

        u, diag = trk.control_step(state, g, profile, tcfg)
        rec["p"].append(state.p.copy())
        rec["v"].append(state.v.copy())
        rec["u"].append(u)
        rec["frozen"].append(False)
        rec["tau_clock"].append(state.tau_clock)
        rec["tau_c"].append(diag.tau_c)
        rec["tau_la"].append(diag.tau_la)
        rec["s_la"].append(float(np.interp(diag.tau_la, g.tau, g.arclen)))
        rec["u_req"].append(diag.u_req)
        rec["delta"].append(diag.delta)
        rec["mismatch"].append(diag.mismatch)
        rec["tau_dot"].append(diag.tau_dot)
        rec["branch"].append(diag.branch)
        rec["clipped"].append(diag.clipped)

        n_p, n_v = sample_disturbance(rng, scfg.eps_p, scfg.eps_v)
        state.p, state.v = step_dynamics(state.p, state.v, u, n_p, n_v, t_s)
        state.closest_hint = diag.index
        state.c_k = diag.c_k
        state.tau_clock = advance_tau(state.tau_clock, alpha, t_s, tau_end)
    else:
        if state.tau_clock >= tau_end and math.dist(state.p, goal) <= scfg.goal_tol:
            status = REACHED

    n = len(rec["frozen"])

    def arr(key, shape=()):
        a = np.array(rec[key], dtype=float)
        return a.reshape((n,) + shape)

    return TrialResult(
        t_s=t_s, tau_end=tau_end, goal=goal, goal_tol=scfg.goal_tol,
        time=np.arange(n) * t_s,
        p=arr("p", (2,)), v=arr("v", (2,)), u=arr("u", (2,)),
        frozen=np.array(rec["frozen"], dtype=bool),
        tau_clock=arr("tau_clock"), tau_c=arr("tau_c"), tau_la=arr("tau_la"),
        s_la_arclen=arr("s_la"), u_req=arr("u_req"), delta=arr("delta"),
        mismatch=arr("mismatch", (2,)), tau_dot=arr("tau_dot"),
        branch=list(rec["branch"]), clipped=np.array(rec["clipped"], dtype=bool),
        status=status, p_final=state.p.copy(), v_final=state.v.copy(),
        meta={"sim": asdict(scfg), "tracker": asdict(tcfg)},
    )
