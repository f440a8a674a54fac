"""Flat run configuration (JSON) covering every stage of the pipeline."""
import json
from dataclasses import asdict, dataclass, field, fields, replace

from .planner import RrtParams
from .simulator import SimConfig
from .tracker import TrackerConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # sampling and limits
    t_s: float = 0.0125
    horizon: float = 2.0
    v_max: float = 1.0
    a_max: float = 2.5
    # workspace
    width: float = 0.5
    height: float = 0.5
    start: tuple = (0.05, 0.05)
    goal: tuple = (0.45, 0.45)
    n_obs: int = 30
    r_min: float = 0.025
    r_max: float = 0.045
    clearance: float = 0.05
    # planner
    max_iters: int = 5000
    step: float = 0.03
    goal_bias: float = 0.05
    rewire_radius: float = 0.09
    goal_tolerance: float = 0.02
    inflation_schedule: tuple = (0.01, 0.02, 0.03, 0.005, 0.0)
    dedupe_tol: float = 1e-9
    refine_passes: int = 4
    # spline grid and scaling
    M: int = 150_000
    alpha_min: float = 0.1
    w_n: float = 0.02
    n_smooth: int = 201
    repeat: int = 1
    # tracker
    c0: float = 3e-4
    c_min: float = 1e-6
    c_max: float = 1e-2
    search_window: int = 2000
    # disturbance, freeze, termination
    eps_p: float = 0.00125
    eps_v: float = 0.1
    freeze_start: float = 0.8
    freeze_duration: float = 0.5
    goal_tol: float = 0.005
    max_steps: int = 3200
    # batch
    trials: int = 50
    seed: int = 0
    workers: int = 1
    hist_bins: int = 20
    exclude_post_arrival: bool = True
    save_profiles: bool = False
    out_dir: str = field(default="out")

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(x) for x in self.start))
        object.__setattr__(self, "goal", tuple(float(x) for x in self.goal))
        object.__setattr__(self, "inflation_schedule",
                           tuple(float(x) for x in self.inflation_schedule))

    # stage configs ---------------------------------------------------------

    def tracker(self):
        return TrackerConfig(t_s=self.t_s, v_max=self.v_max, a_max=self.a_max,
                             eps_p=self.eps_p, eps_v=self.eps_v, c0=self.c0,
                             c_min=self.c_min, c_max=self.c_max,
                             search_window=self.search_window)

    def sim(self, seed):
        return SimConfig(seed=int(seed), max_steps=self.max_steps, goal_tol=self.goal_tol,
                         freeze_start=self.freeze_start, freeze_duration=self.freeze_duration,
                         eps_p=self.eps_p, eps_v=self.eps_v)

    def rrt(self, inflation):
        return RrtParams(max_iters=self.max_iters, step=self.step, goal_bias=self.goal_bias,
                         rewire_radius=self.rewire_radius,
                         goal_tolerance=self.goal_tolerance, inflation=inflation)

    def trial_seed(self, index):
        return int(self.seed) + int(index)

    # validation and (de)serialization ---------------------------------------

    def validate(self):
        """Check every stage's preconditions up front; raises ConfigError."""
        try:
            self.tracker()
            self.sim(self.seed)
            if not self.inflation_schedule:
                raise ValueError("inflation_schedule must not be empty")
            for infl in self.inflation_schedule:
                self.rrt(infl)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        checks = [
            (self.width > 0 and self.height > 0, "width and height must be positive"),
            (0 < self.r_min <= self.r_max, "need 0 < r_min <= r_max"),
            (self.clearance >= 0, "clearance must be non-negative"),
            (self.n_obs >= 0, "n_obs must be non-negative"),
            (all(0 <= c <= L for c, L in zip(self.start, (self.width, self.height))),
             "start outside the workspace"),
            (all(0 <= c <= L for c, L in zip(self.goal, (self.width, self.height))),
             "goal outside the workspace"),
            (self.horizon > 0, "horizon must be positive"),
            (self.M >= 2, "M must be >= 2"),
            (0 < self.alpha_min <= 1, "alpha_min must lie in (0, 1]"),
            (self.w_n >= 0, "w_n must be non-negative"),
            (self.n_smooth >= 1 and self.n_smooth % 2 == 1, "n_smooth must be a positive odd integer"),
            (self.repeat >= 1, "repeat must be >= 1"),
            (self.dedupe_tol >= 0, "dedupe_tol must be non-negative"),
            (self.refine_passes >= 0, "refine_passes must be non-negative"),
            (self.trials >= 1, "trials must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.hist_bins >= 1, "hist_bins must be >= 1"),
            (self.seed >= 0, "seed must be non-negative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def to_dict(self):
        d = asdict(self)
        for k in ("start", "goal", "inflation_schedule"):
            d[k] = list(d[k])
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**_coerce(d))
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(d)

    def override(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        known = {f.name for f in fields(self)}
        unknown = sorted(set(kw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return replace(self, **_coerce(kw))
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(d):
    out = {}
    for k, v in d.items():
        t = _TYPES.get(k)
        if t in ("int", int):
            if isinstance(v, float) and not v.is_integer():
                raise ConfigError(f"{k} must be an integer, got {v}")
            if isinstance(v, bool):
                raise ConfigError(f"{k} must be an integer, got {v}")
            v = int(v)
        elif t in ("float", float):
            if isinstance(v, bool):
                raise ConfigError(f"{k} must be a number, got {v}")
            v = float(v)
        elif t in ("bool", bool):
            if isinstance(v, str):
                if v.lower() not in ("true", "false", "1", "0"):
                    raise ConfigError(f"{k} must be a boolean, got {v}")
                v = v.lower() in ("true", "1")
            v = bool(v)
        elif t in ("str", str):
            v = str(v)
        out[k] = v
    return out


def parse_value(text):
    """CLI ``--set key=value`` helper: JSON literal if it parses, else raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text
