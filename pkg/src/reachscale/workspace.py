"""Planar rectangular workspace with circular obstacles."""
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels

START = (0.05, 0.05)
GOAL = (0.45, 0.45)
MAX_REJECTIONS = 10_000


class WorkspaceError(ValueError):
    """Raised when a workspace cannot be constructed (e.g. too crowded)."""


@dataclass(frozen=True)
class CircleObstacle:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"obstacle radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Workspace:
    width: float
    height: float
    obstacles: tuple = ()
    start: tuple = START
    goal: tuple = GOAL

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise WorkspaceError("workspace width and height must be positive")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))
        for ob in self.obstacles:
            cx, cy = ob.center
            if not (0.0 <= cx <= self.width and 0.0 <= cy <= self.height):
                raise WorkspaceError(f"obstacle center {ob.center} outside workspace")
        for name in ("start", "goal"):
            if not point_free(self, getattr(self, name)):
                raise WorkspaceError(f"{name} {getattr(self, name)} is not in free space")

    def circles(self, inflation=0.0):
        """Obstacle centers and radii as arrays, radii grown by ``inflation``."""
        cx = np.array([o.center[0] for o in self.obstacles], dtype=float)
        cy = np.array([o.center[1] for o in self.obstacles], dtype=float)
        r = np.array([o.radius for o in self.obstacles], dtype=float) + inflation
        return cx, cy, r

    def to_dict(self):
        return {
            "width": self.width,
            "height": self.height,
            "start": list(self.start),
            "goal": list(self.goal),
            "obstacles": [{"cx": o.center[0], "cy": o.center[1], "r": o.radius}
                          for o in self.obstacles],
        }

    def to_json(self):
        """JSON text with every float written to 17 significant digits."""
        def f(x):
            return format(float(x), ".17g")

        def xy(p):
            return f"[{f(p[0])}, {f(p[1])}]"

        obs = ",\n    ".join(
            f'{{"cx": {f(o.center[0])}, "cy": {f(o.center[1])}, "r": {f(o.radius)}}}'
            for o in self.obstacles)
        obs_block = f"[\n    {obs}\n  ]" if self.obstacles else "[]"
        return (
            "{\n"
            f'  "width": {f(self.width)},\n'
            f'  "height": {f(self.height)},\n'
            f'  "start": {xy(self.start)},\n'
            f'  "goal": {xy(self.goal)},\n'
            f'  "obstacles": {obs_block}\n'
            "}\n"
        )

    @classmethod
    def from_dict(cls, d):
        obstacles = [CircleObstacle((float(o["cx"]), float(o["cy"])), float(o["r"]))
                     for o in d.get("obstacles", [])]
        return cls(float(d["width"]), float(d["height"]), obstacles,
                   tuple(d.get("start", START)), tuple(d.get("goal", GOAL)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def generate_workspace(seed, n_obs, r_min, r_max, clearance=0.05, width=0.5,
                       height=0.5, start=START, goal=GOAL):
    """Sample ``n_obs`` circular obstacles uniformly in the rectangle.

    Candidates whose disc comes within ``clearance`` of the start or goal are
    rejected and redrawn.  Raises WorkspaceError after MAX_REJECTIONS failed
    draws for a single obstacle.
    """
    if not 0 < r_min <= r_max:
        raise WorkspaceError(f"need 0 < r_min <= r_max, got {r_min}, {r_max}")
    if clearance < 0:
        raise WorkspaceError("clearance must be non-negative")
    rng = np.random.default_rng([int(seed), 0])
    sx, sy = start
    gx, gy = goal
    obstacles = []
    for _ in range(n_obs):
        for _attempt in range(MAX_REJECTIONS):
            cx = rng.uniform(0.0, width)
            cy = rng.uniform(0.0, height)
            r = rng.uniform(r_min, r_max)
            if (np.hypot(cx - sx, cy - sy) - r >= clearance
                    and np.hypot(cx - gx, cy - gy) - r >= clearance):
                obstacles.append(CircleObstacle((float(cx), float(cy)), float(r)))
                break
        else:
            raise WorkspaceError(
                f"could not place obstacle {len(obstacles) + 1} after {MAX_REJECTIONS} draws")
    return Workspace(width, height, obstacles, start, goal)


def point_free(w, p, inflation=0.0):
    """True iff ``p`` is in the rectangle and not inside any (inflated) disc.

    Points exactly on a disc boundary count as free.
    """
    cx, cy, r = w.circles(inflation)
    return bool(_kernels.points_free([p[0]], [p[1]], cx, cy, r, w.width, w.height)[0])


def points_free(w, pts, inflation=0.0):
    pts = np.asarray(pts, dtype=float)
    cx, cy, r = w.circles(inflation)
    return _kernels.points_free(pts[:, 0], pts[:, 1], cx, cy, r, w.width, w.height)


def segment_free(w, a, b, inflation=0.0):
    """True iff the closed segment [a, b] stays in bounds and its distance to
    every obstacle center exceeds that obstacle's (inflated) radius."""
    cx, cy, r = w.circles(inflation)
    return bool(_kernels.segments_free([a[0]], [a[1]], [b[0]], [b[1]], cx, cy, r,
                                       w.width, w.height)[0])
