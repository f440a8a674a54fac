"""Geometric RRT* producing a collision-free waypoint polyline."""
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .workspace import point_free, segment_free


class NoPathFound(RuntimeError):
    pass


@dataclass(frozen=True)
class RrtParams:
    max_iters: int = 5000
    step: float = 0.03
    goal_bias: float = 0.05
    rewire_radius: float = 0.09
    goal_tolerance: float = 0.02
    inflation: float = 0.01

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1]")
        if self.rewire_radius < self.step:
            raise ValueError("rewire_radius must be >= step")
        if self.max_iters < 0 or self.goal_tolerance < 0 or self.inflation < 0:
            raise ValueError("max_iters, goal_tolerance and inflation must be non-negative")


@dataclass(frozen=True)
class WaypointPath:
    waypoints: np.ndarray

    def __post_init__(self):
        wp = np.array(self.waypoints, dtype=float).reshape(-1, 2)
        wp.setflags(write=False)
        object.__setattr__(self, "waypoints", wp)

    def __len__(self):
        return len(self.waypoints)

    def length(self):
        return float(np.sum(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)))

    def to_json(self):
        return json.dumps([[float(x), float(y)] for x, y in self.waypoints]) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(np.array(json.loads(text), dtype=float))


def draw_samples(w, params, seed):
    """Pre-draw the sample stream; row i depends only on (seed, i)."""
    rng = np.random.default_rng([int(seed), 1])
    u = rng.random((params.max_iters, 3))
    samples = np.column_stack((u[:, 1] * w.width, u[:, 2] * w.height))
    goal_rows = u[:, 0] < params.goal_bias
    samples[goal_rows] = w.goal
    return samples


def plan(w, params=RrtParams(), seed=0):
    """Run RRT* from start to goal and return the backtracked waypoint path.

    The path ends at the tree node within ``goal_tolerance`` of the goal that
    minimizes cost-to-come plus the final straight hop, followed by the goal
    itself.
    """
    infl = params.inflation
    for name in ("start", "goal"):
        if not point_free(w, getattr(w, name), infl):
            raise NoPathFound(f"{name} is not free under inflation {infl}")
    cx, cy, r = w.circles(infl)
    samples = draw_samples(w, params, seed)
    nx, ny, parent, cost = _kernels.rrt_star(samples, w.start, cx, cy, r, w.width,
                                             w.height, params.step, params.rewire_radius)
    gx, gy = w.goal
    d = np.hypot(nx - gx, ny - gy)
    cand = np.nonzero(d <= params.goal_tolerance)[0]
    if len(cand):
        free = _kernels.segments_free(nx[cand], ny[cand], np.full(len(cand), gx),
                                      np.full(len(cand), gy), cx, cy, r, w.width, w.height)
        cand = cand[free]
    if not len(cand):
        raise NoPathFound(f"no tree node within {params.goal_tolerance} m of the goal "
                          f"after {params.max_iters} iterations")
    total = cost[cand] + d[cand]
    best = int(cand[np.argmin(total)])
    chain = []
    k = best
    while k >= 0:
        chain.append((nx[k], ny[k]))
        k = int(parent[k])
    chain.reverse()
    chain.append((gx, gy))
    return dedupe(WaypointPath(np.array(chain)), 0.0)


def dedupe(path, tol=1e-9):
    """Drop waypoints within ``tol`` of the last kept one; endpoints are kept.

    If the last kept interior point sits within ``tol`` of the final waypoint,
    the final waypoint replaces it.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    wp = path.waypoints
    if len(wp) < 2:
        return WaypointPath(wp)
    kept = [wp[0]]
    for p in wp[1:-1]:
        if math.hypot(p[0] - kept[-1][0], p[1] - kept[-1][1]) > tol:
            kept.append(p)
    last = wp[-1]
    if len(kept) > 1 and math.hypot(last[0] - kept[-1][0], last[1] - kept[-1][1]) <= tol:
        kept[-1] = last
    else:
        kept.append(last)
    return WaypointPath(np.array(kept))


def path_is_free(w, path, inflation=0.0):
    wp = path.waypoints
    return all(segment_free(w, wp[i], wp[i + 1], inflation) for i in range(len(wp) - 1))


def subdivide(path, segments):
    """Insert the midpoint of each listed segment (index i joins waypoints i and i+1).

    Midpoints of free segments are free, so the polyline stays valid while a
    spline through it is pulled closer to the straight segments.
    """
    wp = path.waypoints
    segs = sorted({i for i in segments if 0 <= i < len(wp) - 1})
    out = []
    for i in range(len(wp) - 1):
        out.append(wp[i])
        if segs and i == segs[0]:
            out.append(0.5 * (wp[i] + wp[i + 1]))
            segs.pop(0)
    out.append(wp[-1])
    return WaypointPath(np.array(out))
