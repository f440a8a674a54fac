import math

import numpy as np
import pytest

from reachscale.planner import (NoPathFound, RrtParams, WaypointPath, dedupe, draw_samples,
                                path_is_free, plan, subdivide)
from reachscale.workspace import CircleObstacle, Workspace, generate_workspace, segment_free


def test_empty_world_path_is_near_straight(empty_world):
    path = plan(empty_world, RrtParams(), seed=1)
    straight = math.dist(empty_world.start, empty_world.goal)
    assert path.length() <= 1.05 * straight
    np.testing.assert_array_equal(path.waypoints[0], empty_world.start)
    np.testing.assert_array_equal(path.waypoints[-1], empty_world.goal)


def test_walled_world_has_no_path():
    wall = [CircleObstacle((0.02 * i + 0.01, 0.25), 0.02) for i in range(25)]
    w = Workspace(0.5, 0.5, wall)
    with pytest.raises(NoPathFound):
        plan(w, RrtParams(max_iters=2000), seed=0)


@pytest.mark.parametrize("seed", range(6))
def test_path_contract(seed):
    w = generate_workspace(seed, 20, 0.02, 0.045)
    params = RrtParams()
    try:
        path = plan(w, params, seed)
    except NoPathFound:
        pytest.skip("no path in this world")
    wp = path.waypoints
    assert tuple(wp[0]) == w.start and tuple(wp[-1]) == w.goal
    assert path_is_free(w, path, params.inflation)
    for a, b in zip(wp[:-1], wp[1:]):
        assert segment_free(w, a, b, params.inflation)
        assert math.dist(a, b) > 0.0


def test_plan_is_deterministic():
    w = generate_workspace(2, 15, 0.02, 0.045)
    a = plan(w, RrtParams(), 9)
    b = plan(w, RrtParams(), 9)
    np.testing.assert_array_equal(a.waypoints, b.waypoints)


def test_sample_stream_prefix_independent_of_budget(empty_world):
    a = draw_samples(empty_world, RrtParams(max_iters=500), 4)
    b = draw_samples(empty_world, RrtParams(max_iters=2000), 4)
    np.testing.assert_array_equal(a, b[:500])


def test_cost_non_increasing_in_budget():
    w = generate_workspace(6, 15, 0.02, 0.045)
    lengths = []
    for n in (1500, 3000, 6000):
        try:
            lengths.append(plan(w, RrtParams(max_iters=n), 3).length())
        except NoPathFound:
            lengths.append(math.inf)
    assert lengths[0] >= lengths[1] - 1e-12 and lengths[1] >= lengths[2] - 1e-12


def test_dedupe_examples():
    p = WaypointPath([[0, 0], [0, 0], [1, 1]])
    np.testing.assert_array_equal(dedupe(p, 1e-9).waypoints, [[0, 0], [1, 1]])
    q = WaypointPath([[0, 0], [0.1, 0.3], [1, 1]])
    np.testing.assert_array_equal(dedupe(q).waypoints, q.waypoints)
    r = WaypointPath([[0, 0], [1e-10, 0], [0.2, 0], [0.2, 0], [0.45, 0.45]])
    np.testing.assert_array_equal(dedupe(r, 1e-6).waypoints, [[0, 0], [0.2, 0], [0.45, 0.45]])
    with pytest.raises(ValueError):
        dedupe(q, -1.0)


def test_dedupe_keeps_goal_when_last_point_coincides():
    p = WaypointPath([[0, 0], [0.5, 0.5], [1.0, 1.0], [1.0, 1.0 + 1e-12]])
    out = dedupe(p, 1e-9).waypoints
    np.testing.assert_array_equal(out[-1], [1.0, 1.0 + 1e-12])
    assert len(out) == 3


def test_subdivide_inserts_midpoints():
    p = WaypointPath([[0, 0], [1, 0], [1, 1]])
    out = subdivide(p, (1, 7, -1)).waypoints
    np.testing.assert_array_equal(out, [[0, 0], [1, 0], [1, 0.5], [1, 1]])


def test_param_validation():
    for kw in (dict(step=0.0), dict(goal_bias=1.5), dict(rewire_radius=0.01),
               dict(inflation=-0.1)):
        with pytest.raises(ValueError):
            RrtParams(**kw)


def test_path_json_roundtrip():
    p = WaypointPath([[0.05, 0.05], [0.1 + 1e-17, 0.3], [0.45, 0.45]])
    np.testing.assert_array_equal(WaypointPath.from_json(p.to_json()).waypoints, p.waypoints)
