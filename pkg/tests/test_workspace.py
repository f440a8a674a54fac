import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reachscale.workspace import (CircleObstacle, Workspace, WorkspaceError,
                                  generate_workspace, point_free, points_free, segment_free)

coord = st.floats(-0.1, 0.6, allow_nan=False)


def one_obstacle():
    return Workspace(0.5, 0.5, [CircleObstacle((0.25, 0.25), 0.1)])


def test_empty_world_defaults():
    w = generate_workspace(3, 0, 0.02, 0.05)
    assert w.obstacles == ()
    assert w.start == (0.05, 0.05) and w.goal == (0.45, 0.45)
    assert (w.width, w.height) == (0.5, 0.5)


def test_same_seed_same_obstacles():
    a = generate_workspace(11, 12, 0.02, 0.05)
    b = generate_workspace(11, 12, 0.02, 0.05)
    assert a == b
    assert a.to_json() == b.to_json()
    assert generate_workspace(12, 12, 0.02, 0.05) != a


def test_clearance_from_start_and_goal():
    w = generate_workspace(5, 5, 0.02, 0.05, clearance=0.05)
    assert len(w.obstacles) == 5
    for ob in w.obstacles:
        for q in (w.start, w.goal):
            assert math.dist(ob.center, q) - ob.radius >= 0.05
        assert 0.02 <= ob.radius <= 0.05
        assert 0 <= ob.center[0] <= 0.5 and 0 <= ob.center[1] <= 0.5


def test_crowded_world_raises():
    with pytest.raises(WorkspaceError):
        generate_workspace(0, 3, 0.5, 0.6, clearance=0.05)


@pytest.mark.parametrize("kw", [dict(r_min=0.0, r_max=0.1), dict(r_min=0.2, r_max=0.1),
                                dict(r_min=0.01, r_max=0.02, clearance=-1.0)])
def test_bad_generation_args(kw):
    with pytest.raises(WorkspaceError):
        generate_workspace(0, 1, **kw)


def test_invalid_workspaces():
    with pytest.raises(WorkspaceError):
        Workspace(0.0, 0.5)
    with pytest.raises(WorkspaceError):
        Workspace(0.5, 0.5, [CircleObstacle((0.05, 0.05), 0.01)])   # covers start
    with pytest.raises(WorkspaceError):
        Workspace(0.5, 0.5, [CircleObstacle((0.7, 0.2), 0.01)])     # center outside
    with pytest.raises(ValueError):
        CircleObstacle((0.1, 0.1), 0.0)


def test_point_free_examples():
    w = one_obstacle()
    assert not point_free(w, (0.25, 0.25))
    assert not point_free(w, (0.6, 0.1))
    assert not point_free(w, (-1e-9, 0.1))
    assert point_free(w, (0.25 + 0.1 + 1e-9, 0.25))
    # boundary counts as free; 0.375 - 0.25 == 0.125 exactly in binary
    edge = Workspace(0.5, 0.5, [CircleObstacle((0.25, 0.25), 0.125)])
    assert point_free(edge, (0.375, 0.25))
    assert not point_free(edge, (0.375, 0.25), inflation=1e-6)


def test_segment_free_examples():
    w = one_obstacle()
    assert not segment_free(w, (0.05, 0.05), (0.45, 0.45))     # through the center
    assert segment_free(w, (0.1, 0.1), (0.1, 0.1))             # degenerate, free
    assert not segment_free(w, (0.25, 0.25), (0.25, 0.25))     # degenerate, inside
    # horizontal tangent line at distance r + 1e-6 from the center
    y = 0.25 + 0.1 + 1e-6
    assert segment_free(w, (0.05, y), (0.45, y))
    y = 0.25 + 0.1 - 1e-6
    assert not segment_free(w, (0.05, y), (0.45, y))
    # endpoints free but the middle leaves the rectangle is impossible for a convex box;
    # an endpoint outside makes the segment not free
    assert not segment_free(w, (0.05, 0.05), (0.55, 0.05))


def _dist_point_segment(c, a, b):
    a, b, c = map(np.asarray, (a, b, c))
    d = b - a
    L2 = d @ d
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, (c - a) @ d / L2))
    return float(np.linalg.norm(a + t * d - c))


@given(coord, coord, coord, coord)
def test_segment_symmetric_and_matches_closed_form(ax, ay, bx, by):
    w = one_obstacle()
    a, b = (ax, ay), (bx, by)
    f = segment_free(w, a, b)
    assert f == segment_free(w, b, a)
    inside = all(0 <= v <= 0.5 for v in (ax, ay, bx, by))
    d = _dist_point_segment((0.25, 0.25), a, b)
    if abs(d - 0.1) > 1e-12:
        assert f == (inside and d > 0.1)


@given(coord, coord, coord, coord)
def test_free_segment_has_free_points(ax, ay, bx, by):
    w = one_obstacle()
    if segment_free(w, (ax, ay), (bx, by)):
        t = np.linspace(0.0, 1.0, 201)[:, None]
        pts = (1 - t) * np.array([ax, ay]) + t * np.array([bx, by])
        assert points_free(w, pts).all()


def test_json_roundtrip_and_format():
    w = generate_workspace(4, 6, 0.02, 0.05)
    text = w.to_json()
    d = json.loads(text)
    assert set(d) == {"width", "height", "start", "goal", "obstacles"}
    assert set(d["obstacles"][0]) == {"cx", "cy", "r"}
    assert Workspace.from_json(text) == w
