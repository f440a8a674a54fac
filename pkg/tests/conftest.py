import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from reachscale.planner import WaypointPath
from reachscale.spline import build_grid, fit_spline
from reachscale.workspace import Workspace

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def line_grid():
    """Straight reference (0,0) -> (1,0) over 2 s: p(tau) = (tau/2, 0)."""
    ref = fit_spline(WaypointPath([[0.0, 0.0], [1.0, 0.0]]), 2.0)
    return build_grid(ref, 150_000)


@pytest.fixture(scope="session")
def empty_world():
    return Workspace(0.5, 0.5, ())
