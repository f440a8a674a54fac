"""Reachability-aware time scaling and look-ahead tracking of planned waypoint paths."""
from .config import ConfigError, RunConfig
from .metrics import TrialMetrics, aggregate, compare, moving_mask, trial_metrics
from .planner import NoPathFound, RrtParams, WaypointPath, dedupe, plan
from .simulator import SimConfig, TrialResult, run_trial
from .spline import CircleArc, PathGrid, SplineCollision, SplineRef, build_grid, fit_spline
from .timescale import BaselineDiverged, ScalingProfile, build_profile, profile_stats
from .tracker import TrackerConfig, TrackerState, control_step
from .workspace import CircleObstacle, Workspace, generate_workspace, point_free, segment_free

__version__ = "0.1.0"
