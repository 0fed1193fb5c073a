"""Deterministic simulator: world, synthetic LiDAR, pedestrians, scenarios and the tick loop."""

from .lidar import RANGE_NOISE, BeamConfig, raycast
from .metrics import Metrics, check_assertions, compute_metrics
from .pedestrians import PEDESTRIAN_RADIUS, Pedestrian, PedestrianScript, SpeedProfile, WalkMode, step_pedestrian
from .runner import TETHER_STIFFNESS, RunResult, ScenarioRunError, distance_gains, pedestrian_touches, run_scenario
from .scenario import (
    EventKind,
    Scenario,
    ScenarioError,
    ScenarioEvent,
    SimMode,
    load_scenario,
    parse_event_lines,
    with_events,
)
from .world import WORLD_RESOLUTION, Box, Disc, World, build_world, rasterize

__all__ = [
    "PEDESTRIAN_RADIUS",
    "RANGE_NOISE",
    "TETHER_STIFFNESS",
    "WORLD_RESOLUTION",
    "BeamConfig",
    "Box",
    "Disc",
    "EventKind",
    "Metrics",
    "Pedestrian",
    "PedestrianScript",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "ScenarioEvent",
    "ScenarioRunError",
    "SimMode",
    "SpeedProfile",
    "WalkMode",
    "World",
    "build_world",
    "check_assertions",
    "compute_metrics",
    "distance_gains",
    "load_scenario",
    "parse_event_lines",
    "pedestrian_touches",
    "raycast",
    "rasterize",
    "run_scenario",
    "step_pedestrian",
    "with_events",
]
