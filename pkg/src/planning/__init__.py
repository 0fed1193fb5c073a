"""Global plans, navigability grids, the rolling costmap and the dynamic-window planner."""

from .costmap import (
    COSTMAP_RESOLUTION,
    COSTMAP_SIZE,
    HALF_FOOTPRINT,
    INFLATION_RADIUS,
    CellState,
    Costmap,
    update_costmap,
    window_origin,
)
from .dwa import (
    DwaConfig,
    DwaResult,
    Limits,
    Trajectory,
    arc_poses,
    dwa_plan,
    dynamic_window,
    footprint_hits_lethal,
    footprint_outline,
    sample_window,
)
from .grid import NAVIGABLE_THRESHOLD, GridFormatError, GridMap, load_navigability, read_pgm
from .plan import MAX_SPACING, GlobalPlan, PlanError, load_plan, read_plan_file

__all__ = [
    "COSTMAP_RESOLUTION",
    "COSTMAP_SIZE",
    "HALF_FOOTPRINT",
    "INFLATION_RADIUS",
    "MAX_SPACING",
    "NAVIGABLE_THRESHOLD",
    "CellState",
    "Costmap",
    "DwaConfig",
    "DwaResult",
    "GlobalPlan",
    "GridFormatError",
    "GridMap",
    "Limits",
    "PlanError",
    "Trajectory",
    "arc_poses",
    "dwa_plan",
    "dynamic_window",
    "footprint_hits_lethal",
    "footprint_outline",
    "load_navigability",
    "load_plan",
    "read_pgm",
    "read_plan_file",
    "sample_window",
    "update_costmap",
    "window_origin",
]
