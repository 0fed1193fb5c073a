"""Distance controllers producing the speed reference that keeps the user at d°."""

from .distance import (
    DEFAULT_D_REF,
    DEFAULT_V_MAX,
    MAX_ESTIMATE_AGE,
    ControllerMemory,
    DistanceGains,
    StaleEstimateError,
    UserEstimate,
    controller_step,
    reset,
    sat,
    with_applied_reference,
)

__all__ = [
    "DEFAULT_D_REF",
    "DEFAULT_V_MAX",
    "MAX_ESTIMATE_AGE",
    "ControllerMemory",
    "DistanceGains",
    "StaleEstimateError",
    "UserEstimate",
    "controller_step",
    "reset",
    "sat",
    "with_applied_reference",
]
