"""Switched longitudinal dynamics, discretization and plant integration."""

from .model import (
    ACC_PARAMS,
    DEC_PARAMS,
    DEFAULT_TS,
    DiscreteModePair,
    FloatArray,
    InvalidModelError,
    LongitudinalState,
    Mode,
    ModeParams,
    SwitchedLongitudinalModel,
    continuous_matrices,
    discretize,
    zoh,
)
from .plant import PLANT_DT, PlantState, advance, plant_step, select_mode, step_response

__all__ = [
    "ACC_PARAMS",
    "DEC_PARAMS",
    "DEFAULT_TS",
    "PLANT_DT",
    "DiscreteModePair",
    "FloatArray",
    "InvalidModelError",
    "LongitudinalState",
    "Mode",
    "ModeParams",
    "PlantState",
    "SwitchedLongitudinalModel",
    "advance",
    "continuous_matrices",
    "discretize",
    "plant_step",
    "select_mode",
    "step_response",
    "zoh",
]
