"""Velocity selection and the supervisory state machine."""

from .fsm import (
    STANDSTILL_STATES,
    FsmState,
    FsmThresholds,
    SupervisorInputs,
    SupervisorState,
    command_for,
    fsm_step,
    user_stop_reason,
)
from .velocity import STOP, V_EPSILON, VelocityCommand, select_velocity

__all__ = [
    "STANDSTILL_STATES",
    "STOP",
    "V_EPSILON",
    "FsmState",
    "FsmThresholds",
    "SupervisorInputs",
    "SupervisorState",
    "VelocityCommand",
    "command_for",
    "fsm_step",
    "select_velocity",
    "user_stop_reason",
]
