"""Supervisory state machine deciding which velocity source drives the robot."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import IntEnum

from ..perception import UserSelection
from .velocity import STOP, VelocityCommand, select_velocity

log = logging.getLogger(__name__)

DWELL_TOLERANCE = 1e-9


class FsmState(IntEnum):
    """Supervisor states; the integer code is what the tick log stores."""

    LOST = 0
    STOPPED_HUMAN = 1
    STOPPED_ROBOT = 2
    CRUISE = 3
    LOW_SPEED = 4


STANDSTILL_STATES = frozenset({FsmState.LOST, FsmState.STOPPED_HUMAN, FsmState.STOPPED_ROBOT})


@dataclass(frozen=True, slots=True)
class FsmThresholds:
    """Dwell times (s), distances (m) and speeds (m/s) behind each transition."""

    quality_min: float = 0.5
    lost_after: float = 0.5
    recover_after: float = 1.0
    user_missing_after: float = 1.0
    user_max_distance: float = 3.5
    blocked_after: float = 2.0
    cruise_speed: float = 0.3
    v_max: float = 1.5


@dataclass(frozen=True, slots=True)
class SupervisorState:
    """Active state plus the dwell clocks of the timed conditions."""

    state: FsmState = FsmState.STOPPED_HUMAN
    low_quality_for: float = 0.0
    good_quality_for: float = 0.0
    user_missing_for: float = 0.0
    infeasible_for: float = 0.0
    last_transition: str = ""


@dataclass(frozen=True, slots=True)
class SupervisorInputs:
    """Snapshot of everything the supervisor reads in one tick."""

    v_dwa: float
    w_dwa: float
    planner_feasible: bool
    v_dist: float
    user: UserSelection | None
    localization_quality: float = 1.0
    manual_ack: bool = False
    manual_stop: bool = False
    goal_reached: bool = False
    v_robot: float = 0.0
    v_user: float = 0.0


def _accumulate(clock: float, active: bool, dt: float) -> float:
    return clock + dt if active else 0.0


def _tick_clocks(state: SupervisorState, inputs: SupervisorInputs, thresholds: FsmThresholds, dt: float) -> SupervisorState:
    good = inputs.localization_quality >= thresholds.quality_min
    user_seen = inputs.user is not None and inputs.user.found
    return replace(
        state,
        low_quality_for=_accumulate(state.low_quality_for, not good, dt),
        good_quality_for=_accumulate(state.good_quality_for, good, dt),
        user_missing_for=_accumulate(state.user_missing_for, not user_seen, dt),
        infeasible_for=_accumulate(state.infeasible_for, not inputs.planner_feasible, dt),
    )


def user_stop_reason(state: SupervisorState, inputs: SupervisorInputs, thresholds: FsmThresholds) -> str | None:
    """Why the user side asks for a stop, or None."""
    if inputs.manual_stop:
        return "manual stop"
    if inputs.goal_reached:
        return "goal reached"
    if state.user_missing_for > thresholds.user_missing_after + DWELL_TOLERANCE:
        return "user track lost"
    if inputs.user is not None and inputs.user.found and inputs.user.d > thresholds.user_max_distance:
        return "user too far"
    return None


def _transition(state: SupervisorState, inputs: SupervisorInputs, thresholds: FsmThresholds) -> tuple[FsmState, str]:
    current = state.state
    if current is not FsmState.LOST and state.low_quality_for >= thresholds.lost_after - DWELL_TOLERANCE:
        return FsmState.LOST, "T1"
    if current is FsmState.LOST:
        if state.good_quality_for >= thresholds.recover_after - DWELL_TOLERANCE:
            return FsmState.STOPPED_HUMAN, "T2"
        return current, ""

    stop_reason = user_stop_reason(state, inputs, thresholds)
    if current in (FsmState.CRUISE, FsmState.LOW_SPEED, FsmState.STOPPED_ROBOT) and stop_reason is not None:
        return FsmState.STOPPED_HUMAN, f"T5 ({stop_reason})"
    if current in (FsmState.CRUISE, FsmState.LOW_SPEED) and state.infeasible_for >= thresholds.blocked_after - DWELL_TOLERANCE:
        return FsmState.STOPPED_ROBOT, "T6"
    if current is FsmState.STOPPED_ROBOT and inputs.planner_feasible:
        return FsmState.CRUISE, "T7"
    if current is FsmState.STOPPED_HUMAN and inputs.manual_ack and stop_reason is None:
        return FsmState.LOW_SPEED, "T3"
    if current is FsmState.LOW_SPEED and inputs.v_robot > thresholds.cruise_speed and inputs.v_user > thresholds.cruise_speed:
        return FsmState.CRUISE, "T4"
    return current, ""


def command_for(state: FsmState, inputs: SupervisorInputs, thresholds: FsmThresholds) -> VelocityCommand:
    """Velocity output of ``state``."""
    if state in STANDSTILL_STATES:
        return STOP
    if state is FsmState.LOW_SPEED:
        return VelocityCommand(inputs.v_dwa, inputs.w_dwa)
    return select_velocity(inputs.v_dwa, inputs.w_dwa, inputs.v_dist, thresholds.v_max)


def fsm_step(
    state: SupervisorState,
    inputs: SupervisorInputs,
    dt: float,
    thresholds: FsmThresholds | None = None,
) -> tuple[SupervisorState, VelocityCommand]:
    """Advance the supervisor by one tick and return the command of the new state.

    Dwell clocks are updated with this tick's inputs first. Transitions are
    tried in the fixed order T1, T2, T5, T6, T7, T3, T4 and at most one fires.
    """
    thresholds = thresholds or FsmThresholds()
    clocked = _tick_clocks(state, inputs, thresholds, dt)
    target, label = _transition(clocked, inputs, thresholds)
    if target is not clocked.state:
        log.debug("Supervisor %s -> %s via %s", clocked.state.name, target.name, label)
    new_state = replace(clocked, state=target, last_transition=label)
    return new_state, command_for(target, inputs, thresholds)
