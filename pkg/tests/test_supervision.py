import itertools

import numpy as np
import pytest

from src.perception import NO_USER, UserSelection
from src.supervision import (
    STOP,
    FsmState,
    FsmThresholds,
    SupervisorInputs,
    SupervisorState,
    VelocityCommand,
    fsm_step,
    select_velocity,
)

DT = 0.1
USER = UserSelection(track_id=1, d=1.5, v_vi=0.0)


def _inputs(**overrides):
    values = {
        "v_dwa": 0.8,
        "w_dwa": 0.2,
        "planner_feasible": True,
        "v_dist": 0.5,
        "user": USER,
    }
    values.update(overrides)
    return SupervisorInputs(**values)


def _run(state, inputs, ticks):
    command = STOP
    for _ in range(ticks):
        state, command = fsm_step(state, inputs, DT)
    return state, command


# --- velocity selector ----------------------------------------------------


def test_distance_controller_slower_scales_the_arc():
    cmd = select_velocity(1.0, 0.4, 0.6, 1.5)

    assert cmd.v_ref == pytest.approx(0.6)
    assert cmd.w_ref == pytest.approx(0.24)


def test_distance_speed_is_capped_before_mixing():
    assert select_velocity(1.5, -0.3, 2.3, 1.5) == VelocityCommand(1.5, -0.3)


@pytest.mark.parametrize("v_dist", [-1.0, 0.0, 0.7, 3.0])
def test_stationary_planner_arc_stops(v_dist):
    assert select_velocity(0.0, 0.5, v_dist, 1.5) == STOP


def test_selector_identities_on_a_lattice():
    v_dwas = np.linspace(0.0, 1.5, 16)
    w_dwas = np.linspace(-1.0, 1.0, 9)
    v_dists = np.linspace(-0.5, 2.5, 31)
    for v_dwa, w_dwa, v_dist in itertools.product(v_dwas, w_dwas, v_dists):
        cmd = select_velocity(v_dwa, w_dwa, v_dist, 1.5)

        assert 0.0 <= cmd.v_ref <= 1.5
        assert abs(cmd.w_ref) <= 1.0
        assert cmd.v_ref <= v_dwa
        assert cmd.v_ref <= max(v_dist, 0.0)
        if v_dwa < 1e-3:
            assert cmd == STOP
        elif 0.0 < cmd.v_ref < v_dwa:
            assert abs(cmd.w_ref / cmd.v_ref - w_dwa / v_dwa) <= 1e-12
        elif cmd.v_ref == v_dwa:
            assert cmd.w_ref == w_dwa


# --- state machine --------------------------------------------------------


def test_initial_state_is_stopped_for_the_user():
    assert SupervisorState().state is FsmState.STOPPED_HUMAN


def test_manual_ack_starts_in_low_speed_with_planner_velocities():
    state, cmd = fsm_step(SupervisorState(), _inputs(manual_ack=True), DT)

    assert state.state is FsmState.LOW_SPEED
    assert state.last_transition == "T3"
    assert cmd == VelocityCommand(0.8, 0.2)


def test_no_motion_before_acknowledgement():
    state = SupervisorState()
    for v_dist in np.linspace(0.0, 1.5, 40):
        state, cmd = fsm_step(state, _inputs(v_dist=float(v_dist), v_robot=0.5, v_user=0.5), DT)

        assert state.state is FsmState.STOPPED_HUMAN
        assert cmd == STOP


def test_ack_ignored_while_user_is_too_far():
    far = UserSelection(track_id=1, d=3.8)

    state, cmd = fsm_step(SupervisorState(), _inputs(manual_ack=True, user=far), DT)

    assert state.state is FsmState.STOPPED_HUMAN
    assert cmd == STOP


def test_low_speed_picks_up_to_cruise():
    start = SupervisorState(state=FsmState.LOW_SPEED)

    slow, _ = fsm_step(start, _inputs(v_robot=0.4, v_user=0.2), DT)
    fast, cmd = fsm_step(start, _inputs(v_robot=0.4, v_user=0.4), DT)

    assert slow.state is FsmState.LOW_SPEED
    assert fast.state is FsmState.CRUISE
    assert fast.last_transition == "T4"
    assert cmd == select_velocity(0.8, 0.2, 0.5, 1.5)


def test_cruise_loses_user_after_more_than_a_second():
    state = SupervisorState(state=FsmState.CRUISE)

    state, cmd = _run(state, _inputs(user=NO_USER), 10)
    assert state.state is FsmState.CRUISE
    assert cmd != STOP

    state, cmd = _run(state, _inputs(user=None), 5)
    assert state.state is FsmState.STOPPED_HUMAN
    assert state.last_transition == ""
    assert cmd == STOP


@pytest.mark.parametrize(
    "overrides, reason",
    [
        ({"user": UserSelection(track_id=4, d=3.6)}, "user too far"),
        ({"manual_stop": True}, "manual stop"),
        ({"goal_reached": True}, "goal reached"),
    ],
)
def test_user_side_stops_are_immediate(overrides, reason):
    for origin in (FsmState.CRUISE, FsmState.LOW_SPEED, FsmState.STOPPED_ROBOT):
        state, cmd = fsm_step(SupervisorState(state=origin), _inputs(**overrides), DT)

        assert state.state is FsmState.STOPPED_HUMAN
        assert state.last_transition == f"T5 ({reason})"
        assert cmd == STOP


def test_blocked_planner_stops_robot_then_recovers_without_ack():
    state = SupervisorState(state=FsmState.CRUISE)
    blocked = _inputs(planner_feasible=False, v_dwa=0.0, w_dwa=0.0)

    state, _ = _run(state, blocked, 19)
    assert state.state is FsmState.CRUISE

    state, cmd = fsm_step(state, blocked, DT)
    assert state.state is FsmState.STOPPED_ROBOT
    assert state.last_transition == "T6"
    assert cmd == STOP

    state, cmd = _run(state, blocked, 30)
    assert state.state is FsmState.STOPPED_ROBOT

    state, cmd = fsm_step(state, _inputs(), DT)
    assert state.state is FsmState.CRUISE
    assert state.last_transition == "T7"
    assert cmd == select_velocity(0.8, 0.2, 0.5, 1.5)


def test_short_planner_dropout_does_not_stop():
    state = SupervisorState(state=FsmState.CRUISE)

    for _ in range(5):
        state, _ = _run(state, _inputs(planner_feasible=False), 15)
        state, _ = fsm_step(state, _inputs(), DT)

    assert state.state is FsmState.CRUISE


def test_localization_loss_and_recovery():
    state = SupervisorState(state=FsmState.CRUISE)
    poor = _inputs(localization_quality=0.3)

    state, _ = _run(state, poor, 4)
    assert state.state is FsmState.CRUISE
    state, cmd = fsm_step(state, poor, DT)
    assert state.state is FsmState.LOST
    assert state.last_transition == "T1"
    assert cmd == STOP

    state, cmd = _run(state, _inputs(localization_quality=0.9, manual_ack=True), 9)
    assert state.state is FsmState.LOST
    assert cmd == STOP
    state, cmd = fsm_step(state, _inputs(localization_quality=0.9), DT)
    assert state.state is FsmState.STOPPED_HUMAN
    assert state.last_transition == "T2"
    assert cmd == STOP


def test_localization_loss_wins_over_every_other_transition():
    state = SupervisorState(state=FsmState.LOW_SPEED, low_quality_for=0.45)

    state, _ = fsm_step(state, _inputs(localization_quality=0.1, manual_stop=True, v_robot=1.0, v_user=1.0), DT)

    assert state.state is FsmState.LOST


def test_every_state_and_input_has_one_successor():
    thresholds = FsmThresholds()
    users = [None, NO_USER, USER, UserSelection(track_id=2, d=4.0, v_vi=0.5)]
    clocks = [0.0, 0.45, 0.95, 1.05, 1.95, 2.5]
    for state_code, clock, user, quality, feasible, ack, stop, goal, speed in itertools.product(
        FsmState, clocks, users, (0.2, 0.8), (False, True), (False, True), (False, True), (False, True), (0.0, 0.5)
    ):
        state = SupervisorState(state=state_code, low_quality_for=clock, good_quality_for=clock, user_missing_for=clock, infeasible_for=clock)
        inputs = _inputs(
            user=user,
            localization_quality=quality,
            planner_feasible=feasible,
            manual_ack=ack,
            manual_stop=stop,
            goal_reached=goal,
            v_robot=speed,
            v_user=speed,
        )

        first = fsm_step(state, inputs, DT, thresholds)
        second = fsm_step(state, inputs, DT, thresholds)

        assert first == second
        new_state, cmd = first
        assert isinstance(new_state.state, FsmState)
        if new_state.state in (FsmState.LOST, FsmState.STOPPED_HUMAN, FsmState.STOPPED_ROBOT):
            assert cmd == STOP
        if new_state.state is FsmState.LOW_SPEED:
            assert cmd == VelocityCommand(0.8, 0.2)
