"""Closed-loop tick loop: LiDAR, perception, control, planning, supervision and plant."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace

import numpy as np

from ..control import ControllerMemory, DistanceGains, StaleEstimateError, UserEstimate, controller_step, reset, with_applied_reference
from ..dynamics import PlantState, advance
from ..observability import NO_TRACK, TickRecord
from ..perception import Perception, PerceptionFrame, ScanLogWriter, filter_ground
from ..planning import HALF_FOOTPRINT, Costmap, DwaConfig, Limits, dwa_plan, update_costmap
from ..supervision import (
    STANDSTILL_STATES,
    FsmState,
    FsmThresholds,
    SupervisorInputs,
    SupervisorState,
    VelocityCommand,
    fsm_step,
)
from ..synthesis import GainsRecord
from .lidar import BeamConfig, raycast
from .metrics import Metrics, check_assertions, compute_metrics
from .pedestrians import PEDESTRIAN_RADIUS, Pedestrian, step_pedestrian
from .scenario import EventKind, Scenario, SimMode

log = logging.getLogger(__name__)

TETHER_STIFFNESS = 20.0
POSITION_NOISE = 0.03
HEADING_NOISE = math.radians(0.5)
SELECTION_RADIUS = 0.6
EVENT_TOLERANCE = 1e-9


class ScenarioRunError(RuntimeError):
    """A module failed mid-run; the cause is chained."""

    def __init__(self, scenario: str, tick: int, t: float, reason: str):
        self.scenario = scenario
        self.tick = tick
        self.t = t
        super().__init__(f"scenario {scenario} stopped at tick {tick} (t={t:.1f} s): {reason}")


@dataclass(frozen=True, eq=False)
class RunResult:
    """Tick records of a run with its metrics and failed assertions."""

    records: tuple[TickRecord, ...]
    metrics: Metrics
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        """No collision and every assertion held."""
        return self.metrics.collisions == 0 and not self.failures


def distance_gains(record: GainsRecord, controller: int, v_max: float) -> DistanceGains:
    """Controller 1 or 2 gains from a gains record."""
    return DistanceGains.from_vector(record.controller_gains(controller), ts=record.ts, v_max=v_max)


def pedestrian_touches(pose: Sequence[float], ped: Pedestrian, half: float = HALF_FOOTPRINT) -> bool:
    """True when the pedestrian's disc overlaps the square footprint at ``pose``."""
    c, s = math.cos(pose[2]), math.sin(pose[2])
    dx, dy = ped.x - pose[0], ped.y - pose[1]
    x_r, y_r = c * dx + s * dy, -s * dx + c * dy
    return math.hypot(max(abs(x_r) - half, 0.0), max(abs(y_r) - half, 0.0)) < PEDESTRIAN_RADIUS


@dataclass
class _Inputs:
    """Event-driven inputs; acknowledgements and stops last a single tick."""

    d_ref: float
    quality: float = 1.0
    manual_ack: bool = False
    manual_stop: bool = False
    next_event: int = 0

    def apply(self, scenario: Scenario, t: float) -> None:
        self.manual_ack = self.manual_stop = False
        events = scenario.events
        while self.next_event < len(events) and events[self.next_event].t <= t + EVENT_TOLERANCE:
            event = events[self.next_event]
            self.next_event += 1
            log.debug("t=%.1f event %s %s", t, event.kind, "" if event.value is None else event.value)
            if event.kind is EventKind.MANUAL_ACK:
                self.manual_ack = True
            elif event.kind is EventKind.MANUAL_STOP:
                self.manual_stop = True
            elif event.kind is EventKind.QUALITY:
                self.quality = float(event.value or 0.0)
            else:
                self.d_ref = float(event.value or 0.0)


class _Loop:
    """Mutable state of one run; every module reads the same snapshot per tick."""

    def __init__(
        self,
        scenario: Scenario,
        gains: DistanceGains,
        seed: int,
        dwa_config: DwaConfig | None,
        thresholds: FsmThresholds | None,
    ):
        self.scenario = scenario
        self.gains = gains
        self.thresholds = replace(thresholds or FsmThresholds(), v_max=scenario.v_max)
        self.dwa_config = replace(dwa_config or DwaConfig(), period=scenario.ts)
        self.limits = Limits(v_max=scenario.v_max)
        self.beams = BeamConfig(noise=scenario.lidar_noise)
        self.lidar_rng = np.random.default_rng([seed, 0])
        self.pose_rng = np.random.default_rng([seed, 1])

        self.plant = PlantState.at_rest(*scenario.robot_pose)
        self.pedestrians = [Pedestrian.spawn(p) for p in scenario.pedestrians]
        self.perception = Perception(scenario.ts)
        self.memory = ControllerMemory()
        self.supervisor = SupervisorState()
        self.costmap = Costmap.empty()
        self.command = VelocityCommand(0.0, 0.0)
        self.inputs = _Inputs(d_ref=scenario.d_ref)
        self.last_seen: tuple[float, UserEstimate] | None = None
        self.holding = False

    @property
    def user(self) -> Pedestrian | None:
        return next((p for p in self.pedestrians if p.script.user), None)

    def estimated_pose(self) -> tuple[float, float, float]:
        """Localization output; noise draws happen every tick to keep the stream aligned."""
        noise = self.pose_rng.normal(0.0, 1.0, size=3)
        x, y, theta = self.plant.pose
        if not self.scenario.localization_noise:
            return x, y, theta
        return x + POSITION_NOISE * noise[0], y + POSITION_NOISE * noise[1], theta + HEADING_NOISE * noise[2]

    def estimate(self, frame: PerceptionFrame, t: float) -> UserEstimate:
        """User estimate of this tick, aged from the last sighting when the user is not seen."""
        sel = frame.selection
        if sel.found:
            est = UserEstimate(d=sel.d, p_vi=self.plant.longitudinal.p - sel.d, v_vi=sel.v_vi, a_vi=sel.a_vi)
            self.last_seen = (t, est)
            return est
        if self.last_seen is None:
            return UserEstimate(d=math.nan, valid=False)
        seen_at, est = self.last_seen
        return replace(est, age=t - seen_at)

    def distance_command(self, est: UserEstimate, t: float) -> float:
        """Distance-law output, holding the last reference through short dropouts."""
        try:
            v_dist, self.memory = controller_step(self.gains, self.memory, est, self.inputs.d_ref, self.plant.v)
        except StaleEstimateError as exc:
            missing = t - self.last_seen[0] if self.last_seen is not None else math.inf
            if not self.holding:
                log.warning("t=%.1f no usable user estimate (age %.2f s), holding %.3f m/s", t, exc.age, exc.held)
                self.holding = True
            return exc.held if missing <= self.thresholds.user_missing_after + EVENT_TOLERANCE else 0.0
        self.holding = False
        return v_dist

    def selection_ok(self, frame: PerceptionFrame) -> bool:
        user = self.user
        sel = frame.selection
        if user is None or not sel.found:
            return False
        track = next((tr for tr in frame.tracks if tr.id == sel.track_id), None)
        if track is None:
            return False
        tx, ty = track.position
        return math.hypot(tx - user.x, ty - user.y) < SELECTION_RADIUS

    def collides(self) -> bool:
        pose = self.plant.pose
        if self.scenario.world.footprint_collides(pose):
            return True
        return any(pedestrian_touches(pose, p) for p in self.pedestrians)

    def tick(self, k: int, scan_writer: ScanLogWriter | None) -> TickRecord:
        scenario = self.scenario
        t = k * scenario.ts
        self.inputs.apply(scenario, t)
        pose_est = self.estimated_pose()

        scan = raycast(
            scenario.world,
            self.plant.pose,
            [p.disc for p in self.pedestrians],
            rng=self.lidar_rng,
            config=self.beams,
            timestamp=t,
            reported_pose=pose_est,
        )
        if scan_writer is not None:
            scan_writer.write(scan)
        frame = self.perception.process(scan, self.inputs.d_ref)
        est = self.estimate(frame, t)
        v_dist = self.distance_command(est, t)

        v_dwa = math.nan
        goal_dist = math.nan
        state = FsmState.CRUISE
        if scenario.mode is SimMode.FULL and scenario.plan is not None:
            self.costmap = update_costmap(self.costmap, filter_ground(scan.points3d()), scenario.world.navigability, pose_est)
            plan_out = dwa_plan(
                self.costmap,
                scenario.plan,
                pose_est,
                self.command.v_ref,
                self.command.w_ref,
                limits=self.limits,
                config=self.dwa_config,
            )
            if not plan_out.feasible:
                log.debug("t=%.1f planner infeasible (%d of %d arcs blocked)", t, plan_out.collisions, plan_out.candidates)
            v_dwa = plan_out.v
            gx, gy = scenario.plan.goal
            goal_dist = math.hypot(gx - pose_est[0], gy - pose_est[1])
            sel = frame.selection
            inputs = SupervisorInputs(
                v_dwa=plan_out.v,
                w_dwa=plan_out.w,
                planner_feasible=plan_out.feasible,
                v_dist=v_dist,
                user=sel if sel.found else None,
                localization_quality=self.inputs.quality,
                manual_ack=self.inputs.manual_ack,
                manual_stop=self.inputs.manual_stop,
                goal_reached=goal_dist < scenario.goal_tolerance,
                v_robot=self.plant.v,
                v_user=sel.v_vi if sel.found else 0.0,
            )
            self.supervisor, command = fsm_step(self.supervisor, inputs, scenario.ts, self.thresholds)
            state = self.supervisor.state
        else:
            v_ref = min(max(v_dist, -scenario.v_max), scenario.v_max)
            command = VelocityCommand(v_ref, 0.0)

        if state in STANDSTILL_STATES:
            self.memory = reset(self.memory)
        else:
            self.memory = with_applied_reference(self.memory, command.v_ref)

        user = self.user
        heading = self.plant.theta
        v_vi_true = math.nan
        if user is not None:
            ux, uy = user.velocity
            v_vi_true = ux * math.cos(heading) + uy * math.sin(heading)
        collision = self.collides()
        if collision:
            log.warning("t=%.1f collision at (%.2f, %.2f)", t, self.plant.x, self.plant.y)

        d = est.d if frame.selection.found else math.nan
        record = TickRecord(
            t=t,
            x=self.plant.x,
            y=self.plant.y,
            theta=self.plant.theta,
            d=d,
            d_ref=self.inputs.d_ref,
            v=self.plant.v,
            v_ref=command.v_ref,
            v_dist=v_dist,
            v_dwa=v_dwa,
            omega_ref=command.w_ref,
            v_vi_est=frame.selection.v_vi if frame.selection.found else math.nan,
            v_vi_true=v_vi_true,
            integrator=self.memory.integrator,
            fsm_code=int(state),
            fsm_state=state.name,
            clearance=scenario.world.clearance_at(self.plant.x, self.plant.y) - HALF_FOOTPRINT,
            tether_force=TETHER_STIFFNESS * (d - self.inputs.d_ref),
            goal_dist=goal_dist,
            track_id=frame.selection.track_id if frame.selection.track_id is not None else NO_TRACK,
            selection_ok=self.selection_ok(frame),
            collision=collision,
            estimate_valid=frame.selection.found,
        )

        self.command = command
        self.step_world(command, t)
        return record

    def step_world(self, command: VelocityCommand, t: float) -> None:
        """Advance the robot under ``command`` and every pedestrian by one tick."""
        robot_xy = (self.plant.x, self.plant.y)
        dt = self.scenario.ts
        self.plant = advance(self.plant, command.v_ref, command.w_ref, dt)
        self.pedestrians = [step_pedestrian(p, t, dt, robot_xy) for p in self.pedestrians]


def run_scenario(
    scenario: Scenario,
    gains: DistanceGains,
    *,
    seed: int | None = None,
    on_record: Callable[[TickRecord], None] | None = None,
    scan_writer: ScanLogWriter | None = None,
    dwa_config: DwaConfig | None = None,
    thresholds: FsmThresholds | None = None,
) -> RunResult:
    """Run ``scenario`` tick by tick and compute its metrics.

    The run is a pure function of the scenario, the gains and ``seed``
    (defaulting to the scenario's own): two runs give identical records.

    Raises:
        ScenarioRunError: a module raised; the original error is chained.
    """
    seed = scenario.seed if seed is None else seed
    loop = _Loop(scenario, gains, seed, dwa_config, thresholds)
    log.info(
        "Running %s: %s mode, %d ticks, controller k5=%.4g, seed %d",
        scenario.name,
        scenario.mode,
        scenario.ticks,
        gains.k5,
        seed,
    )

    records = []
    for k in range(scenario.ticks):
        try:
            record = loop.tick(k, scan_writer)
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            raise ScenarioRunError(scenario.name, k, k * scenario.ts, str(exc)) from exc
        records.append(record)
        if on_record is not None:
            on_record(record)

    metrics = compute_metrics(records, scenario.v_max)
    failures = tuple(check_assertions(metrics, scenario.assertions))
    log.info(
        "Finished %s: %d collisions, max |d - d_ref| %.3f m, %d assertion failures",
        scenario.name,
        metrics.collisions,
        metrics.max_abs_error,
        len(failures),
    )
    for failure in failures:
        log.warning("Assertion failed in %s: %s", scenario.name, failure)
    return RunResult(records=tuple(records), metrics=metrics, failures=failures)
