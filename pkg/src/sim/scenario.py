"""Scenario files: world, plan, robot, pedestrians, timed events and assertions."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from enum import StrEnum
from pathlib import Path
from typing import Any

from ..dynamics import DEFAULT_TS
from ..planning import GlobalPlan, GridFormatError, PlanError, load_navigability, load_plan, read_plan_file
from .lidar import RANGE_NOISE
from .pedestrians import PedestrianScript, SpeedProfile, WalkMode
from .world import DEFAULT_BOUNDS, WORLD_RESOLUTION, Box, Disc, World, build_world

log = logging.getLogger(__name__)

DEFAULT_DURATION = 60.0
DEFAULT_SEED = 0
DEFAULT_GOAL_TOLERANCE = 0.5
NAVIGABILITY_RESOLUTION = 0.1


class ScenarioError(ValueError):
    """Raised for unreadable or inconsistent scenario files; ``key`` names the offending entry."""

    def __init__(self, path: Path, key: str, reason: str):
        self.path = path
        self.key = key
        super().__init__(f"{path}: [{key}] {reason}")


class SimMode(StrEnum):
    """``full`` runs the whole stack; ``distance_only`` drives the distance law on a straight lane."""

    FULL = "full"
    DISTANCE_ONLY = "distance_only"


class EventKind(StrEnum):
    """Timed inputs a scenario can inject."""

    MANUAL_ACK = "manual_ack"
    MANUAL_STOP = "manual_stop"
    QUALITY = "quality"
    D_REF = "d_ref"


VALUE_EVENTS = frozenset({EventKind.QUALITY, EventKind.D_REF})


@dataclass(frozen=True, slots=True)
class ScenarioEvent:
    """Input applied at the first tick with ``t`` at or after the event time."""

    t: float
    kind: EventKind
    value: float | None = None


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything a run needs, with paths resolved and angles in radians."""

    name: str
    path: Path
    mode: SimMode
    world: World
    plan: GlobalPlan | None
    robot_pose: tuple[float, float, float]
    pedestrians: tuple[PedestrianScript, ...]
    events: tuple[ScenarioEvent, ...] = ()
    duration: float = DEFAULT_DURATION
    seed: int = DEFAULT_SEED
    ts: float = DEFAULT_TS
    d_ref: float = 1.5
    v_max: float = 1.5
    controller: int = 2
    gains_path: Path | None = None
    localization_noise: bool = False
    lidar_noise: float = RANGE_NOISE
    goal_tolerance: float = DEFAULT_GOAL_TOLERANCE
    assertions: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    @property
    def ticks(self) -> int:
        """Number of control ticks."""
        return int(round(self.duration / self.ts))

    @property
    def user(self) -> PedestrianScript | None:
        """The pedestrian the robot is guiding."""
        return next((p for p in self.pedestrians if p.user), None)


def _number(path: Path, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float) or not math.isfinite(value):
        raise ScenarioError(path, key, f"expected a finite number, got {value!r}")
    return float(value)


def _point(path: Path, key: str, value: Any, size: int = 2) -> tuple[float, ...]:
    if not isinstance(value, list | tuple) or len(value) != size:
        raise ScenarioError(path, key, f"expected a list of {size} numbers, got {value!r}")
    return tuple(_number(path, key, v) for v in value)


def _resolve(base: Path, name: str) -> Path:
    candidate = Path(name)
    return candidate if candidate.is_absolute() else base / candidate


def _plan(path: Path, key: str, value: Any) -> GlobalPlan:
    try:
        if isinstance(value, str):
            return read_plan_file(_resolve(path.parent, value))
        if isinstance(value, list):
            return load_plan([_point(path, key, p) for p in value])
    except PlanError as exc:
        raise ScenarioError(path, key, str(exc)) from exc
    raise ScenarioError(path, key, "expected a plan file name or a list of [x, y] points")


def _select_plan(path: Path, data: Mapping[str, Any]) -> GlobalPlan | None:
    routes = data.get("routes")
    if routes is not None:
        if not isinstance(routes, dict) or not routes:
            raise ScenarioError(path, "routes", "expected a non-empty mapping of route name to plan")
        name = data.get("route", next(iter(routes)))
        if name not in routes:
            raise ScenarioError(path, "route", f"unknown route {name!r}; known: {', '.join(sorted(routes))}")
        log.debug("Using route %r of %d", name, len(routes))
        return _plan(path, f"routes.{name}", routes[name])
    if "plan" in data:
        return _plan(path, "plan", data["plan"])
    return None


def _world(path: Path, data: Mapping[str, Any]) -> World:
    spec = data.get("world") or {}
    if not isinstance(spec, dict):
        raise ScenarioError(path, "world", "expected a mapping")
    bounds = _point(path, "world.bounds", spec.get("bounds", list(DEFAULT_BOUNDS)), 4)
    try:
        boxes = [Box(*_point(path, "world.boxes", b, 4)) for b in spec.get("boxes", [])]
        discs = [Disc(*_point(path, "world.discs", d, 3)) for d in spec.get("discs", [])]
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, "world", str(exc)) from exc

    grids = {}
    for key, default_res in (("navigability", NAVIGABILITY_RESOLUTION), ("occupancy", WORLD_RESOLUTION)):
        if key not in spec:
            continue
        try:
            grids[key] = load_navigability(
                _resolve(path.parent, str(spec[key])),
                _number(path, f"world.{key}_resolution", spec.get(f"{key}_resolution", default_res)),
                _point(path, f"world.{key}_origin", spec.get(f"{key}_origin", [0.0, 0.0])),
            )
        except GridFormatError as exc:
            raise ScenarioError(path, f"world.{key}", str(exc)) from exc
    return build_world(
        boxes,
        discs,
        bounds=bounds,
        occupancy_image=grids.get("occupancy"),
        navigability=grids.get("navigability"),
    )


def _profile(path: Path, key: str, value: Any) -> SpeedProfile:
    if isinstance(value, int | float) and not isinstance(value, bool):
        knots = [(0.0, float(value))]
    elif isinstance(value, list) and value:
        knots = [_point(path, key, knot) for knot in value]
    else:
        raise ScenarioError(path, key, "expected a speed or a list of [t, speed] knots")
    try:
        return SpeedProfile(tuple(k[0] for k in knots), tuple(k[1] for k in knots))
    except ValueError as exc:
        raise ScenarioError(path, key, str(exc)) from exc


def _pedestrian(path: Path, index: int, spec: Any) -> PedestrianScript:
    key = f"pedestrians[{index}]"
    if not isinstance(spec, dict):
        raise ScenarioError(path, key, "expected a mapping")
    try:
        mode = WalkMode(spec.get("mode", WalkMode.TIMED))
    except ValueError as exc:
        raise ScenarioError(path, f"{key}.mode", f"unknown mode {spec.get('mode')!r}") from exc
    if "start" not in spec:
        raise ScenarioError(path, f"{key}.start", "missing start point")
    try:
        return PedestrianScript(
            id=str(spec.get("id", index)),
            mode=mode,
            start=_point(path, f"{key}.start", spec["start"]),
            heading=math.radians(_number(path, f"{key}.heading", spec.get("heading", 0.0))),
            profile=_profile(path, f"{key}.profile", spec.get("profile", 0.0)),
            path=_plan(path, f"{key}.path", spec["path"]) if "path" in spec else None,
            comfort_speed=_number(path, f"{key}.comfort_speed", spec.get("comfort_speed", 0.8)),
            min_gap=_number(path, f"{key}.min_gap", spec.get("min_gap", 1.2)),
            user=bool(spec.get("user", False)),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, key, str(exc)) from exc


def _event(path: Path, key: str, spec: Any) -> ScenarioEvent:
    if not isinstance(spec, dict) or "t" not in spec or "kind" not in spec:
        raise ScenarioError(path, key, "expected a mapping with 't' and 'kind'")
    try:
        kind = EventKind(spec["kind"])
    except ValueError as exc:
        raise ScenarioError(path, f"{key}.kind", f"unknown event kind {spec['kind']!r}") from exc
    value = None
    if kind in VALUE_EVENTS:
        if "value" not in spec:
            raise ScenarioError(path, f"{key}.value", f"{kind} events need a value")
        value = _number(path, f"{key}.value", spec["value"])
    return ScenarioEvent(t=_number(path, f"{key}.t", spec["t"]), kind=kind, value=value)


def parse_event_lines(lines: Iterable[str], source: Path = Path("<stdin>")) -> list[ScenarioEvent]:
    """Parse ``t kind [value]`` lines; blank lines and ``#`` comments are skipped."""
    events = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        spec: dict[str, Any] = {"kind": parts[1] if len(parts) > 1 else ""}
        try:
            spec["t"] = float(parts[0])
            if len(parts) > 2:
                spec["value"] = float(parts[2])
        except ValueError as exc:
            raise ScenarioError(source, f"events:{lineno}", f"non-numeric field in {text!r}") from exc
        events.append(_event(source, f"events:{lineno}", spec))
    return events


def with_events(scenario: Scenario, extra: Iterable[ScenarioEvent]) -> Scenario:
    """Scenario with ``extra`` merged into its events, ordered by time (stable)."""
    merged = sorted([*scenario.events, *extra], key=lambda e: e.t)
    return replace(scenario, events=tuple(merged))


def load_scenario(path: Path, *, d_ref: float = 1.5, v_max: float = 1.5) -> Scenario:
    """Read and validate a scenario JSON file.

    ``d_ref`` and ``v_max`` apply when the robot block leaves them out.

    Raises:
        ScenarioError: unreadable file, bad values, or references to missing
            plan or map files.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(path, "file", f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(path, "file", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(path, "file", "top level must be a mapping")

    try:
        mode = SimMode(data.get("mode", SimMode.FULL))
    except ValueError as exc:
        raise ScenarioError(path, "mode", f"unknown mode {data.get('mode')!r}") from exc

    robot = data.get("robot") or {}
    pose = _point(path, "robot.pose", robot.get("pose", [0.0, 0.0, 0.0]), 3)
    plan = _select_plan(path, data)
    if mode is SimMode.FULL and plan is None:
        raise ScenarioError(path, "plan", "full-stack scenarios need a plan or routes")

    controller = robot.get("controller", 2)
    if controller not in (1, 2):
        raise ScenarioError(path, "robot.controller", f"expected 1 or 2, got {controller!r}")

    pedestrians = tuple(_pedestrian(path, i, p) for i, p in enumerate(data.get("pedestrians", [])))
    if sum(p.user for p in pedestrians) > 1:
        raise ScenarioError(path, "pedestrians", "at most one pedestrian can be the user")

    events = sorted((_event(path, f"events[{i}]", e) for i, e in enumerate(data.get("events", []))), key=lambda e: e.t)
    assertions = data.get("assert", {})
    if not isinstance(assertions, dict) or not all(isinstance(v, dict) for v in assertions.values()):
        raise ScenarioError(path, "assert", "expected a mapping of metric name to {min, max}")

    duration = _number(path, "duration", data.get("duration", DEFAULT_DURATION))
    if duration <= 0:
        raise ScenarioError(path, "duration", "must be positive")
    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioError(path, "seed", f"expected a non-negative integer, got {seed!r}")

    scenario = Scenario(
        name=str(data.get("name", path.stem)),
        path=path,
        mode=mode,
        world=_world(path, data),
        plan=plan,
        robot_pose=(pose[0], pose[1], math.radians(pose[2])),
        pedestrians=pedestrians,
        events=tuple(events),
        duration=duration,
        seed=seed,
        d_ref=_number(path, "robot.d_ref", robot.get("d_ref", d_ref)),
        v_max=_number(path, "robot.v_max", robot.get("v_max", v_max)),
        controller=controller,
        gains_path=_resolve(path.parent, robot["gains"]) if robot.get("gains") else None,
        localization_noise=bool(data.get("localization", {}).get("noise", False)),
        lidar_noise=_number(path, "lidar.noise", data.get("lidar", {}).get("noise", RANGE_NOISE)),
        goal_tolerance=_number(path, "goal_tolerance", data.get("goal_tolerance", DEFAULT_GOAL_TOLERANCE)),
        assertions={str(k): {str(b): _number(path, f"assert.{k}.{b}", x) for b, x in v.items()} for k, v in assertions.items()},
    )
    log.info(
        "Loaded scenario %s (%s, %.0f s, %d pedestrians, %d events)",
        scenario.name,
        scenario.mode,
        scenario.duration,
        len(pedestrians),
        len(events),
    )
    return scenario
