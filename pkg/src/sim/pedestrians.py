"""Scripted pedestrians: timed speed profiles and a reactive follower."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np

from ..planning import GlobalPlan
from .world import Disc

PEDESTRIAN_RADIUS = 0.25
MAX_PEDESTRIAN_SPEED = 3.0
FOLLOWER_ACCEL = 1.0


class WalkMode(StrEnum):
    """How a pedestrian decides its speed."""

    TIMED = "timed"
    FOLLOWER = "follower"


@dataclass(frozen=True, slots=True)
class SpeedProfile:
    """Piecewise-linear speed against time, held constant outside the knots."""

    times: tuple[float, ...]
    speeds: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.times or len(self.times) != len(self.speeds):
            raise ValueError("profile needs matching, non-empty time and speed lists")
        if any(b < a for a, b in zip(self.times, self.times[1:], strict=False)):
            raise ValueError("profile times must be non-decreasing")
        if any(not 0.0 <= v <= MAX_PEDESTRIAN_SPEED for v in self.speeds):
            raise ValueError(f"profile speeds must lie in [0, {MAX_PEDESTRIAN_SPEED}] m/s")

    @classmethod
    def constant(cls, speed: float) -> SpeedProfile:
        """Same speed at all times."""
        return cls((0.0,), (speed,))

    def speed_at(self, t: float) -> float:
        """Interpolated speed at ``t``."""
        return float(np.interp(t, self.times, self.speeds))


@dataclass(frozen=True, slots=True)
class PedestrianScript:
    """Static description of one pedestrian.

    A timed pedestrian walks along ``path`` when given, otherwise straight
    along ``heading``. A follower walks toward the robot at ``comfort_speed``
    and stops closing in below ``min_gap``.
    """

    id: str
    mode: WalkMode
    start: tuple[float, float]
    heading: float = 0.0
    profile: SpeedProfile = SpeedProfile.constant(0.0)
    path: GlobalPlan | None = None
    comfort_speed: float = 0.8
    min_gap: float = 1.2
    user: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.comfort_speed <= MAX_PEDESTRIAN_SPEED:
            raise ValueError(f"comfort speed must lie in [0, {MAX_PEDESTRIAN_SPEED}] m/s")
        if self.min_gap <= 0:
            raise ValueError("min_gap must be positive")


@dataclass(frozen=True, slots=True)
class Pedestrian:
    """Script plus the current kinematic state."""

    script: PedestrianScript
    x: float
    y: float
    heading: float
    speed: float = 0.0
    walked: float = 0.0

    @classmethod
    def spawn(cls, script: PedestrianScript) -> Pedestrian:
        """Pedestrian standing at its start point."""
        heading = script.heading
        if script.path is not None:
            seg = script.path.waypoints[1] - script.path.waypoints[0]
            heading = math.atan2(seg[1], seg[0])
        return cls(script=script, x=script.start[0], y=script.start[1], heading=heading)

    @property
    def velocity(self) -> tuple[float, float]:
        """World-frame velocity."""
        return self.speed * math.cos(self.heading), self.speed * math.sin(self.heading)

    @property
    def disc(self) -> Disc:
        """Body as seen by the LiDAR."""
        return Disc(self.x, self.y, PEDESTRIAN_RADIUS)


def _along_path(path: GlobalPlan, s: float) -> tuple[float, float, float]:
    s = min(max(s, 0.0), path.length)
    x = float(np.interp(s, path.arclength, path.waypoints[:, 0]))
    y = float(np.interp(s, path.arclength, path.waypoints[:, 1]))
    seg = int(np.clip(np.searchsorted(path.arclength, s, side="right") - 1, 0, len(path.waypoints) - 2))
    dx, dy = path.waypoints[seg + 1] - path.waypoints[seg]
    return x, y, math.atan2(dy, dx)


def step_pedestrian(ped: Pedestrian, t: float, dt: float, robot_xy: Sequence[float]) -> Pedestrian:
    """Advance one pedestrian from ``t`` to ``t + dt``."""
    script = ped.script
    if script.mode is WalkMode.TIMED:
        speed = script.profile.speed_at(t)
        walked = ped.walked + speed * dt
        if script.path is not None:
            x, y, heading = _along_path(script.path, walked)
            if walked >= script.path.length:
                speed = 0.0
            return replace(ped, x=x, y=y, heading=heading, speed=speed, walked=walked)
        return replace(
            ped,
            x=ped.x + speed * dt * math.cos(ped.heading),
            y=ped.y + speed * dt * math.sin(ped.heading),
            speed=speed,
            walked=walked,
        )

    dx, dy = robot_xy[0] - ped.x, robot_xy[1] - ped.y
    gap = math.hypot(dx, dy)
    target = script.comfort_speed if gap > script.min_gap else 0.0
    change = min(max(target - ped.speed, -FOLLOWER_ACCEL * dt), FOLLOWER_ACCEL * dt)
    speed = ped.speed + change
    heading = math.atan2(dy, dx) if gap > 1e-9 else ped.heading
    return replace(
        ped,
        x=ped.x + speed * dt * math.cos(heading),
        y=ped.y + speed * dt * math.sin(heading),
        heading=heading,
        speed=speed,
        walked=ped.walked + speed * dt,
    )
