"""Pick the user's track from the region behind the robot."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .tracking import Track

ROI_BEHIND = 4.0
ROI_HALF_WIDTH = 1.0
ACCEL_FILTER_TAU = 0.3


@dataclass(frozen=True, slots=True)
class UserSelection:
    """Selected track with its distance and velocity along the robot heading."""

    track_id: int | None = None
    d: float = math.nan
    v_vi: float = 0.0
    a_vi: float = 0.0

    @property
    def found(self) -> bool:
        """A track was selected."""
        return self.track_id is not None


NO_USER = UserSelection()


def to_robot_frame(point: Sequence[float], pose: Sequence[float]) -> tuple[float, float]:
    """World point expressed in the robot frame (x forward, y left)."""
    x, y, theta = pose
    dx, dy = point[0] - x, point[1] - y
    c, s = math.cos(theta), math.sin(theta)
    return c * dx + s * dy, -s * dx + c * dy


def in_roi(x_r: float, y_r: float) -> bool:
    """Inside the rectangle 4 m behind and ±1 m beside the robot."""
    return -ROI_BEHIND <= x_r <= 0.0 and abs(y_r) <= ROI_HALF_WIDTH


def select_user(tracks: Sequence[Track], pose: Sequence[float], d_ref: float) -> UserSelection:
    """Nearest published track to the point ``d_ref`` behind the robot.

    Ties go to the lowest track id. ``d`` is the distance from the robot to
    the user along the heading (positive behind), ``v_vi`` the user's velocity
    projected on the heading. ``a_vi`` is left to :class:`UserSelector`.
    """
    theta = pose[2]
    best: tuple[float, int, Track, float] | None = None
    for track in tracks:
        x_r, y_r = to_robot_frame(track.position, pose)
        if not in_roi(x_r, y_r):
            continue
        gap = math.hypot(x_r + d_ref, y_r)
        key = (gap, track.id)
        if best is None or key < best[:2]:
            best = (gap, track.id, track, -x_r)
    if best is None:
        return NO_USER
    _gap, track_id, track, d = best
    vx, vy = track.velocity
    return UserSelection(track_id=track_id, d=d, v_vi=vx * math.cos(theta) + vy * math.sin(theta))


class UserSelector:
    """Adds a low-pass filtered derivative of v_VI to the selection."""

    def __init__(self, tau: float = ACCEL_FILTER_TAU):
        self.tau = tau
        self._last: UserSelection = NO_USER

    def reset(self) -> None:
        """Forget the filter state."""
        self._last = NO_USER

    def update(self, tracks: Sequence[Track], pose: Sequence[float], d_ref: float, dt: float) -> UserSelection:
        """Select and attach a_VI; the filter restarts whenever the track changes."""
        sel = select_user(tracks, pose, d_ref)
        if not sel.found:
            self._last = NO_USER
            return sel
        a_vi = 0.0
        if self._last.track_id == sel.track_id:
            raw = (sel.v_vi - self._last.v_vi) / dt
            a_vi = self._last.a_vi + dt / (self.tau + dt) * (raw - self._last.a_vi)
        sel = UserSelection(track_id=sel.track_id, d=sel.d, v_vi=sel.v_vi, a_vi=a_vi)
        self._last = sel
        return sel
