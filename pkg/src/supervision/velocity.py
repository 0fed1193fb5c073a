"""Velocity selector fusing the planner arc with the distance controller."""

from __future__ import annotations

from dataclasses import dataclass

V_EPSILON = 1e-3


@dataclass(frozen=True, slots=True)
class VelocityCommand:
    """Reference pair sent to the base."""

    v_ref: float
    w_ref: float


STOP = VelocityCommand(0.0, 0.0)


def select_velocity(v_dwa: float, w_dwa: float, v_dist: float, v_max: float) -> VelocityCommand:
    """Take the slower of the planner and distance speeds, keeping the planner's curvature.

    ``v_dist`` is first clamped to ``[0, v_max]``. When the distance
    controller is the slower of the two, the yaw rate is scaled by the same
    ratio so the robot stays on the planner's arc. A planner speed below
    ``V_EPSILON`` stops the robot.
    """
    if v_dwa < V_EPSILON:
        return STOP
    v_dist = min(max(v_dist, 0.0), v_max)
    if v_dist < v_dwa:
        return VelocityCommand(v_dist, abs(v_dist / v_dwa) * w_dwa)
    return VelocityCommand(v_dwa, w_dwa)
