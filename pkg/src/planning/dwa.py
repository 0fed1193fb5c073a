"""Dynamic-window local planner scored against the global plan."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from ..dynamics import FloatArray
from .costmap import HALF_FOOTPRINT, CellState, Costmap
from .plan import GlobalPlan

log = logging.getLogger(__name__)

FOOTPRINT_STEP = 0.05
ZERO_SNAP = 1e-12


@dataclass(frozen=True, slots=True)
class Limits:
    """Speed and acceleration bounds of the base."""

    v_min: float = 0.0
    v_max: float = 1.5
    w_max: float = 1.0
    a_max: float = 1.0
    alpha_max: float = 1.5


@dataclass(frozen=True, slots=True)
class DwaConfig:
    """Sampling, horizon and cost weights."""

    v_samples: int = 21
    w_samples: int = 21
    horizon: float = 3.0
    step: float = 0.1
    period: float = 0.1
    w_plan: float = 1.0
    w_goal: float = 0.1
    max_workers: int = 0
    chunk_size: int = 64


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Constant-(v, ω) arc sampled over the horizon."""

    v: float
    w: float
    poses: FloatArray
    cost: float
    feasible: bool


@dataclass(frozen=True, slots=True)
class DwaResult:
    """Chosen command and whether a moving arc was collision-free."""

    v: float
    w: float
    feasible: bool
    best: Trajectory | None = None
    candidates: int = 0
    collisions: int = 0


def _window_samples(center: float, lo: float, hi: float, count: int) -> FloatArray:
    samples = np.concatenate([np.linspace(lo, hi, count), [min(max(center, lo), hi)]])
    samples[np.abs(samples) < ZERO_SNAP] = 0.0
    return np.unique(samples)


def dynamic_window(v: float, w: float, limits: Limits, period: float) -> tuple[float, float, float, float]:
    """(v_lo, v_hi, w_lo, w_hi) reachable within one period, clipped to the limits."""
    v_lo = max(limits.v_min, v - limits.a_max * period)
    v_hi = min(limits.v_max, v + limits.a_max * period)
    w_lo = max(-limits.w_max, w - limits.alpha_max * period)
    w_hi = min(limits.w_max, w + limits.alpha_max * period)
    if v_lo > v_hi:
        v_lo = v_hi = min(max(v, limits.v_min), limits.v_max)
    if w_lo > w_hi:
        w_lo = w_hi = min(max(w, -limits.w_max), limits.w_max)
    return v_lo, v_hi, w_lo, w_hi


def sample_window(v: float, w: float, limits: Limits, config: DwaConfig) -> FloatArray:
    """Grid of (v, ω) candidates; the current values are always included."""
    v_lo, v_hi, w_lo, w_hi = dynamic_window(v, w, limits, config.period)
    vs = _window_samples(v, v_lo, v_hi, config.v_samples)
    ws = _window_samples(w, w_lo, w_hi, config.w_samples)
    if w_lo <= 0.0 <= w_hi and 0.0 not in ws:
        ws = np.sort(np.append(ws, 0.0))
    grid = np.array(np.meshgrid(vs, ws, indexing="ij")).reshape(2, -1).T
    return grid


def arc_poses(pose: tuple[float, float, float], v: FloatArray, w: FloatArray, horizon: float, step: float) -> FloatArray:
    """Closed-form unicycle poses, shape (candidates, steps, 3), first step at ``step``."""
    v = np.atleast_1d(np.asarray(v, dtype=float))[:, None]
    w = np.atleast_1d(np.asarray(w, dtype=float))[:, None]
    t = np.arange(1, int(round(horizon / step)) + 1, dtype=float)[None, :] * step
    x0, y0, th0 = pose
    th = th0 + w * t
    straight = np.abs(w) < 1e-9
    safe_w = np.where(straight, 1.0, w)
    x_arc = x0 + v / safe_w * (np.sin(th) - math.sin(th0))
    y_arc = y0 - v / safe_w * (np.cos(th) - math.cos(th0))
    x_line = x0 + v * t * math.cos(th0)
    y_line = y0 + v * t * math.sin(th0)
    x = np.where(straight, x_line, x_arc)
    y = np.where(straight, y_line, y_arc)
    return np.stack([x, y, np.broadcast_to(th, x.shape)], axis=-1)


def footprint_outline(half: float = HALF_FOOTPRINT, spacing: float = FOOTPRINT_STEP) -> FloatArray:
    """Points on the perimeter of the square footprint in the robot frame."""
    n = max(1, round(2 * half / spacing))
    edge = np.linspace(-half, half, n + 1)
    return np.unique(
        np.concatenate(
            [
                np.column_stack([edge, np.full_like(edge, -half)]),
                np.column_stack([edge, np.full_like(edge, half)]),
                np.column_stack([np.full_like(edge, -half), edge]),
                np.column_stack([np.full_like(edge, half), edge]),
            ]
        ),
        axis=0,
    )


def footprint_hits_lethal(costmap: Costmap, poses: FloatArray) -> bool:
    """True if the square footprint at any pose covers a lethal cell."""
    outline = footprint_outline()
    poses = np.asarray(poses, dtype=float).reshape(-1, 3)
    c, s = np.cos(poses[:, 2])[:, None], np.sin(poses[:, 2])[:, None]
    xs = poses[:, 0][:, None] + c * outline[:, 0] - s * outline[:, 1]
    ys = poses[:, 1][:, None] + s * outline[:, 0] + c * outline[:, 1]
    return bool(np.any(costmap.states(xs, ys) == CellState.LETHAL))


def _evaluate(
    chunk: FloatArray,
    pose: tuple[float, float, float],
    costmap: Costmap,
    plan: GlobalPlan,
    config: DwaConfig,
) -> tuple[FloatArray, FloatArray, np.ndarray]:
    """Poses, endpoint costs and collision flags of a block of candidates."""
    poses = arc_poses(pose, chunk[:, 0], chunk[:, 1], config.horizon, config.step)
    blocked = np.any(costmap.states(poses[..., 0], poses[..., 1]) != CellState.FREE, axis=1)
    d_plan, s = plan.project_many(poses[:, -1, :2])
    cost = config.w_plan * d_plan**2 + config.w_goal * plan.remaining(s)
    return poses, cost, blocked


def dwa_plan(
    costmap: Costmap,
    plan: GlobalPlan,
    pose: tuple[float, float, float],
    v: float,
    w: float,
    limits: Limits | None = None,
    config: DwaConfig | None = None,
) -> DwaResult:
    """Best collision-free arc in the dynamic window around (v, ω).

    A candidate is rejected when its centre passes over an inflated or lethal
    cell. The stationary arc is always available and never checked; when no
    candidate with v > 0 survives, (0, 0) is returned with ``feasible=False``.
    Ties are broken by lower |ω|, then lower v.
    """
    limits = limits or Limits()
    config = config or DwaConfig()
    candidates = sample_window(v, w, limits, config)

    chunks = [candidates[i : i + config.chunk_size] for i in range(0, len(candidates), config.chunk_size)]
    results: dict[int, tuple[FloatArray, FloatArray, np.ndarray]] = {}
    if config.max_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
            futures = {executor.submit(_evaluate, chunk, pose, costmap, plan, config): idx for idx, chunk in enumerate(chunks)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    else:
        for idx, chunk in enumerate(chunks):
            results[idx] = _evaluate(chunk, pose, costmap, plan, config)

    poses = np.concatenate([results[i][0] for i in range(len(chunks))])
    cost = np.concatenate([results[i][1] for i in range(len(chunks))])
    blocked = np.concatenate([results[i][2] for i in range(len(chunks))])

    free = np.flatnonzero(~blocked)
    order = free[np.lexsort((candidates[free, 0], np.abs(candidates[free, 1]), cost[free]))]
    # The footprint check on the chosen arc backs up the centre-vs-inflation test.
    pick = next((int(i) for i in order if not footprint_hits_lethal(costmap, poses[i])), None)
    if pick is None or not np.any(candidates[order, 0] > 0):
        log.debug("No collision-free moving arc among %d candidates", len(candidates))
        return DwaResult(0.0, 0.0, False, candidates=len(candidates) + 1, collisions=int(blocked.sum()))

    best = Trajectory(float(candidates[pick, 0]), float(candidates[pick, 1]), poses[pick], float(cost[pick]), True)
    d0, s0 = plan.project(pose[:2])
    stationary_cost = config.w_plan * d0**2 + config.w_goal * float(plan.remaining(s0))
    if stationary_cost <= best.cost:
        stationary_poses = arc_poses(pose, np.zeros(1), np.zeros(1), config.horizon, config.step)
        best = Trajectory(0.0, 0.0, stationary_poses[0], stationary_cost, True)
    return DwaResult(best.v, best.w, True, best=best, candidates=len(candidates) + 1, collisions=int(blocked.sum()))
