"""Synthetic planar LiDAR: exact ray intersection with the world and pedestrians."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..dynamics import FloatArray
from ..perception import BEAM_COUNT, MAX_RANGE, Scan, beam_angles
from .world import WORLD_RESOLUTION, Box, Disc, World

RANGE_NOISE = 0.02
# Closest reportable return; ranges stay in (0, max_range].
MIN_RANGE = WORLD_RESOLUTION
MAX_MARCH_STEPS = 2000
_TINY = 1e-12


@dataclass(frozen=True, slots=True)
class BeamConfig:
    """Beam layout and range noise of the simulated sensor."""

    beams: int = BEAM_COUNT
    max_range: float = MAX_RANGE
    noise: float = RANGE_NOISE


def _nonzero(values: FloatArray) -> FloatArray:
    return np.where(np.abs(values) < _TINY, np.copysign(_TINY, values), values)


def _boxes(ox: float, oy: float, dx: FloatArray, dy: FloatArray, boxes: Sequence[Box]) -> FloatArray:
    """Slab test; rays starting inside a box report range 0."""
    best = np.full(dx.shape, math.inf)
    inv_x, inv_y = 1.0 / _nonzero(dx), 1.0 / _nonzero(dy)
    for box in boxes:
        tx1, tx2 = (box.x_min - ox) * inv_x, (box.x_max - ox) * inv_x
        ty1, ty2 = (box.y_min - oy) * inv_y, (box.y_max - oy) * inv_y
        near = np.maximum(np.minimum(tx1, tx2), np.minimum(ty1, ty2))
        far = np.minimum(np.maximum(tx1, tx2), np.maximum(ty1, ty2))
        hit = (near <= far) & (far >= 0.0)
        best = np.where(hit, np.minimum(best, np.maximum(near, 0.0)), best)
    return best


def _discs(ox: float, oy: float, dx: FloatArray, dy: FloatArray, discs: Sequence[Disc]) -> FloatArray:
    best = np.full(dx.shape, math.inf)
    for disc in discs:
        ex, ey = ox - disc.x, oy - disc.y
        b = ex * dx + ey * dy
        c = ex * ex + ey * ey - disc.r * disc.r
        root = b * b - c
        ok = root >= 0.0
        sq = np.sqrt(np.where(ok, root, 0.0))
        near, far = -b - sq, -b + sq
        t = np.where(near >= 0.0, near, np.where(far >= 0.0, 0.0, math.inf))
        best = np.where(ok, np.minimum(best, t), best)
    return best


def _march(world: World, ox: float, oy: float, dx: FloatArray, dy: FloatArray, max_range: float) -> FloatArray:
    """Sphere-trace image-sourced cells using their distance transform."""
    grid, clearance = world.raster_only, world.raster_clearance
    if grid is None or clearance is None:
        return np.full(dx.shape, math.inf)
    res = grid.resolution
    rows, cols = grid.shape
    t = np.zeros(dx.shape)
    result = np.full(dx.shape, math.inf)
    active = np.ones(dx.shape, dtype=bool)
    for _ in range(MAX_MARCH_STEPS):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        px, py = ox + t[idx] * dx[idx], oy + t[idx] * dy[idx]
        hit = grid.lookup(px, py, outside=False)
        result[idx[hit]] = t[idx[hit]]
        active[idx[hit]] = False

        c = np.floor((px - grid.origin[0]) / res).astype(int)
        r = np.floor((py - grid.origin[1]) / res).astype(int)
        inside = (r >= 0) & (r < rows) & (c >= 0) & (c < cols)
        dist = np.full(idx.shape, math.inf)
        dist[inside] = clearance[r[inside], c[inside]]
        step = np.maximum(dist - res * math.sqrt(2.0), res / 2)
        t[idx] += step
        done = ~hit & (t[idx] > max_range)
        active[idx[done]] = False
    return result


def raycast(
    world: World,
    pose: Sequence[float],
    pedestrians: Sequence[Disc] = (),
    *,
    rng: np.random.Generator | None = None,
    config: BeamConfig | None = None,
    timestamp: float = 0.0,
    reported_pose: Sequence[float] | None = None,
) -> Scan:
    """Cast every beam from the true ``pose``.

    Hits get Gaussian range noise from ``rng``; a noisy range at or beyond the
    maximum becomes a miss. The returned scan is stamped with
    ``reported_pose`` (the localization estimate) when given.
    """
    config = config or BeamConfig()
    angles = beam_angles(config.beams)
    ox, oy, theta = float(pose[0]), float(pose[1]), float(pose[2])
    dx, dy = np.cos(angles + theta), np.sin(angles + theta)

    ranges = np.minimum.reduce(
        [
            _boxes(ox, oy, dx, dy, world.boxes),
            _discs(ox, oy, dx, dy, (*world.discs, *pedestrians)),
            _march(world, ox, oy, dx, dy, config.max_range),
        ]
    )
    hits = ranges < config.max_range
    if rng is not None and config.noise > 0:
        noise = rng.normal(0.0, config.noise, size=ranges.shape)
        ranges = np.where(hits, ranges + noise, ranges)
        hits &= ranges < config.max_range
    ranges = np.where(hits, np.maximum(ranges, MIN_RANGE), config.max_range)

    stamped = tuple(float(v) for v in (reported_pose if reported_pose is not None else pose))
    return Scan(
        timestamp=timestamp,
        pose=(stamped[0], stamped[1], stamped[2]),
        angles=angles,
        ranges=ranges,
        hits=hits,
        max_range=config.max_range,
    )
