"""Static world: obstacle primitives, their rasterized occupancy and clearance."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from ..dynamics import FloatArray
from ..planning import HALF_FOOTPRINT, GridMap, footprint_outline

log = logging.getLogger(__name__)

WORLD_RESOLUTION = 0.05
DEFAULT_BOUNDS = (-20.0, -20.0, 40.0, 20.0)


@dataclass(frozen=True, slots=True)
class Box:
    """Axis-aligned rectangular obstacle."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"box corners out of order: {self}")


@dataclass(frozen=True, slots=True)
class Disc:
    """Round obstacle such as a bollard or a pillar."""

    x: float
    y: float
    r: float

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError(f"disc radius must be positive, got {self.r}")


@dataclass(frozen=True, eq=False)
class World:
    """Obstacles, a 5 cm occupancy raster of them and the navigability base map.

    ``raster_only`` marks occupied cells that came from an occupancy image
    rather than a primitive; the LiDAR has to find those by marching.
    """

    boxes: tuple[Box, ...]
    discs: tuple[Disc, ...]
    occupancy: GridMap
    raster_only: GridMap | None
    navigability: GridMap | None
    clearance: FloatArray
    raster_clearance: FloatArray | None = None

    def occupied(self, xs: FloatArray, ys: FloatArray) -> np.ndarray:
        """Occupancy at world points; anything off the raster is open space."""
        return self.occupancy.lookup(xs, ys, outside=False)

    def clearance_at(self, x: float, y: float) -> float:
        """Distance from (x, y) to the nearest occupied cell centre."""
        rows, cols = self.occupancy.shape
        col = math.floor((x - self.occupancy.origin[0]) / self.occupancy.resolution)
        row = math.floor((y - self.occupancy.origin[1]) / self.occupancy.resolution)
        if not (0 <= row < rows and 0 <= col < cols):
            return math.inf
        return float(self.clearance[row, col])

    def footprint_collides(self, pose: Sequence[float], half: float = HALF_FOOTPRINT) -> bool:
        """True when the square footprint at ``pose`` covers an occupied cell."""
        outline = footprint_outline(half, self.occupancy.resolution)
        c, s = math.cos(pose[2]), math.sin(pose[2])
        xs = np.append(pose[0] + c * outline[:, 0] - s * outline[:, 1], pose[0])
        ys = np.append(pose[1] + s * outline[:, 0] + c * outline[:, 1], pose[1])
        return bool(np.any(self.occupied(xs, ys)))


def _cell_centers(bounds: tuple[float, float, float, float], resolution: float) -> tuple[FloatArray, FloatArray]:
    cols = math.ceil((bounds[2] - bounds[0]) / resolution - 1e-9)
    rows = math.ceil((bounds[3] - bounds[1]) / resolution - 1e-9)
    xs = bounds[0] + (np.arange(cols) + 0.5) * resolution
    ys = bounds[1] + (np.arange(rows) + 0.5) * resolution
    return np.meshgrid(xs, ys)


def rasterize(
    boxes: Sequence[Box],
    discs: Sequence[Disc],
    bounds: tuple[float, float, float, float],
    resolution: float = WORLD_RESOLUTION,
) -> np.ndarray:
    """Cells overlapped by any primitive; row 0 is the lowest y."""
    cx, cy = _cell_centers(bounds, resolution)
    half = resolution / 2
    cells = np.zeros(cx.shape, dtype=bool)
    for box in boxes:
        cells |= (cx + half > box.x_min) & (cx - half < box.x_max) & (cy + half > box.y_min) & (cy - half < box.y_max)
    for disc in discs:
        # nearest point of each cell square to the disc centre
        nx = np.clip(disc.x, cx - half, cx + half)
        ny = np.clip(disc.y, cy - half, cy + half)
        cells |= np.hypot(nx - disc.x, ny - disc.y) < disc.r
    return cells


def build_world(
    boxes: Sequence[Box] = (),
    discs: Sequence[Disc] = (),
    *,
    bounds: tuple[float, float, float, float] = DEFAULT_BOUNDS,
    occupancy_image: GridMap | None = None,
    navigability: GridMap | None = None,
    resolution: float = WORLD_RESOLUTION,
) -> World:
    """Rasterize the primitives (plus an optional occupancy image) and precompute clearance.

    ``occupancy_image`` holds True for free cells, as read by
    :func:`~src.planning.load_navigability`.
    """
    cells = rasterize(boxes, discs, bounds, resolution)
    raster_only = raster_clearance = None
    if occupancy_image is not None:
        cx, cy = _cell_centers(bounds, resolution)
        blocked = ~occupancy_image.lookup(cx, cy, outside=True)
        if blocked.any():
            raster_only = GridMap(cells=blocked, resolution=resolution, origin=bounds[:2])
            raster_clearance = distance_transform_edt(~blocked, sampling=resolution)
            cells |= blocked

    if cells.any():
        clearance = distance_transform_edt(~cells, sampling=resolution)
    else:
        clearance = np.full(cells.shape, math.inf)

    occupancy = GridMap(cells=cells, resolution=resolution, origin=bounds[:2])
    log.debug(
        "World %dx%d cells, %d boxes, %d discs, %d occupied",
        cells.shape[1],
        cells.shape[0],
        len(boxes),
        len(discs),
        int(cells.sum()),
    )
    return World(
        boxes=tuple(boxes),
        discs=tuple(discs),
        occupancy=occupancy,
        raster_only=raster_only,
        navigability=navigability,
        clearance=clearance,
        raster_clearance=raster_clearance,
    )
