"""Rolling local costmap: navigability base layer, scan marks and inflation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.ndimage import distance_transform_edt

from ..dynamics import FloatArray
from .grid import GridMap

COSTMAP_RESOLUTION = 0.1
COSTMAP_SIZE = 200
HALF_FOOTPRINT = 0.3
SAFETY_CLEARANCE = 0.2
INFLATION_RADIUS = HALF_FOOTPRINT + SAFETY_CLEARANCE


class CellState(IntEnum):
    """Occupancy class of a costmap cell."""

    FREE = 0
    INFLATED = 1
    LETHAL = 2


@dataclass(frozen=True, eq=False)
class Costmap:
    """Square window of cells aligned to the global ``resolution`` lattice."""

    origin: tuple[float, float]
    cells: np.ndarray
    resolution: float = COSTMAP_RESOLUTION
    inflation: float = INFLATION_RADIUS

    @property
    def size(self) -> int:
        """Cells per side."""
        return int(self.cells.shape[0])

    @classmethod
    def empty(cls, size: int = COSTMAP_SIZE, resolution: float = COSTMAP_RESOLUTION, inflation: float = INFLATION_RADIUS) -> Costmap:
        """All-free window at the origin, used before the first update."""
        return cls(origin=(0.0, 0.0), cells=np.zeros((size, size), dtype=np.int8), resolution=resolution, inflation=inflation)

    def cell_index(self, xs: FloatArray, ys: FloatArray) -> tuple[np.ndarray, np.ndarray]:
        """(row, col) of world points; may fall outside the window."""
        cols = np.floor((np.asarray(xs) - self.origin[0]) / self.resolution).astype(int)
        rows = np.floor((np.asarray(ys) - self.origin[1]) / self.resolution).astype(int)
        return rows, cols

    def states(self, xs: FloatArray, ys: FloatArray) -> np.ndarray:
        """Cell states at world points; anything outside the window is lethal."""
        rows, cols = self.cell_index(xs, ys)
        inside = (rows >= 0) & (rows < self.size) & (cols >= 0) & (cols < self.size)
        out = np.full(np.shape(rows), CellState.LETHAL, dtype=np.int8)
        out[inside] = self.cells[rows[inside], cols[inside]]
        return out

    def state_at(self, x: float, y: float) -> CellState:
        """State of the cell containing (x, y)."""
        return CellState(int(self.states(np.array([x]), np.array([y]))[0]))

    def count(self, state: CellState) -> int:
        """Number of cells in ``state``."""
        return int(np.count_nonzero(self.cells == state))

    def cell_centers(self) -> tuple[FloatArray, FloatArray]:
        """World x and y of every cell centre, shaped like ``cells``."""
        offsets = (np.arange(self.size) + 0.5) * self.resolution
        return np.meshgrid(self.origin[0] + offsets, self.origin[1] + offsets)


def window_origin(pose: tuple[float, float, float], size: int, resolution: float) -> tuple[float, float]:
    """Lower-left corner of a window centred on the robot, snapped to the lattice."""
    half = size * resolution / 2
    return (
        math.floor((pose[0] - half) / resolution) * resolution,
        math.floor((pose[1] - half) / resolution) * resolution,
    )


def update_costmap(
    costmap: Costmap,
    scan_points: FloatArray,
    base: GridMap | None,
    pose: tuple[float, float, float],
) -> Costmap:
    """Rebuild ``costmap``'s window around ``pose``.

    Lethal cells are the non-navigable base cells (cells off the base map
    included) plus every cell holding a scan point. Cells whose centre is
    within the inflation radius of a lethal centre become inflated.
    """
    size, res = costmap.size, costmap.resolution
    origin = window_origin(pose, size, res)
    lethal = np.zeros((size, size), dtype=bool)

    if base is not None:
        offsets = (np.arange(size) + 0.5) * res
        gx, gy = np.meshgrid(origin[0] + offsets, origin[1] + offsets)
        lethal |= ~base.lookup(gx, gy, outside=False)

    pts = np.asarray(scan_points, dtype=float).reshape(-1, 2)
    if pts.shape[0]:
        cols = np.floor((pts[:, 0] - origin[0]) / res).astype(int)
        rows = np.floor((pts[:, 1] - origin[1]) / res).astype(int)
        inside = (rows >= 0) & (rows < size) & (cols >= 0) & (cols < size)
        lethal[rows[inside], cols[inside]] = True

    cells = np.zeros((size, size), dtype=np.int8)
    if lethal.any():
        distance = distance_transform_edt(~lethal, sampling=res)
        cells[distance <= costmap.inflation + 1e-9] = CellState.INFLATED
        cells[lethal] = CellState.LETHAL
    return Costmap(origin=origin, cells=cells, resolution=res, inflation=costmap.inflation)
