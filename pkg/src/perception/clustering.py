"""Single-linkage Euclidean clustering and the human-size gate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..dynamics import FloatArray

LINK_DISTANCE = 0.3
MIN_POINTS = 3
HUMAN_MIN_SIZE = 0.15
HUMAN_MAX_SIZE = 1.0


@dataclass(frozen=True, slots=True)
class OrientedBox:
    """Rectangle aligned with the principal axes of a point set."""

    center: tuple[float, float]
    heading: float
    width: float
    depth: float

    def contains(self, points: FloatArray, tol: float = 1e-9) -> bool:
        """True when every point lies inside the box."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        rel = np.asarray(points, dtype=float) - np.asarray(self.center)
        along = rel @ np.array([c, s])
        across = rel @ np.array([-s, c])
        return bool(np.all(np.abs(along) <= self.width / 2 + tol) and np.all(np.abs(across) <= self.depth / 2 + tol))


def oriented_box(points: FloatArray) -> OrientedBox:
    """PCA box: width along the major axis, depth across it."""
    pts = np.asarray(points, dtype=float)
    mean = pts.mean(axis=0)
    if pts.shape[0] < 2:
        return OrientedBox((float(mean[0]), float(mean[1])), 0.0, 0.0, 0.0)
    _w, V = np.linalg.eigh(np.cov((pts - mean).T))
    major = V[:, 1]
    heading = math.atan2(major[1], major[0])
    minor = np.array([-major[1], major[0]])
    along = (pts - mean) @ major
    across = (pts - mean) @ minor
    width = float(along.max() - along.min())
    depth = float(across.max() - across.min())
    mid = mean + major * (along.max() + along.min()) / 2 + minor * (across.max() + across.min()) / 2
    return OrientedBox(
        center=(float(mid[0]), float(mid[1])),
        heading=heading,
        width=width,
        depth=depth,
    )


@dataclass(frozen=True, eq=False)
class Cluster:
    """Points of one object with their centroid and oriented box."""

    points: FloatArray
    centroid: tuple[float, float]
    box: OrientedBox

    @classmethod
    def from_points(cls, points: FloatArray) -> Cluster:
        """Derive the centroid and box."""
        pts = np.asarray(points, dtype=float)
        c = pts.mean(axis=0)
        return cls(points=pts, centroid=(float(c[0]), float(c[1])), box=oriented_box(pts))

    @property
    def position(self) -> tuple[float, float]:
        """Detection position handed to the tracker."""
        return self.centroid


def cluster_labels(points: FloatArray, link: float = LINK_DISTANCE) -> np.ndarray:
    """Component label of each point under single linkage at ``link`` metres."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    pairs = cKDTree(pts).query_pairs(r=link, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    _count, labels = connected_components(graph, directed=False)
    return np.asarray(labels)


def cluster(points: FloatArray, link: float = LINK_DISTANCE, min_points: int = MIN_POINTS) -> list[Cluster]:
    """Group points whose chains of neighbours are within ``link``.

    Groups with fewer than ``min_points`` points are dropped. Clusters are
    ordered by their lowest point index, so beam order fixes the output order.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    labels = cluster_labels(pts, link)
    groups: dict[int, list[int]] = {}
    for idx, label in enumerate(labels.tolist()):
        groups.setdefault(label, []).append(idx)
    return [Cluster.from_points(pts[idx]) for idx in groups.values() if len(idx) >= min_points]


def gate_human(c: Cluster | OrientedBox) -> bool:
    """Accept boxes no thinner than 0.15 m and no larger than 1.0 m on either side."""
    box = c.box if isinstance(c, Cluster) else c
    small, large = sorted((box.width, box.depth))
    return HUMAN_MIN_SIZE <= small and large <= HUMAN_MAX_SIZE
