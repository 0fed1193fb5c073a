"""Global plans: densified waypoint polylines with arclength lookup."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamics import FloatArray

log = logging.getLogger(__name__)

MAX_SPACING = 0.5


class PlanError(ValueError):
    """Raised for degenerate plans or unreadable plan files."""

    def __init__(self, message: str, *, path: Path | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True, eq=False)
class GlobalPlan:
    """Polyline with waypoint spacing of at most 0.5 m."""

    waypoints: FloatArray
    arclength: FloatArray

    @property
    def goal(self) -> tuple[float, float]:
        """Final waypoint."""
        return float(self.waypoints[-1, 0]), float(self.waypoints[-1, 1])

    @property
    def length(self) -> float:
        """Total arclength."""
        return float(self.arclength[-1])

    def project(self, point: Sequence[float]) -> tuple[float, float]:
        """Distance to the plan and arclength of the closest point."""
        d, s = self.project_many(np.asarray(point, dtype=float).reshape(1, 2))
        return float(d[0]), float(s[0])

    def project_many(self, points: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Vectorized :meth:`project`; the first segment wins ties."""
        a = self.waypoints[:-1]
        seg = self.waypoints[1:] - a
        seg_len2 = np.einsum("ij,ij->i", seg, seg)
        rel = points[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pij,ij->pi", rel, seg) / seg_len2, 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * seg[None, :, :]
        dist = np.linalg.norm(points[:, None, :] - closest, axis=2)
        best = np.argmin(dist, axis=1)
        rows = np.arange(points.shape[0])
        s = self.arclength[best] + t[rows, best] * np.sqrt(seg_len2[best])
        return dist[rows, best], s

    def remaining(self, s: float | FloatArray) -> float | FloatArray:
        """Arclength left to the goal from ``s``."""
        return self.length - s


def load_plan(points: Sequence[Sequence[float]] | FloatArray, max_spacing: float = MAX_SPACING) -> GlobalPlan:
    """Densify a waypoint list so consecutive points are at most ``max_spacing`` apart.

    Repeated points are dropped.

    Raises:
        PlanError: fewer than two distinct points.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise PlanError("plan contains non-finite coordinates")
    distinct = [pts[0]] if len(pts) else []
    for p in pts[1:]:
        if not np.array_equal(p, distinct[-1]):
            distinct.append(p)
    if len(distinct) < 2:
        raise PlanError(f"plan needs at least two distinct waypoints, got {len(distinct)}")

    dense = [distinct[0]]
    for a, b in zip(distinct[:-1], distinct[1:], strict=True):
        pieces = max(1, math.ceil(float(np.linalg.norm(b - a)) / max_spacing - 1e-9))
        dense.extend(a + (b - a) * (k / pieces) for k in range(1, pieces + 1))
    waypoints = np.asarray(dense)
    steps = np.linalg.norm(np.diff(waypoints, axis=0), axis=1)
    return GlobalPlan(waypoints=waypoints, arclength=np.concatenate([[0.0], np.cumsum(steps)]))


def read_plan_file(path: Path) -> GlobalPlan:
    """Parse ``x y`` or ``x,y`` lines (``#`` starts a comment) into a plan."""
    points: list[tuple[float, float]] = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise PlanError(f"cannot read plan file: {exc}", path=path, line=0) from exc
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].replace(",", " ").strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise PlanError(f"expected 'x y', got {raw.strip()!r}", path=path, line=lineno)
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise PlanError(f"non-numeric coordinate in {raw.strip()!r}", path=path, line=lineno) from exc
    plan = load_plan(points)
    log.debug("Loaded plan %s: %d waypoints, %.1f m", path.name, len(plan.waypoints), plan.length)
    return plan
