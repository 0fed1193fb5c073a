"""Planar LiDAR scans, the height filter and the scan capture file."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamics import FloatArray

log = logging.getLogger(__name__)

BEAM_COUNT = 720
MAX_RANGE = 25.0
MOUNT_HEIGHT = 0.9
GROUND_CLEARANCE = 0.1
MAX_HEIGHT = 2.3
SCAN_LOG_VERSION = "v1"


class ScanLogError(ValueError):
    """Raised for malformed scan capture files."""

    def __init__(self, path: Path, line: int, reason: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


def beam_angles(count: int = BEAM_COUNT) -> FloatArray:
    """Evenly spaced beam angles over [0, 2π) in the sensor frame."""
    return np.arange(count, dtype=float) * (2.0 * math.pi / count)


@dataclass(frozen=True, eq=False)
class Scan:
    """One sweep taken from ``pose`` (x, y, θ) at ``timestamp``."""

    timestamp: float
    pose: tuple[float, float, float]
    angles: FloatArray
    ranges: FloatArray
    hits: np.ndarray
    max_range: float = MAX_RANGE

    @property
    def beam_count(self) -> int:
        """Number of beams."""
        return int(self.angles.shape[0])

    def points(self) -> FloatArray:
        """World-frame (x, y) of every hit."""
        x, y, theta = self.pose
        bearing = self.angles[self.hits] + theta
        r = self.ranges[self.hits]
        return np.column_stack([x + r * np.cos(bearing), y + r * np.sin(bearing)])

    def points3d(self, mount_height: float = MOUNT_HEIGHT) -> FloatArray:
        """Hits lifted to the sensor's mounting plane."""
        planar = self.points()
        return np.column_stack([planar, np.full(planar.shape[0], mount_height)])

    def same_as(self, other: Scan) -> bool:
        """Bitwise equality of pose, timestamp and beams."""
        return (
            self.timestamp == other.timestamp
            and self.pose == other.pose
            and np.array_equal(self.angles, other.angles)
            and np.array_equal(self.ranges, other.ranges)
            and np.array_equal(self.hits, other.hits)
        )


def filter_ground(points3d: FloatArray) -> FloatArray:
    """Keep points strictly between the ground band and the ceiling, projected to (x, y)."""
    pts = np.asarray(points3d, dtype=float).reshape(-1, 3)
    keep = (pts[:, 2] > GROUND_CLEARANCE) & (pts[:, 2] < MAX_HEIGHT)
    return pts[keep, :2]


def _header(beams: int, max_range: float) -> str:
    return f"# scan-log {SCAN_LOG_VERSION} beams={beams} r_max={float(max_range)!r}\n"


def _line(scan: Scan) -> str:
    ranges = np.where(scan.hits, scan.ranges, scan.max_range)
    fields = [scan.timestamp, *scan.pose, *ranges.tolist()]
    return " ".join(repr(float(v)) for v in fields) + "\n"


def write_scan_log(path: Path, scans: Iterable[Scan]) -> int:
    """Write scans as ``t x y theta r0 … rN`` lines; misses are stored as r_max.

    Floats are written with ``repr`` so a replay reproduces them bit for bit.
    Returns the number of scans written.
    """
    count = 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for scan in scans:
            if count == 0:
                f.write(_header(scan.beam_count, scan.max_range))
            f.write(_line(scan))
            count += 1
    log.info("Wrote %d scans to %s", count, path)
    return count


class ScanLogWriter:
    """Incremental writer used while a scenario is running."""

    def __init__(self, path: Path):
        self.path = path
        self.count = 0
        path.parent.mkdir(parents=True, exist_ok=True)
        self._f = path.open("w", encoding="utf-8")

    def write(self, scan: Scan) -> None:
        """Append one scan."""
        if self.count == 0:
            self._f.write(_header(scan.beam_count, scan.max_range))
        self._f.write(_line(scan))
        self.count += 1

    def close(self) -> None:
        """Flush and close the file."""
        self._f.close()
        log.info("Captured %d scans to %s", self.count, self.path)


def _parse_header(path: Path, text: str) -> tuple[int, float]:
    parts = text.split()
    if len(parts) != 5 or parts[:3] != ["#", "scan-log", SCAN_LOG_VERSION]:
        raise ScanLogError(path, 1, f"expected '# scan-log {SCAN_LOG_VERSION} beams=N r_max=R'")
    try:
        beams = int(parts[3].removeprefix("beams="))
        max_range = float(parts[4].removeprefix("r_max="))
    except ValueError as exc:
        raise ScanLogError(path, 1, "bad beams/r_max values") from exc
    return beams, max_range


def read_scan_log(path: Path) -> Iterator[Scan]:
    """Stream scans back from a capture file.

    Raises:
        ScanLogError: bad header, wrong field count or non-numeric values.
    """
    with path.open(encoding="utf-8") as f:
        header = f.readline()
        if not header:
            return
        beams, max_range = _parse_header(path, header)
        angles = beam_angles(beams)
        for lineno, raw in enumerate(f, start=2):
            if not raw.strip():
                continue
            parts = raw.split()
            if len(parts) != beams + 4:
                raise ScanLogError(path, lineno, f"expected {beams + 4} fields, got {len(parts)}")
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise ScanLogError(path, lineno, "non-numeric field") from exc
            ranges = np.asarray(values[4:])
            yield Scan(
                timestamp=values[0],
                pose=(values[1], values[2], values[3]),
                angles=angles,
                ranges=ranges,
                hits=ranges < max_range,
                max_range=max_range,
            )
