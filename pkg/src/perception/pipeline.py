"""Scan → clusters → human detections → tracks → user selection."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamics import DEFAULT_TS, FloatArray
from .clustering import Cluster, cluster, gate_human
from .scan import Scan, filter_ground, read_scan_log
from .selection import UserSelection, UserSelector
from .tracking import Track, Tracker

log = logging.getLogger(__name__)

ReferenceSchedule = float | Callable[[float], float]


@dataclass(frozen=True, eq=False)
class PerceptionFrame:
    """Everything perception produced for one scan."""

    timestamp: float
    clusters: list[Cluster]
    detections: FloatArray
    tracks: list[Track]
    selection: UserSelection


def detect_humans(scan: Scan) -> tuple[list[Cluster], FloatArray]:
    """All clusters of the scan and the positions of those passing the size gate."""
    clusters = cluster(filter_ground(scan.points3d()))
    people = [c.position for c in clusters if gate_human(c)]
    return clusters, np.asarray(people, dtype=float).reshape(-1, 2)


class Perception:
    """Stateful pipeline owned by the control loop."""

    def __init__(self, ts: float = DEFAULT_TS):
        self.ts = ts
        self.tracker = Tracker()
        self.selector = UserSelector()
        self._last_stamp: float | None = None

    def process(self, scan: Scan, d_ref: float) -> PerceptionFrame:
        """Run every stage on one scan."""
        dt = self.ts if self._last_stamp is None else scan.timestamp - self._last_stamp
        if dt <= 0:
            dt = self.ts
        self._last_stamp = scan.timestamp
        clusters, detections = detect_humans(scan)
        tracks = self.tracker.update(detections, dt)
        selection = self.selector.update(tracks, scan.pose, d_ref, dt)
        return PerceptionFrame(scan.timestamp, clusters, detections, tracks, selection)


def perceive_from_log(path: Path, d_ref: ReferenceSchedule, ts: float = DEFAULT_TS) -> Iterator[PerceptionFrame]:
    """Drive a fresh pipeline from a scan capture file."""
    schedule = d_ref if callable(d_ref) else (lambda _t: float(d_ref))
    pipeline = Perception(ts)
    count = 0
    for scan in read_scan_log(path):
        count += 1
        yield pipeline.process(scan, schedule(scan.timestamp))
    log.debug("Replayed %d scans from %s", count, path)
