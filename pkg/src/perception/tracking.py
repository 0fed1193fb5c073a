"""Constant-velocity Kalman tracks with global nearest-neighbour association."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..dynamics import FloatArray

log = logging.getLogger(__name__)

ACCEL_NOISE = 0.8
MEASUREMENT_NOISE = 0.05
INITIAL_SPEED_VARIANCE = 1.0
GATE = 1.0
CONFIRM_HITS = 3
DELETE_MISSES = 5
_UNASSIGNABLE = 1e6

_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
_R = MEASUREMENT_NOISE**2 * np.eye(2)


@dataclass(frozen=True, eq=False)
class Track:
    """State (x, y, vx, vy) with covariance and hit/miss counters."""

    id: int
    state: FloatArray
    cov: FloatArray
    hits: int = 1
    misses: int = 0
    confirmed: bool = False

    @property
    def position(self) -> tuple[float, float]:
        """Estimated (x, y)."""
        return float(self.state[0]), float(self.state[1])

    @property
    def velocity(self) -> tuple[float, float]:
        """Estimated (vx, vy)."""
        return float(self.state[2]), float(self.state[3])

    @property
    def speed(self) -> float:
        """Norm of the velocity estimate."""
        return float(np.hypot(self.state[2], self.state[3]))

    @classmethod
    def spawn(cls, track_id: int, position: Sequence[float]) -> Track:
        """Tentative track at a detection with unknown velocity."""
        state = np.array([position[0], position[1], 0.0, 0.0], dtype=float)
        cov = np.diag([MEASUREMENT_NOISE**2, MEASUREMENT_NOISE**2, INITIAL_SPEED_VARIANCE, INITIAL_SPEED_VARIANCE])
        return cls(id=track_id, state=state, cov=cov)


def _transition(dt: float) -> tuple[FloatArray, FloatArray]:
    F = np.eye(4)
    F[0, 2] = F[1, 3] = dt
    g = np.array([dt * dt / 2, dt])
    block = ACCEL_NOISE**2 * np.outer(g, g)
    Q = np.zeros((4, 4))
    Q[np.ix_([0, 2], [0, 2])] = block
    Q[np.ix_([1, 3], [1, 3])] = block
    return F, Q


def predict(track: Track, dt: float) -> Track:
    """Constant-velocity prediction with white-acceleration process noise."""
    F, Q = _transition(dt)
    cov = F @ track.cov @ F.T + Q
    return replace(track, state=F @ track.state, cov=(cov + cov.T) / 2)


def correct(track: Track, z: Sequence[float]) -> Track:
    """Position update in Joseph form."""
    S = _H @ track.cov @ _H.T + _R
    gain = np.linalg.solve(S, _H @ track.cov).T
    innovation = np.asarray(z, dtype=float) - _H @ track.state
    I_KH = np.eye(4) - gain @ _H
    cov = I_KH @ track.cov @ I_KH.T + gain @ _R @ gain.T
    return replace(track, state=track.state + gain @ innovation, cov=(cov + cov.T) / 2)


def associate(tracks: Sequence[Track], detections: FloatArray, gate: float = GATE) -> list[tuple[int, int]]:
    """Minimum-total-distance pairing of tracks and detections within ``gate``."""
    if not tracks or detections.shape[0] == 0:
        return []
    predicted = np.array([t.state[:2] for t in tracks])
    cost = np.linalg.norm(predicted[:, None, :] - detections[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(np.where(cost <= gate, cost, _UNASSIGNABLE))
    return [(int(i), int(j)) for i, j in zip(rows, cols, strict=True) if cost[i, j] <= gate]


def track_update(
    tracks: Sequence[Track],
    detections: Sequence[Sequence[float]] | FloatArray,
    dt: float,
    *,
    next_id: int | None = None,
) -> list[Track]:
    """Predict, associate and correct; spawn, confirm and delete tracks.

    New tracks take ids from ``next_id`` upwards (default: one past the
    largest live id).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    det = np.asarray(detections, dtype=float).reshape(-1, 2)
    predicted = [predict(t, dt) for t in tracks]
    pairs = associate(predicted, det)
    matched_tracks = {i for i, _ in pairs}
    matched_dets = {j for _, j in pairs}

    out: list[Track] = []
    by_track = dict(pairs)
    for i, track in enumerate(predicted):
        if i in matched_tracks:
            updated = correct(track, det[by_track[i]])
            hits = track.hits + 1
            confirmed = track.confirmed or hits >= CONFIRM_HITS
            if confirmed and not track.confirmed:
                log.debug("Track %d confirmed at (%.2f, %.2f)", track.id, *updated.position)
            out.append(replace(updated, hits=hits, misses=0, confirmed=confirmed))
            continue
        misses = track.misses + 1
        if misses >= DELETE_MISSES:
            log.debug("Track %d deleted after %d misses", track.id, misses)
            continue
        out.append(replace(track, misses=misses))

    new_id = next_id if next_id is not None else max((t.id for t in tracks), default=0) + 1
    for j in range(det.shape[0]):
        if j not in matched_dets:
            out.append(Track.spawn(new_id, det[j]))
            log.debug("Track %d born at (%.2f, %.2f)", new_id, det[j, 0], det[j, 1])
            new_id += 1
    return out


class Tracker:
    """Owns the track store and the id counter."""

    def __init__(self) -> None:
        self.tracks: list[Track] = []
        self._next_id = 1

    def update(self, detections: Sequence[Sequence[float]] | FloatArray, dt: float) -> list[Track]:
        """Run one cycle and return the published (confirmed) tracks."""
        self.tracks = track_update(self.tracks, detections, dt, next_id=self._next_id)
        if self.tracks:
            self._next_id = max(self._next_id, max(t.id for t in self.tracks) + 1)
        return self.published

    @property
    def published(self) -> list[Track]:
        """Confirmed tracks, in id order."""
        return sorted((t for t in self.tracks if t.confirmed), key=lambda t: t.id)
