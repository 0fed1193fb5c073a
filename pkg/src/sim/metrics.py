"""Run metrics computed from tick records, and scenario assertions over them."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from ..observability import NO_TRACK, TickRecord
from ..supervision import FsmState

SETTLING_BAND = 0.1
STEADY_WINDOW = 2.0
CAP_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True)
class Metrics:
    """Summary of one run. NaN marks a metric that does not apply."""

    duration: float
    ticks: int
    settling_time: float
    steady_state_error: float
    max_abs_error: float
    overshoot: float
    collisions: int
    cap_fraction: float
    selection_switches: int
    selection_errors: int
    min_clearance: float
    max_speed: float
    low_speed_reversals: int
    final_goal_dist: float
    state_ticks: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict[str, float | int]:
        """Flat mapping; per-state tick counts appear as ``ticks_in_<STATE>``."""
        data = asdict(self)
        states = data.pop("state_ticks")
        data.update({f"ticks_in_{name}": count for name, count in states.items()})
        return data


def _segments(d_ref: np.ndarray) -> list[tuple[int, int]]:
    """[start, end) index ranges of constant reference distance."""
    changes = np.flatnonzero(np.diff(d_ref) != 0.0) + 1
    bounds = [0, *changes.tolist(), len(d_ref)]
    return list(zip(bounds[:-1], bounds[1:], strict=True))


def _settling(t: np.ndarray, err: np.ndarray, valid: np.ndarray, start: int, end: int) -> float:
    outside = np.flatnonzero(valid[start:end] & (np.abs(err[start:end]) > SETTLING_BAND))
    if outside.size == 0:
        return 0.0
    last = start + int(outside[-1])
    if last == end - 1:
        return math.nan
    return float(t[last + 1] - t[start])


def _reversals(values: np.ndarray) -> int:
    steps = np.diff(values)
    signs = np.sign(steps[np.abs(steps) > 1e-12])
    return int(np.count_nonzero(np.diff(signs) != 0))


def compute_metrics(records: Sequence[TickRecord], v_max: float = 1.5) -> Metrics:
    """Metrics of a run; the same function serves live runs and replays.

    Errors are measured on ticks with a valid user estimate. Each change of
    ``d_ref`` opens a step segment: its settling time is when the error
    last leaves the 0.1 m band, its overshoot how far ``d`` passes the new
    reference, its steady-state error the mean error over the final 2 s.
    """
    if not records:
        return Metrics(0.0, 0, math.nan, math.nan, math.nan, math.nan, 0, 0.0, 0, 0, math.inf, 0.0, 0, math.nan)

    t = np.array([r.t for r in records])
    d = np.array([r.d for r in records])
    d_ref = np.array([r.d_ref for r in records])
    valid = np.array([r.estimate_valid and math.isfinite(r.d) for r in records])
    err = np.where(valid, d - d_ref, 0.0)
    ts = float(t[1] - t[0]) if len(t) > 1 else 0.1

    settling, overshoot, steady = [], [], []
    for index, (start, end) in enumerate(_segments(d_ref)):
        tail = valid[start:end] & (t[start:end] >= t[end - 1] - STEADY_WINDOW + ts / 2)
        if tail.any():
            steady.append(abs(float(err[start:end][tail].mean())))
        if index == 0:
            continue
        settling.append(_settling(t, err, valid, start, end))
        direction = math.copysign(1.0, d_ref[start] - d_ref[start - 1])
        passed = direction * err[start:end][valid[start:end]]
        overshoot.append(max(float(passed.max()), 0.0) if passed.size else 0.0)

    collision = np.array([r.collision for r in records])
    collisions = int(collision[0]) + int(np.count_nonzero(collision[1:] & ~collision[:-1]))

    track = np.array([r.track_id for r in records])
    both = (track[1:] != NO_TRACK) & (track[:-1] != NO_TRACK)
    switches = int(np.count_nonzero(both & (track[1:] != track[:-1])))
    wrong = int(sum(1 for r in records if r.track_id != NO_TRACK and not r.selection_ok))

    v_ref = np.array([r.v_ref for r in records])
    low_speed = np.array([r.fsm_code == FsmState.LOW_SPEED for r in records])
    codes = [r.fsm_code for r in records]

    return Metrics(
        duration=float(t[-1] - t[0] + ts),
        ticks=len(records),
        settling_time=max(settling, default=math.nan) if not any(math.isnan(s) for s in settling) else math.nan,
        steady_state_error=max(steady, default=math.nan),
        max_abs_error=float(np.abs(err[valid]).max()) if valid.any() else math.nan,
        overshoot=max(overshoot, default=math.nan),
        collisions=collisions,
        cap_fraction=float(np.mean(v_ref >= v_max - CAP_TOLERANCE)),
        selection_switches=switches,
        selection_errors=wrong,
        min_clearance=float(min(r.clearance for r in records)),
        max_speed=float(max(r.v for r in records)),
        low_speed_reversals=_reversals(v_ref[low_speed]) if low_speed.any() else 0,
        final_goal_dist=float(records[-1].goal_dist),
        state_ticks={state.name: codes.count(int(state)) for state in FsmState},
    )


def check_assertions(metrics: Metrics, assertions: Mapping[str, Mapping[str, float]]) -> list[str]:
    """Human-readable failures of ``{metric: {"min": a, "max": b}}`` bounds."""
    values = metrics.as_dict()
    failures = []
    for name, bounds in assertions.items():
        if name not in values:
            failures.append(f"unknown metric {name!r}")
            continue
        value = float(values[name])
        if math.isnan(value):
            failures.append(f"{name} is undefined for this run")
            continue
        if "min" in bounds and value < bounds["min"]:
            failures.append(f"{name} = {value:.4g} < min {bounds['min']:.4g}")
        if "max" in bounds and value > bounds["max"]:
            failures.append(f"{name} = {value:.4g} > max {bounds['max']:.4g}")
    return failures
