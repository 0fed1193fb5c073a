"""Gains file: synthesized k1…k5 with the weights and residuals that produced them."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from .design import SynthesisSolution

log = logging.getLogger(__name__)

GAINS_FORMAT = "budde-gains"
GAINS_VERSION = 1


class GainsFileError(ValueError):
    """Raised when a gains file is missing keys or has the wrong format."""

    def __init__(self, path: Path, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True, slots=True)
class GainsRecord:
    """Contents of a gains file.

    ``k`` holds k1…k5 of the integral design; ``k4`` holds the plain
    four-state design when it was stored alongside.
    """

    ts: float
    k: tuple[float, ...]
    k4: tuple[float, ...] | None = None
    cost: float | None = None
    q: tuple[float, ...] = ()
    r: float | None = None
    integrator_weight: float | None = None
    residuals: dict[str, float] = field(default_factory=dict)
    created: str | None = None

    @property
    def k5(self) -> float:
        """Integral gain (0 when the file only holds a four-state row)."""
        return self.k[4] if len(self.k) >= 5 else 0.0

    @classmethod
    def from_solutions(cls, integral: SynthesisSolution, ts: float, plain: SynthesisSolution | None = None) -> GainsRecord:
        """In-memory record for gains that were synthesized but not saved."""
        return cls(
            ts=ts,
            k=tuple(float(v) for v in integral.gains),
            k4=tuple(float(v) for v in plain.gains) if plain is not None else None,
            cost=integral.cost,
            residuals=dict(integral.residuals),
        )

    def controller_gains(self, controller: int) -> tuple[float, ...]:
        """Gain row for Controller 1 (no integral) or Controller 2."""
        if controller == 2:
            return (*self.k[:4], self.k5)
        base = self.k4 if self.k4 is not None else self.k[:4]
        return (*base[:4], 0.0)


def _row(values: tuple[float, ...]) -> dict[str, float]:
    return {f"k{i}": float(v) for i, v in enumerate(values, start=1)}


def _unrow(data: dict[str, Any], path: Path, key: str) -> tuple[float, ...]:
    names = sorted((k for k in data if k.startswith("k") and k[1:].isdigit()), key=lambda k: int(k[1:]))
    if [int(n[1:]) for n in names] != list(range(1, len(names) + 1)) or len(names) < 4:
        raise GainsFileError(path, f"{key} must contain k1..k4 (and optionally k5)")
    try:
        return tuple(float(data[n]) for n in names)
    except (TypeError, ValueError) as exc:
        raise GainsFileError(path, f"{key}: non-numeric gain") from exc


def save_gains(
    path: Path,
    integral: SynthesisSolution,
    ts: float,
    *,
    plain: SynthesisSolution | None = None,
    q: tuple[float, ...] = (),
    r: float | None = None,
    integrator_weight: float | None = None,
) -> Path:
    """Write the gains atomically and return the path."""
    data: dict[str, Any] = {
        "format": GAINS_FORMAT,
        "version": GAINS_VERSION,
        "created": datetime.now(UTC).isoformat(),
        "ts": ts,
        "gains": _row(integral.gains),
        "cost": integral.cost,
        "weights": {"q": list(q), "r": r, "integrator": integrator_weight},
        "residuals": integral.residuals,
        "newton_steps": integral.iterations,
    }
    if plain is not None:
        data["gains_4state"] = _row(plain.gains)
        data["cost_4state"] = plain.cost

    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(".tmp")
    with temp_file.open("w") as f:
        json.dump(data, f, indent=2)
    temp_file.replace(path)
    log.info("Saved gains to %s", path)
    return path


def load_gains(path: Path) -> GainsRecord:
    """Read a gains file written by :func:`save_gains`.

    Raises:
        GainsFileError: unreadable JSON, wrong format tag or missing gains.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise GainsFileError(path, f"cannot read gains file: {exc}") from exc
    if not isinstance(data, dict) or data.get("format") != GAINS_FORMAT:
        raise GainsFileError(path, f"not a {GAINS_FORMAT} file")
    if "gains" not in data or "ts" not in data:
        raise GainsFileError(path, "missing 'gains' or 'ts'")

    weights = data.get("weights") or {}
    k4 = _unrow(data["gains_4state"], path, "gains_4state") if "gains_4state" in data else None
    record = GainsRecord(
        ts=float(data["ts"]),
        k=_unrow(data["gains"], path, "gains"),
        k4=k4,
        cost=data.get("cost"),
        q=tuple(float(v) for v in weights.get("q") or ()),
        r=weights.get("r"),
        integrator_weight=weights.get("integrator"),
        residuals={str(k): float(v) for k, v in (data.get("residuals") or {}).items()},
        created=data.get("created"),
    )
    log.debug("Loaded gains %s from %s", record.k, path)
    return record
