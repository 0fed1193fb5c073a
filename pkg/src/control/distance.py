"""Discrete distance-keeping laws with optional saturated integral action."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

from ..dynamics import DEFAULT_TS

log = logging.getLogger(__name__)

DEFAULT_V_MAX = 1.5
DEFAULT_D_REF = 1.5
MAX_ESTIMATE_AGE = 0.5


class StaleEstimateError(RuntimeError):
    """Raised when the user estimate is invalid or too old to act on.

    ``held`` is the last speed reference the controller produced; the
    supervisor decides whether to hold it or stop.
    """

    def __init__(self, age: float, held: float):
        self.age = age
        self.held = held
        super().__init__(f"user estimate unusable (age {age:.2f} s), holding v_ref={held:.3f}")


def sat(x: float, bound: float) -> float:
    """Clip ``x`` to [-bound, bound]."""
    return min(max(x, -bound), bound)


@dataclass(frozen=True, slots=True)
class DistanceGains:
    """k1…k4 state gains, k5 integral gain (0 selects the plain law)."""

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float = 0.0
    ts: float = DEFAULT_TS
    v_max: float = DEFAULT_V_MAX

    def __post_init__(self) -> None:
        values = (self.k1, self.k2, self.k3, self.k4, self.k5, self.ts, self.v_max)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("gains must be finite")
        if self.ts <= 0 or self.v_max <= 0:
            raise ValueError("ts and v_max must be positive")
        if abs(1.0 - self.k1 * self.ts) < 1e-12:
            raise ValueError("1 - k1*ts must be nonzero")

    @classmethod
    def from_vector(cls, k: Sequence[float], ts: float = DEFAULT_TS, v_max: float = DEFAULT_V_MAX) -> DistanceGains:
        """Build from a row of four or five gains."""
        if len(k) not in (4, 5):
            raise ValueError(f"expected 4 or 5 gains, got {len(k)}")
        k5 = float(k[4]) if len(k) == 5 else 0.0
        return cls(float(k[0]), float(k[1]), float(k[2]), float(k[3]), k5, ts=ts, v_max=v_max)

    @property
    def integral(self) -> bool:
        """True for the law with integral action."""
        return self.k5 != 0.0

    @property
    def integrator_bound(self) -> float:
        """Anti-windup limit v_max / (3|k5|), infinite without integral action."""
        return self.v_max / (3.0 * abs(self.k5)) if self.k5 else math.inf

    def without_integral(self) -> DistanceGains:
        """Same gains with k5 dropped."""
        return replace(self, k5=0.0)


@dataclass(frozen=True, slots=True)
class ControllerMemory:
    """Samples from the previous tick plus the integrator state."""

    v_ref_prev: float = 0.0
    v_vi_prev: float = 0.0
    v_prev: float = 0.0
    integrator: float = 0.0
    seeded: bool = False


@dataclass(frozen=True, slots=True)
class UserEstimate:
    """Robot-user distance and the virtual user's longitudinal motion."""

    d: float
    p_vi: float = 0.0
    v_vi: float = 0.0
    a_vi: float = 0.0
    valid: bool = True
    age: float = 0.0

    @property
    def usable(self) -> bool:
        """Valid and fresh enough to control on."""
        return self.valid and self.age <= MAX_ESTIMATE_AGE


def reset(mem: ControllerMemory) -> ControllerMemory:
    """Zeroed memory; the next step seeds the previous samples from its inputs."""
    if mem.seeded:
        log.debug("Controller reset (integrator was %.4f)", mem.integrator)
    return ControllerMemory()


def controller_step(
    gains: DistanceGains,
    mem: ControllerMemory,
    est: UserEstimate,
    d_ref: float,
    v_meas: float,
) -> tuple[float, ControllerMemory]:
    """One tick of the implicit-Euler distance law.

    Returns the unclamped speed reference and the shifted memory. The
    integrator contributes with its value before this tick's update.

    Raises:
        StaleEstimateError: the estimate is invalid or older than 0.5 s.
    """
    if not est.usable:
        raise StaleEstimateError(est.age if est.valid else math.inf, mem.v_ref_prev)

    if not mem.seeded:
        mem = ControllerMemory(v_ref_prev=v_meas, v_vi_prev=est.v_vi, v_prev=v_meas, integrator=mem.integrator, seeded=True)

    ts = gains.ts
    error = est.d - d_ref
    bracket = (
        (mem.v_ref_prev - mem.v_vi_prev)
        + gains.k2 * ts * error
        + (gains.k3 * ts + gains.k4) * (v_meas - est.v_vi)
        - gains.k4 * (mem.v_prev - mem.v_vi_prev)
        + gains.k5 * ts * mem.integrator
    )
    v_dist = est.v_vi + bracket / (1.0 - gains.k1 * ts)

    integrator = sat(mem.integrator + ts * error, gains.integrator_bound) if gains.integral else mem.integrator
    return v_dist, ControllerMemory(
        v_ref_prev=v_dist,
        v_vi_prev=est.v_vi,
        v_prev=v_meas,
        integrator=integrator,
        seeded=True,
    )


def with_applied_reference(mem: ControllerMemory, v_ref: float) -> ControllerMemory:
    """Replace the remembered reference by the one actually sent to the plant."""
    return replace(mem, v_ref_prev=v_ref)
