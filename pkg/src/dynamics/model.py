"""Identified switched longitudinal model and its zero-order-hold discretization."""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

FloatArray = NDArray[np.float64]

STATE_DIM = 4
INPUT_DIM = 1
DEFAULT_TS = 0.1


class InvalidModelError(ValueError):
    """Raised when a model parameter or integration step is not usable."""

    def __init__(self, name: str, value: float, reason: str = "must be finite"):
        self.name = name
        self.value = value
        super().__init__(f"Invalid {name}={value!r}: {reason}")


class Mode(StrEnum):
    """Operating mode of the longitudinal dynamics."""

    ACC = "acc"
    DEC = "dec"


@dataclass(frozen=True, slots=True)
class ModeParams:
    """Coefficients of (T s + 1) / (β s² + α s + 1) between v_ref and v."""

    alpha: float
    beta: float
    zero_t: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "zero_t"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidModelError(name, value)
        if self.alpha <= 0:
            raise InvalidModelError("alpha", self.alpha, "must be positive")
        if self.beta <= 0:
            raise InvalidModelError("beta", self.beta, "must be positive")
        if self.zero_t == 0:
            raise InvalidModelError("zero_t", self.zero_t, "must be non-zero")

    def poles(self) -> tuple[complex, complex]:
        """Return the two continuous-time poles, slowest first."""
        disc = complex(self.alpha * self.alpha - 4.0 * self.beta)
        root = disc**0.5
        p1 = (-self.alpha + root) / (2.0 * self.beta)
        p2 = (-self.alpha - root) / (2.0 * self.beta)
        return (p1, p2) if abs(p1.real) <= abs(p2.real) else (p2, p1)


ACC_PARAMS = ModeParams(alpha=2.3728, beta=0.9681, zero_t=-0.3423)
DEC_PARAMS = ModeParams(alpha=0.6187, beta=0.2059, zero_t=-0.4255)


@dataclass(frozen=True, slots=True)
class SwitchedLongitudinalModel:
    """Acceleration/deceleration mode pair sharing one sampling time."""

    acc: ModeParams = ACC_PARAMS
    dec: ModeParams = DEC_PARAMS
    ts: float = DEFAULT_TS

    def __post_init__(self) -> None:
        if not math.isfinite(self.ts) or self.ts <= 0:
            raise InvalidModelError("ts", self.ts, "must be a positive sampling time")
        if self.acc == self.dec:
            raise InvalidModelError("dec", self.dec.alpha, "modes must differ")

    def params(self, mode: Mode) -> ModeParams:
        """Return the coefficients of ``mode``."""
        return self.acc if mode is Mode.ACC else self.dec


@dataclass(frozen=True, slots=True)
class LongitudinalState:
    """State x = [v_ref, p, v, a] of the longitudinal channel."""

    v_ref: float = 0.0
    p: float = 0.0
    v: float = 0.0
    a: float = 0.0

    def as_array(self) -> FloatArray:
        """Return the state as a length-4 vector in canonical order."""
        return np.array([self.v_ref, self.p, self.v, self.a], dtype=float)

    @classmethod
    def from_array(cls, x: FloatArray) -> LongitudinalState:
        """Build a state from a length-4 vector."""
        values = [float(v) for v in np.asarray(x, dtype=float).reshape(STATE_DIM)]
        for name, value in zip(("v_ref", "p", "v", "a"), values, strict=True):
            if not math.isfinite(value):
                raise InvalidModelError(name, value)
        return cls(*values)


@dataclass(frozen=True, eq=False)
class DiscreteModePair:
    """Discrete (A_i, B_i) for both modes at the model's sampling time."""

    A_acc: FloatArray
    B_acc: FloatArray
    A_dec: FloatArray
    B_dec: FloatArray
    ts: float = DEFAULT_TS
    labels: tuple[str, str] = field(default=(Mode.ACC.value, Mode.DEC.value))

    def __iter__(self) -> Iterator[tuple[str, FloatArray, FloatArray]]:
        yield self.labels[0], self.A_acc, self.B_acc
        yield self.labels[1], self.A_dec, self.B_dec

    @property
    def state_dim(self) -> int:
        """Number of states shared by both modes."""
        return int(self.A_acc.shape[0])


def continuous_matrices(mode: ModeParams) -> tuple[FloatArray, FloatArray]:
    """Return (A_c, B_c) with input u = a_ref, the derivative of v_ref."""
    inv_beta = 1.0 / mode.beta
    A = np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [inv_beta, 0.0, -inv_beta, -mode.alpha * inv_beta],
        ]
    )
    B = np.array([[1.0], [0.0], [0.0], [mode.zero_t * inv_beta]])
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise InvalidModelError("mode", mode.beta)
    return A, B


def zoh(A: FloatArray, B: FloatArray, ts: float) -> tuple[FloatArray, FloatArray]:
    """Exact zero-order-hold discretization through the block matrix exponential."""
    n, m = B.shape
    block = np.zeros((n + m, n + m))
    block[:n, :n] = A * ts
    block[:n, n:] = B * ts
    phi = expm(block)
    return phi[:n, :n], phi[:n, n:]


def discretize(model: SwitchedLongitudinalModel) -> DiscreteModePair:
    """Discretize both modes of ``model`` at ``model.ts``."""
    A_acc, B_acc = zoh(*continuous_matrices(model.acc), model.ts)
    A_dec, B_dec = zoh(*continuous_matrices(model.dec), model.ts)
    return DiscreteModePair(A_acc=A_acc, B_acc=B_acc, A_dec=A_dec, B_dec=B_dec, ts=model.ts)
