"""Affine LMI problem description and the switched-system H2 constraints."""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..dynamics import DiscreteModePair, FloatArray

STRICT_MARGIN = 1e-8

Builder = Callable[[Mapping[str, FloatArray]], Sequence[FloatArray]]
Objective = Callable[[Mapping[str, FloatArray]], float]


class DimensionError(ValueError):
    """Raised when matrices handed to the LMI builder do not conform."""

    def __init__(self, what: str, expected: tuple[int, ...], found: tuple[int, ...]):
        self.what = what
        self.expected = expected
        self.found = found
        super().__init__(f"{what}: expected shape {expected}, got {found}")


def sym_sqrt(M: FloatArray) -> FloatArray:
    """Symmetric PSD square root through an eigendecomposition."""
    w, V = np.linalg.eigh((M + M.T) / 2)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


@dataclass(frozen=True, eq=False)
class PerformanceSpec:
    """Weights and the performance channel z = C_p x + D_p u."""

    Q: FloatArray
    R: FloatArray
    Cp: FloatArray
    Dp: FloatArray

    def __post_init__(self) -> None:
        n, m = self.Q.shape[0], self.R.shape[0]
        if self.Q.shape != (n, n):
            raise DimensionError("Q", (n, n), self.Q.shape)
        if self.R.shape != (m, m):
            raise DimensionError("R", (m, m), self.R.shape)
        if self.Cp.shape != (n + m, n):
            raise DimensionError("Cp", (n + m, n), self.Cp.shape)
        if self.Dp.shape != (n + m, m):
            raise DimensionError("Dp", (n + m, m), self.Dp.shape)
        if np.min(np.linalg.eigvalsh(self.Q)) < -1e-12:
            raise ValueError("Q must be positive semidefinite")
        if np.min(np.linalg.eigvalsh(self.R)) <= 0:
            raise ValueError("R must be positive definite")
        if np.max(np.abs(self.Cp.T @ self.Dp), initial=0.0) > 1e-12:
            raise ValueError("Cp and Dp must be orthogonal")

    @classmethod
    def from_weights(cls, Q: FloatArray | Sequence[float], R: FloatArray | float) -> PerformanceSpec:
        """Stack C_p = [√Q; 0] and D_p = [0; √R]. A 1-D ``Q`` is read as a diagonal."""
        Q_arr = np.asarray(Q, dtype=float)
        if Q_arr.ndim == 1:
            Q_arr = np.diag(Q_arr)
        R_arr = np.atleast_2d(np.asarray(R, dtype=float))
        n, m = Q_arr.shape[0], R_arr.shape[0]
        Cp = np.vstack([sym_sqrt(Q_arr), np.zeros((m, n))])
        Dp = np.vstack([np.zeros((n, m)), sym_sqrt(R_arr)])
        return cls(Q=Q_arr, R=R_arr, Cp=Cp, Dp=Dp)

    @property
    def n(self) -> int:
        """State dimension."""
        return int(self.Q.shape[0])

    @property
    def m(self) -> int:
        """Input dimension."""
        return int(self.R.shape[0])

    @property
    def nz(self) -> int:
        """Performance output dimension."""
        return int(self.Cp.shape[0])


@dataclass(frozen=True, slots=True)
class VariableBlock:
    """A matrix-valued decision variable stored in a slice of the flat vector."""

    name: str
    rows: int
    cols: int
    symmetric: bool
    offset: int

    @property
    def size(self) -> int:
        """Number of scalar unknowns."""
        return self.rows * (self.rows + 1) // 2 if self.symmetric else self.rows * self.cols

    def unpack(self, x: FloatArray) -> FloatArray:
        """Matrix value of this block for the flat vector ``x``."""
        chunk = x[self.offset : self.offset + self.size]
        if not self.symmetric:
            return chunk.reshape(self.rows, self.cols).copy()
        M = np.zeros((self.rows, self.rows))
        iu = np.triu_indices(self.rows)
        M[iu] = chunk
        return M + np.triu(M, 1).T


@dataclass(frozen=True, slots=True)
class VariableLayout:
    """Ordered decision-variable blocks."""

    blocks: tuple[VariableBlock, ...]

    @classmethod
    def of(cls, *specs: tuple[str, int, int, bool]) -> VariableLayout:
        """Build a layout from ``(name, rows, cols, symmetric)`` tuples."""
        offset = 0
        blocks = []
        for name, rows, cols, symmetric in specs:
            block = VariableBlock(name, rows, cols, symmetric, offset)
            blocks.append(block)
            offset += block.size
        return cls(tuple(blocks))

    @property
    def size(self) -> int:
        """Total number of scalar unknowns."""
        return sum(b.size for b in self.blocks)

    def unpack(self, x: FloatArray) -> dict[str, FloatArray]:
        """Matrix values of every block."""
        return {b.name: b.unpack(x) for b in self.blocks}


@dataclass(frozen=True, eq=False)
class LmiBlock:
    """F(x) = F0 + Σ x_i F_i ≻ 0, with the strict margin already folded into F0."""

    name: str
    F0: FloatArray
    Fi: FloatArray
    margin: float = 0.0

    @property
    def dim(self) -> int:
        """Side length of the block."""
        return int(self.F0.shape[0])

    def value(self, x: FloatArray) -> FloatArray:
        """Evaluate the block at ``x``."""
        return self.F0 + np.tensordot(x, self.Fi, axes=1)


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """Minimize cᵀx subject to every block being positive definite."""

    layout: VariableLayout
    blocks: tuple[LmiBlock, ...]
    c: FloatArray
    c0: float = 0.0
    meta: dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        """Number of scalar decision variables."""
        return self.layout.size

    def cost(self, x: FloatArray) -> float:
        """Objective value at ``x``."""
        return float(self.c @ x + self.c0)

    @classmethod
    def from_builder(
        cls,
        layout: VariableLayout,
        builder: Builder,
        objective: Objective,
        names: Sequence[str],
        margins: Sequence[float],
        meta: dict[str, int] | None = None,
    ) -> SdpProblem:
        """Extract affine coefficients by evaluating ``builder`` on the basis vectors.

        ``builder`` must be affine in the decision variables; symmetry of each
        returned block is checked on every evaluation.
        """
        size = layout.size
        zero = np.zeros(size)
        base = [np.asarray(F, dtype=float) for F in builder(layout.unpack(zero))]
        if len(base) != len(names) or len(names) != len(margins):
            raise ValueError("builder, names and margins must have the same length")
        coeffs = [np.zeros((size, F.shape[0], F.shape[0])) for F in base]
        c0 = float(objective(layout.unpack(zero)))
        c = np.zeros(size)
        for i in range(size):
            e = np.zeros(size)
            e[i] = 1.0
            values = layout.unpack(e)
            for k, F in enumerate(builder(values)):
                coeffs[k][i] = np.asarray(F, dtype=float) - base[k]
            c[i] = float(objective(values)) - c0
        blocks = []
        for name, F0, Fi, margin in zip(names, base, coeffs, margins, strict=True):
            if not np.allclose(F0, F0.T) or not np.allclose(Fi, Fi.transpose(0, 2, 1)):
                raise ValueError(f"block {name!r} is not symmetric")
            blocks.append(LmiBlock(name=name, F0=F0 - margin * np.eye(F0.shape[0]), Fi=Fi, margin=margin))
        return cls(layout=layout, blocks=tuple(blocks), c=c, c0=c0, meta=dict(meta or {}))


def _check_modes(modes: DiscreteModePair, perf: PerformanceSpec) -> None:
    n, m = perf.n, perf.m
    for label, A, B in modes:
        if A.shape != (n, n):
            raise DimensionError(f"A[{label}]", (n, n), A.shape)
        if B.shape != (n, m):
            raise DimensionError(f"B[{label}]", (n, m), B.shape)


def build_lmis(modes: DiscreteModePair, perf: PerformanceSpec, margin: float = STRICT_MARGIN) -> SdpProblem:
    """Robust H2 state-feedback synthesis over both modes with L = K P."""
    _check_modes(modes, perf)
    n, m, nz = perf.n, perf.m, perf.nz
    layout = VariableLayout.of(("P", n, n, True), ("L", m, n, False), ("S", nz, nz, True))
    Cp, Dp = perf.Cp, perf.Dp
    pairs = [(A, B) for _label, A, B in modes]
    eye = np.eye(n)

    def builder(v: Mapping[str, FloatArray]) -> list[FloatArray]:
        P, L, S = v["P"], v["L"], v["S"]
        Z = Cp @ P + Dp @ L
        out = [np.block([[S, Z], [Z.T, P]])]
        for A, B in pairs:
            BL = B @ L
            X = P - A @ P @ A.T - A @ L.T @ B.T - BL @ A.T - eye
            out.append(np.block([[X, BL], [BL.T, P]]))
        out.append(P)
        return out

    names = ["performance", *(f"stability:{label}" for label, _A, _B in modes), "lyapunov"]
    margins = [0.0, *([margin] * len(pairs)), margin]
    return SdpProblem.from_builder(
        layout,
        builder,
        lambda v: float(np.trace(v["S"])),
        names,
        margins,
        meta={"n": n, "m": m, "nz": nz},
    )
