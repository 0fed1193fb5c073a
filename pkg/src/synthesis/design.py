"""H2 gain synthesis for the switched model, integral augmentation and certificate checks."""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..dynamics import DiscreteModePair, FloatArray
from .lmi import STRICT_MARGIN, PerformanceSpec, SdpProblem, VariableLayout, build_lmis
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, SynthesisError, minimize

log = logging.getLogger(__name__)

DEFAULT_Q = (0.1, 4.0, 1.0, 0.01)
DEFAULT_R = 1.0
DEFAULT_INTEGRATOR_WEIGHT = 0.5
ERROR_STATE = 1
STABILITY_MARGIN = 1e-4


@dataclass(frozen=True, eq=False)
class SynthesisSolution:
    """Gain row K = L P⁻¹ with its certificate (P, L, S) and solver residuals."""

    K: FloatArray
    P: FloatArray
    S: FloatArray
    L: FloatArray
    cost: float
    residuals: dict[str, float] = field(default_factory=dict)
    iterations: int = 0

    @classmethod
    def from_gains(cls, gains: Sequence[float]) -> SynthesisSolution:
        """Bare gain row, e.g. read back from a gains file; the certificate is left empty."""
        empty = np.zeros((0, 0))
        return cls(K=np.asarray(gains, dtype=float).reshape(1, -1), P=empty, S=empty, L=empty, cost=math.nan)

    @property
    def gains(self) -> tuple[float, ...]:
        """Flat gain tuple (k1, k2, …)."""
        return tuple(float(k) for k in self.K.ravel())


def default_performance() -> PerformanceSpec:
    """Four-state weights Q = diag(0.1, 4, 1, 0.01), R = 1."""
    return PerformanceSpec.from_weights(DEFAULT_Q, DEFAULT_R)


def integral_performance(
    q: Sequence[float] = DEFAULT_Q,
    r: float = DEFAULT_R,
    integrator_weight: float = DEFAULT_INTEGRATOR_WEIGHT,
) -> PerformanceSpec:
    """Five-state weights with the integrator weight appended to the diagonal."""
    return PerformanceSpec.from_weights([*q, integrator_weight], r)


def spectral_radius(M: FloatArray) -> float:
    """Largest eigenvalue magnitude."""
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def closed_loop_radii(modes: DiscreteModePair, K: FloatArray) -> dict[str, float]:
    """ρ(A_i + B_i K) for every mode."""
    return {label: spectral_radius(A + B @ K) for label, A, B in modes}


def solve_sdp(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SynthesisSolution:
    """Solve a synthesis problem built by :func:`build_lmis` and recover K."""
    result = minimize(problem, tol=tol, max_iter=max_iter)
    P, L, S = result.values["P"], result.values["L"], result.values["S"]
    K = np.linalg.solve(P, L.T).T
    return SynthesisSolution(K=K, P=P, S=S, L=L, cost=float(np.trace(S)), residuals=result.margins, iterations=result.iterations)


def synthesize(
    modes: DiscreteModePair,
    perf: PerformanceSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SynthesisSolution:
    """Robust H2 state feedback common to both modes."""
    solution = solve_sdp(build_lmis(modes, perf), tol=tol, max_iter=max_iter)
    radii = closed_loop_radii(modes, solution.K)
    log.info(
        "Synthesized %d-state gains: cost=%.6g, radii=%s, newton steps=%d",
        perf.n,
        solution.cost,
        ", ".join(f"{k}={v:.4f}" for k, v in radii.items()),
        solution.iterations,
    )
    return solution


def augment_integrator(modes: DiscreteModePair, error_state: int = ERROR_STATE) -> DiscreteModePair:
    """Append i_{k+1} = i_k + Ts·x[error_state] to both modes."""
    n = modes.state_dim
    augmented = []
    for _label, A, B in modes:
        A_aug = np.zeros((n + 1, n + 1))
        A_aug[:n, :n] = A
        A_aug[n, error_state] = modes.ts
        A_aug[n, n] = 1.0
        B_aug = np.vstack([B, np.zeros((1, B.shape[1]))])
        augmented.append((A_aug, B_aug))
    (A_acc, B_acc), (A_dec, B_dec) = augmented
    return DiscreteModePair(A_acc=A_acc, B_acc=B_acc, A_dec=A_dec, B_dec=B_dec, ts=modes.ts, labels=modes.labels)


def synthesize_integral(
    modes: DiscreteModePair,
    perf5: PerformanceSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SynthesisSolution:
    """Design K = [k1…k5] on the model augmented with the distance-error integrator."""
    if perf5.n != modes.state_dim + 1:
        raise ValueError(f"integral design needs {modes.state_dim + 1} weighted states, got {perf5.n}")
    return synthesize(augment_integrator(modes), perf5, tol=tol, max_iter=max_iter)


@dataclass(frozen=True)
class VerificationReport:
    """Independent certificate check of a gain row."""

    spectral_radii: dict[str, float]
    margins: dict[str, float]
    cost: float | None
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        """True when no mode or block is violated."""
        return not self.violations

    @property
    def first_violation(self) -> str | None:
        """Description of the first violated mode or block, if any."""
        return self.violations[0] if self.violations else None

    def as_dict(self) -> dict[str, object]:
        """JSON-friendly view."""
        return {
            "ok": self.ok,
            "spectral_radii": self.spectral_radii,
            "margins": self.margins,
            "cost": self.cost,
            "violations": list(self.violations),
        }


def _certificate_problem(modes: DiscreteModePair, perf: PerformanceSpec, K: FloatArray, margin: float) -> SdpProblem:
    n, nz = perf.n, perf.nz
    layout = VariableLayout.of(("P", n, n, True), ("S", nz, nz, True))
    closed = [(label, A + B @ K) for label, A, B in modes]
    Cz = perf.Cp + perf.Dp @ K
    eye = np.eye(n)

    def builder(v: Mapping[str, FloatArray]) -> list[FloatArray]:
        P, S = v["P"], v["S"]
        Z = Cz @ P
        out = [np.block([[S, Z], [Z.T, P]])]
        out.extend(P - Acl @ P @ Acl.T - eye for _label, Acl in closed)
        out.append(P)
        return out

    names = ["performance", *(f"stability:{label}" for label, _ in closed), "lyapunov"]
    margins = [0.0, *([margin] * len(closed)), margin]
    return SdpProblem.from_builder(layout, builder, lambda v: float(np.trace(v["S"])), names, margins)


def verify_solution(
    sol: SynthesisSolution,
    modes: DiscreteModePair,
    perf: PerformanceSpec,
    tol: float = DEFAULT_TOL,
    margin: float = STRICT_MARGIN,
) -> VerificationReport:
    """Re-derive a common Lyapunov certificate from K alone.

    The (P, S) pair stored in ``sol`` is ignored; the LMIs are solved again
    with K fixed so a corrupted or hand-edited gain row cannot pass on the
    strength of a stale certificate.
    """
    K = np.atleast_2d(np.asarray(sol.K, dtype=float))
    if K.shape != (perf.m, perf.n):
        raise ValueError(f"K has shape {K.shape}, expected {(perf.m, perf.n)}")
    radii = closed_loop_radii(modes, K)
    violations = [f"mode {label}: spectral radius {rho:.6f} >= 1" for label, rho in radii.items() if rho >= 1.0 - STABILITY_MARGIN]

    problem = _certificate_problem(modes, perf, K, margin)
    cost: float | None = None
    try:
        result = minimize(problem, tol=tol)
        margins = result.margins
        cost = float(np.trace(result.values["S"]))
    except SynthesisError as exc:
        margins = {name: value for name, value in exc.report.items() if name != "s_min"}
        if not margins:
            margins = {"s": exc.report.get("s", float("nan"))}
    violations.extend(f"block {name}: margin {value:.3e}" for name, value in margins.items() if value < 0)
    if cost is None and not violations:
        violations.append("certificate LMIs infeasible")
    report = VerificationReport(spectral_radii=radii, margins=margins, cost=cost, violations=tuple(violations))
    if report.ok:
        log.info("Gains verified: trace(S)=%.6g, radii=%s", cost, radii)
    else:
        log.warning("Gain verification failed: %s", report.first_violation)
    return report
