"""Small dense SDP solver: phase-I feasibility search plus a log-det barrier method."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, cho_factor, cho_solve, solve

from ..dynamics import FloatArray
from .lmi import LmiBlock, SdpProblem

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 2000
BOX_LIMIT = 1e6
T_INITIAL = 1.0
T_GROWTH = 10.0
NEWTON_DECREMENT_TOL = 1e-9
MAX_CENTRE_STEPS = 80
FULL_STEP_DECREMENT = 0.25
MAX_HALVINGS = 60
PHASE1_TARGET = 1e-3


class SynthesisError(RuntimeError):
    """Raised when the SDP is infeasible, unbounded or fails to converge."""

    def __init__(self, message: str, *, phase: str, report: dict[str, float] | None = None):
        self.phase = phase
        self.report = dict(report or {})
        detail = ", ".join(f"{k}={v:.3e}" for k, v in self.report.items())
        super().__init__(f"{message} ({phase})" + (f": {detail}" if detail else ""))


@dataclass(frozen=True, eq=False)
class SdpResult:
    """Central-path point returned by :func:`minimize`."""

    x: FloatArray
    values: dict[str, FloatArray]
    cost: float
    margins: dict[str, float]
    iterations: int
    phase1_iterations: int = 0
    gap: float = field(default=0.0)


def _margins(blocks: tuple[LmiBlock, ...], x: FloatArray) -> dict[str, float]:
    return {b.name: float(np.min(np.linalg.eigvalsh(b.value(x)))) for b in blocks}


class _Barrier:
    """−Σ log det F_j(z) − Σ log(M ∓ z_i) over the boxed coordinates, plus t·cᵀz."""

    def __init__(self, F0: list[FloatArray], Fi: list[FloatArray], c: FloatArray, boxed: int):
        self.F0 = F0
        self.Fi = Fi
        self.c = c
        self.boxed = boxed
        self.dims = sum(F.shape[0] for F in F0) + 2 * boxed

    def feasible(self, z: FloatArray) -> bool:
        if self.boxed and np.max(np.abs(z[: self.boxed])) >= BOX_LIMIT:
            return False
        for F0, Fi in zip(self.F0, self.Fi, strict=True):
            try:
                cho_factor(F0 + np.tensordot(z, Fi, axes=1), lower=True)
            except LinAlgError:
                return False
        return True

    def derivatives(self, z: FloatArray, t: float) -> tuple[FloatArray, FloatArray]:
        size = z.shape[0]
        grad = t * self.c.copy()
        hess = np.zeros((size, size))
        for F0, Fi in zip(self.F0, self.Fi, strict=True):
            k = F0.shape[0]
            factor = cho_factor(F0 + np.tensordot(z, Fi, axes=1), lower=True)
            G = cho_solve(factor, Fi.transpose(1, 0, 2).reshape(k, size * k)).reshape(k, size, k).transpose(1, 0, 2)
            grad -= np.einsum("ijj->i", G)
            hess += np.einsum("ijk,lkj->il", G, G)
        if self.boxed:
            xb = z[: self.boxed]
            upper = 1.0 / (BOX_LIMIT - xb)
            lower = 1.0 / (BOX_LIMIT + xb)
            grad[: self.boxed] += upper - lower
            idx = np.arange(self.boxed)
            hess[idx, idx] += upper**2 + lower**2
        return grad, hess


def _centre(barrier: _Barrier, z: FloatArray, t: float, budget: int) -> tuple[FloatArray, int]:
    """Damped Newton minimization of the barrier at fixed ``t``."""
    used = 0
    while used < min(budget, MAX_CENTRE_STEPS):
        grad, hess = barrier.derivatives(z, t)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinAlgWarning)
                step = solve(hess, -grad, assume_a="pos")
        except (LinAlgError, ValueError):
            step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        decrement = float(-grad @ step)
        used += 1
        if not math.isfinite(decrement) or decrement / 2 <= NEWTON_DECREMENT_TOL:
            break
        lam = math.sqrt(max(decrement, 0.0))
        alpha = 1.0 if lam < FULL_STEP_DECREMENT else 1.0 / (1.0 + lam)
        for _ in range(MAX_HALVINGS):
            candidate = z + alpha * step
            if barrier.feasible(candidate):
                z = candidate
                break
            alpha *= 0.5
        else:
            break
    return z, used


def _phase1(problem: SdpProblem, tol: float, max_iter: int) -> tuple[FloatArray, int]:
    """Find x with every block strictly positive definite, or prove there is none."""
    size = problem.size
    x0 = np.zeros(size)
    worst = min(float(np.min(np.linalg.eigvalsh(b.value(x0)))) for b in problem.blocks)
    if worst > 0:
        return x0, 0

    F0 = [b.F0 for b in problem.blocks]
    Fi = [np.concatenate([b.Fi, np.eye(b.dim)[None, :, :]], axis=0) for b in problem.blocks]
    c = np.zeros(size + 1)
    c[-1] = 1.0
    barrier = _Barrier(F0, Fi, c, boxed=size)
    z = np.concatenate([x0, [1.0 - worst]])
    t = T_INITIAL
    used = 0
    while used < max_iter:
        z, n = _centre(barrier, z, t, max_iter - used)
        used += n
        s = float(z[-1])
        gap = barrier.dims / t
        log.debug("phase I: t=%.1e s=%.3e gap=%.1e", t, s, gap)
        if s < -PHASE1_TARGET or (s < 0 and gap <= tol * (1 + abs(s))):
            return z[:-1], used
        if s - gap > 0 or gap <= tol * (1 + abs(s)):
            raise SynthesisError("LMIs are infeasible", phase="phase I", report={"s_min": s, **_margins(problem.blocks, z[:-1])})
        t *= T_GROWTH
    raise SynthesisError("feasibility search did not converge", phase="phase I", report={"s": float(z[-1])})


def minimize(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SdpResult:
    """Minimize the problem's linear objective over its LMI blocks.

    Stops once the barrier gap Σ dim / t is below ``tol·(1 + |cost|)``.

    Raises:
        SynthesisError: infeasible, unbounded (variable box reached) or not converged.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, phase1_used = _phase1(problem, tol, max_iter)

    F0 = [b.F0 for b in problem.blocks]
    Fi = [b.Fi for b in problem.blocks]
    barrier = _Barrier(F0, Fi, problem.c, boxed=problem.size)
    t = T_INITIAL
    used = 0
    while True:
        x, n = _centre(barrier, x, t, max_iter - used)
        used += n
        cost = problem.cost(x)
        gap = barrier.dims / t
        log.debug("barrier: t=%.1e cost=%.9g gap=%.1e newton=%d", t, cost, gap, used)
        if np.max(np.abs(x), initial=0.0) > 0.999 * BOX_LIMIT:
            raise SynthesisError("objective appears unbounded", phase="phase II", report={"cost": cost, "max_abs_x": float(np.max(np.abs(x)))})
        if gap <= tol * (1 + abs(cost)):
            break
        if used >= max_iter:
            raise SynthesisError("barrier method did not converge", phase="phase II", report={"cost": cost, "gap": gap})
        t *= T_GROWTH

    return SdpResult(
        x=x,
        values=problem.layout.unpack(x),
        cost=cost,
        margins=_margins(problem.blocks, x),
        iterations=used,
        phase1_iterations=phase1_used,
        gap=gap,
    )
