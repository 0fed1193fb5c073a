"""Fine-grained plant integrator used as simulator ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import FloatArray, InvalidModelError, LongitudinalState, Mode, ModeParams, SwitchedLongitudinalModel

PLANT_DT = 1e-3
MODE_HYSTERESIS = 0.02
YAW_LAG = 0.3
SAMPLE_EVERY = 10

DEFAULT_MODEL = SwitchedLongitudinalModel()

_Vec = tuple[float, float, float, float, float, float, float]


@dataclass(frozen=True, slots=True)
class PlantState:
    """Longitudinal state, planar pose and yaw rate of the robot."""

    longitudinal: LongitudinalState = field(default_factory=LongitudinalState)
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    omega: float = 0.0
    mode: Mode = Mode.ACC

    @property
    def v(self) -> float:
        """Forward speed."""
        return self.longitudinal.v

    @property
    def pose(self) -> tuple[float, float, float]:
        """Planar pose (x, y, θ)."""
        return self.x, self.y, self.theta

    @classmethod
    def at_rest(cls, x: float = 0.0, y: float = 0.0, theta: float = 0.0) -> PlantState:
        """Robot standing still at the given pose."""
        return cls(x=x, y=y, theta=theta)


def select_mode(v_ref_cmd: float, v: float, previous: Mode) -> Mode:
    """Pick the active mode from the commanded and measured speed with hysteresis."""
    if v_ref_cmd > v + MODE_HYSTERESIS:
        return Mode.ACC
    if v_ref_cmd < v - MODE_HYSTERESIS:
        return Mode.DEC
    return previous


def _derivative(s: _Vec, v_ref: float, omega_ref: float, params: ModeParams) -> _Vec:
    _p, v, a, _x, _y, theta, omega = s
    return (
        v,
        a,
        (v_ref - v - params.alpha * a) / params.beta,
        v * math.cos(theta),
        v * math.sin(theta),
        omega,
        (omega_ref - omega) / YAW_LAG,
    )


def _axpy(s: _Vec, k: _Vec, h: float) -> _Vec:
    return (
        s[0] + h * k[0],
        s[1] + h * k[1],
        s[2] + h * k[2],
        s[3] + h * k[3],
        s[4] + h * k[4],
        s[5] + h * k[5],
        s[6] + h * k[6],
    )


def plant_step(
    state: PlantState,
    v_ref_cmd: float,
    omega_ref: float,
    dt: float = PLANT_DT,
    model: SwitchedLongitudinalModel = DEFAULT_MODEL,
) -> PlantState:
    """Advance the plant by ``dt`` under a held (v_ref, ω_ref) command.

    A new speed command selects the active mode and applies the jump of the
    acceleration caused by the numerator zero (the integral of the impulse in
    dv_ref/dt). The rest of the step is RK4 on the selected mode.
    """
    if not dt > 0 or not math.isfinite(dt):
        raise InvalidModelError("dt", dt, "step must be positive")
    if not (math.isfinite(v_ref_cmd) and math.isfinite(omega_ref)):
        raise InvalidModelError("command", v_ref_cmd if not math.isfinite(v_ref_cmd) else omega_ref)

    lon = state.longitudinal
    mode = state.mode
    a = lon.a
    delta = v_ref_cmd - lon.v_ref
    if delta != 0.0:
        mode = select_mode(v_ref_cmd, lon.v, mode)
        jump = model.params(mode)
        a += jump.zero_t / jump.beta * delta
    params = model.params(mode)

    s: _Vec = (lon.p, lon.v, a, state.x, state.y, state.theta, state.omega)
    k1 = _derivative(s, v_ref_cmd, omega_ref, params)
    k2 = _derivative(_axpy(s, k1, dt / 2), v_ref_cmd, omega_ref, params)
    k3 = _derivative(_axpy(s, k2, dt / 2), v_ref_cmd, omega_ref, params)
    k4 = _derivative(_axpy(s, k3, dt), v_ref_cmd, omega_ref, params)
    nxt = tuple(si + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4) for si, a1, a2, a3, a4 in zip(s, k1, k2, k3, k4, strict=True))

    return PlantState(
        longitudinal=LongitudinalState(v_ref=v_ref_cmd, p=nxt[0], v=nxt[1], a=nxt[2]),
        x=nxt[3],
        y=nxt[4],
        theta=nxt[5],
        omega=nxt[6],
        mode=mode,
    )


def advance(
    state: PlantState,
    v_ref_cmd: float,
    omega_ref: float,
    duration: float,
    dt: float = PLANT_DT,
    model: SwitchedLongitudinalModel = DEFAULT_MODEL,
) -> PlantState:
    """Hold a command for ``duration`` seconds, sub-stepping at ``dt``."""
    steps = int(math.floor(duration / dt + 1e-9))
    for _ in range(steps):
        state = plant_step(state, v_ref_cmd, omega_ref, dt, model)
    rest = duration - steps * dt
    if rest > 1e-12:
        state = plant_step(state, v_ref_cmd, omega_ref, rest, model)
    return state


def step_response(
    model: SwitchedLongitudinalModel,
    mode: Mode,
    amplitude: float = 1.0,
    duration: float = 10.0,
) -> tuple[FloatArray, FloatArray]:
    """Speed response of one mode to a v_ref step, sampled every 10 ms.

    The acceleration mode steps up from rest; the deceleration mode steps down
    from a steady ``amplitude`` to zero.
    """
    if mode is Mode.ACC:
        state = PlantState(mode=Mode.ACC)
        target = amplitude
    else:
        start = LongitudinalState(v_ref=amplitude, v=amplitude)
        state = PlantState(longitudinal=start, mode=Mode.DEC)
        target = 0.0

    n = int(round(duration / PLANT_DT))
    times = [0.0]
    speeds = [state.v]
    for k in range(1, n + 1):
        state = plant_step(state, target, 0.0, PLANT_DT, model)
        if k % SAMPLE_EVERY == 0:
            times.append(k * PLANT_DT)
            speeds.append(state.v)
    return np.asarray(times), np.asarray(speeds)
