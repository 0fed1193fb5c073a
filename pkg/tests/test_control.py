import math

import numpy as np
import pytest

from src.control import (
    ControllerMemory,
    DistanceGains,
    StaleEstimateError,
    UserEstimate,
    controller_step,
    reset,
    sat,
    with_applied_reference,
)
from src.dynamics import PlantState, advance

GAINS = DistanceGains(k1=-1.2, k2=-1.8, k3=-0.9, k4=-0.2, k5=-0.6)


def _follow(gains, *, seconds, bias=0.0, user_speed=0.8, d_ref=1.5, reset_at=None):
    state = PlantState.at_rest(x=d_ref)
    user = 0.0
    mem = ControllerMemory()
    errors, refs = [], []
    for k in range(int(round(seconds / gains.ts))):
        if reset_at is not None and k == reset_at:
            mem = reset(mem)
        est = UserEstimate(d=state.x - user, p_vi=user, v_vi=user_speed + bias)
        v_dist, mem = controller_step(gains, mem, est, d_ref, state.v)
        v_ref = min(max(v_dist, 0.0), gains.v_max)
        mem = with_applied_reference(mem, v_ref)
        state = advance(state, v_ref, 0.0, gains.ts, dt=0.01)
        user += user_speed * gains.ts
        errors.append(state.x - user - d_ref)
        refs.append(v_ref)
    return np.asarray(errors), np.asarray(refs)


def test_sat_examples():
    assert sat(3.0, 2.0) == 2.0
    assert sat(-3.0, 2.0) == -2.0
    assert sat(1.0, 2.0) == 1.0


def test_steady_state_returns_user_speed():
    mem = ControllerMemory(v_ref_prev=0.7, v_vi_prev=0.7, v_prev=0.7, integrator=0.0, seeded=True)
    v_dist, nxt = controller_step(GAINS, mem, UserEstimate(d=1.5, v_vi=0.7), 1.5, 0.7)
    assert v_dist == pytest.approx(0.7, abs=1e-15)
    assert nxt.integrator == 0.0
    assert nxt.v_vi_prev == 0.7


def test_reset_zeroes_integrator_and_reseeds():
    mem = ControllerMemory(v_ref_prev=1.0, v_vi_prev=0.4, v_prev=0.9, integrator=0.3, seeded=True)
    fresh = reset(mem)
    assert fresh.integrator == 0.0
    assert not fresh.seeded
    v_dist, _ = controller_step(GAINS, fresh, UserEstimate(d=2.0, v_vi=0.5), 2.0, 0.5)
    assert v_dist == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize(("valid", "age"), [(False, 0.0), (True, 0.6)])
def test_unusable_estimate_holds_last_output(valid, age):
    mem = ControllerMemory(v_ref_prev=0.9, seeded=True)
    with pytest.raises(StaleEstimateError) as exc_info:
        controller_step(GAINS, mem, UserEstimate(d=1.5, valid=valid, age=age), 1.5, 0.9)
    assert exc_info.value.held == 0.9
    if valid:
        assert exc_info.value.age == pytest.approx(0.6)


def test_estimate_at_age_limit_is_usable():
    v_dist, mem = controller_step(GAINS, ControllerMemory(), UserEstimate(d=1.5, age=0.5), 1.5, 0.0)
    assert v_dist == 0.0
    assert mem.seeded


def test_gains_reject_singular_implicit_step():
    with pytest.raises(ValueError, match="1 - k1"):
        DistanceGains(k1=10.0, k2=0.0, k3=0.0, k4=0.0, ts=0.1)
    with pytest.raises(ValueError, match="4 or 5"):
        DistanceGains.from_vector([1.0, 2.0])


def test_anti_windup_bound_holds_exactly():
    rng = np.random.default_rng(11)
    bound = GAINS.integrator_bound
    assert bound == pytest.approx(1.5 / (3 * 0.6))
    mem = ControllerMemory()
    for _ in range(2000):
        est = UserEstimate(d=float(rng.uniform(-5, 10)), v_vi=float(rng.uniform(0, 1.5)))
        _, mem = controller_step(GAINS, mem, est, 1.5, float(rng.uniform(0, 1.5)))
        assert abs(mem.integrator) <= bound


def test_zero_k5_matches_plain_law_bitwise():
    plain = DistanceGains.from_vector([GAINS.k1, GAINS.k2, GAINS.k3, GAINS.k4])
    zero = DistanceGains.from_vector([GAINS.k1, GAINS.k2, GAINS.k3, GAINS.k4, 0.0])
    assert GAINS.without_integral() == zero
    rng = np.random.default_rng(5)
    mem_a = mem_b = ControllerMemory()
    for _ in range(200):
        est = UserEstimate(d=float(rng.uniform(0, 4)), v_vi=float(rng.uniform(0, 1.2)))
        v = float(rng.uniform(0, 1.5))
        out_a, mem_a = controller_step(plain, mem_a, est, 1.5, v)
        out_b, mem_b = controller_step(zero, mem_b, est, 1.5, v)
        assert out_a == out_b
    assert mem_a == mem_b


def test_recursion_is_implicit_euler_of_state_feedback():
    rng = np.random.default_rng(2)
    ts = GAINS.ts
    mem = ControllerMemory(seeded=True)
    for _ in range(100):
        est = UserEstimate(d=float(rng.uniform(0, 4)), v_vi=float(rng.uniform(0, 1.2)))
        v = float(rng.uniform(0, 1.5))
        v_dist, nxt = controller_step(GAINS, mem, est, 1.5, v)
        w, w_prev = v_dist - est.v_vi, mem.v_ref_prev - mem.v_vi_prev
        rel, rel_prev = v - est.v_vi, mem.v_prev - mem.v_vi_prev
        rhs = GAINS.k1 * w + GAINS.k2 * (est.d - 1.5) + GAINS.k3 * rel + GAINS.k4 * (rel - rel_prev) / ts + GAINS.k5 * mem.integrator
        assert (w - w_prev) / ts == pytest.approx(rhs, abs=1e-9)
        mem = nxt


@pytest.mark.parametrize("bias", [0.1, -0.1])
def test_integral_law_removes_speed_bias(modes, integral_solution, bias):
    gains = DistanceGains.from_vector(integral_solution.gains, ts=modes.ts)
    errors, _ = _follow(gains, seconds=150.0, bias=bias)
    assert np.max(np.abs(errors[-100:])) < 1e-3


def test_plain_law_keeps_bias_offset(modes, integral_solution):
    gains = DistanceGains.from_vector(integral_solution.gains, ts=modes.ts)
    with_integral, _ = _follow(gains, seconds=150.0, bias=0.1)
    without, _ = _follow(gains.without_integral(), seconds=150.0, bias=0.1)
    assert abs(without[-1]) > 10 * abs(with_integral[-1])


def test_reset_mid_run_has_no_transient(modes, integral_solution):
    gains = DistanceGains.from_vector(integral_solution.gains, ts=modes.ts)
    _, refs = _follow(gains, seconds=80.0, reset_at=600)
    assert abs(refs[600] - refs[599]) < 0.02
    assert not math.isnan(refs[-1])
