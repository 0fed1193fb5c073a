"""Shared pytest fixtures.

The synthesis fixtures are session-scoped: each barrier solve takes a few
hundred Newton steps and several test modules need the default gains.
World fixtures build small scenario files under ``tmp_path`` so closed-loop
tests never depend on the shipped ``scenarios/`` directory layout.
"""

from __future__ import annotations

import json

import pytest

from src.dynamics import SwitchedLongitudinalModel, discretize
from src.synthesis import default_performance, integral_performance, synthesize, synthesize_integral


@pytest.fixture(scope="session")
def modes():
    return discretize(SwitchedLongitudinalModel())


@pytest.fixture(scope="session")
def default_solution(modes):
    return synthesize(modes, default_performance())


@pytest.fixture(scope="session")
def integral_solution(modes):
    return synthesize_integral(modes, integral_performance())


@pytest.fixture(scope="session")
def gains_file(tmp_path_factory, modes, default_solution, integral_solution):
    """A gains file holding both designs, shared by controller and scenario tests."""
    from src.synthesis import DEFAULT_INTEGRATOR_WEIGHT, DEFAULT_Q, DEFAULT_R, save_gains

    path = tmp_path_factory.mktemp("gains") / "gains.json"
    return save_gains(
        path,
        integral_solution,
        modes.ts,
        plain=default_solution,
        q=DEFAULT_Q,
        r=DEFAULT_R,
        integrator_weight=DEFAULT_INTEGRATOR_WEIGHT,
    )


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario dict (plus optional plan text) and return its path."""

    def _write(data: dict, *, plan_text: str | None = None, name: str = "scenario.json"):
        if plan_text is not None:
            (tmp_path / "plan.txt").write_text(plan_text, encoding="utf-8")
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write
