"""Tests for the run summary and failure records written into a command's output directory."""

from __future__ import annotations

import json
import math

import pytest

from src.observability.failure_log import (
    FAILURE_FILE,
    RUN_LOG_FILE,
    clear_failure_log,
    failure_hint,
    save_failure_log,
    save_run_log,
    write_json,
)


def test_save_run_log_writes_summary(tmp_path):
    save_run_log(tmp_path, "run", {"scenario": "walking_user", "metrics": {"collisions": 0}})

    data = json.loads((tmp_path / RUN_LOG_FILE).read_text())
    assert data["command"] == "run"
    assert data["scenario"] == "walking_user"
    assert data["metrics"] == {"collisions": 0}
    assert "timestamp" in data


def test_non_finite_values_are_written_as_null(tmp_path):
    write_json(tmp_path / "metrics.json", {"settling_time": math.nan, "min_clearance": math.inf, "pairs": [1.0, -math.inf]})

    data = json.loads((tmp_path / "metrics.json").read_text())
    assert data == {"settling_time": None, "min_clearance": None, "pairs": [1.0, None]}


def test_write_json_leaves_no_temporary_file(tmp_path):
    write_json(tmp_path / "out" / "metrics.json", {"a": 1})

    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["metrics.json"]


def test_save_failure_log_basic_fields(tmp_path):
    save_failure_log(tmp_path, "something broke", "Traceback ...", command="replay")

    data = json.loads((tmp_path / FAILURE_FILE).read_text())
    assert data["error"] == "something broke"
    assert data["traceback"] == "Traceback ..."
    assert data["command"] == "replay"
    assert data["hint"] is None


@pytest.mark.parametrize(
    ("message", "needle"),
    [
        ("LMIs are infeasible (worst margin -0.3)", "no solution"),
        ("barrier method did not converge in 2000 Newton steps", "SYNTH_MAX_ITER"),
        ("tick log schema mismatch at run/ticks.csv:1", "Re-run"),
        ("2 collisions in bollards", "footprint"),
        ("gains.json: missing 'gains' or 'ts'", "synth command"),
    ],
)
def test_failure_hints(tmp_path, message, needle):
    save_failure_log(tmp_path, message)

    data = json.loads((tmp_path / FAILURE_FILE).read_text())
    assert needle in data["hint"]
    assert failure_hint(message) == data["hint"]


def test_save_failure_log_without_traceback(tmp_path):
    save_failure_log(tmp_path, "boom")

    assert json.loads((tmp_path / FAILURE_FILE).read_text())["traceback"] is None


def test_clear_failure_log_removes_file(tmp_path):
    save_failure_log(tmp_path, "boom")
    assert (tmp_path / FAILURE_FILE).exists()

    clear_failure_log(tmp_path)
    assert not (tmp_path / FAILURE_FILE).exists()


def test_clear_failure_log_noop_when_missing(tmp_path):
    clear_failure_log(tmp_path)
