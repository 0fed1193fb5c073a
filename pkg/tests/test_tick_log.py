import math
from dataclasses import replace

import pytest

from src.observability import TICK_COLUMNS, TickLogSchemaError, TickLogWriter, TickRecord, plot_run, plot_step_responses, read_tick_log, write_tick_log

RECORD = TickRecord(
    t=0.1,
    x=1.0 / 3.0,
    y=-0.0,
    theta=0.25,
    d=1.4999999999999998,
    d_ref=1.5,
    v=0.1,
    v_ref=0.2,
    v_dist=0.2,
    v_dwa=math.nan,
    omega_ref=0.0,
    v_vi_est=0.05,
    v_vi_true=0.0,
    integrator=-1e-17,
    fsm_code=3,
    fsm_state="CRUISE",
    clearance=math.inf,
    tether_force=-4.440892098500626e-15,
    goal_dist=12.5,
    track_id=-1,
    selection_ok=False,
    collision=True,
    estimate_valid=True,
)


def _records(n):
    return [replace(RECORD, t=k * 0.1, x=k / 7.0) for k in range(n)]


def test_header_is_the_frozen_column_order(tmp_path):
    path = write_tick_log(tmp_path / "ticks.csv", _records(3))

    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(TICK_COLUMNS)
    assert TICK_COLUMNS[:6] == ("t", "x", "y", "theta", "d", "d_ref")
    assert TICK_COLUMNS[-3:] == ("selection_ok", "collision", "estimate_valid")


def test_read_back_is_exact(tmp_path):
    records = _records(250)
    path = write_tick_log(tmp_path / "ticks.csv", records)

    back = read_tick_log(path)

    assert [r.as_row() for r in back] == [r.as_row() for r in records]
    assert back[1].x == 1.0 / 7.0
    assert math.isnan(back[0].v_dwa)
    assert back[0].clearance == math.inf
    assert back[0].collision is True
    assert back[0].selection_ok is False


def test_writer_keeps_batches_in_order(tmp_path):
    records = _records(53)
    with TickLogWriter(tmp_path / "ticks.csv", batch_size=4) as writer:
        for record in records:
            writer.write(record)

    assert writer.count == 53
    assert [r.t for r in read_tick_log(tmp_path / "ticks.csv")] == [r.t for r in records]


def test_wrong_header_is_a_schema_error(tmp_path):
    path = tmp_path / "ticks.csv"
    path.write_text("t,x,y\n0.0,0.0,0.0\n", encoding="utf-8")

    with pytest.raises(TickLogSchemaError) as err:
        read_tick_log(path)

    assert err.value.line == 1
    assert err.value.expected == TICK_COLUMNS


def test_empty_file_is_a_schema_error(tmp_path):
    path = tmp_path / "ticks.csv"
    path.write_text("", encoding="utf-8")

    with pytest.raises(TickLogSchemaError):
        read_tick_log(path)


def test_truncated_row_is_a_schema_error(tmp_path):
    path = write_tick_log(tmp_path / "ticks.csv", _records(5))
    text = path.read_text(encoding="utf-8")
    path.write_text(text[: len(text) - 20], encoding="utf-8")

    with pytest.raises(TickLogSchemaError, match="tick log schema mismatch") as err:
        read_tick_log(path)

    assert err.value.line == 6


def test_unparsable_value_is_a_schema_error(tmp_path):
    path = write_tick_log(tmp_path / "ticks.csv", _records(2))
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[2] = "abc" + lines[2][lines[2].index(",") :]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    with pytest.raises(TickLogSchemaError) as err:
        read_tick_log(path)

    assert err.value.line == 3


def test_plots_are_written_as_svg(tmp_path):
    pytest.importorskip("matplotlib")

    written = plot_run(_records(20), tmp_path, title="lane")
    step = plot_step_responses({"acc": ([0.0, 0.1, 0.2], [0.0, -0.1, 0.3])}, tmp_path / "step.svg")

    assert [p.name for p in written] == ["distance.svg", "velocity.svg", "tether.svg"]
    assert all(p.read_text(encoding="utf-8").lstrip().startswith("<?xml") for p in [*written, step])


def test_plots_skip_without_records(tmp_path):
    pytest.importorskip("matplotlib")

    assert plot_run([], tmp_path) == []
