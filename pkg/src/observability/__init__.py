"""Observability helpers: tick logs, run and failure records, plots."""

from .failure_log import clear_failure_log, failure_hint, save_failure_log, save_run_log, write_json
from .plots import plot_run, plot_step_responses
from .tick_log import NO_TRACK, TICK_COLUMNS, TickLogSchemaError, TickLogWriter, TickRecord, read_tick_log, write_tick_log

__all__ = [
    "NO_TRACK",
    "TICK_COLUMNS",
    "TickLogSchemaError",
    "TickLogWriter",
    "TickRecord",
    "clear_failure_log",
    "failure_hint",
    "plot_run",
    "plot_step_responses",
    "read_tick_log",
    "save_failure_log",
    "save_run_log",
    "write_json",
    "write_tick_log",
]
