"""Per-tick CSV log of a scenario run.

The column order is part of the file format: replays compare the header
against :data:`TICK_COLUMNS` and refuse anything else.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

NO_TRACK = -1


@dataclass(frozen=True, slots=True)
class TickRecord:
    """One control tick: pose, distances, speeds, supervisor state and safety flags."""

    t: float
    x: float
    y: float
    theta: float
    d: float
    d_ref: float
    v: float
    v_ref: float
    v_dist: float
    v_dwa: float
    omega_ref: float
    v_vi_est: float
    v_vi_true: float
    integrator: float
    fsm_code: int
    fsm_state: str
    clearance: float
    tether_force: float
    goal_dist: float
    track_id: int
    selection_ok: bool
    collision: bool
    estimate_valid: bool

    def as_row(self) -> list[str]:
        """CSV fields; floats use ``repr`` so a re-read is bit-exact."""
        return [_format(value) for value in astuple(self)]

    @classmethod
    def from_row(cls, row: list[str]) -> TickRecord:
        """Parse one CSV row written by :meth:`as_row`."""
        values: list[Any] = []
        for spec, raw in zip(fields(cls), row, strict=True):
            if spec.type == "float":
                values.append(float(raw))
            elif spec.type == "int":
                values.append(int(raw))
            elif spec.type == "bool":
                values.append(raw == "1")
            else:
                values.append(raw)
        return cls(*values)


TICK_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(TickRecord))


def _format(value: object) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


class TickLogSchemaError(ValueError):
    """Raised when a tick log's header or rows do not match the frozen columns."""

    def __init__(self, path: Path, expected: object, found: object, line: int | None = None):
        self.path = path
        self.expected = expected
        self.found = found
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"tick log schema mismatch at {where}: expected {expected!r}, found {found!r}")


class TickLogWriter:
    """Buffers records and hands full batches to a single background writer.

    One worker thread keeps the batches in submission order.
    """

    def __init__(self, path: Path, batch_size: int = 100):
        self.path = path
        self.batch_size = batch_size
        self.count = 0
        self._buffer: list[list[str]] = []
        self._pending: list[Future[None]] = []
        path.parent.mkdir(parents=True, exist_ok=True)
        self._file = path.open("w", encoding="utf-8", newline="")
        self._csv = csv.writer(self._file, lineterminator="\n")
        self._csv.writerow(TICK_COLUMNS)
        self._executor = ThreadPoolExecutor(max_workers=1, thread_name_prefix="tick-log")

    def write(self, record: TickRecord) -> None:
        """Queue one record."""
        self._buffer.append(record.as_row())
        self.count += 1
        if len(self._buffer) >= self.batch_size:
            self._flush_buffer()

    def _flush_buffer(self) -> None:
        batch, self._buffer = self._buffer, []
        self._pending.append(self._executor.submit(self._csv.writerows, batch))

    def close(self) -> None:
        """Write what is left, wait for the worker and close the file."""
        if self._buffer:
            self._flush_buffer()
        self._executor.shutdown(wait=True)
        for future in self._pending:
            future.result()
        self._file.close()
        log.info("Wrote %d tick records to %s", self.count, self.path)

    def __enter__(self) -> TickLogWriter:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def write_tick_log(path: Path, records: list[TickRecord]) -> Path:
    """Write a whole log at once."""
    with TickLogWriter(path) as writer:
        for record in records:
            writer.write(record)
    return path


def read_tick_log(path: Path) -> list[TickRecord]:
    """Read a tick log back.

    Raises:
        TickLogSchemaError: header differs from :data:`TICK_COLUMNS`, or a row
            has the wrong number of fields or an unparsable value.
    """
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != TICK_COLUMNS:
            raise TickLogSchemaError(path, TICK_COLUMNS, tuple(header or ()), line=1)
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TICK_COLUMNS):
                raise TickLogSchemaError(path, len(TICK_COLUMNS), len(row), line=lineno)
            try:
                records.append(TickRecord.from_row(row))
            except ValueError as exc:
                raise TickLogSchemaError(path, "numeric field", row, line=lineno) from exc
    log.debug("Read %d tick records from %s", len(records), path)
    return records
