"""Run summaries and failure records written next to a command's outputs."""

from __future__ import annotations

import json
import logging
import math
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

FAILURE_FILE = "failure.json"
RUN_LOG_FILE = "run.json"


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    return value


def write_json(path: Path, data: dict[str, Any]) -> Path:
    """Write ``data`` through a temporary file so readers never see half a file.

    Non-finite floats become ``null``.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(".tmp")
    with temp_file.open("w", encoding="utf-8") as f:
        json.dump(_jsonable(data), f, indent=2, ensure_ascii=False)
    temp_file.replace(path)
    return path


def save_run_log(out_dir: Path, command: str, summary: dict[str, Any]) -> Path:
    """Save the summary of a finished command."""
    data = {
        "timestamp": datetime.now(UTC).isoformat(),
        "command": command,
        **summary,
    }
    path = write_json(out_dir / RUN_LOG_FILE, data)
    log.info("Saved run log to %s", path)
    return path


def failure_hint(error_message: str) -> str | None:
    """Suggestion for the most common failure causes."""
    error_lower = error_message.lower()
    if "infeasible" in error_lower:
        return "The LMIs have no solution for these weights. Check the model parameters or relax Q/R."
    if "did not converge" in error_lower or "iteration limit" in error_lower:
        return "The barrier solver ran out of iterations. Raise SYNTH_MAX_ITER or loosen SYNTH_TOL."
    if "tick log" in error_lower:
        return "The tick log is truncated or was written with a different column layout. Re-run the scenario."
    if "collision" in error_lower:
        return "The robot footprint touched an obstacle. Inspect the tick log around the reported time."
    if "gains" in error_lower:
        return "Regenerate the gains file with the synth command."
    return None


def save_failure_log(out_dir: Path, error_message: str, traceback_str: str | None = None, *, command: str = "run") -> Path:
    """Save a failure record for ``command``."""
    data = {
        "timestamp": datetime.now(UTC).isoformat(),
        "error": error_message,
        "traceback": traceback_str,
        "hint": failure_hint(error_message),
        "command": command,
    }
    path = write_json(out_dir / FAILURE_FILE, data)
    log.info("Saved failure log to %s", path)
    return path


def clear_failure_log(out_dir: Path) -> None:
    """Remove a failure record left by an earlier run."""
    log_file = out_dir / FAILURE_FILE
    if log_file.exists():
        log_file.unlink()
        log.debug("Cleared failure log")
