"""SVG figures of a run: distance, velocities and tether force against time.

matplotlib is an optional extra; without it the plotting calls log a warning
and write nothing.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .tick_log import TickRecord

log = logging.getLogger(__name__)


def _figure_class() -> Any:
    try:
        from matplotlib.figure import Figure
    except ImportError:
        log.warning("matplotlib is not installed; skipping plots (install the 'plots' extra)")
        return None
    return Figure


def _save(figure: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format="svg", bbox_inches="tight")
    log.info("Wrote %s", path)
    return path


def plot_run(records: Sequence[TickRecord], out_dir: Path, title: str = "") -> list[Path]:
    """One SVG per panel: distance.svg, velocity.svg and tether.svg."""
    figure_cls = _figure_class()
    if figure_cls is None or not records:
        return []

    t = np.array([r.t for r in records])
    panels: list[tuple[str, str, list[tuple[str, np.ndarray]]]] = [
        (
            "distance",
            "distance [m]",
            [("d", np.array([r.d for r in records])), ("d_ref", np.array([r.d_ref for r in records]))],
        ),
        (
            "velocity",
            "velocity [m/s]",
            [
                ("v", np.array([r.v for r in records])),
                ("v_vi", np.array([r.v_vi_est for r in records])),
                ("v_ref", np.array([r.v_ref for r in records])),
            ],
        ),
        ("tether", "tether force [N]", [("force", np.array([r.tether_force for r in records]))]),
    ]

    written = []
    for name, ylabel, series in panels:
        figure = figure_cls(figsize=(8, 3))
        ax = figure.add_subplot()
        for label, values in series:
            ax.plot(t, values, label=label, linewidth=1.0)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(ylabel)
        ax.grid(visible=True, alpha=0.3)
        ax.legend(loc="upper right")
        if title:
            ax.set_title(title)
        written.append(_save(figure, out_dir / f"{name}.svg"))
    return written


def plot_step_responses(responses: Mapping[str, tuple[np.ndarray, np.ndarray]], path: Path) -> Path | None:
    """Speed against time for each mode's step response in a single panel."""
    figure_cls = _figure_class()
    if figure_cls is None:
        return None
    figure = figure_cls(figsize=(8, 3))
    ax = figure.add_subplot()
    for label, (times, speeds) in responses.items():
        ax.plot(times, speeds, label=label, linewidth=1.0)
    ax.axhline(0.0, color="black", linewidth=0.5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("speed [m/s]")
    ax.grid(visible=True, alpha=0.3)
    ax.legend(loc="lower right")
    return _save(figure, path)
