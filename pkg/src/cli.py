"""Command-line interface: synth, verify, run, replay and step.

Every subcommand writes into an output directory. A failing command leaves a
``failure.json`` record there and exits with status 1; a successful one
removes any stale record.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import traceback
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from .config import Settings, configure_logging, warn_env_incomplete
from .context import CommandContext
from .dynamics import DiscreteModePair, InvalidModelError, Mode, ModeParams, SwitchedLongitudinalModel, discretize, step_response
from .observability import (
    NO_TRACK,
    TickLogSchemaError,
    TickLogWriter,
    clear_failure_log,
    plot_run,
    plot_step_responses,
    read_tick_log,
    save_failure_log,
    save_run_log,
    write_json,
)
from .perception import ScanLogError, ScanLogWriter, perceive_from_log
from .planning import GridFormatError, PlanError
from .sim import (
    ScenarioError,
    ScenarioRunError,
    compute_metrics,
    distance_gains,
    load_scenario,
    parse_event_lines,
    run_scenario,
    with_events,
)
from .synthesis import (
    DimensionError,
    GainsFileError,
    GainsRecord,
    SynthesisError,
    SynthesisSolution,
    augment_integrator,
    load_gains,
    save_gains,
    synthesize,
    synthesize_integral,
    verify_solution,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1

GAINS_FILE = "gains.json"
SYNTH_REPORT_FILE = "synth_report.json"
VERIFY_FILE = "verify.json"
TICK_LOG_FILE = "ticks.csv"
METRICS_FILE = "metrics.json"
REPLAY_METRICS_FILE = "replay_metrics.json"
SCAN_LOG_FILE = "scans.log"
STEP_FILE = "step_response.csv"
DISCRETE_KEYS = ("A_acc", "B_acc", "A_dec", "B_dec")

DOMAIN_ERRORS: tuple[type[Exception], ...] = (
    ScenarioError,
    ScenarioRunError,
    SynthesisError,
    DimensionError,
    InvalidModelError,
    GainsFileError,
    TickLogSchemaError,
    ScanLogError,
    PlanError,
    GridFormatError,
    OSError,
)


class CommandFailed(Exception):
    """A command finished but its outcome is a failure (collision, failed check)."""


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _model_from_file(path: Path) -> DiscreteModePair:
    """Mode pair from ``{"ts", "acc": {alpha, beta, zero_t}, "dec": {...}}`` or raw ``"discrete"`` matrices."""
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidModelError("model file", math.nan, f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise InvalidModelError("model file", math.nan, f"{path}: expected a JSON object")
    try:
        ts = float(data.get("ts", 0.1))
    except (TypeError, ValueError) as exc:
        raise InvalidModelError("model file", math.nan, f"{path}: ts must be a number") from exc
    if "discrete" in data:
        try:
            raw = data["discrete"]
            arrays = {key: np.atleast_2d(np.asarray(raw[key], dtype=float)) for key in DISCRETE_KEYS}
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidModelError("model file", math.nan, f"{path}: 'discrete' needs numeric {', '.join(DISCRETE_KEYS)}") from exc
        return DiscreteModePair(ts=ts, **arrays)
    try:
        model = SwitchedLongitudinalModel(acc=ModeParams(**data["acc"]), dec=ModeParams(**data["dec"]), ts=ts)
    except (KeyError, TypeError) as exc:
        raise InvalidModelError("model file", math.nan, f"{path}: expected 'acc' and 'dec' with alpha, beta, zero_t") from exc
    return discretize(model)


def _modes(args: argparse.Namespace) -> DiscreteModePair:
    if args.model is not None:
        return _model_from_file(args.model)
    return discretize(SwitchedLongitudinalModel())


def _synth_settings(args: argparse.Namespace, settings: Settings) -> Settings:
    """Settings with the command-line weight overrides applied."""
    overrides = {"synth_q": args.q, "synth_r": args.r, "synth_integrator_weight": args.integrator_weight}
    return replace(settings, **{name: value for name, value in overrides.items() if value is not None})


def _design(modes: DiscreteModePair, settings: Settings) -> tuple[SynthesisSolution, SynthesisSolution]:
    """Plain four-state design and the integrator-augmented one."""
    plain_spec, integral_spec = settings.performance_weights()
    plain = synthesize(modes, plain_spec, tol=settings.synth_tol, max_iter=settings.synth_max_iter)
    integral = synthesize_integral(modes, integral_spec, tol=settings.synth_tol, max_iter=settings.synth_max_iter)
    return plain, integral


# --- synth / verify ---------------------------------------------------------


def cmd_synth(args: argparse.Namespace, ctx: CommandContext) -> int:
    """Synthesize both gain rows and write the gains file plus a residual report."""
    modes = _modes(args)
    settings = _synth_settings(args, ctx.settings)
    plain, integral = _design(modes, settings)

    gains_path = args.gains or ctx.path(GAINS_FILE)
    save_gains(gains_path, integral, modes.ts, plain=plain, q=settings.synth_q, r=settings.synth_r, integrator_weight=settings.synth_integrator_weight)
    write_json(
        ctx.path(SYNTH_REPORT_FILE),
        {
            "gains_file": str(gains_path),
            "k": list(integral.gains),
            "k_4state": list(plain.gains),
            "cost": integral.cost,
            "cost_4state": plain.cost,
            "residuals": integral.residuals,
            "residuals_4state": plain.residuals,
            "newton_steps": integral.iterations + plain.iterations,
        },
    )
    log.info("k = [%s]", ", ".join(f"{k:.6g}" for k in integral.gains))
    save_run_log(ctx.out_dir, "synth", {"gains_file": str(gains_path), "cost": integral.cost})
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, ctx: CommandContext) -> int:
    """Re-certify the gain rows of a gains file against the model."""
    gains_path = args.gains or (Path(ctx.settings.gains_file) if ctx.settings.gains_file else None)
    if gains_path is None:
        raise GainsFileError(Path("<none>"), "no gains file given (use --gains or GAINS_FILE)")
    record = load_gains(gains_path)
    modes = _modes(args)
    plain_spec, integral_spec = _synth_settings(args, ctx.settings).performance_weights()

    reports = {}
    if len(record.k) == modes.state_dim + 1:
        reports["integral"] = verify_solution(SynthesisSolution.from_gains(record.k), augment_integrator(modes), integral_spec)
    four = record.k4 if record.k4 is not None else (record.k if len(record.k) == modes.state_dim else None)
    if four is not None:
        reports["4state"] = verify_solution(SynthesisSolution.from_gains(four), modes, plain_spec)
    if not reports:
        raise GainsFileError(gains_path, f"no gain row matches the {modes.state_dim}-state model")

    write_json(ctx.path(VERIFY_FILE), {"gains_file": str(gains_path), **{name: rep.as_dict() for name, rep in reports.items()}})
    failed = [f"{name}: {rep.first_violation}" for name, rep in reports.items() if not rep.ok]
    if failed:
        raise CommandFailed(f"gains failed verification ({'; '.join(failed)})")
    save_run_log(ctx.out_dir, "verify", {"gains_file": str(gains_path), "rows": sorted(reports)})
    return EXIT_OK


# --- run / replay -----------------------------------------------------------


def _gains_record(args: argparse.Namespace, settings: Settings, scenario_gains: Path | None) -> GainsRecord:
    """``--gains``, then the scenario's file, then ``GAINS_FILE``; otherwise synthesize now."""
    for candidate in (args.gains, scenario_gains, Path(settings.gains_file) if settings.gains_file else None):
        if candidate is not None:
            return load_gains(candidate)
    log.info("No gains file given; synthesizing with the configured weights")
    modes = discretize(SwitchedLongitudinalModel())
    plain, integral = _design(modes, settings)
    return GainsRecord.from_solutions(integral, modes.ts, plain=plain)


def cmd_run(args: argparse.Namespace, ctx: CommandContext) -> int:
    """Run a scenario; write the tick log, metrics and optional plots."""
    scenario = load_scenario(args.scenario, d_ref=ctx.settings.d_ref, v_max=ctx.settings.v_max)
    if args.events_stdin:
        scenario = with_events(scenario, parse_event_lines(sys.stdin))
    controller = args.controller or scenario.controller
    gains = distance_gains(_gains_record(args, ctx.settings, scenario.gains_path), controller, scenario.v_max)
    seed = scenario.seed if args.seed is None else args.seed

    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    scan_writer = ScanLogWriter(ctx.path(SCAN_LOG_FILE)) if args.capture_scans else None
    try:
        with TickLogWriter(ctx.path(TICK_LOG_FILE)) as tick_writer:
            result = run_scenario(
                scenario,
                gains,
                seed=seed,
                on_record=tick_writer.write,
                scan_writer=scan_writer,
                dwa_config=ctx.settings.dwa_config(),
                thresholds=ctx.settings.fsm_thresholds(),
            )
    finally:
        if scan_writer is not None:
            scan_writer.close()

    summary = {
        "scenario": scenario.name,
        "seed": seed,
        "controller": controller,
        "v_max": scenario.v_max,
        "metrics": result.metrics.as_dict(),
        "failures": list(result.failures),
    }
    write_json(ctx.path(METRICS_FILE), summary)
    if args.plots:
        plot_run(result.records, ctx.out_dir, title=scenario.name)
    save_run_log(ctx.out_dir, "run", {"scenario": scenario.name, "seed": seed, "ok": result.ok, "tick_log": str(ctx.path(TICK_LOG_FILE))})

    m = result.metrics
    log.info(
        "%s: settling %.2f s, steady-state error %.4f m, max error %.3f m, %d collisions, %.0f%% at the speed cap",
        scenario.name,
        m.settling_time,
        m.steady_state_error,
        m.max_abs_error,
        m.collisions,
        100 * m.cap_fraction,
    )
    if m.collisions:
        raise CommandFailed(f"{m.collisions} collision(s) in {scenario.name}")
    if result.failures:
        raise CommandFailed(f"assertions failed in {scenario.name}: {'; '.join(result.failures)}")
    return EXIT_OK


def _schedule(times: Sequence[float], values: Sequence[float]) -> Callable[[float], float]:
    """Piecewise-constant reference read back from the tick log."""
    t_arr = np.asarray(times)
    v_arr = np.asarray(values)

    def at(t: float) -> float:
        idx = int(np.searchsorted(t_arr, t + 1e-9, side="right")) - 1
        return float(v_arr[max(idx, 0)])

    return at


def cmd_replay(args: argparse.Namespace, ctx: CommandContext) -> int:
    """Recompute metrics from a tick log; with ``--scans`` also re-run perception."""
    records = read_tick_log(args.log)
    metrics = compute_metrics(records, args.v_max if args.v_max is not None else ctx.settings.v_max)
    summary: dict[str, Any] = {"tick_log": str(args.log), "metrics": metrics.as_dict()}

    if args.scans is not None:
        schedule = _schedule([r.t for r in records], [r.d_ref for r in records])
        logged = {round(r.t, 6): r.track_id for r in records}
        mismatches = 0
        for frame in perceive_from_log(args.scans, schedule):
            track = frame.selection.track_id if frame.selection.track_id is not None else NO_TRACK
            if logged.get(round(frame.timestamp, 6), track) != track:
                mismatches += 1
        summary["selection_mismatches"] = mismatches
        if mismatches:
            write_json(ctx.path(REPLAY_METRICS_FILE), summary)
            raise CommandFailed(f"scan replay selected a different user on {mismatches} tick(s)")

    write_json(ctx.path(REPLAY_METRICS_FILE), summary)
    log.info("Replayed %d ticks: max error %.3f m, %d collisions", metrics.ticks, metrics.max_abs_error, metrics.collisions)
    return EXIT_OK


# --- step -------------------------------------------------------------------


def cmd_step(args: argparse.Namespace, ctx: CommandContext) -> int:
    """Write the step responses of both modes."""
    model = SwitchedLongitudinalModel()
    responses = {mode.value: step_response(model, mode, args.amplitude, args.duration) for mode in Mode}
    times = responses[Mode.ACC.value][0]

    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    path = ctx.path(STEP_FILE)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t", *responses])
        for k, t in enumerate(times):
            writer.writerow([repr(float(t)), *(repr(float(speeds[k])) for _times, speeds in responses.values())])
    log.info("Wrote %s", path)
    if args.plots:
        plot_step_responses(responses, ctx.path("step_response.svg"))
    save_run_log(ctx.out_dir, "step", {"amplitude": args.amplitude, "duration": args.duration, "samples": len(times)})
    return EXIT_OK


# --- wiring -----------------------------------------------------------------


COMMANDS: dict[str, Callable[[argparse.Namespace, CommandContext], int]] = {
    "synth": cmd_synth,
    "verify": cmd_verify,
    "run": cmd_run,
    "replay": cmd_replay,
    "step": cmd_step,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(prog="budde", description="Distance-controlled guide robot: synthesis and simulation.")
    parser.add_argument("--log-level", help="override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", type=Path, help="output directory (default: BUDDE_OUTPUT_DIR/<command>)")

    def weights(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", type=Path, help="JSON model file (mode parameters or discrete matrices)")
        p.add_argument("--q", type=_floats, help="state weights, comma-separated")
        p.add_argument("--r", type=float, help="input weight")
        p.add_argument("--integrator-weight", type=float, help="weight of the distance-error integrator")

    synth = sub.add_parser("synth", help="synthesize the distance-control gains")
    common(synth)
    weights(synth)
    synth.add_argument("--gains", type=Path, help="gains file to write (default: <out>/gains.json)")

    verify = sub.add_parser("verify", help="re-certify a gains file")
    common(verify)
    weights(verify)
    verify.add_argument("--gains", type=Path, help="gains file to check (default: GAINS_FILE)")

    run = sub.add_parser("run", help="run a scenario")
    common(run)
    run.add_argument("--scenario", type=Path, required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--gains", type=Path)
    run.add_argument("--plots", action="store_true", help="write SVG figures (needs matplotlib)")
    run.add_argument("--controller", type=int, choices=(1, 2))
    run.add_argument("--capture-scans", action="store_true", help=f"write every scan to <out>/{SCAN_LOG_FILE}")
    run.add_argument("--events-stdin", action="store_true", help="read 't kind [value]' event lines from stdin")

    replay = sub.add_parser("replay", help="recompute metrics from a tick log")
    common(replay)
    replay.add_argument("--log", type=Path, required=True)
    replay.add_argument("--scans", type=Path, help="scan capture to re-run perception on")
    replay.add_argument("--v-max", type=float)

    step = sub.add_parser("step", help="step responses of both modes")
    common(step)
    step.add_argument("--amplitude", type=float, default=1.0)
    step.add_argument("--duration", type=float, default=10.0)
    step.add_argument("--plots", action="store_true")
    return parser


def _out_dir(args: argparse.Namespace, settings: Settings) -> Path:
    if args.out is not None:
        return Path(args.out)
    base = Path(settings.output_dir)
    if args.command == "run":
        return base / args.scenario.stem
    if args.command == "replay":
        return Path(args.log).parent
    return base / args.command


def main(argv: Sequence[str] | None = None, settings: Settings | None = None) -> int:
    """Parse ``argv``, run one command and return its exit status."""
    args = build_parser().parse_args(argv)
    settings = settings or Settings.from_env()
    configure_logging((args.log_level or settings.log_level).upper())
    warn_env_incomplete()

    ctx = CommandContext(settings=settings, out_dir=_out_dir(args, settings), command=args.command)
    out_dir = ctx.out_dir
    try:
        status = COMMANDS[args.command](args, ctx)
    except (CommandFailed, *DOMAIN_ERRORS) as exc:
        message = str(exc) if isinstance(exc, CommandFailed) else f"{type(exc).__name__}: {exc}"
        log.error("%s failed: %s", args.command, message)
        save_failure_log(out_dir, message, traceback.format_exc(), command=args.command)
        return EXIT_FAILURE
    except Exception as exc:
        save_failure_log(out_dir, f"{type(exc).__name__}: {exc}", traceback.format_exc(), command=args.command)
        raise
    clear_failure_log(out_dir)
    return status
