"""Settings from environment variables."""

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from .planning import DwaConfig
from .supervision import FsmThresholds
from .synthesis import PerformanceSpec, integral_performance

PROJECT_ROOT = Path(__file__).parent.parent

load_dotenv(PROJECT_ROOT / ".env")

RUNTIME_DIR = Path(os.getenv("RUNTIME_DIR") or PROJECT_ROOT / "runtime")

_LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}
_DEFAULT_Q = (0.1, 4.0, 1.0, 0.01)


def _dotenv_keys(path: Path) -> list[str]:
    """Return the ordered KEY names defined in an env-style file (best effort)."""
    keys: list[str] = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError:
        return keys
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        keys.append(line.partition("=")[0].strip())
    return keys


def warn_env_incomplete() -> None:
    """Log a one-line warning when .env lacks keys documented in .env.example.

    No-op when either file is absent; a missing ``.env`` just means defaults.
    """
    env_file = PROJECT_ROOT / ".env"
    example_file = PROJECT_ROOT / ".env.example"
    if not env_file.exists() or not example_file.exists():
        return
    current = set(_dotenv_keys(env_file))
    missing = [key for key in _dotenv_keys(example_file) if key not in current]
    if not missing:
        return
    logging.getLogger(__name__).warning(
        "Your .env is missing %d setting(s) listed in .env.example: %s. Defaults are used for them.",
        len(missing),
        ", ".join(missing),
    )


def _strip_inline_comment(val: str | None) -> str | None:
    if val is None:
        return None
    if val.startswith("#"):
        return None
    for marker in (" #", "\t#"):
        idx = val.find(marker)
        if idx != -1:
            val = val[:idx]
    return val.strip() or None


def _str_to_float(val: str | None, default: float) -> float:
    try:
        val = _strip_inline_comment(val)
        return float(val) if val is not None else default
    except Exception:
        return default


def _str_to_int(val: str | None, default: int) -> int:
    try:
        val = _strip_inline_comment(val)
        return int(val) if val is not None else default
    except Exception:
        return default


def _str_to_floats(val: str | None, default: tuple[float, ...]) -> tuple[float, ...]:
    """Comma-separated floats; anything unparsable gives ``default``."""
    val = _strip_inline_comment(val)
    if val is None:
        return default
    try:
        return tuple(float(part) for part in val.split(","))
    except ValueError:
        return default


def _positive(value: float, default: float) -> float:
    return value if value > 0 else default


@dataclass(frozen=True)
class Settings:
    """Run, synthesis, planner and supervisor configuration loaded from environment variables."""

    output_dir: str = str(RUNTIME_DIR / "runs")
    log_level: str = "INFO"
    gains_file: str = ""
    d_ref: float = 1.5
    v_max: float = 1.5
    synth_q: tuple[float, ...] = _DEFAULT_Q
    synth_r: float = 1.0
    synth_integrator_weight: float = 0.5
    synth_tol: float = 1e-8
    synth_max_iter: int = 2000
    dwa_max_workers: int = 0
    dwa_v_samples: int = 21
    dwa_w_samples: int = 21
    dwa_horizon: float = 3.0
    dwa_w_plan: float = 1.0
    dwa_w_goal: float = 0.1
    fsm_quality_min: float = 0.5
    fsm_lost_after: float = 0.5
    fsm_recover_after: float = 1.0
    fsm_user_missing_after: float = 1.0
    fsm_user_max_distance: float = 3.5
    fsm_blocked_after: float = 2.0
    fsm_cruise_speed: float = 0.3

    @staticmethod
    def from_env() -> "Settings":
        """Load settings from environment variables.

        Re-reads .env with override=True so a value edited between two
        commands in the same shell takes effect. Out-of-range values fall
        back to their defaults.
        """
        load_dotenv(PROJECT_ROOT / ".env", override=True)

        output_dir = _strip_inline_comment(os.getenv("BUDDE_OUTPUT_DIR")) or str(RUNTIME_DIR / "runs")
        log_level = (_strip_inline_comment(os.getenv("LOG_LEVEL")) or "INFO").upper()
        if log_level not in _LOG_LEVELS:
            log_level = "INFO"
        gains_file = _strip_inline_comment(os.getenv("GAINS_FILE")) or ""

        d_ref = _positive(_str_to_float(os.getenv("D_REF"), 1.5), 1.5)
        v_max = _positive(_str_to_float(os.getenv("V_MAX"), 1.5), 1.5)

        synth_q = _str_to_floats(os.getenv("SYNTH_Q"), _DEFAULT_Q)
        if len(synth_q) != len(_DEFAULT_Q) or any(q < 0 for q in synth_q):
            synth_q = _DEFAULT_Q
        synth_r = _positive(_str_to_float(os.getenv("SYNTH_R"), 1.0), 1.0)
        synth_integrator_weight = _positive(_str_to_float(os.getenv("SYNTH_INTEGRATOR_WEIGHT"), 0.5), 0.5)
        synth_tol = _positive(_str_to_float(os.getenv("SYNTH_TOL"), 1e-8), 1e-8)
        synth_max_iter = _str_to_int(os.getenv("SYNTH_MAX_ITER"), 2000)
        if synth_max_iter < 1:
            synth_max_iter = 2000

        dwa_max_workers = max(_str_to_int(os.getenv("DWA_MAX_WORKERS"), 0), 0)
        dwa_v_samples = _str_to_int(os.getenv("DWA_V_SAMPLES"), 21)
        if dwa_v_samples < 2:
            dwa_v_samples = 21
        dwa_w_samples = _str_to_int(os.getenv("DWA_W_SAMPLES"), 21)
        if dwa_w_samples < 2:
            dwa_w_samples = 21
        dwa_horizon = _positive(_str_to_float(os.getenv("DWA_HORIZON"), 3.0), 3.0)
        dwa_w_plan = _str_to_float(os.getenv("DWA_W_PLAN"), 1.0)
        if dwa_w_plan < 0:
            dwa_w_plan = 1.0
        dwa_w_goal = _str_to_float(os.getenv("DWA_W_GOAL"), 0.1)
        if dwa_w_goal < 0:
            dwa_w_goal = 0.1

        fsm_quality_min = _str_to_float(os.getenv("FSM_QUALITY_MIN"), 0.5)
        if not 0.0 <= fsm_quality_min <= 1.0:
            fsm_quality_min = 0.5

        return Settings(
            output_dir=output_dir,
            log_level=log_level,
            gains_file=gains_file,
            d_ref=d_ref,
            v_max=v_max,
            synth_q=synth_q,
            synth_r=synth_r,
            synth_integrator_weight=synth_integrator_weight,
            synth_tol=synth_tol,
            synth_max_iter=synth_max_iter,
            dwa_max_workers=dwa_max_workers,
            dwa_v_samples=dwa_v_samples,
            dwa_w_samples=dwa_w_samples,
            dwa_horizon=dwa_horizon,
            dwa_w_plan=dwa_w_plan,
            dwa_w_goal=dwa_w_goal,
            fsm_quality_min=fsm_quality_min,
            fsm_lost_after=_positive(_str_to_float(os.getenv("FSM_LOST_AFTER"), 0.5), 0.5),
            fsm_recover_after=_positive(_str_to_float(os.getenv("FSM_RECOVER_AFTER"), 1.0), 1.0),
            fsm_user_missing_after=_positive(_str_to_float(os.getenv("FSM_USER_MISSING_AFTER"), 1.0), 1.0),
            fsm_user_max_distance=_positive(_str_to_float(os.getenv("FSM_USER_MAX_DISTANCE"), 3.5), 3.5),
            fsm_blocked_after=_positive(_str_to_float(os.getenv("FSM_BLOCKED_AFTER"), 2.0), 2.0),
            fsm_cruise_speed=_positive(_str_to_float(os.getenv("FSM_CRUISE_SPEED"), 0.3), 0.3),
        )

    def performance_weights(self) -> tuple[PerformanceSpec, PerformanceSpec]:
        """Four-state and integrator-augmented weights."""
        plain = PerformanceSpec.from_weights(self.synth_q, self.synth_r)
        return plain, integral_performance(self.synth_q, self.synth_r, self.synth_integrator_weight)

    def dwa_config(self) -> DwaConfig:
        """Planner sampling and cost weights."""
        return DwaConfig(
            v_samples=self.dwa_v_samples,
            w_samples=self.dwa_w_samples,
            horizon=self.dwa_horizon,
            w_plan=self.dwa_w_plan,
            w_goal=self.dwa_w_goal,
            max_workers=self.dwa_max_workers,
        )

    def fsm_thresholds(self) -> FsmThresholds:
        """Supervisor dwell times and limits."""
        return FsmThresholds(
            quality_min=self.fsm_quality_min,
            lost_after=self.fsm_lost_after,
            recover_after=self.fsm_recover_after,
            user_missing_after=self.fsm_user_missing_after,
            user_max_distance=self.fsm_user_max_distance,
            blocked_after=self.fsm_blocked_after,
            cruise_speed=self.fsm_cruise_speed,
            v_max=self.v_max,
        )


def configure_logging(level: str) -> None:
    """Configure logging."""
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s: %(message)s",
    )
