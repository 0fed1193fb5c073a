import logging
import os

import numpy as np
import pytest

import src.config as config_mod
from src.config import (
    Settings,
    _str_to_float,
    _str_to_floats,
    _str_to_int,
    _strip_inline_comment,
    warn_env_incomplete,
)


def test_strip_inline_comment_basic():
    assert _strip_inline_comment("value # comment") == "value"


def test_strip_inline_comment_tab():
    assert _strip_inline_comment("value\t# comment") == "value"


def test_strip_inline_comment_full_line_comment():
    assert _strip_inline_comment("# just a comment") is None


def test_strip_inline_comment_none():
    assert _strip_inline_comment(None) is None


def test_strip_inline_comment_empty_after_strip():
    assert _strip_inline_comment("   ") is None


def test_strip_inline_comment_preserves_hash_without_space():
    assert _strip_inline_comment("runs#2") == "runs#2"


def test_str_to_int_with_comment():
    assert _str_to_int("4 # threads", 0) == 4


def test_str_to_int_invalid_uses_default():
    assert _str_to_int("many", 7) == 7


def test_str_to_float_valid():
    assert _str_to_float("1e-6", 1.0) == 1e-6


def test_str_to_float_invalid_uses_default():
    assert _str_to_float("fast", 1.5) == 1.5


def test_str_to_floats_parses_comma_lists():
    assert _str_to_floats("0.1, 4,1 ,0.01 # Q diagonal", ()) == (0.1, 4.0, 1.0, 0.01)


@pytest.mark.parametrize("raw", [None, "", "0.1,,1", "a,b"])
def test_str_to_floats_falls_back(raw):
    assert _str_to_floats(raw, (1.0,)) == (1.0,)


@pytest.fixture
def clean_env(monkeypatch):
    """Isolate from_env from the real .env and OS environment.

    from_env calls load_dotenv(..., override=True), which would otherwise pull
    in the developer's actual .env and clobber the values set here.
    """
    monkeypatch.setattr(config_mod, "load_dotenv", lambda *_a, **_k: None)
    prefixes = ("SYNTH_", "DWA_", "FSM_", "BUDDE_")
    extras = {"LOG_LEVEL", "GAINS_FILE", "D_REF", "V_MAX"}
    for key in list(os.environ):
        if key.startswith(prefixes) or key in extras:
            monkeypatch.delenv(key, raising=False)
    return monkeypatch


@pytest.mark.usefixtures("clean_env")
def test_from_env_defaults():
    settings = Settings.from_env()

    assert settings == Settings()
    assert settings.output_dir.endswith("runs")
    assert settings.synth_q == (0.1, 4.0, 1.0, 0.01)
    assert settings.dwa_max_workers == 0
    assert settings.gains_file == ""


def test_from_env_reads_values(clean_env):
    clean_env.setenv("BUDDE_OUTPUT_DIR", "/tmp/budde-runs")
    clean_env.setenv("LOG_LEVEL", "debug")
    clean_env.setenv("SYNTH_Q", "1,2,3,4")
    clean_env.setenv("DWA_MAX_WORKERS", "4")
    clean_env.setenv("FSM_BLOCKED_AFTER", "3.0 # seconds")

    settings = Settings.from_env()

    assert settings.output_dir == "/tmp/budde-runs"
    assert settings.log_level == "DEBUG"
    assert settings.synth_q == (1.0, 2.0, 3.0, 4.0)
    assert settings.dwa_max_workers == 4
    assert settings.fsm_blocked_after == 3.0


@pytest.mark.parametrize(
    ("key", "raw", "attr", "default"),
    [
        ("SYNTH_Q", "1,2,3", "synth_q", (0.1, 4.0, 1.0, 0.01)),
        ("SYNTH_Q", "1,-2,3,4", "synth_q", (0.1, 4.0, 1.0, 0.01)),
        ("SYNTH_R", "0", "synth_r", 1.0),
        ("SYNTH_TOL", "-1e-8", "synth_tol", 1e-8),
        ("SYNTH_MAX_ITER", "0", "synth_max_iter", 2000),
        ("DWA_MAX_WORKERS", "-2", "dwa_max_workers", 0),
        ("DWA_V_SAMPLES", "1", "dwa_v_samples", 21),
        ("DWA_W_GOAL", "-0.5", "dwa_w_goal", 0.1),
        ("FSM_QUALITY_MIN", "1.5", "fsm_quality_min", 0.5),
        ("FSM_USER_MAX_DISTANCE", "0", "fsm_user_max_distance", 3.5),
        ("V_MAX", "-1", "v_max", 1.5),
        ("LOG_LEVEL", "chatty", "log_level", "INFO"),
    ],
)
def test_from_env_out_of_range_falls_back(clean_env, key, raw, attr, default):
    clean_env.setenv(key, raw)

    assert getattr(Settings.from_env(), attr) == default


def test_typed_views():
    settings = Settings(synth_q=(1.0, 2.0, 3.0, 4.0), synth_r=2.0, dwa_v_samples=11, dwa_max_workers=3, fsm_cruise_speed=0.4, v_max=1.2)

    plain, integral = settings.performance_weights()
    dwa = settings.dwa_config()
    fsm = settings.fsm_thresholds()

    assert np.allclose(np.diag(plain.Q), [1.0, 2.0, 3.0, 4.0])
    assert np.allclose(plain.R, [[2.0]])
    assert np.allclose(np.diag(integral.Q), [1.0, 2.0, 3.0, 4.0, 0.5])
    assert (dwa.v_samples, dwa.max_workers) == (11, 3)
    assert fsm.cruise_speed == 0.4
    assert fsm.v_max == 1.2


def test_warn_env_incomplete_lists_missing_keys(monkeypatch, tmp_path, caplog):
    (tmp_path / ".env").write_text("LOG_LEVEL=INFO\n", encoding="utf-8")
    (tmp_path / ".env.example").write_text("# defaults\nLOG_LEVEL=INFO\nD_REF=1.5 # m\nV_MAX=1.5\n", encoding="utf-8")
    monkeypatch.setattr(config_mod, "PROJECT_ROOT", tmp_path)

    with caplog.at_level(logging.WARNING):
        warn_env_incomplete()

    assert "missing 2 setting(s)" in caplog.text
    assert "D_REF, V_MAX" in caplog.text


def test_warn_env_incomplete_is_silent_without_env(monkeypatch, tmp_path, caplog):
    (tmp_path / ".env.example").write_text("D_REF=1.5\n", encoding="utf-8")
    monkeypatch.setattr(config_mod, "PROJECT_ROOT", tmp_path)

    with caplog.at_level(logging.WARNING):
        warn_env_incomplete()

    assert caplog.text == ""
