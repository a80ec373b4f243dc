import pytest
from pydantic import ValidationError

from tree_cover_toolkit.config import Settings, get_settings


def test_log_level_is_normalized():
    assert Settings(_env_file=None, log_level="debug").log_level == "DEBUG"


def test_unknown_log_level_is_rejected():
    with pytest.raises(ValidationError, match="log_level"):
        Settings(_env_file=None, log_level="chatty")


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv("PLANAR_MAX_RETRIES", "7")
    monkeypatch.setenv("LLL_MAX_ROUNDS", "50")
    s = Settings(_env_file=None)
    assert s.planar_max_retries == 7
    assert s.lll_max_rounds == 50


def test_doubling_rescale_floor():
    with pytest.raises(ValidationError):
        Settings(_env_file=None, doubling_rescale=4.0)


def test_resolved_leaves_out_machine_specific_fields(tmp_path):
    resolved = Settings(_env_file=None, threads=3, output_dir=tmp_path).resolved()
    assert "threads" not in resolved
    assert "output_dir" not in resolved
    assert "log_level" not in resolved
    assert resolved["verify_tolerance"] == 1e-9
    assert resolved["doubling_max_rescale"] == 68.0


def test_get_settings_is_a_singleton():
    assert get_settings() is get_settings()


def test_ramsey_calibration_defaults_are_frozen():
    s = Settings(_env_file=None)
    assert s.ramsey_calibration_constant == 7.0
    assert s.ramsey_calibration_slack == 1.5
    assert s.ramsey_eta_fallback is True
    assert s.resolved()["ramsey_calibration_constant"] == 7.0


def test_ramsey_calibration_slack_floor():
    with pytest.raises(ValidationError):
        Settings(_env_file=None, ramsey_calibration_slack=0.5)
