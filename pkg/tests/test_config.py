import logging
from pathlib import Path

import pytest

from sigma_decim.config import RunSettings


@pytest.fixture
def clean_env(monkeypatch: pytest.MonkeyPatch) -> pytest.MonkeyPatch:
    for name in ("LOG_DIR", "LOG_LEVEL", "OUT_DIR", "SEED"):
        # set first so teardown also removes values a .env file loads
        monkeypatch.setenv(f"SIGMA_DECIM_{name}", "")
        monkeypatch.delenv(f"SIGMA_DECIM_{name}")
    return monkeypatch


def test_defaults(clean_env: pytest.MonkeyPatch, tmp_path: Path) -> None:
    settings = RunSettings.load(tmp_path / "missing.env")
    assert settings == RunSettings()
    assert settings.out_dir == Path("out")
    assert settings.seed == 1


def test_environment_overrides(clean_env: pytest.MonkeyPatch, tmp_path: Path) -> None:
    clean_env.setenv("SIGMA_DECIM_LOG_LEVEL", "debug")
    clean_env.setenv("SIGMA_DECIM_OUT_DIR", str(tmp_path / "runs"))
    clean_env.setenv("SIGMA_DECIM_SEED", "42")
    settings = RunSettings.load(tmp_path / "missing.env")
    assert settings.log_level == logging.DEBUG
    assert settings.out_dir == tmp_path / "runs"
    assert settings.seed == 42


def test_dotenv_file(clean_env: pytest.MonkeyPatch, tmp_path: Path) -> None:
    env_file = tmp_path / ".env"
    env_file.write_text("SIGMA_DECIM_SEED=7\nSIGMA_DECIM_LOG_DIR=/tmp/sd-logs\n", encoding="utf-8")
    settings = RunSettings.load(env_file)
    assert settings.seed == 7
    assert settings.log_dir == Path("/tmp/sd-logs")


def test_invalid_values_fall_back(clean_env: pytest.MonkeyPatch, tmp_path: Path) -> None:
    clean_env.setenv("SIGMA_DECIM_LOG_LEVEL", "chatty")
    clean_env.setenv("SIGMA_DECIM_SEED", "0")
    settings = RunSettings.load(tmp_path / "missing.env")
    assert settings.log_level == logging.INFO
    assert settings.seed == 1
