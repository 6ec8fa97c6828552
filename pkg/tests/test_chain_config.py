import json
from pathlib import Path

import pytest

from sigma_decim.data.chain_config import (
    config_metadata,
    default_modulator,
    load_chain_config,
    load_modulator_coefficients,
)
from sigma_decim.domain.models import CicMode, StageKind
from sigma_decim.errors import ConfigurationError


def _reference_document() -> dict[str, object]:
    return load_chain_config().model_dump(mode="json")


def _write(path: Path, document: object) -> Path:
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_packaged_reference_chain() -> None:
    config = load_chain_config()
    assert config.version == 1
    assert config.input_rate_hz == 6_144_000.0
    assert [s.name for s in config.fir_stages] == ["hb1", "droop", "hb2"]
    assert config.fir_stages[1].kind is StageKind.DROOP
    assert config.cic.mode is CicMode.TRUNCATED
    assert config.output_rate_hz == 48_000.0
    assert config.stage_rates() == {
        "cic": 6_144_000.0,
        "hb1": 384_000.0,
        "droop": 192_000.0,
        "hb2": 96_000.0,
    }
    cic = config.cic.to_config()
    assert cic.schedule is not None
    assert cic.schedule.widths == (25, 22, 20, 18, 16)
    assert cic.is_reference_config


def test_default_modulator_coefficients() -> None:
    coefficients = default_modulator()
    assert coefficients.levels == 32
    assert coefficients.a == (0.064, 0.48, 1.2)
    assert coefficients.b1 == 0.064
    assert coefficients.stability_limit == 0.8


def test_modulator_reference_resolves_next_to_chain_file(tmp_path: Path) -> None:
    document = _reference_document()
    _write(tmp_path / "loop.json", {"a": [0.1, 0.5, 1.0], "b1": 0.1})
    document["modulator"] = {"enabled": True, "coefficients": "loop.json"}
    chain_path = _write(tmp_path / "custom.chain", document)
    config = load_chain_config(chain_path)
    coefficients = load_modulator_coefficients(config, chain_path)
    assert coefficients.a == (0.1, 0.5, 1.0)


def test_missing_modulator_file(tmp_path: Path) -> None:
    document = _reference_document()
    document["modulator"] = {"enabled": True, "coefficients": "absent.json"}
    chain_path = _write(tmp_path / "custom.chain", document)
    config = load_chain_config(chain_path)
    with pytest.raises(ConfigurationError):
        load_modulator_coefficients(config, chain_path)


def test_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "broken.chain"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigurationError) as excinfo:
        load_chain_config(path)
    assert "invalid JSON" in str(excinfo.value)


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigurationError):
        load_chain_config(tmp_path / "nowhere.chain")


def test_rate_mismatch_names_stages(tmp_path: Path) -> None:
    document = _reference_document()
    stages = document["fir_stages"]
    assert isinstance(stages, list)
    stages[0]["fs_in_hz"] = 400_000.0
    with pytest.raises(ConfigurationError) as excinfo:
        load_chain_config(_write(tmp_path / "bad.chain", document))
    message = str(excinfo.value)
    assert "cic" in message
    assert "hb1" in message


def test_reserved_stage_name(tmp_path: Path) -> None:
    document = _reference_document()
    stages = document["fir_stages"]
    assert isinstance(stages, list)
    stages[0]["name"] = "cic"
    with pytest.raises(ConfigurationError):
        load_chain_config(_write(tmp_path / "bad.chain", document))


def test_unsupported_version(tmp_path: Path) -> None:
    document = _reference_document()
    document["version"] = 2
    with pytest.raises(ConfigurationError) as excinfo:
        load_chain_config(_write(tmp_path / "v2.chain", document))
    assert "version" in str(excinfo.value)


def test_schedule_wider_than_register(tmp_path: Path) -> None:
    document = _reference_document()
    cic = document["cic"]
    assert isinstance(cic, dict)
    cic["schedule"] = [26, 22, 20, 18, 16]
    with pytest.raises(ConfigurationError):
        load_chain_config(_write(tmp_path / "bad.chain", document))


def test_config_metadata_is_flat() -> None:
    meta = config_metadata(load_chain_config())
    assert meta["cic.n"] == "5"
    assert meta["cic.r"] == "16"
    assert meta["fir_stages.0.name"] == "hb1"
    assert meta["analysis.n_fft"] == "16384"
