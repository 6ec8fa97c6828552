"""Tests for the sigma-decim command line."""

import csv
import json
import re
from pathlib import Path

import numpy as np
import pytest

from sigma_decim.app import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, default_tone, run
from sigma_decim.data.chain_config import load_chain_config
from sigma_decim.data.stream_io import read_stream, write_stream
from sigma_decim.domain.models import SampleStream

pytestmark = pytest.mark.integration

# Default snr run on the packaged chain, full-precision CIC.
SNR_BASELINE_DB = 126.04


def _run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, str, str]:
    code = run(list(argv), setup_logging=False)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_design_reference_chain(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = _run(capsys, "design", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "g_max: 1048576" in out
    assert "register width: 25 (b_max 24)" in out
    assert "schedule: 25/22/20/18/16 comb 16" in out
    for name in ("hb1", "droop", "hb2"):
        assert (tmp_path / f"coeffs_{name}.csv").exists()


def test_design_minimal_geometry(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = _run(
        capsys, "design", "--out", str(tmp_path), "--n", "1", "--r", "2", "--bin", "1"
    )
    assert code == EXIT_OK
    assert "register width: 2 (b_max 1)" in out
    assert "truncation noise: -inf dBFS" in out


def test_design_infeasible_stage(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    document = load_chain_config().model_dump(mode="json")
    document["fir_stages"] = [
        {
            "name": "narrow",
            "kind": "halfband",
            "passband_hz": 95_900.0,
            "stopband_hz": 96_100.0,
        }
    ]
    path = tmp_path / "narrow.chain"
    path.write_text(json.dumps(document), encoding="utf-8")
    code, _, err = _run(capsys, "design", "--config", str(path), "--out", str(tmp_path))
    assert code == EXIT_CONFIG
    assert "error[config]" in err


def test_bad_config_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "broken.chain"
    path.write_text("[]", encoding="utf-8")
    code, _, err = _run(capsys, "design", "--config", str(path), "--out", str(tmp_path))
    assert code == EXIT_CONFIG
    assert "error[config]" in err


def test_simulate_writes_output_and_taps(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code, out, _ = _run(
        capsys,
        "simulate",
        "--input",
        "impulse",
        "--samples",
        "8192",
        "--stage-taps",
        "--out",
        str(tmp_path),
    )
    assert code == EXIT_OK
    result = read_stream(tmp_path / "output.bin")
    assert len(result) == 64
    assert result.fs == 48_000.0
    cic_tap = read_stream(tmp_path / "tap_cic.bin")
    assert cic_tap.width == 16
    assert len(cic_tap) == 512
    assert "tap hb2" in out


def test_simulate_csv_prbs(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = _run(
        capsys,
        "simulate",
        "--input",
        "prbs",
        "--samples",
        "4096",
        "--format",
        "csv",
        "--out",
        str(tmp_path),
    )
    assert code == EXIT_OK
    assert len(read_stream(tmp_path / "output.csv")) == 32


def test_simulate_missing_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    missing = tmp_path / "absent.bin"
    code, _, err = _run(
        capsys, "simulate", "--input", f"file:{missing}", "--out", str(tmp_path)
    )
    assert code == EXIT_RUNTIME
    assert "error[runtime]" in err


def test_simulate_out_of_range_input(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    samples = np.zeros(256, dtype=np.int64)
    samples[40] = 100
    source = tmp_path / "wide.bin"
    write_stream(source, SampleStream.integer(samples, 6_144_000.0, 8))
    code, _, err = _run(
        capsys, "simulate", "--input", f"file:{source}", "--out", str(tmp_path)
    )
    assert code == EXIT_RUNTIME
    assert "sample index 40" in err


def test_simulate_rate_mismatch(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    source = tmp_path / "slow.bin"
    write_stream(source, SampleStream.integer(np.zeros(64, dtype=np.int64), 48_000.0, 5))
    code, _, err = _run(
        capsys, "simulate", "--input", f"file:{source}", "--out", str(tmp_path)
    )
    assert code == EXIT_CONFIG
    assert "error[config]" in err


def test_simulate_unknown_input(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = _run(capsys, "simulate", "--input", "noise", "--out", str(tmp_path))
    assert code == EXIT_CONFIG


def test_response_cic(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = _run(capsys, "response", "--stage", "cic", "--grid", "64", "--out", str(tmp_path))
    assert code == EXIT_OK
    text = (tmp_path / "response_cic.csv").read_text(encoding="utf-8")
    rows = list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))
    assert rows[0] == ["freq_hz", "gain_db", "cic"]
    assert rows[1] == ["0.000000", "0.000000", "0.000000"]
    assert len(rows) == 65


def test_response_cic_plus_droop(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = _run(
        capsys,
        "response",
        "--stage",
        "cic+droop",
        "--grid",
        "33",
        "--fmax",
        "32000",
        "--out",
        str(tmp_path),
    )
    assert code == EXIT_OK
    text = (tmp_path / "response_cic_droop.csv").read_text(encoding="utf-8")
    rows = list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))
    assert rows[0] == ["freq_hz", "gain_db", "cic", "droop"]
    assert all(abs(float(row[1])) <= 0.1 for row in rows[1:])


def test_response_unknown_stage(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = _run(capsys, "response", "--stage", "hb9", "--out", str(tmp_path))
    assert code == EXIT_CONFIG
    assert "hb9" in err


def test_snr_without_signal(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = _run(
        capsys,
        "snr",
        "--input",
        "sine:1000:0",
        "--samples",
        "65536",
        "--out",
        str(tmp_path),
    )
    assert code == EXIT_RUNTIME
    assert "error[no-signal]" in err


def test_snr_needs_sine(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = _run(capsys, "snr", "--input", "impulse", "--out", str(tmp_path))
    assert code == EXIT_CONFIG


def test_default_tone_is_on_a_bin() -> None:
    config = load_chain_config()
    tone = default_tone(config)
    resolution = config.output_rate_hz / config.analysis.n_fft
    assert tone / resolution == pytest.approx(round(tone / resolution))
    assert abs(tone - 1000.0) <= resolution / 2


@pytest.mark.slow
def test_verify_fast_suite(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = _run(capsys, "verify", "--suite", "fast")
    assert code == EXIT_OK
    assert out.strip().splitlines()[-1].startswith("fast: ")
    assert "FAIL" not in out


def test_verify_unknown_suite(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as excinfo:
        run(["verify", "--suite", "huge"], setup_logging=False)
    assert excinfo.value.code == 2
    capsys.readouterr()


def _spectrum_mode(path: Path) -> str:
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# cic.mode="):
            return line.removeprefix("# cic.mode=")
    return ""


def test_snr_defaults_to_full_precision(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    args = ("snr", "--input", "sine:1000:0.5", "--samples", "131072")
    code, _, _ = _run(capsys, *args, "--out", str(tmp_path / "default"))
    assert code == EXIT_OK
    assert _spectrum_mode(tmp_path / "default" / "snr_chain.csv") == "full"
    code, _, _ = _run(capsys, *args, "--mode", "truncated", "--out", str(tmp_path / "trunc"))
    assert code == EXIT_OK
    assert _spectrum_mode(tmp_path / "trunc" / "snr_chain.csv") == "truncated"


@pytest.mark.slow
def test_snr_default_run_matches_baseline(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code, out, _ = _run(capsys, "snr", "--out", str(tmp_path))
    assert code == EXIT_OK
    match = re.search(r"snr: ([-\d.]+) dB at 999\.023 Hz", out)
    assert match is not None
    snr = float(match.group(1))
    assert snr == pytest.approx(SNR_BASELINE_DB, abs=0.01)
    assert snr >= 98.0
