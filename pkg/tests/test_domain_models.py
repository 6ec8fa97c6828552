import numpy as np
from pydantic import ValidationError
import pytest

from sigma_decim.domain.models import (
    BandEdge,
    BandPlan,
    CicConfig,
    CicSection,
    FirFilter,
    GrowthReport,
    ModulatorCoefficients,
    ResponseTable,
    SampleStream,
    StreamFormat,
    TruncationSchedule,
)


def test_cic_config_properties() -> None:
    cfg = CicConfig(n=5, r=16, b_in=5, out_width=16)
    assert cfg.growth == 16**5
    assert cfg.register_width == 25
    assert cfg.resolved_out_width == 16
    assert cfg.is_reference_config
    assert not CicConfig(n=5, r=16, b_in=5).is_reference_config


def test_cic_config_rejects_bad_values() -> None:
    with pytest.raises(ValidationError):
        CicConfig(n=0, r=16, b_in=5)
    with pytest.raises(ValidationError):
        CicConfig(n=5, r=16, b_in=5, out_width=26)
    with pytest.raises(ValidationError):
        CicConfig(
            n=5,
            r=16,
            b_in=5,
            schedule=TruncationSchedule(widths=(25, 22, 20, 18), comb_width=16),
        )


def test_growth_report_width_is_msb_plus_one() -> None:
    with pytest.raises(ValidationError):
        GrowthReport(g_max=16, b_max=4, register_width=4)


def test_cic_section_builds_schedule() -> None:
    section = CicSection(n=5, r=16, b_in=5, out_width=16, schedule=(25, 22, 20, 18, 16))
    cfg = section.to_config()
    assert cfg.schedule == TruncationSchedule(widths=(25, 22, 20, 18, 16), comb_width=16)


def test_sample_stream_validation() -> None:
    stream = SampleStream.integer(np.array([1, -2, 3]), 48_000.0, 5)
    assert stream.fmt is StreamFormat.INTEGER
    assert len(stream) == 3
    assert stream.full_scale == 16.0
    assert SampleStream.real(np.zeros(2), 1.0).full_scale == 1.0
    with pytest.raises(ValueError, match="sample rate"):
        SampleStream.real(np.zeros(2), 0.0)
    with pytest.raises(ValueError, match="width"):
        SampleStream(np.zeros(2, dtype=np.int64), 1.0, StreamFormat.INTEGER)
    with pytest.raises(ValueError, match="floating"):
        SampleStream(np.zeros(2, dtype=np.int64), 1.0, StreamFormat.REAL)


def test_fir_filter_must_be_linear_phase() -> None:
    fir = FirFilter(name="hb", coeffs=(0.25, 0.5, 0.25), fs_in=384_000.0, decim=2)
    assert fir.taps == 3
    assert fir.fs_out == 192_000.0
    with pytest.raises(ValidationError):
        FirFilter(name="skew", coeffs=(0.1, 0.5, 0.2), fs_in=1.0)
    with pytest.raises(ValidationError):
        FirFilter(name="d3", coeffs=(1.0,), fs_in=1.0, decim=3)


def test_band_plan_rates_must_telescope() -> None:
    first = BandEdge(name="a", passband_hz=1.0, stopband_hz=2.0, fs_in_hz=16.0, decim=2)
    wrong = BandEdge(name="b", passband_hz=1.0, stopband_hz=2.0, fs_in_hz=16.0, decim=2)
    with pytest.raises(ValidationError):
        BandPlan(stages=(first, wrong))
    with pytest.raises(ValidationError):
        BandEdge(name="c", passband_hz=3.0, stopband_hz=2.0, fs_in_hz=16.0, decim=2)


def test_response_table_composite() -> None:
    table = ResponseTable(
        freqs=np.array([0.0, 1.0]),
        stage_gains={"a": np.array([1.0, 0.5]), "b": np.array([2.0, 0.5])},
    )
    np.testing.assert_allclose(table.composite, [2.0, 0.25])
    assert table.composite_db[1] == pytest.approx(-12.0412, abs=1e-4)


def test_modulator_levels_power_of_two() -> None:
    with pytest.raises(ValidationError):
        ModulatorCoefficients(levels=24, a=(0.064, 0.48, 1.2), b1=0.064)
