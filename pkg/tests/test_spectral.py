"""Tests for spectral analysis."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sigma_decim.domain.models import CicConfig, FirFilter, SampleStream, WindowKind
from sigma_decim.errors import ContractViolationError
from sigma_decim.services.cic_engine import impulse_response
from sigma_decim.services.spectral import (
    cic_magnitude,
    droop_report,
    frequency_grid,
    measure_snr,
    psd,
    snr_report,
    to_db,
)

CIC_FS = 6_144_000.0


@pytest.fixture
def cic() -> CicConfig:
    """Reference CIC: N=5, R=16, 5-bit input."""
    return CicConfig(n=5, r=16, b_in=5, out_width=16)


def _coherent_sine(bin_index: int, n: int, fs: float, amp: float = 1.0) -> SampleStream:
    t = np.arange(n)
    return SampleStream.real(amp * np.sin(2.0 * np.pi * bin_index * t / n), fs)


class TestCicMagnitude:
    """Analytic CIC response and the composite droop table."""

    def test_dc_gain(self, cic: CicConfig) -> None:
        assert cic_magnitude(cic, [0.0], CIC_FS)[0] == 1_048_576.0
        assert cic_magnitude(cic, [0.0], CIC_FS, normalized=True)[0] == 1.0

    def test_droop_at_band_edge(self, cic: CicConfig) -> None:
        gain = cic_magnitude(cic, [32_000.0], CIC_FS, normalized=True)[0]
        assert gain == pytest.approx(0.9446, abs=5e-4)
        assert to_db([gain])[0] == pytest.approx(-0.495, abs=0.005)

    def test_nulls(self, cic: CicConfig) -> None:
        nulls = np.arange(1, 9) * CIC_FS / 16
        assert np.all(to_db(cic_magnitude(cic, nulls, CIC_FS, normalized=True)) < -250.0)

    def test_matches_impulse_fft(self, cic: CicConfig) -> None:
        """Test the closed form against the FFT of the integer impulse response."""
        n_fft = 8192
        h = impulse_response(cic).astype(np.float64)
        fft_mag = np.abs(np.fft.rfft(h, n_fft))
        freqs = np.fft.rfftfreq(n_fft, d=1.0 / CIC_FS)
        analytic = cic_magnitude(cic, freqs, CIC_FS)
        assert np.max(np.abs(fft_mag - analytic)) <= 1e-9 * cic.growth

    def test_rejects_out_of_range(self, cic: CicConfig) -> None:
        with pytest.raises(ContractViolationError):
            cic_magnitude(cic, [CIC_FS], CIC_FS)
        with pytest.raises(ContractViolationError):
            cic_magnitude(cic, [-1.0], CIC_FS)

    def test_frequency_grid(self) -> None:
        linear = frequency_grid(96_000.0, 5)
        np.testing.assert_allclose(linear, [0.0, 24_000.0, 48_000.0, 72_000.0, 96_000.0])
        log = frequency_grid(96_000.0, 64, log=True)
        assert log[0] == 0.0
        assert log[-1] == pytest.approx(96_000.0)
        assert np.all(np.diff(log) > 0)
        with pytest.raises(ContractViolationError):
            frequency_grid(0.0)

    def test_droop_report_composite(self, cic: CicConfig) -> None:
        flat = FirFilter(name="unity", coeffs=(1.0,), fs_in=384_000.0)
        table = droop_report([0.0, 32_000.0], cic=cic, cic_fs=CIC_FS, filters=[flat])
        assert set(table.stage_gains) == {"cic", "unity"}
        np.testing.assert_allclose(table.composite, table.stage_gains["cic"])
        assert table.composite_db[0] == 0.0
        assert table.composite_db[1] == pytest.approx(-0.495, abs=0.005)

    def test_droop_report_needs_cic_rate(self, cic: CicConfig) -> None:
        with pytest.raises(ContractViolationError):
            droop_report([0.0], cic=cic)


class TestPsd:
    """Windowed power spectral density."""

    def test_rect_full_scale_sine_reads_zero_dbfs(self) -> None:
        n = 4096
        report = psd(_coherent_sine(64, n, 48_000.0), WindowKind.RECT)
        assert report.psd_db[64] == pytest.approx(0.0, abs=1e-9)
        others = np.delete(report.psd_db, 64)
        assert np.all(others <= -250.0)

    def test_parseval_with_hann_window(self) -> None:
        rng = np.random.default_rng(2)
        n = 2048
        x = rng.normal(size=n)
        report = psd(SampleStream.real(x, 1.0))
        w = np.hanning(n + 1)[:n]
        expected = float(np.sum((x * w) ** 2) / np.sum(w * w))
        assert float(np.sum(report.psd_linear)) == pytest.approx(expected, rel=1e-9)

    def test_white_noise_total_power(self) -> None:
        rng = np.random.default_rng(6)
        sigma = 0.1
        report = psd(SampleStream.real(rng.normal(scale=sigma, size=1 << 16), 1.0))
        total_db = 10.0 * math.log10(float(np.sum(report.psd_linear)) / sigma**2)
        assert abs(total_db) < 0.1

    def test_zero_is_minus_inf(self) -> None:
        report = psd(SampleStream.real(np.zeros(256), 1.0))
        assert np.all(np.isneginf(report.psd_db))

    def test_uses_last_samples(self) -> None:
        x = np.concatenate([np.full(100, 5.0), np.zeros(256)])
        report = psd(SampleStream.real(x, 1.0), n_fft=256)
        assert np.all(report.psd_linear == 0.0)

    def test_rejects_bad_lengths(self) -> None:
        stream = SampleStream.real(np.zeros(300), 1.0)
        with pytest.raises(ContractViolationError):
            psd(stream, n_fft=200)
        with pytest.raises(ContractViolationError):
            psd(stream, n_fft=512)

    def test_integer_stream_full_scale(self) -> None:
        codes = np.round(16.0 * np.sin(2.0 * np.pi * 8 * np.arange(256) / 256)).astype(np.int64)
        codes = np.clip(codes, -16, 15)
        report = psd(SampleStream.integer(codes, 1.0, 5), WindowKind.RECT)
        assert report.full_scale == 16.0
        assert report.psd_db[8] == pytest.approx(0.0, abs=0.5)


class TestSnr:
    """In-band SNR measurement."""

    def test_against_known_noise_level(self) -> None:
        """Test a tone with white noise 80 dB below it."""
        n = 1 << 16
        fs = 48_000.0
        k = 1001
        rng = np.random.default_rng(13)
        amp = 0.5
        sigma = math.sqrt(amp**2 / 2.0 * 1e-8)
        tone = _coherent_sine(k, n, fs, amp).samples
        stream = SampleStream.real(tone + rng.normal(scale=sigma, size=n), fs)
        snr = measure_snr(stream, k * fs / n, (0.0, fs / 2))
        assert snr == pytest.approx(80.0, abs=0.5)

    def test_is_scale_invariant(self) -> None:
        n = 1 << 14
        rng = np.random.default_rng(17)
        x = _coherent_sine(300, n, 1.0, 0.5).samples + rng.normal(scale=1e-3, size=n)
        f0 = 300 / n
        a = measure_snr(SampleStream.real(x, 1.0), f0, (0.0, 0.5))
        b = measure_snr(SampleStream.real(37.0 * x, 1.0), f0, (0.0, 0.5))
        assert a == pytest.approx(b, abs=1e-9)

    def test_clean_sine_is_high(self) -> None:
        n = 1 << 14
        stream = _coherent_sine(500, n, 1.0, 0.5)
        assert measure_snr(stream, 500 / n, (0.0, 0.5)) > 140.0

    def test_report_bins(self) -> None:
        n = 1024
        report = snr_report(_coherent_sine(100, n, 1.0, 0.5), 100 / n, (0.0, 0.5))
        assert report.signal_bin == 100
        assert report.excluded_bins == (0, 1, 2, 97, 98, 99, 100, 101, 102, 103)
        assert report.band == (0.0, 0.5)

    def test_zero_signal_is_minus_inf(self) -> None:
        stream = SampleStream.real(np.zeros(1024), 1.0)
        assert measure_snr(stream, 0.1, (0.0, 0.5)) == -math.inf

    def test_rejects_f0_outside_band(self) -> None:
        stream = _coherent_sine(10, 1024, 1.0)
        with pytest.raises(ContractViolationError):
            measure_snr(stream, 0.4, (0.0, 0.25))

    def test_needs_noise_bins(self) -> None:
        n = 1024
        stream = _coherent_sine(1, n, 1.0)
        with pytest.raises(ContractViolationError):
            measure_snr(stream, 1 / n, (0.0, 3 / n))
