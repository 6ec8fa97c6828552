"""Analytic CIC response, windowed PSD and SNR measurement."""

from __future__ import annotations

from collections.abc import Iterable
import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import signal

from ..domain.models import (
    CicConfig,
    FirFilter,
    ResponseTable,
    SampleStream,
    SpectrumReport,
    WindowKind,
)
from ..errors import ContractViolationError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 4096


def boxcar_magnitude(
    freqs: ArrayLike, fs: float, length: int
) -> NDArray[np.float64]:
    """|sin(pi f L / fs) / sin(pi f / fs)| with the value L at f = 0 (mod fs)."""
    f = np.asarray(freqs, dtype=np.float64)
    num = np.sin(np.pi * f * length / fs)
    den = np.sin(np.pi * f / fs)
    singular = np.isclose(np.mod(f, fs), 0.0, rtol=0.0, atol=1e-12 * fs) | np.isclose(
        np.mod(f, fs), fs, rtol=0.0, atol=1e-12 * fs
    )
    safe = np.where(singular, 1.0, den)
    return np.where(singular, float(length), np.abs(num / safe))


def cic_magnitude(
    cfg: CicConfig, freqs: ArrayLike, fs: float, *, normalized: bool = False
) -> NDArray[np.float64]:
    """Linear magnitude of the CIC transfer function on the unit circle.

    Args:
        cfg: CIC parameters.
        freqs: Frequencies in Hz, each within [0, fs/2].
        fs: CIC input rate in Hz.
        normalized: Divide by the DC gain (RM)^N.

    Raises:
        ContractViolationError: A frequency lies outside [0, fs/2].
    """
    f = np.asarray(freqs, dtype=np.float64)
    if f.size and (float(f.min()) < 0.0 or float(f.max()) > fs / 2):
        raise ContractViolationError("CIC magnitude is defined on [0, fs/2]")
    rm = cfg.r * cfg.m
    mag = boxcar_magnitude(f, fs, rm) ** cfg.n
    if normalized:
        mag = mag / float(cfg.growth)
    return mag


def to_db(magnitude: ArrayLike) -> NDArray[np.float64]:
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(np.asarray(magnitude, dtype=np.float64)))


def fir_magnitude(fir: FirFilter, freqs: ArrayLike) -> NDArray[np.float64]:
    """|H(f)| of a FIR stage evaluated at its own input rate."""
    f = np.asarray(freqs, dtype=np.float64)
    _, h = signal.freqz(fir.as_array(), worN=f, fs=fir.fs_in)
    return np.abs(h)


def frequency_grid(
    fmax: float, points: int = DEFAULT_GRID_POINTS, *, log: bool = False
) -> NDArray[np.float64]:
    if points < 2 or fmax <= 0:
        raise ContractViolationError("grid needs at least two points and fmax > 0")
    if log:
        return np.concatenate([[0.0], np.geomspace(fmax / 1e4, fmax, points - 1)])
    return np.linspace(0.0, fmax, points)


def droop_report(
    freqs: ArrayLike,
    *,
    cic: CicConfig | None = None,
    cic_fs: float | None = None,
    filters: Iterable[FirFilter] = (),
) -> ResponseTable:
    """Per-stage and composite gains referred to the chain input frequency.

    The CIC is normalized to unity DC gain; FIR stages are evaluated at their own
    input rate, so images above a stage's Nyquist appear where the decimated
    chain would alias them.
    """
    f = np.asarray(freqs, dtype=np.float64)
    gains: dict[str, NDArray[np.float64]] = {}
    if cic is not None:
        if cic_fs is None:
            raise ContractViolationError("cic_fs is required with a CIC stage")
        gains["cic"] = cic_magnitude(cic, f, cic_fs, normalized=True)
    for fir in filters:
        gains[fir.name] = fir_magnitude(fir, f)
    return ResponseTable(freqs=f, stage_gains=gains)


def _window(kind: WindowKind, n: int) -> NDArray[np.float64]:
    if kind is WindowKind.RECT:
        return np.ones(n)
    return np.asarray(signal.get_window("hann", n, fftbins=True), dtype=np.float64)


def psd(
    stream: SampleStream,
    window: WindowKind = WindowKind.HANN,
    n_fft: int | None = None,
) -> SpectrumReport:
    """One-sided power per bin of the last ``n_fft`` samples.

    Bin powers are scaled so that their sum equals the mean square of the
    windowed record divided by the window's mean square; a full-scale sine
    reads 0 dBFS. Zero power maps to ``-inf`` dBFS.

    Raises:
        ContractViolationError: ``n_fft`` is not a power of two or exceeds the
            stream length.
    """
    length = len(stream)
    n = _default_nfft(length) if n_fft is None else n_fft
    if n < 2 or n & (n - 1):
        raise ContractViolationError(f"n_fft must be a power of two, got {n}")
    if n > length:
        raise ContractViolationError(
            f"stream of {length} samples is shorter than n_fft={n}"
        )
    x = stream.as_float()[length - n :]
    w = _window(window, n)
    spectrum = np.fft.rfft(x * w)
    scale = np.full(spectrum.size, 2.0)
    scale[0] = 1.0
    scale[-1] = 1.0
    power = scale * np.abs(spectrum) ** 2 / (n * float(np.sum(w * w)))
    fs_sq = stream.full_scale**2 / 2.0
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(power / fs_sq)
    return SpectrumReport(
        freqs=np.fft.rfftfreq(n, d=1.0 / stream.fs),
        psd_linear=power,
        psd_db=power_db,
        window=window,
        n_fft=n,
        fs=stream.fs,
        full_scale=stream.full_scale,
    )


def _default_nfft(length: int) -> int:
    if length < 2:
        raise ContractViolationError("stream too short for a spectrum")
    return 1 << (length.bit_length() - 1)


def snr_report(
    stream: SampleStream,
    f0: float,
    band: tuple[float, float],
    *,
    signal_bins: int = 3,
    dc_bins: int = 2,
    n_fft: int | None = None,
    window: WindowKind = WindowKind.HANN,
) -> SpectrumReport:
    """PSD plus the in-band SNR around ``f0``.

    Signal power is the sum over ``f0``'s bin +- ``signal_bins``; noise is every
    other bin in ``band`` except DC bins 0..``dc_bins``. No signal gives -inf,
    no noise gives +inf.
    """
    lo, hi = band
    if not lo <= f0 <= hi:
        raise ContractViolationError(f"f0={f0} Hz outside band {lo}-{hi} Hz")
    report = psd(stream, window, n_fft)
    resolution = report.fs / report.n_fft
    k0 = round(f0 / resolution)
    last = report.psd_linear.size - 1
    sig_lo = max(k0 - signal_bins, 0)
    sig_hi = min(k0 + signal_bins, last)
    excluded = set(range(sig_lo, sig_hi + 1)) | set(range(min(dc_bins, last) + 1))
    in_band = np.flatnonzero((report.freqs >= lo) & (report.freqs <= hi))
    noise_bins = [int(k) for k in in_band if int(k) not in excluded]
    if not noise_bins:
        raise ContractViolationError("no in-band bins left after exclusions")
    sig = float(np.sum(report.psd_linear[sig_lo : sig_hi + 1]))
    noise = float(np.sum(report.psd_linear[noise_bins]))
    if sig == 0.0:
        snr = -math.inf
    elif noise == 0.0:
        snr = math.inf
    else:
        snr = 10.0 * math.log10(sig / noise)
    logger.debug("SNR at %.3f Hz over %s: %.2f dB", f0, band, snr)
    return SpectrumReport(
        freqs=report.freqs,
        psd_linear=report.psd_linear,
        psd_db=report.psd_db,
        window=window,
        n_fft=report.n_fft,
        fs=report.fs,
        full_scale=report.full_scale,
        snr_db=snr,
        signal_bin=k0,
        excluded_bins=tuple(sorted(excluded)),
        band=band,
    )


def measure_snr(
    stream: SampleStream,
    f0: float,
    band: tuple[float, float],
    *,
    signal_bins: int = 3,
    dc_bins: int = 2,
    n_fft: int | None = None,
) -> float:
    report = snr_report(
        stream, f0, band, signal_bins=signal_bins, dc_bins=dc_bins, n_fft=n_fft
    )
    return report.snr_db if report.snr_db is not None else -math.inf
