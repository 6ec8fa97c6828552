"""Half-band and droop-correction FIR design, application and the band plan."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
from scipy import signal

from ..domain.models import (
    BandEdge,
    BandPlan,
    CicConfig,
    FirFilter,
    FirStageSection,
    SampleStream,
    StageKind,
)
from ..errors import ContractViolationError, DesignError
from .spectral import cic_magnitude, fir_magnitude, to_db

if TYPE_CHECKING:
    from numpy.typing import NDArray

logger = logging.getLogger(__name__)

MAX_TAPS = 4097
DEFAULT_DROOP_TAPS = 47
DROOP_RIPPLE_DB = 0.1
_GRID = 8192
_LOWPASS_MARGIN_DB = 10.0


def stopband_attenuation_db(fir: FirFilter, f_lo: float, f_hi: float) -> float:
    """Smallest attenuation (positive dB) of ``fir`` over [f_lo, f_hi]."""
    gains = to_db(fir_magnitude(fir, np.linspace(f_lo, f_hi, _GRID)))
    return -float(np.max(gains))


def _halfband_taps(taps: int, beta: float) -> NDArray[np.float64]:
    mid = (taps - 1) // 2
    m = np.arange(taps) - mid
    h = 0.5 * np.sinc(m / 2.0) * signal.windows.kaiser(taps, beta)
    h[(m % 2 == 0) & (m != 0)] = 0.0
    h[mid] = 0.5
    return h


def design_halfband(
    passband_edge: float,
    fs_in: float,
    stop_atten: float = 100.0,
    *,
    name: str = "halfband",
    min_taps: int = 3,
) -> FirFilter:
    """Kaiser-window half-band lowpass for decimation by two.

    The stopband edge mirrors the passband edge about fs_in/4. Lengths are kept
    at 3 (mod 4) so the outermost taps are nonzero, and grow in steps of four
    until the measured stopband meets ``stop_atten``.

    Raises:
        ContractViolationError: passband edge not in (0, fs_in/4).
        DesignError: no length up to ``MAX_TAPS`` reaches the attenuation.
    """
    if not 0 < passband_edge < fs_in / 4:
        raise ContractViolationError(
            f"half-band passband edge {passband_edge} Hz must lie in (0, fs_in/4)"
        )
    stop_edge = fs_in / 2 - passband_edge
    width = (stop_edge - passband_edge) / (fs_in / 2)
    numtaps, _ = signal.kaiserord(stop_atten, width)
    beta = signal.kaiser_beta(stop_atten + 6.0)
    taps = max(int(numtaps), min_taps)
    taps += (3 - taps % 4) % 4
    achieved = 0.0
    while taps <= MAX_TAPS:
        fir = FirFilter(
            name=name,
            coeffs=tuple(_halfband_taps(taps, beta).tolist()),
            fs_in=fs_in,
            decim=2,
        )
        achieved = stopband_attenuation_db(fir, stop_edge, fs_in / 2)
        if achieved >= stop_atten:
            logger.info(
                "%s: %d taps, %.1f dB stopband from %.0f Hz",
                name,
                taps,
                achieved,
                stop_edge,
            )
            return fir
        taps += 4
    logger.error("%s: %.1f dB not reachable within %d taps", name, stop_atten, MAX_TAPS)
    raise DesignError(
        f"{name}: transition {passband_edge}-{stop_edge} Hz needs more than "
        f"{MAX_TAPS} taps for {stop_atten} dB",
        achieved=achieved,
    )


def design_droop_correction(  # noqa: PLR0913
    cic: CicConfig | None,
    passband_edge: float,
    stopband_edge: float,
    fs_in: float,
    taps: int = DEFAULT_DROOP_TAPS,
    *,
    cic_fs: float | None = None,
    stop_atten: float = 100.0,
    decim: int = 2,
    name: str = "droop",
    compensator_taps: int = 5,
) -> FirFilter:
    """Lowpass with a passband shaped as the inverse CIC droop.

    A Kaiser-window lowpass sets the stopband; a short linear-phase compensator,
    least-squares fitted on [0, passband_edge] to 1/(|CIC| |lowpass|), supplies
    the inverse-droop shape. The result is their convolution.

    Args:
        cic: CIC whose droop is compensated; ``None`` gives a flat target.
        passband_edge: Edge of the flattened band in Hz.
        stopband_edge: Start of the stopband in Hz.
        fs_in: Input rate of this stage in Hz.
        taps: Total odd length.
        cic_fs: CIC input rate; defaults to ``fs_in * cic.r``.
        stop_atten: Required stopband attenuation in dB.
        decim: Decimation factor of the stage.
        name: Stage name.
        compensator_taps: Odd length of the inverse-droop section.

    Raises:
        ContractViolationError: edges out of order or even lengths.
        DesignError: cascade ripple above 0.1 dB or stopband not met.
    """
    if not 0 < passband_edge < stopband_edge <= fs_in / 2:
        raise ContractViolationError(
            f"need 0 < passband < stopband <= fs_in/2, got "
            f"{passband_edge}/{stopband_edge} at {fs_in} Hz"
        )
    if taps % 2 == 0 or compensator_taps % 2 == 0 or taps <= compensator_taps:
        raise ContractViolationError(
            "droop filter and compensator lengths must be odd, filter longer"
        )
    lp_taps = taps - compensator_taps + 1
    lowpass = signal.firwin(
        lp_taps,
        (passband_edge + stopband_edge) / 2,
        window=("kaiser", signal.kaiser_beta(stop_atten + _LOWPASS_MARGIN_DB)),
        fs=fs_in,
    )
    freqs = np.linspace(0.0, passband_edge, 512)
    droop = _cic_droop(cic, freqs, cic_fs, fs_in)
    _, lp_resp = signal.freqz(lowpass, worN=freqs, fs=fs_in)
    target = 1.0 / (droop * np.abs(lp_resp))
    half = compensator_taps // 2
    omega = 2.0 * np.pi * freqs / fs_in
    basis = np.column_stack(
        [np.ones_like(omega)] + [2.0 * np.cos(k * omega) for k in range(1, half + 1)]
    )
    solution, *_ = np.linalg.lstsq(basis, target, rcond=None)
    comp = np.concatenate([solution[:0:-1], solution])
    h = np.convolve(lowpass, comp)
    fir = FirFilter(name=name, coeffs=tuple(h.tolist()), fs_in=fs_in, decim=decim)

    ripple = float(np.max(np.abs(to_db(droop * fir_magnitude(fir, freqs)))))
    if ripple > DROOP_RIPPLE_DB:
        logger.error("%s: cascade ripple %.3f dB", name, ripple)
        raise DesignError(
            f"{name}: {taps} taps leave {ripple:.3f} dB cascade ripple", achieved=ripple
        )
    atten = stopband_attenuation_db(fir, stopband_edge, fs_in / 2)
    if atten < stop_atten:
        logger.error("%s: stopband %.1f dB", name, atten)
        raise DesignError(
            f"{name}: stopband reaches {atten:.1f} dB, {stop_atten} dB required",
            achieved=atten,
        )
    logger.info("%s: %d taps, ripple %.4f dB, stopband %.1f dB", name, taps, ripple, atten)
    return fir


def _cic_droop(
    cic: CicConfig | None,
    freqs: NDArray[np.float64],
    cic_fs: float | None,
    fs_in: float,
) -> NDArray[np.float64]:
    if cic is None:
        return np.ones_like(freqs)
    rate = cic_fs if cic_fs is not None else fs_in * cic.r
    return cic_magnitude(cic, freqs, rate, normalized=True)


def apply_fir(fir: FirFilter, stream: SampleStream) -> SampleStream:
    """Causal direct-form filtering, evaluating only the kept (phase-0) outputs.

    Zero taps are skipped, so half-band stages cost about half their length.

    Raises:
        ContractViolationError: the stream rate differs from ``fir.fs_in``.
    """
    if not np.isclose(stream.fs, fir.fs_in, rtol=1e-12, atol=0.0):
        raise ContractViolationError(
            f"{fir.name}: stream at {stream.fs} Hz, filter expects {fir.fs_in} Hz"
        )
    x = stream.as_float()
    h = fir.as_array()
    pad = h.size - 1
    padded = np.concatenate([np.zeros(pad), x])
    out_index = np.arange(0, x.size, fir.decim) + pad
    y = np.zeros(out_index.size)
    for k in np.flatnonzero(h):
        y += h[k] * padded[out_index - k]
    return SampleStream.real(y, fir.fs_out)


def quantize_coefficients(fir: FirFilter, width: int) -> FirFilter:
    """Round coefficients to ``width``-bit two's-complement fractions in [-1, 1)."""
    if not 2 <= width <= 64:
        raise ContractViolationError(f"coefficient width {width} outside 2..64")
    scale = float(1 << (width - 1))
    q = np.clip(np.round(fir.as_array() * scale), -scale, scale - 1) / scale
    return fir.model_copy(update={"coeffs": tuple(q.tolist()), "coeff_width": width})


def design_stage(
    section: FirStageSection,
    fs_in: float,
    *,
    cic: CicConfig | None = None,
    cic_fs: float | None = None,
) -> FirFilter:
    """Design one configured FIR stage at its resolved input rate."""
    if section.kind is StageKind.HALFBAND:
        mirrored = fs_in / 2 - section.passband_hz
        if mirrored < section.stopband_hz:
            logger.info(
                "%s: half-band symmetry puts the stopband at %.0f Hz (configured %.0f)",
                section.name,
                mirrored,
                section.stopband_hz,
            )
        elif mirrored > section.stopband_hz:
            logger.warning(
                "%s: configured stopband %.0f Hz is stricter than half-band %.0f Hz",
                section.name,
                section.stopband_hz,
                mirrored,
            )
        return design_halfband(
            section.passband_hz,
            fs_in,
            section.stop_atten_db,
            name=section.name,
            min_taps=section.taps or 3,
        )
    return design_droop_correction(
        cic,
        section.passband_hz,
        section.stopband_hz,
        fs_in,
        section.taps or DEFAULT_DROOP_TAPS,
        cic_fs=cic_fs,
        stop_atten=section.stop_atten_db,
        decim=section.decim,
        name=section.name,
    )


def reference_band_plan() -> BandPlan:
    """Four-stage plan from 6.144 MHz to 48 kHz (total decimation 128)."""
    return BandPlan(
        stages=(
            BandEdge(
                name="cic",
                passband_hz=7_000.0,
                stopband_hz=384_000.0,
                fs_in_hz=6_144_000.0,
                decim=16,
            ),
            BandEdge(
                name="hb1",
                passband_hz=32_000.0,
                stopband_hz=170_000.0,
                fs_in_hz=384_000.0,
                decim=2,
            ),
            BandEdge(
                name="droop",
                passband_hz=32_000.0,
                stopband_hz=70_000.0,
                fs_in_hz=192_000.0,
                decim=2,
            ),
            BandEdge(
                name="hb2",
                passband_hz=21_770.0,
                stopband_hz=26_530.0,
                fs_in_hz=96_000.0,
                decim=2,
            ),
        )
    )
