"""Test-signal generators and a 3rd-order multi-bit sigma-delta modulator."""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from ..domain.models import ModulatorCoefficients, SampleStream, StreamFormat
from ..errors import ContractViolationError, InstabilityError

if TYPE_CHECKING:
    from numpy.typing import NDArray

logger = logging.getLogger(__name__)

PRBS_ORDER = 15
_PRBS_MASK = (1 << PRBS_ORDER) - 1


class SdModulator:
    """Single-loop CIFB modulator with delaying integrators.

    Works in quantizer LSB units: the input is scaled by levels/2, the quantizer
    is mid-tread with outputs in [-levels/2, levels/2 - 1] and the loop filter
    places all three NTF poles inside the unit circle with zeros at DC.
    """

    def __init__(self, coefficients: ModulatorCoefficients) -> None:
        super().__init__()
        self.coefficients = coefficients
        self._state = [0.0, 0.0, 0.0]

    @property
    def width(self) -> int:
        return self.coefficients.levels.bit_length() - 1

    @property
    def state(self) -> tuple[float, float, float]:
        s = self._state
        return s[0], s[1], s[2]

    def reset(self) -> None:
        self._state = [0.0, 0.0, 0.0]

    def modulate(self, stream: SampleStream) -> SampleStream:
        """Convert a real stream (full scale 1.0) to quantizer codes.

        State carries over between calls; call ``reset`` for a fresh run.

        Raises:
            ContractViolationError: input exceeds the stability limit.
            InstabilityError: an integrator exceeds the divergence threshold.
        """
        if stream.fmt is not StreamFormat.REAL:
            raise ContractViolationError("modulator input must be a real stream")
        c = self.coefficients
        u = stream.as_float()
        over = np.flatnonzero(np.abs(u) > c.stability_limit)
        if over.size:
            raise ContractViolationError(
                f"input {float(u[over[0]]):.4f} at index {int(over[0])} exceeds "
                f"the {c.stability_limit} stability limit"
            )
        half = c.levels // 2
        lo, hi = -half, half - 1
        a1, a2, a3 = c.a
        b1 = c.b1
        limit = c.divergence_threshold * half
        x1, x2, x3 = self._state
        out = np.empty(u.size, dtype=np.int64)
        for i, ui in enumerate((u * half).tolist()):
            y = min(max(math.floor(x3 + 0.5), lo), hi)
            out[i] = y
            x3 += x2 - a3 * y
            x2 += x1 - a2 * y
            x1 += b1 * ui - a1 * y
            if abs(x3) > limit:
                self._state = [x1, x2, x3]
                logger.error("modulator diverged at sample %d", i)
                raise InstabilityError("sigma-delta loop diverged", i)
        self._state = [x1, x2, x3]
        logger.debug("modulated %d samples", u.size)
        return SampleStream.integer(out, stream.fs, self.width)


def modulate(coefficients: ModulatorCoefficients, stream: SampleStream) -> SampleStream:
    return SdModulator(coefficients).modulate(stream)


def signal_transfer(
    coefficients: ModulatorCoefficients,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """STF numerator and denominator in powers of z^-1, for ``scipy.signal.lfilter``.

    The loop gives STF(z) = b1 / ((z-1)^3 + a3 (z-1)^2 + a2 (z-1) + a1).
    """
    a1, a2, a3 = coefficients.a
    d = np.poly1d([1.0, -1.0])
    den = d**3 + a3 * d**2 + a2 * d + np.poly1d([a1])
    return np.array([0.0, 0.0, 0.0, coefficients.b1]), np.asarray(den.coeffs, dtype=np.float64)


def noise_transfer(
    coefficients: ModulatorCoefficients,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """NTF numerator (1 - z^-1)^3 and the shared loop denominator."""
    _, den = signal_transfer(coefficients)
    return np.array([1.0, -3.0, 3.0, -1.0]), den


def gen_sine(
    freq: float, amp: float, fs: float, n: int, phase: float = 0.0
) -> SampleStream:
    """``amp * sin(2 pi freq t + phase)`` as a real stream (1.0 = full scale).

    Raises:
        ContractViolationError: ``freq`` not below Nyquist or ``|amp| > 1``.
    """
    if not 0 <= freq < fs / 2:
        raise ContractViolationError(f"{freq} Hz aliases at fs={fs} Hz")
    if abs(amp) > 1.0:
        raise ContractViolationError("sine amplitude must be within full scale")
    t = np.arange(n, dtype=np.float64)
    return SampleStream.real(amp * np.sin(2.0 * np.pi * freq / fs * t + phase), fs)


def gen_impulse(n: int, fs: float, *, width: int = 5, value: int = 1) -> SampleStream:
    x = np.zeros(n, dtype=np.int64)
    if n:
        x[0] = value
    return SampleStream.integer(x, fs, width)


def gen_step(n: int, fs: float, *, width: int = 5, value: int = 1) -> SampleStream:
    return SampleStream.integer(np.full(n, value, dtype=np.int64), fs, width)


def prbs_bits(n: int, seed: int = 1) -> NDArray[np.int64]:
    """PRBS-15 (x^15 + x^14 + 1) Fibonacci LFSR; the feedback bit is the output."""
    if not 0 < seed <= _PRBS_MASK:
        raise ContractViolationError(f"PRBS seed must lie in 1..{_PRBS_MASK}")
    state = seed
    bits = np.empty(n, dtype=np.int64)
    for i in range(n):
        bit = ((state >> 14) ^ (state >> 13)) & 1
        state = ((state << 1) | bit) & _PRBS_MASK
        bits[i] = bit
    return bits


def gen_prbs(
    n: int, fs: float, seed: int = 1, *, width: int = 5, amplitude: int = 1
) -> SampleStream:
    """Bipolar PRBS: bit b maps to amplitude * (2b - 1)."""
    return SampleStream.integer(amplitude * (2 * prbs_bits(n, seed) - 1), fs, width)


def quantize(stream: SampleStream, width: int) -> SampleStream:
    """Round a real stream to ``width``-bit codes (half up, saturating)."""
    if stream.fmt is not StreamFormat.REAL:
        raise ContractViolationError("quantize takes a real stream")
    if not 1 <= width <= 63:
        raise ContractViolationError(f"width {width} outside 1..63")
    half = 1 << (width - 1)
    codes = np.floor(stream.as_float() * half + 0.5)
    codes = np.clip(codes, -half, half - 1).astype(np.int64)
    return SampleStream.integer(codes, stream.fs, width)
