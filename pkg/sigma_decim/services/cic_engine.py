"""Bit-exact CIC decimator: design math, truncated and pipelined execution.

Structure: N integrators at the input rate, keep every R-th sample (phase 0),
N combs with differential delay M at the output rate. Integrator arithmetic
wraps modulo 2**width; truncation drops LSBs between integrator stages.
"""

from __future__ import annotations

from collections import deque
import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from ..domain.models import (
    AdderKind,
    BitWord,
    CicConfig,
    CicMode,
    CycleSnapshot,
    GrowthReport,
    PipelineTrace,
    SampleStream,
    StreamFormat,
    TruncationSchedule,
)
from ..errors import ConfigurationError, ContractViolationError, InputDomainError
from .bitvec_arith import ClaAdder, WrapAdder
from .spectral import boxcar_magnitude

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from .bitvec_arith import Adder

logger = logging.getLogger(__name__)


def register_growth(cfg: CicConfig) -> GrowthReport:
    """Maximum gain (RM)^N, the 0-based output MSB index and the register width."""
    width = cfg.register_width
    return GrowthReport(g_max=cfg.growth, b_max=width - 1, register_width=width)


def default_schedule(cfg: CicConfig) -> TruncationSchedule:
    """Spread the LSB drop across integrator boundaries, earlier stages first.

    The first integrator always keeps the full register width and the last one
    lands on the output width, which reproduces 25/22/20/18/16 for the
    N=5, R=16, B_in=5, 16-bit configuration.
    """
    width = cfg.register_width
    out = cfg.resolved_out_width
    if out > width:
        raise ConfigurationError(
            f"out_width {out} exceeds register width {width}"
        )
    boundaries = cfg.n - 1
    if boundaries == 0:
        return TruncationSchedule(widths=(width,), comb_width=out)
    base, extra = divmod(width - out, boundaries)
    widths = [width]
    for k in range(boundaries):
        widths.append(widths[-1] - base - (1 if k < extra else 0))
    return TruncationSchedule(widths=tuple(widths), comb_width=out)


def resolve_schedule(cfg: CicConfig, mode: CicMode) -> TruncationSchedule:
    if mode is CicMode.FULL_PRECISION:
        width = cfg.register_width
        return TruncationSchedule(widths=(width,) * cfg.n, comb_width=width)
    return cfg.schedule if cfg.schedule is not None else default_schedule(cfg)


def impulse_response(cfg: CicConfig) -> NDArray[np.int64]:
    """Coefficients of the N-fold self-product of the length-RM boxcar."""
    box = np.ones(cfg.r * cfg.m, dtype=np.int64)
    h = np.ones(1, dtype=np.int64)
    for _ in range(cfg.n):
        h = np.convolve(h, box)
    return h


def _comb_response(rm: int, order: int) -> NDArray[np.int64]:
    h = np.ones(1, dtype=np.int64)
    diff = np.zeros(rm + 1, dtype=np.int64)
    diff[0], diff[-1] = 1, -1
    for _ in range(order):
        h = np.convolve(h, diff)
    return h


def pipeline_latency(cfg: CicConfig) -> int:
    """Output-rate delay of the pipelined structure.

    The integrator staging delays the cascade by N-1 input cycles, which the
    phase-shifted downsampler absorbs in ceil((N-1)/R) output ticks; each of the
    N comb registers and the registered downsampler add one tick.
    """
    return math.ceil((cfg.n - 1) / cfg.r) + cfg.n + 1


def _truncation_points(
    cfg: CicConfig, schedule: TruncationSchedule
) -> list[tuple[int, int, int]]:
    """(stages already passed, previous width, new width) per truncation."""
    chain = (*schedule.widths, schedule.comb_width)
    return [
        (j, chain[j - 1], chain[j])
        for j in range(1, cfg.n + 1)
        if chain[j] < chain[j - 1]
    ]


def truncation_error_bound(cfg: CicConfig) -> int:
    """Worst-case |truncated - full precision| output deviation in full LSBs."""
    schedule = resolve_schedule(cfg, CicMode.TRUNCATED)
    width = cfg.register_width
    rm = cfg.r * cfg.m
    bound = 0
    for j, prev, new in _truncation_points(cfg, schedule):
        step = (1 << (width - new)) - (1 << (width - prev))
        h = _comb_response(rm, j)
        box = np.ones(rm, dtype=np.int64)
        for _ in range(cfg.n - j):
            h = np.convolve(h, box)
        bound += step * int(np.abs(h).sum())
    return bound


def truncation_noise_dbfs(
    cfg: CicConfig, fs: float, band: tuple[float, float], grid: int = 1 << 16
) -> float:
    """Predicted in-band truncation noise power relative to a full-scale sine."""
    schedule = resolve_schedule(cfg, CicMode.TRUNCATED)
    width = cfg.register_width
    rm = cfg.r * cfg.m
    freqs = np.linspace(0.0, fs / 2, grid + 1)
    fs_out = fs / cfg.r
    folded = np.mod(freqs, fs_out)
    folded = np.where(folded > fs_out / 2, fs_out - folded, folded)
    in_band = (folded >= band[0]) & (folded <= band[1])
    df = freqs[1] - freqs[0]
    comb = np.abs(2.0 * np.sin(np.pi * freqs * rm / fs))
    box = boxcar_magnitude(freqs, fs, rm)
    power = 0.0
    for j, prev, new in _truncation_points(cfg, schedule):
        variance = (4.0 ** (width - new) - 4.0 ** (width - prev)) / 12.0
        gain2 = comb ** (2 * j) * box ** (2 * (cfg.n - j))
        power += variance * float(np.sum(gain2[in_band])) * 2.0 * df / fs
    if power == 0.0:
        return -math.inf
    full_scale = float(cfg.growth) * 2.0 ** (cfg.b_in - 1)
    return 10.0 * math.log10(power / (full_scale**2 / 2.0))


def _check_input(cfg: CicConfig, stream: SampleStream) -> NDArray[np.int64]:
    if stream.fmt is not StreamFormat.INTEGER:
        raise ContractViolationError("CIC input must be an integer stream")
    x = np.asarray(stream.samples, dtype=np.int64)
    lo = -(1 << (cfg.b_in - 1))
    hi = (1 << (cfg.b_in - 1)) - 1
    bad = np.flatnonzero((x < lo) | (x > hi))
    if bad.size:
        idx = int(bad[0])
        raise InputDomainError(
            f"sample {int(x[idx])} outside the {cfg.b_in}-bit input range", idx
        )
    return x


def reference_fir_decimate(cfg: CicConfig, stream: SampleStream) -> SampleStream:
    """Direct convolution with the CIC impulse response, then phase-0 decimation."""
    x = _check_input(cfg, stream)
    y = np.convolve(x, impulse_response(cfg))[: x.size][:: cfg.r]
    return SampleStream.integer(y, stream.fs / cfg.r, cfg.register_width)


def wrap_array(x: NDArray[np.int64], width: int) -> NDArray[np.int64]:
    if width >= 64:
        return x
    half = np.int64(1 << (width - 1))
    mask = np.int64((1 << width) - 1)
    return ((x + half) & mask) - half


def _run_vectorized(
    cfg: CicConfig, x: NDArray[np.int64], schedule: TruncationSchedule
) -> NDArray[np.int64]:
    widths = schedule.widths
    v = x
    for k, width in enumerate(widths):
        if k:
            v = v >> (widths[k - 1] - width)
        v = wrap_array(np.cumsum(v), width)
    d = v[:: cfg.r] >> (widths[-1] - schedule.comb_width)
    for _ in range(cfg.n):
        delayed = np.concatenate([np.zeros(cfg.m, dtype=np.int64), d[: -cfg.m or None]])
        d = wrap_array(d - delayed[: d.size], schedule.comb_width)
    return d


class CicDecimator:
    """Cycle-accurate CIC datapath; one instance per stream, not thread-safe."""

    def __init__(
        self,
        cfg: CicConfig,
        schedule: TruncationSchedule,
        adder: Adder,
        *,
        pipelined: bool = False,
    ) -> None:
        super().__init__()
        self._cfg = cfg
        self._widths = schedule.widths
        self._comb_width = schedule.comb_width
        self._adder = adder
        self._pipelined = pipelined
        n = cfg.n
        self._shifts = [self._widths[k - 1] - self._widths[k] for k in range(1, n)]
        self._comb_shift = self._widths[-1] - self._comb_width
        self._acc = [0] * n
        self._history = [deque([0] * cfg.m, maxlen=cfg.m) for _ in range(n)]
        self._combs = [0] * n
        self._ds_reg = 0
        self._held = 0
        self._cycle = 0

    def _integrate(self, xi: int) -> None:
        add = self._adder.add
        acc = self._acc
        widths = self._widths
        if self._pipelined:
            prev = acc[:]
            acc[0] = add(prev[0], xi, widths[0])
            for k in range(1, len(acc)):
                acc[k] = add(prev[k], prev[k - 1] >> self._shifts[k - 1], widths[k])
        else:
            acc[0] = add(acc[0], xi, widths[0])
            for k in range(1, len(acc)):
                acc[k] = add(acc[k], acc[k - 1] >> self._shifts[k - 1], widths[k])

    def _comb_tick(self) -> int:
        sub = self._adder.sub
        width = self._comb_width
        if not self._pipelined:
            v = self._acc[-1] >> self._comb_shift
            for k, history in enumerate(self._history):
                out = sub(v, history[0], width)
                history.append(v)
                self._combs[k] = out
                v = out
            return v
        emitted = self._combs[-1]
        source = self._ds_reg
        self._ds_reg = self._held
        updated = [0] * len(self._combs)
        for k, history in enumerate(self._history):
            if k:
                source = self._combs[k - 1]
            updated[k] = sub(source, history[0], width)
            history.append(source)
        self._combs = updated
        return emitted

    def step(self, xi: int) -> int | None:
        """Clock one input sample; returns an output sample on phase-0 cycles."""
        cfg = self._cfg
        i = self._cycle
        self._integrate(xi)
        lag = cfg.n - 1
        if self._pipelined and i >= lag and (i - lag) % cfg.r == 0:
            self._held = self._acc[-1] >> self._comb_shift
        out = self._comb_tick() if i % cfg.r == 0 else None
        self._cycle += 1
        return out

    def snapshot(self) -> CycleSnapshot:
        return CycleSnapshot(
            cycle=self._cycle - 1,
            integrators=tuple(
                BitWord(width=w, value=v)
                for w, v in zip(self._widths, self._acc, strict=True)
            ),
            combs=tuple(BitWord(width=self._comb_width, value=v) for v in self._combs),
            phase=(self._cycle - 1) % self._cfg.r,
        )


def run_cic(
    cfg: CicConfig,
    stream: SampleStream,
    *,
    mode: CicMode = CicMode.FULL_PRECISION,
    pipelined: bool = False,
    adder: AdderKind = AdderKind.WRAP,
    record_trace: bool = False,
    schedule: TruncationSchedule | None = None,
) -> tuple[SampleStream, PipelineTrace]:
    """Run the decimator over ``stream``.

    The non-pipelined wraparound datapath is evaluated with numpy (cumulative
    sums modulo 2**width); every other combination, and any traced run, goes
    through the cycle-accurate ``CicDecimator``. An explicit ``schedule``
    replaces the one derived from ``cfg`` and ``mode``.
    """
    x = _check_input(cfg, stream)
    if schedule is None:
        schedule = resolve_schedule(cfg, mode)
    elif len(schedule.widths) != cfg.n:
        raise ContractViolationError(f"schedule has {len(schedule.widths)} widths, N={cfg.n}")
    latency = pipeline_latency(cfg) if pipelined else 0
    fs_out = stream.fs / cfg.r
    if not pipelined and adder is AdderKind.WRAP and not record_trace:
        y = _run_vectorized(cfg, x, schedule)
        logger.debug("CIC vectorized run: %d -> %d samples", x.size, y.size)
        return (
            SampleStream.integer(y, fs_out, schedule.comb_width),
            PipelineTrace(pipelined=False, latency=0),
        )
    element: Adder = ClaAdder() if adder is AdderKind.CLA else WrapAdder()
    machine = CicDecimator(cfg, schedule, element, pipelined=pipelined)
    outputs: list[int] = []
    snapshots: list[CycleSnapshot] = []
    for xi in x.tolist():
        out = machine.step(xi)
        if out is not None:
            outputs.append(out)
        if record_trace:
            snapshots.append(machine.snapshot())
    logger.debug(
        "CIC cycle run (%s, pipelined=%s, adder=%s): %d -> %d samples",
        mode.value,
        pipelined,
        adder.value,
        x.size,
        len(outputs),
    )
    y = np.asarray(outputs, dtype=np.int64)
    return (
        SampleStream.integer(y, fs_out, schedule.comb_width),
        PipelineTrace(pipelined=pipelined, latency=latency, snapshots=tuple(snapshots)),
    )


def cic_to_real(stream: SampleStream, cfg: CicConfig) -> SampleStream:
    """Remove the CIC gain so a full-scale input maps to unity."""
    if stream.width is None:
        raise ContractViolationError("cic_to_real needs an integer CIC output stream")
    scale = 2.0 ** (cfg.register_width - stream.width) / (
        float(cfg.growth) * 2.0 ** (cfg.b_in - 1)
    )
    return SampleStream.real(stream.as_float() * scale, stream.fs)
