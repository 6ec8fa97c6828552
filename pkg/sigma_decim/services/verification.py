"""Oracle equivalence suites behind ``sigma-decim verify``."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
import logging
import time
from typing import TYPE_CHECKING

import numpy as np

from ..domain.models import (
    AdderKind,
    CicConfig,
    CicMode,
    SampleStream,
    StageKind,
    TruncationSchedule,
)
from ..errors import ContractViolationError
from .bitvec_arith import cla_add_int, cla_block_add, wrap_int
from .chain import build_chain, stage_filters
from .cic_engine import (
    impulse_response,
    pipeline_latency,
    reference_fir_decimate,
    register_growth,
    resolve_schedule,
    run_cic,
    truncation_error_bound,
    wrap_array,
)
from .fir_stages import DROOP_RIPPLE_DB, stopband_attenuation_db
from .spectral import cic_magnitude, fir_magnitude, to_db

if TYPE_CHECKING:
    from ..domain.models import ChainConfigFile

logger = logging.getLogger(__name__)

ALIAS_ATTEN_DB = 98.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]


@dataclass(frozen=True)
class SuiteSize:
    streams: int
    configs: int
    pipeline_configs: int
    bound_samples: int
    chain_checks: bool


SUITES = {
    "fast": SuiteSize(
        streams=50, configs=5, pipeline_configs=3, bound_samples=1 << 16, chain_checks=False
    ),
    "full": SuiteSize(
        streams=1000,
        configs=20,
        pipeline_configs=10,
        bound_samples=1_000_000,
        chain_checks=True,
    ),
}


def random_config(rng: np.random.Generator) -> CicConfig:
    """Small random CIC with a default truncation schedule."""
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 3))
    r = int(rng.integers(2, 9))
    b_in = int(rng.integers(2, 9))
    full = CicConfig(n=n, m=m, r=r, b_in=b_in)
    out_width = max(b_in, full.register_width - int(rng.integers(0, 7)))
    return CicConfig(n=n, m=m, r=r, b_in=b_in, out_width=out_width)


def random_stream(
    cfg: CicConfig, rng: np.random.Generator, length: int, fs: float = 1.0
) -> SampleStream:
    lo = -(1 << (cfg.b_in - 1))
    hi = 1 << (cfg.b_in - 1)
    return SampleStream.integer(rng.integers(lo, hi, size=length), fs, cfg.b_in)


def check_cla_exhaustive(width: int = 8) -> CheckResult:
    lo, hi = -(1 << (width - 1)), 1 << (width - 1)
    mismatches = 0
    for a in range(lo, hi):
        for b in range(lo, hi):
            for c0 in (0, 1):
                total, _ = cla_add_int(a, b, c0, width)
                if total != wrap_int(a + b + c0, width):
                    mismatches += 1
    cases = (hi - lo) ** 2 * 2
    return CheckResult(
        "cla_exhaustive", mismatches == 0, f"{cases} cases, {mismatches} mismatches"
    )


def check_cla_blocks() -> CheckResult:
    bad = 0
    for a in range(16):
        for b in range(16):
            for c0 in (0, 1):
                total, block = cla_block_add(a, b, c0)
                exact = a + b + c0
                carry_ok = block.c[4] == (block.gg | (block.pg & c0)) == exact >> 4
                if total != exact & 0xF or not carry_ok:
                    bad += 1
    return CheckResult("cla_blocks", bad == 0, f"512 block cases, {bad} failures")


def check_growth(cfg: CicConfig) -> CheckResult:
    report = register_growth(cfg)
    ok = report.g_max == cfg.growth and report.register_width == report.b_max + 1
    if cfg.is_reference_config:
        ok = ok and (report.g_max, report.register_width) == (1_048_576, 25)
    return CheckResult(
        "register_growth",
        ok,
        f"g_max={report.g_max} width={report.register_width}",
    )


def streams_per_config(size: SuiteSize) -> int:
    """Streams for each oracle config so the suite runs at least ``size.streams``."""
    return -(-size.streams // (size.configs + 1))


def check_fir_oracle(
    cfg: CicConfig, rng: np.random.Generator, size: SuiteSize
) -> CheckResult:
    configs = [cfg, *(random_config(rng) for _ in range(size.configs))]
    mismatches = 0
    runs = 0
    per_config = streams_per_config(size)
    for config in configs:
        for _ in range(per_config):
            stream = random_stream(config, rng, int(rng.integers(16, 257)))
            got, _ = run_cic(config, stream, mode=CicMode.FULL_PRECISION)
            want = reference_fir_decimate(config, stream)
            runs += 1
            if not np.array_equal(got.samples, want.samples):
                mismatches += 1
    return CheckResult(
        "fir_oracle",
        mismatches == 0,
        f"{runs} streams over {len(configs)} configs, {mismatches} mismatches",
    )


def pipeline_mismatches(cfg: CicConfig, stream: SampleStream) -> list[str]:
    """Mode/adder pairs whose pipelined output is not the delayed plain output."""
    latency = pipeline_latency(cfg)
    failures: list[str] = []
    for mode in CicMode:
        plain, _ = run_cic(cfg, stream, mode=mode)
        expected = np.concatenate([np.zeros(latency, dtype=np.int64), plain.samples])
        for adder in AdderKind:
            piped, trace = run_cic(cfg, stream, mode=mode, pipelined=True, adder=adder)
            if trace.latency != latency or not np.array_equal(
                piped.samples, expected[: len(plain)]
            ):
                failures.append(f"{mode.value}/{adder.value}")
    return failures


def check_pipeline(
    cfg: CicConfig, rng: np.random.Generator, size: SuiteSize
) -> CheckResult:
    configs = [cfg, *(random_config(rng) for _ in range(size.pipeline_configs))]
    failures: list[str] = []
    for config in configs:
        stream = random_stream(config, rng, 64 * config.r)
        failures.extend(
            f"N={config.n} R={config.r} M={config.m} {pair}"
            for pair in pipeline_mismatches(config, stream)
        )
    return CheckResult(
        "pipeline_equivalence",
        not failures,
        f"{len(configs)} configs x {len(CicMode) * len(AdderKind)} mode/adder pairs"
        + (f", failed: {'; '.join(failures)}" if failures else ""),
    )


def check_adders(cfg: CicConfig, rng: np.random.Generator) -> CheckResult:
    stream = random_stream(cfg, rng, 32 * cfg.r)
    wrap, _ = run_cic(cfg, stream, mode=CicMode.TRUNCATED, pipelined=True)
    cla, _ = run_cic(
        cfg, stream, mode=CicMode.TRUNCATED, pipelined=True, adder=AdderKind.CLA
    )
    same = np.array_equal(wrap.samples, cla.samples)
    return CheckResult("cla_datapath", same, f"{len(wrap)} outputs compared")


def shifted_schedule(cfg: CicConfig, offset: int) -> TruncationSchedule:
    """The truncation schedule with every register MSB moved by ``offset`` bits.

    LSB positions are unchanged, so a negative offset models registers that are
    too narrow for the CIC gain.
    """
    schedule = resolve_schedule(cfg, CicMode.TRUNCATED)
    if not offset:
        return schedule
    return TruncationSchedule(
        widths=tuple(w + offset for w in schedule.widths),
        comb_width=schedule.comb_width + offset,
    )


def truncation_deviation(
    cfg: CicConfig, stream: SampleStream, schedule: TruncationSchedule | None = None
) -> int:
    """Largest |truncated - full precision| output difference in full-width LSBs."""
    used = schedule if schedule is not None else resolve_schedule(cfg, CicMode.TRUNCATED)
    full, _ = run_cic(cfg, stream, mode=CicMode.FULL_PRECISION)
    trunc, _ = run_cic(cfg, stream, mode=CicMode.TRUNCATED, schedule=used)
    shift = used.widths[0] - used.comb_width
    diff = wrap_array(
        (np.asarray(trunc.samples) << shift) - np.asarray(full.samples),
        cfg.register_width,
    )
    return int(np.max(np.abs(diff))) if diff.size else 0


def bound_stream(cfg: CicConfig, rng: np.random.Generator, samples: int) -> SampleStream:
    """Random samples followed by a negative full-scale run that reaches the peak gain."""
    noise = random_stream(cfg, rng, samples)
    tail = np.full(2 * cfg.n * cfg.r * cfg.m, -(1 << (cfg.b_in - 1)), dtype=np.int64)
    return SampleStream.integer(
        np.concatenate([np.asarray(noise.samples, dtype=np.int64), tail]),
        noise.fs,
        cfg.b_in,
    )


def check_truncation_bound(
    cfg: CicConfig, rng: np.random.Generator, samples: int, *, width_offset: int = 0
) -> CheckResult:
    """Truncated output stays within the analytic bound of full precision.

    ``width_offset`` runs the truncated datapath with every register that many
    bits wider (or narrower) than the design rule gives.
    """
    bound = truncation_error_bound(cfg)
    stream = bound_stream(cfg, rng, samples)
    measured = truncation_deviation(cfg, stream, shifted_schedule(cfg, width_offset))
    return CheckResult(
        "truncation_bound",
        measured <= bound,
        f"measured {measured} <= bound {bound} over {len(stream)} samples",
    )


def check_response(cfg: CicConfig, fs: float) -> CheckResult:
    n_fft = 8192
    h = impulse_response(cfg).astype(np.float64)
    fft_mag = np.abs(np.fft.rfft(h, n_fft))
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / fs)
    analytic = cic_magnitude(cfg, freqs, fs)
    err = float(np.max(np.abs(fft_mag - analytic))) / float(cfg.growth)
    return CheckResult(
        "response_consistency", err <= 1e-9, f"max error {err:.3e} of DC gain"
    )


def check_band_plan(config: ChainConfigFile) -> list[CheckResult]:
    """Design the configured chain and check ripple and alias protection."""
    cic = config.cic.to_config()
    filters = stage_filters(build_chain(config))
    band_hi = min(s.passband_hz for s in config.fir_stages) if config.fir_stages else 0.0
    results: list[CheckResult] = []
    cic_fs = config.input_rate_hz
    cic_out = cic_fs / cic.r
    worst = float("inf")
    k = 1
    while k * cic_out - band_hi < cic_fs / 2:
        lo = k * cic_out - band_hi
        hi = min(k * cic_out + band_hi, cic_fs / 2)
        grid = np.linspace(lo, hi, 2048)
        worst = min(worst, -float(np.max(to_db(cic_magnitude(cic, grid, cic_fs, normalized=True)))))
        k += 1
    results.append(
        CheckResult("alias_cic", worst >= ALIAS_ATTEN_DB, f"{worst:.1f} dB at images")
    )
    for fir in filters:
        lo = fir.fs_out - band_hi
        atten = stopband_attenuation_db(fir, lo, fir.fs_in / 2)
        results.append(
            CheckResult(
                f"alias_{fir.name}", atten >= ALIAS_ATTEN_DB, f"{atten:.1f} dB from {lo:.0f} Hz"
            )
        )
    for section, fir in zip(config.fir_stages, filters, strict=True):
        grid = np.linspace(0.0, section.passband_hz, 1024)
        gain = fir_magnitude(fir, grid)
        if section.kind is StageKind.DROOP:
            gain = gain * cic_magnitude(cic, grid, cic_fs, normalized=True)
        ripple = float(np.max(np.abs(to_db(gain))))
        results.append(
            CheckResult(
                f"ripple_{fir.name}",
                ripple <= DROOP_RIPPLE_DB,
                f"{ripple:.4f} dB up to {section.passband_hz:.0f} Hz",
            )
        )
    return results


def _timed(check: Callable[[], CheckResult]) -> CheckResult:
    start = time.perf_counter()
    result = check()
    elapsed = time.perf_counter() - start
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, "%s: %s (%s)", result.name, "pass" if result.passed else "FAIL", result.detail)
    return CheckResult(result.name, result.passed, result.detail, elapsed)


def run_suite(suite: str, config: ChainConfigFile, *, seed: int = 1) -> SuiteReport:
    """Run the named suite against ``config``.

    Raises:
        ContractViolationError: unknown suite name.
    """
    size = SUITES.get(suite)
    if size is None:
        raise ContractViolationError(
            f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}"
        )
    rng = np.random.default_rng(seed)
    cfg = config.cic.to_config()
    checks: list[Callable[[], CheckResult]] = [
        check_cla_blocks,
        check_cla_exhaustive,
        lambda: check_growth(cfg),
        lambda: check_fir_oracle(cfg, rng, size),
        lambda: check_pipeline(cfg, rng, size),
        lambda: check_adders(cfg, rng),
        lambda: check_truncation_bound(cfg, rng, size.bound_samples),
        lambda: check_response(cfg, config.input_rate_hz),
    ]
    results = [_timed(check) for check in checks]
    if size.chain_checks:
        start = time.perf_counter()
        results.extend(check_band_plan(config))
        logger.info("band plan checks took %.2f s", time.perf_counter() - start)
    return SuiteReport(suite=suite, checks=tuple(results))
