from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Literal

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

if TYPE_CHECKING:
    from numpy.typing import NDArray

MAX_WIDTH = 64
RESERVED_STAGE_NAMES = frozenset({"cic", "chain", "cic+droop"})


class StreamFormat(Enum):
    INTEGER = "integer"
    REAL = "real"


class CicMode(Enum):
    FULL_PRECISION = "full"
    TRUNCATED = "truncated"


class AdderKind(Enum):
    WRAP = "wrap"
    CLA = "cla"


class WindowKind(Enum):
    HANN = "hann"
    RECT = "rect"


class StageKind(Enum):
    HALFBAND = "halfband"
    DROOP = "droop"


def growth_bits(n: int, m: int, r: int) -> int:
    """Smallest b with 2**b >= (R*M)**N, computed without floating point."""
    return ((r * m) ** n - 1).bit_length()


class BitWord(BaseModel):
    model_config = ConfigDict(frozen=True)
    width: int
    value: int

    @field_validator("width")
    @classmethod
    def _width_in_range(cls, v: int) -> int:
        if not 1 <= v <= MAX_WIDTH:
            raise ValueError(f"width must lie in 1..{MAX_WIDTH}, got {v}")
        return v

    @model_validator(mode="after")
    def _value_fits(self) -> Self:
        lo = -(1 << (self.width - 1))
        hi = (1 << (self.width - 1)) - 1
        if not lo <= self.value <= hi:
            raise ValueError(
                f"value {self.value} not representable in {self.width} bits"
            )
        return self


@dataclass(frozen=True, slots=True)
class ClaBlock:
    """Signals of one 4-bit carry-lookahead block, index 0 is the LSB."""

    p: tuple[int, int, int, int]
    g: tuple[int, int, int, int]
    pg: int
    gg: int
    c: tuple[int, int, int, int, int]


class TruncationSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)
    widths: tuple[int, ...]
    comb_width: int

    @model_validator(mode="after")
    def _non_increasing(self) -> Self:
        if not self.widths:
            raise ValueError("schedule needs at least one integrator width")
        for w in (*self.widths, self.comb_width):
            if not 1 <= w <= MAX_WIDTH:
                raise ValueError(f"schedule width {w} outside 1..{MAX_WIDTH}")
        chain = (*self.widths, self.comb_width)
        for prev, nxt in zip(chain, chain[1:], strict=False):
            if nxt > prev:
                raise ValueError(f"schedule must be non-increasing: {list(chain)}")
        return self


class CicConfig(BaseModel):
    model_config = ConfigDict(frozen=True)
    n: int
    m: int = 1
    r: int
    b_in: int
    out_width: int | None = None
    schedule: TruncationSchedule | None = None

    @model_validator(mode="after")
    def _validate_bounds(self) -> Self:
        for name in ("n", "m", "r", "b_in"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        width = self.register_width
        if width > MAX_WIDTH:
            raise ValueError(
                f"N*log2(R*M) + B_in = {width} bits exceeds the {MAX_WIDTH}-bit cap"
            )
        if self.out_width is not None and not 1 <= self.out_width <= width:
            raise ValueError(
                f"out_width {self.out_width} must lie in 1..register width {width}"
            )
        if self.schedule is not None:
            if len(self.schedule.widths) != self.n:
                raise ValueError("schedule length must equal N")
            if self.schedule.widths[0] != width:
                raise ValueError(
                    f"first schedule width must be the register width {width}"
                )
        return self

    @property
    def growth(self) -> int:
        return (self.r * self.m) ** self.n

    @property
    def register_width(self) -> int:
        return growth_bits(self.n, self.m, self.r) + self.b_in

    @property
    def resolved_out_width(self) -> int:
        return self.register_width if self.out_width is None else self.out_width

    @property
    def is_reference_config(self) -> bool:
        return (self.n, self.m, self.r, self.b_in, self.resolved_out_width) == (
            5,
            1,
            16,
            5,
            16,
        )


class GrowthReport(BaseModel):
    model_config = ConfigDict(frozen=True)
    g_max: int
    b_max: int
    register_width: int

    @model_validator(mode="after")
    def _width_is_msb_plus_one(self) -> Self:
        if self.register_width != self.b_max + 1:
            raise ValueError("register_width must equal b_max + 1")
        return self


@dataclass(frozen=True)
class CycleSnapshot:
    cycle: int
    integrators: tuple[BitWord, ...]
    combs: tuple[BitWord, ...]
    phase: int


@dataclass(frozen=True)
class PipelineTrace:
    pipelined: bool
    latency: int
    snapshots: tuple[CycleSnapshot, ...] = ()


@dataclass(frozen=True)
class SampleStream:
    """Samples tagged with their rate and number format.

    Integer streams carry a two's-complement ``width``; real streams are
    scaled so that 1.0 is full scale.
    """

    samples: NDArray[np.int64] | NDArray[np.float64]
    fs: float
    fmt: StreamFormat
    width: int | None = None

    def __post_init__(self) -> None:
        if self.fs <= 0:
            raise ValueError("sample rate must be positive")
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.fmt is StreamFormat.INTEGER:
            if self.width is None or not 1 <= self.width <= MAX_WIDTH:
                raise ValueError("integer streams need a width in 1..64")
            if not np.issubdtype(self.samples.dtype, np.integer):
                raise ValueError("integer stream samples must have an integer dtype")
        elif not np.issubdtype(self.samples.dtype, np.floating):
            raise ValueError("real stream samples must have a floating dtype")

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def full_scale(self) -> float:
        if self.fmt is StreamFormat.INTEGER and self.width is not None:
            return float(1 << (self.width - 1))
        return 1.0

    def as_float(self) -> NDArray[np.float64]:
        return np.asarray(self.samples, dtype=np.float64)

    @classmethod
    def real(cls, samples: NDArray[np.float64], fs: float) -> SampleStream:
        return cls(np.asarray(samples, dtype=np.float64), fs, StreamFormat.REAL)

    @classmethod
    def integer(
        cls, samples: NDArray[np.int64], fs: float, width: int
    ) -> SampleStream:
        return cls(np.asarray(samples, dtype=np.int64), fs, StreamFormat.INTEGER, width)


class FirFilter(BaseModel):
    model_config = ConfigDict(frozen=True)
    name: str
    coeffs: tuple[float, ...]
    fs_in: float
    decim: int = 1
    coeff_width: int | None = None

    @field_validator("decim")
    @classmethod
    def _decim_supported(cls, v: int) -> int:
        if v not in {1, 2}:
            raise ValueError("decim must be 1 or 2")
        return v

    @model_validator(mode="after")
    def _linear_phase(self) -> Self:
        if not self.coeffs:
            raise ValueError("filter needs at least one coefficient")
        if self.fs_in <= 0:
            raise ValueError("fs_in must be positive")
        h = np.asarray(self.coeffs)
        tol = 1e-12 * float(np.max(np.abs(h)))
        if not np.allclose(h, h[::-1], rtol=0.0, atol=tol):
            raise ValueError(f"coefficients of {self.name} are not symmetric")
        return self

    @property
    def taps(self) -> int:
        return len(self.coeffs)

    @property
    def fs_out(self) -> float:
        return self.fs_in / self.decim

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.coeffs, dtype=np.float64)


class BandEdge(BaseModel):
    model_config = ConfigDict(frozen=True)
    name: str
    passband_hz: float
    stopband_hz: float
    fs_in_hz: float
    decim: int

    @model_validator(mode="after")
    def _edges_ordered(self) -> Self:
        if not 0 < self.passband_hz < self.stopband_hz <= self.fs_in_hz / 2:
            raise ValueError(
                f"{self.name}: need 0 < passband < stopband <= fs_in/2, got "
                f"{self.passband_hz}/{self.stopband_hz} at {self.fs_in_hz} Hz"
            )
        return self

    @property
    def transition_hz(self) -> float:
        return self.stopband_hz - self.passband_hz


class BandPlan(BaseModel):
    model_config = ConfigDict(frozen=True)
    stages: tuple[BandEdge, ...]

    @model_validator(mode="after")
    def _rates_telescope(self) -> Self:
        for prev, nxt in zip(self.stages, self.stages[1:], strict=False):
            if nxt.fs_in_hz != prev.fs_in_hz / prev.decim:
                raise ValueError(
                    f"rate mismatch between {prev.name} and {nxt.name}"
                )
        return self

    @property
    def total_decimation(self) -> int:
        total = 1
        for stage in self.stages:
            total *= stage.decim
        return total


@dataclass(frozen=True)
class SpectrumReport:
    """One-sided spectrum; ``psd_linear`` is power per bin in signal units²."""

    freqs: NDArray[np.float64]
    psd_linear: NDArray[np.float64]
    psd_db: NDArray[np.float64]
    window: WindowKind
    n_fft: int
    fs: float
    full_scale: float
    snr_db: float | None = None
    signal_bin: int | None = None
    excluded_bins: tuple[int, ...] = ()
    band: tuple[float, float] | None = None


@dataclass(frozen=True)
class ResponseTable:
    freqs: NDArray[np.float64]
    stage_gains: dict[str, NDArray[np.float64]] = field(default_factory=dict)

    @property
    def composite(self) -> NDArray[np.float64]:
        total = np.ones_like(self.freqs)
        for gain in self.stage_gains.values():
            total = total * gain
        return total

    @property
    def composite_db(self) -> NDArray[np.float64]:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(self.composite)


class ModulatorCoefficients(BaseModel):
    """Frozen loop coefficients of the 3rd-order CIFB modulator."""

    model_config = ConfigDict(frozen=True)
    order: Literal[3] = 3
    levels: int = 32
    a: tuple[float, float, float]
    b1: float
    stability_limit: float = 0.8
    divergence_threshold: float = 1.0e3

    @field_validator("levels")
    @classmethod
    def _levels_power_of_two(cls, v: int) -> int:
        if v < 2 or v & (v - 1):
            raise ValueError("quantizer levels must be a power of two >= 2")
        return v


class ModulatorSection(BaseModel):
    model_config = ConfigDict(frozen=True)
    enabled: bool = True
    coefficients: str | None = None


class CicSection(BaseModel):
    model_config = ConfigDict(frozen=True)
    n: int
    m: int = 1
    r: int
    b_in: int
    out_width: int | None = None
    schedule: tuple[int, ...] | None = None
    comb_width: int | None = None
    mode: CicMode = CicMode.TRUNCATED
    pipelined: bool = False
    adder: AdderKind = AdderKind.WRAP

    def to_config(self) -> CicConfig:
        schedule = None
        if self.schedule is not None:
            comb = self.comb_width
            if comb is None:
                comb = self.out_width if self.out_width is not None else self.schedule[-1]
            schedule = TruncationSchedule(widths=self.schedule, comb_width=comb)
        return CicConfig(
            n=self.n,
            m=self.m,
            r=self.r,
            b_in=self.b_in,
            out_width=self.out_width,
            schedule=schedule,
        )


class FirStageSection(BaseModel):
    model_config = ConfigDict(frozen=True)
    name: str
    kind: StageKind
    passband_hz: float
    stopband_hz: float
    stop_atten_db: float = 100.0
    taps: int | None = None
    decim: int = 2
    fs_in_hz: float | None = None


class AnalysisSection(BaseModel):
    model_config = ConfigDict(frozen=True)
    band_hz: tuple[float, float] = (0.0, 24_000.0)
    signal_bins: int = 3
    dc_bins: int = 2
    n_fft: int = 16_384
    settle_samples: int = 1_024


class ChainConfigFile(BaseModel):
    model_config = ConfigDict(frozen=True)
    version: Literal[1] = 1
    input_rate_hz: float
    modulator: ModulatorSection = ModulatorSection()
    cic: CicSection
    fir_stages: tuple[FirStageSection, ...] = ()
    analysis: AnalysisSection = AnalysisSection()

    @model_validator(mode="after")
    def _chain_telescopes(self) -> Self:
        self.cic.to_config()
        rate = self.input_rate_hz / self.cic.r
        previous = "cic"
        seen: set[str] = set()
        for stage in self.fir_stages:
            if stage.name in RESERVED_STAGE_NAMES or stage.name in seen:
                raise ValueError(f"stage name {stage.name!r} is reserved or repeated")
            seen.add(stage.name)
            if stage.fs_in_hz is not None and stage.fs_in_hz != rate:
                raise ValueError(
                    f"rate mismatch between {previous} (out {rate} Hz) and "
                    f"{stage.name} (declared in {stage.fs_in_hz} Hz)"
                )
            BandEdge(
                name=stage.name,
                passband_hz=stage.passband_hz,
                stopband_hz=stage.stopband_hz,
                fs_in_hz=rate,
                decim=stage.decim,
            )
            rate /= stage.decim
            previous = stage.name
        return self

    def stage_rates(self) -> dict[str, float]:
        """Input rate of every stage keyed by stage name."""
        rates = {"cic": self.input_rate_hz}
        rate = self.input_rate_hz / self.cic.r
        for stage in self.fir_stages:
            rates[stage.name] = rate
            rate /= stage.decim
        return rates

    @property
    def output_rate_hz(self) -> float:
        rate = self.input_rate_hz / self.cic.r
        for stage in self.fir_stages:
            rate /= stage.decim
        return rate
