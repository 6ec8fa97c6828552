"""Stage wrappers and the sequential decimation chain."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import time
from typing import TYPE_CHECKING, Protocol

import numpy as np

from ..domain.models import AdderKind, CicConfig, CicMode, FirFilter, SampleStream
from ..errors import ConfigurationError, ContractViolationError
from .cic_engine import cic_to_real, run_cic
from .fir_stages import apply_fir, design_stage

if TYPE_CHECKING:
    from collections.abc import Sequence

    from ..domain.models import ChainConfigFile

logger = logging.getLogger(__name__)


class ChainStage(Protocol):
    @property
    def name(self) -> str: ...

    @property
    def fs_in(self) -> float: ...

    @property
    def fs_out(self) -> float: ...

    def process(self, stream: SampleStream) -> tuple[SampleStream, SampleStream]:
        """Return (stream for the next stage, stream recorded at this tap)."""
        ...


@dataclass(frozen=True)
class CicStage:
    """Bit-exact CIC; the tap keeps the raw integer output, the chain sees unity scale."""

    cfg: CicConfig
    fs_in: float
    mode: CicMode = CicMode.TRUNCATED
    pipelined: bool = False
    adder: AdderKind = AdderKind.WRAP
    name: str = "cic"

    @property
    def fs_out(self) -> float:
        return self.fs_in / self.cfg.r

    def process(self, stream: SampleStream) -> tuple[SampleStream, SampleStream]:
        raw, _ = run_cic(
            self.cfg,
            stream,
            mode=self.mode,
            pipelined=self.pipelined,
            adder=self.adder,
        )
        return cic_to_real(raw, self.cfg), raw


@dataclass(frozen=True)
class FirStage:
    fir: FirFilter

    @property
    def name(self) -> str:
        return self.fir.name

    @property
    def fs_in(self) -> float:
        return self.fir.fs_in

    @property
    def fs_out(self) -> float:
        return self.fir.fs_out

    def process(self, stream: SampleStream) -> tuple[SampleStream, SampleStream]:
        out = apply_fir(self.fir, stream)
        return out, out


def check_telescoping(stages: Sequence[ChainStage]) -> None:
    """Raise ConfigurationError naming the first pair whose rates disagree."""
    for prev, nxt in zip(stages, stages[1:], strict=False):
        if not np.isclose(prev.fs_out, nxt.fs_in, rtol=1e-12, atol=0.0):
            raise ConfigurationError(
                f"rate mismatch between {prev.name} (out {prev.fs_out} Hz) and "
                f"{nxt.name} (in {nxt.fs_in} Hz)"
            )


def run_chain(
    stages: Sequence[ChainStage], stream: SampleStream
) -> tuple[SampleStream, dict[str, SampleStream]]:
    """Run ``stream`` through every stage in order.

    Returns:
        The final stream and every stage's tap keyed by stage name.

    Raises:
        ConfigurationError: adjacent stage rates do not telescope.
        ContractViolationError: the input rate differs from the first stage.
    """
    if not stages:
        raise ConfigurationError("chain has no stages")
    check_telescoping(stages)
    if not np.isclose(stream.fs, stages[0].fs_in, rtol=1e-12, atol=0.0):
        raise ContractViolationError(
            f"input at {stream.fs} Hz, {stages[0].name} expects {stages[0].fs_in} Hz"
        )
    taps: dict[str, SampleStream] = {}
    current = stream
    for stage in stages:
        start = time.perf_counter()
        current, taps[stage.name] = stage.process(current)
        logger.debug(
            "%s: %d samples at %.0f Hz in %.3f s",
            stage.name,
            len(current),
            current.fs,
            time.perf_counter() - start,
        )
    logger.info(
        "chain: %d -> %d samples across %d stages", len(stream), len(current), len(stages)
    )
    return current, taps


def build_chain(
    config: ChainConfigFile,
    *,
    mode: CicMode | None = None,
    pipelined: bool | None = None,
    adder: AdderKind | None = None,
) -> list[ChainStage]:
    """Design every FIR stage and assemble the chain described by ``config``.

    Keyword overrides replace the configured CIC execution settings.
    """
    cic_section = config.cic
    cic = cic_section.to_config()
    stages: list[ChainStage] = [
        CicStage(
            cfg=cic,
            fs_in=config.input_rate_hz,
            mode=mode if mode is not None else cic_section.mode,
            pipelined=pipelined if pipelined is not None else cic_section.pipelined,
            adder=adder if adder is not None else cic_section.adder,
        )
    ]
    rates = config.stage_rates()
    stages.extend(
        FirStage(
            design_stage(
                section, rates[section.name], cic=cic, cic_fs=config.input_rate_hz
            )
        )
        for section in config.fir_stages
    )
    return stages


def stage_filters(stages: Sequence[ChainStage]) -> list[FirFilter]:
    return [stage.fir for stage in stages if isinstance(stage, FirStage)]
