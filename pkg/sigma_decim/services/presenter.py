from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
import math
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ..domain.models import FirFilter, GrowthReport, TruncationSchedule
    from .verification import SuiteReport


def _db(value: float) -> str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return f"{value:.2f}"


@dataclass(frozen=True)
class DesignSummary:
    growth_text: str
    width_text: str
    schedule_text: str
    bound_text: str
    noise_text: str
    stage_lines: list[str]

    def lines(self) -> list[str]:
        return [
            self.growth_text,
            self.width_text,
            self.schedule_text,
            self.bound_text,
            self.noise_text,
            *self.stage_lines,
        ]


class DesignPresenter:
    @staticmethod
    def prepare(
        growth: GrowthReport,
        schedule: TruncationSchedule,
        bound: int,
        noise_dbfs: float,
        filters: Iterable[FirFilter],
    ) -> DesignSummary:
        widths = "/".join(str(w) for w in schedule.widths)
        return DesignSummary(
            growth_text=f"g_max: {growth.g_max}",
            width_text=f"register width: {growth.register_width} (b_max {growth.b_max})",
            schedule_text=f"schedule: {widths} comb {schedule.comb_width}",
            bound_text=f"truncation bound: {bound} LSB",
            noise_text=f"truncation noise: {_db(noise_dbfs)} dBFS in band",
            stage_lines=[
                f"{fir.name}: {fir.taps} taps, {fir.fs_in:.0f} Hz -> {fir.fs_out:.0f} Hz"
                for fir in filters
            ],
        )


class SuitePresenter:
    @staticmethod
    def lines(report: SuiteReport) -> list[str]:
        out = [
            f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail} "
            f"({check.seconds:.2f} s)"
            for check in report.checks
        ]
        passed = len(report.checks) - len(report.failures)
        out.append(f"{report.suite}: {passed}/{len(report.checks)} checks passed")
        return out


def snr_line(f0: float, snr_db: float, band: tuple[float, float]) -> str:
    return f"snr: {_db(snr_db)} dB at {f0:.3f} Hz, band {band[0]:.0f}-{band[1]:.0f} Hz"
