"""Services package.

Arithmetic, CIC, FIR, modulator and spectral services plus the chain runner.
"""

from .bitvec_arith import ClaAdder, WrapAdder, cla_add, truncate_keep_msbs, wrap_add
from .chain import CicStage, FirStage, build_chain, run_chain
from .cic_engine import (
    CicDecimator,
    default_schedule,
    impulse_response,
    pipeline_latency,
    reference_fir_decimate,
    register_growth,
    run_cic,
)
from .fir_stages import apply_fir, design_droop_correction, design_halfband
from .sd_source import SdModulator, gen_impulse, gen_prbs, gen_sine, gen_step
from .spectral import cic_magnitude, droop_report, measure_snr, psd

__all__ = [
    "CicDecimator",
    "CicStage",
    "ClaAdder",
    "FirStage",
    "SdModulator",
    "WrapAdder",
    "apply_fir",
    "build_chain",
    "cic_magnitude",
    "cla_add",
    "default_schedule",
    "design_droop_correction",
    "design_halfband",
    "droop_report",
    "gen_impulse",
    "gen_prbs",
    "gen_sine",
    "gen_step",
    "impulse_response",
    "measure_snr",
    "pipeline_latency",
    "psd",
    "reference_fir_decimate",
    "register_growth",
    "run_chain",
    "run_cic",
    "truncate_keep_msbs",
    "wrap_add",
]
