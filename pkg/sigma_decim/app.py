"""Command-line front end: design, simulate, response, snr and verify."""

from __future__ import annotations

import argparse
import logging
import math
from pathlib import Path
import sys
from typing import TYPE_CHECKING

from pydantic import ValidationError

from .config import RunSettings
from .data.chain_config import (
    config_metadata,
    load_chain_config,
    load_modulator_coefficients,
)
from .data.stream_io import (
    read_stream,
    write_coefficients,
    write_response_csv,
    write_spectrum_csv,
    write_stream,
)
from .domain.models import (
    AdderKind,
    ChainConfigFile,
    CicMode,
    SampleStream,
    StageKind,
    StreamFormat,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DecimError,
    DesignError,
    InputDomainError,
    VerificationError,
)
from .logging_config import configure_logging
from .services.chain import build_chain, run_chain, stage_filters
from .services.cic_engine import (
    register_growth,
    resolve_schedule,
    truncation_error_bound,
    truncation_noise_dbfs,
)
from .services.presenter import DesignPresenter, SuitePresenter, snr_line
from .services.sd_source import (
    SdModulator,
    gen_impulse,
    gen_prbs,
    gen_sine,
    gen_step,
    quantize,
)
from .services.spectral import droop_report, frequency_grid, snr_report
from .services.verification import SUITES, run_suite

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

DEFAULT_OUTPUT_SAMPLES = 4096
DEFAULT_SINE = "sine:1000:0.5"


class NoSignalError(DecimError):
    """The measured tone carries no power."""


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="chain file (default: packaged reference.chain)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int, help="PRBS seed and verification RNG seed")
    common.add_argument("--pipelined", type=_parse_bool, metavar="BOOL")
    common.add_argument("--adder", choices=[a.value for a in AdderKind])
    common.add_argument("--mode", choices=[m.value for m in CicMode])
    common.add_argument("--n", type=int, help="CIC stages")
    common.add_argument("--m", type=int, help="differential delay")
    common.add_argument("--r", type=int, help="decimation factor")
    common.add_argument("--bin", type=int, dest="b_in", help="input width in bits")
    common.add_argument("--out-width", type=int, help="CIC output width in bits")
    common.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="log level"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="sigma-decim", description="Bit-exact sigma-delta decimation chain"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("design", parents=[common], help="register growth, schedule, FIR taps")

    simulate = sub.add_parser("simulate", parents=[common], help="run the chain")
    simulate.add_argument("--input", default=DEFAULT_SINE, help="impulse|step|prbs|sine:F:A|file:PATH")
    simulate.add_argument("--samples", type=int, help="input samples")
    simulate.add_argument("--stage-taps", action="store_true", help="write every stage tap")
    simulate.add_argument("--format", choices=["bin", "csv"], default="bin")

    response = sub.add_parser("response", parents=[common], help="frequency response CSV")
    response.add_argument("--stage", default="chain")
    response.add_argument("--grid", type=int, default=4096)
    response.add_argument("--fmax", type=float, help="highest grid frequency in Hz")
    response.add_argument("--log", action="store_true", help="logarithmic grid")

    snr = sub.add_parser(
        "snr",
        parents=[common],
        help="in-band SNR of a sine (full-precision CIC unless --mode is given)",
    )
    snr.add_argument("--input", default=None, help="sine:FREQ:AMP (default: coherent 0.5 FS tone)")
    snr.add_argument("--stage", default="chain")
    snr.add_argument("--samples", type=int, help="input samples")

    verify = sub.add_parser("verify", parents=[common], help="oracle equivalence suites")
    verify.add_argument("--suite", choices=sorted(SUITES), default="fast")
    return parser


def apply_overrides(config: ChainConfigFile, args: argparse.Namespace) -> ChainConfigFile:
    """Fold CLI overrides into the chain description.

    Geometry overrides (N, M, R, B_in) describe a standalone CIC: the configured
    schedule and FIR stages no longer apply and are dropped.
    """
    cic = config.cic.model_dump()
    stages = list(config.fir_stages)
    geometry = {
        key: getattr(args, key)
        for key in ("n", "m", "r", "b_in")
        if getattr(args, key, None) is not None
    }
    if geometry:
        cic.update(geometry, schedule=None, comb_width=None, out_width=None)
        if stages:
            logger.warning("CIC geometry overridden; dropping %d FIR stages", len(stages))
        stages = []
    if getattr(args, "out_width", None) is not None:
        cic.update(out_width=args.out_width, schedule=None, comb_width=None)
    if getattr(args, "mode", None) is not None:
        cic["mode"] = CicMode(args.mode)
    if getattr(args, "pipelined", None) is not None:
        cic["pipelined"] = args.pipelined
    if getattr(args, "adder", None) is not None:
        cic["adder"] = AdderKind(args.adder)
    return ChainConfigFile.model_validate(
        {**config.model_dump(), "cic": cic, "fir_stages": [s.model_dump() for s in stages]}
    )


def _out_dir(args: argparse.Namespace, settings: RunSettings) -> Path:
    out = args.out if args.out is not None else settings.out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _integer_input(
    stream: SampleStream, config: ChainConfigFile, config_path: Path | None
) -> SampleStream:
    if stream.fmt is StreamFormat.INTEGER:
        return stream
    if config.modulator.enabled and config.cic.b_in == 5:
        coefficients = load_modulator_coefficients(config, config_path)
        return SdModulator(coefficients).modulate(stream)
    return quantize(stream, config.cic.b_in)


def make_input(
    source: str,
    n: int,
    config: ChainConfigFile,
    *,
    seed: int,
    config_path: Path | None = None,
) -> SampleStream:
    """Build the CIC input stream named by ``source``.

    Real sources go through the modulator when it is enabled and matches the CIC
    input width, otherwise they are quantized straight to B_in bits.
    """
    fs = config.input_rate_hz
    width = config.cic.b_in
    kind, _, rest = source.partition(":")
    if kind == "impulse":
        return gen_impulse(n, fs, width=width)
    if kind == "step":
        return gen_step(n, fs, width=width)
    if kind == "prbs":
        return gen_prbs(n, fs, seed, width=width)
    if kind == "sine":
        try:
            freq_text, amp_text = rest.split(":")
            freq, amp = float(freq_text), float(amp_text)
        except ValueError as e:
            raise ConfigurationError(f"bad sine source {source!r}; expected sine:FREQ:AMP") from e
        return _integer_input(gen_sine(freq, amp, fs, n), config, config_path)
    if kind == "file" and rest:
        stream = read_stream(Path(rest))
        if not math.isclose(stream.fs, fs):
            raise ContractViolationError(f"{rest}: stream at {stream.fs} Hz, chain input at {fs} Hz")
        return _integer_input(stream, config, config_path)
    raise ConfigurationError(f"unknown input source {source!r}")


def cmd_design(config: ChainConfigFile, out: Path) -> list[str]:
    cic = config.cic.to_config()
    filters = stage_filters(build_chain(config))
    summary = DesignPresenter.prepare(
        register_growth(cic),
        resolve_schedule(cic, CicMode.TRUNCATED),
        truncation_error_bound(cic),
        truncation_noise_dbfs(cic, config.input_rate_hz, config.analysis.band_hz),
        filters,
    )
    for fir in filters:
        write_coefficients(out / f"coeffs_{fir.name}.csv", fir)
    return summary.lines()


def cmd_simulate(
    config: ChainConfigFile, stream: SampleStream, out: Path, *, taps: bool, fmt: str
) -> list[str]:
    result, stage_taps = run_chain(build_chain(config), stream)
    write_stream(out / f"output.{fmt}", result)
    lines = [f"output: {len(result)} samples at {result.fs:.0f} Hz -> {out / f'output.{fmt}'}"]
    if taps:
        for name, tap in stage_taps.items():
            path = out / f"tap_{name.replace('+', '_')}.{fmt}"
            write_stream(path, tap)
            lines.append(f"tap {name}: {len(tap)} samples at {tap.fs:.0f} Hz -> {path}")
    return lines


def _response_stages(config: ChainConfigFile, stage: str) -> tuple[bool, list[str]]:
    names = [s.name for s in config.fir_stages]
    if stage == "cic":
        return True, []
    if stage == "chain":
        return True, names
    if stage == "cic+droop":
        return True, [s.name for s in config.fir_stages if s.kind is StageKind.DROOP]
    if stage in names:
        return False, [stage]
    raise ConfigurationError(
        f"unknown stage {stage!r}; expected cic, chain, cic+droop or one of {names}"
    )


def cmd_response(
    config: ChainConfigFile,
    out: Path,
    *,
    stage: str,
    grid: int,
    fmax: float | None,
    log: bool,
) -> list[str]:
    with_cic, selected = _response_stages(config, stage)
    filters = [f for f in stage_filters(build_chain(config)) if f.name in selected]
    if fmax is None:
        fmax = (filters[-1].fs_in if filters else config.input_rate_hz) / 2
    table = droop_report(
        frequency_grid(fmax, grid, log=log),
        cic=config.cic.to_config() if with_cic else None,
        cic_fs=config.input_rate_hz,
        filters=filters,
    )
    path = out / f"response_{stage.replace('+', '_')}.csv"
    write_response_csv(path, table, config_metadata(config))
    return [f"response {stage}: {grid} points to {fmax:.0f} Hz -> {path}"]


def default_tone(config: ChainConfigFile) -> float:
    """A 1 kHz-ish tone on an exact FFT bin of the chain output."""
    n_fft = config.analysis.n_fft
    resolution = config.output_rate_hz / n_fft
    return round(1000.0 / resolution) * resolution


def cmd_snr(
    config: ChainConfigFile,
    out: Path,
    *,
    source: str,
    stage: str,
    samples: int | None,
    seed: int,
    config_path: Path | None,
    mode: CicMode = CicMode.FULL_PRECISION,
) -> list[str]:
    """Measure in-band SNR of a sine through the chain.

    The CIC runs in ``mode``, not the configured mode; the CLI passes full
    precision unless ``--mode`` is given.
    """
    analysis = config.analysis
    stages = build_chain(config, mode=mode)
    names = [s.name for s in stages]
    if stage != "chain" and stage not in names:
        raise ConfigurationError(f"unknown stage {stage!r}; expected chain or one of {names}")
    tap_fs = stages[-1].fs_out if stage == "chain" else stages[names.index(stage)].fs_out
    if not source.startswith("sine:"):
        raise ConfigurationError("snr needs a sine:FREQ:AMP input")
    n = samples or math.ceil(
        (analysis.n_fft + analysis.settle_samples) * config.input_rate_hz / tap_fs
    )
    stream = make_input(source, n, config, seed=seed, config_path=config_path)
    f0 = float(source.split(":")[1])
    final, taps = run_chain(stages, stream)
    measured = final if stage == "chain" else taps[stage]
    report = snr_report(
        measured,
        f0,
        analysis.band_hz,
        signal_bins=analysis.signal_bins,
        dc_bins=analysis.dc_bins,
        n_fft=min(analysis.n_fft, 1 << (len(measured).bit_length() - 1)),
    )
    path = out / f"snr_{stage}.csv"
    write_spectrum_csv(path, report, {**config_metadata(config), "cic.mode": mode.value})
    snr = report.snr_db if report.snr_db is not None else -math.inf
    if snr == -math.inf:
        raise NoSignalError(f"{snr_line(f0, snr, analysis.band_hz)}; no signal power")
    return [snr_line(f0, snr, analysis.band_hz), f"spectrum -> {path}"]


def cmd_verify(config: ChainConfigFile, *, suite: str, seed: int) -> list[str]:
    report = run_suite(suite, config, seed=seed)
    lines = SuitePresenter.lines(report)
    if not report.passed:
        names = ", ".join(check.name for check in report.failures)
        sys.stdout.writelines(line + "\n" for line in lines)
        raise VerificationError(f"{suite} suite failed: {names}")
    return lines


def _dispatch(args: argparse.Namespace, settings: RunSettings) -> list[str]:
    config = apply_overrides(load_chain_config(args.config), args)
    seed = args.seed if args.seed is not None else settings.seed
    if args.command == "verify":
        return cmd_verify(config, suite=args.suite, seed=seed)
    out = _out_dir(args, settings)
    if args.command == "design":
        return cmd_design(config, out)
    if args.command == "response":
        return cmd_response(
            config, out, stage=args.stage, grid=args.grid, fmax=args.fmax, log=args.log
        )
    total = round(config.input_rate_hz / config.output_rate_hz)
    if args.command == "snr":
        source = args.input or f"sine:{default_tone(config)}:0.5"
        return cmd_snr(
            config,
            out,
            source=source,
            stage=args.stage,
            samples=args.samples,
            seed=seed,
            config_path=args.config,
            mode=CicMode(args.mode) if args.mode else CicMode.FULL_PRECISION,
        )
    n = args.samples or DEFAULT_OUTPUT_SAMPLES * total
    stream = make_input(args.input, n, config, seed=seed, config_path=args.config)
    return cmd_simulate(config, stream, out, taps=args.stage_taps, fmt=args.format)


def _fail(prefix: str, exc: BaseException, code: int) -> int:
    message = " ".join(str(exc).split())
    sys.stderr.write(f"error[{prefix}]: {message}\n")
    return code


def run(argv: Sequence[str] | None = None, *, setup_logging: bool = True) -> int:
    """Parse ``argv``, run one command and return the process exit code."""
    args = build_parser().parse_args(argv)
    settings = RunSettings.load()
    if setup_logging:
        level = (
            logging.getLevelNamesMapping()[args.log_level]
            if args.log_level
            else settings.log_level
        )
        configure_logging(settings.log_dir, level=level)
    try:
        lines = _dispatch(args, settings)
    except VerificationError as e:
        return _fail("verify", e, EXIT_VERIFY)
    except NoSignalError as e:
        return _fail("no-signal", e, EXIT_RUNTIME)
    except InputDomainError as e:
        return _fail("runtime", e, EXIT_RUNTIME)
    except (ConfigurationError, ContractViolationError, DesignError, ValidationError) as e:
        return _fail("config", e, EXIT_CONFIG)
    except (DecimError, OSError) as e:
        logger.exception("%s failed", args.command)
        return _fail("runtime", e, EXIT_RUNTIME)
    sys.stdout.writelines(line + "\n" for line in lines)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
