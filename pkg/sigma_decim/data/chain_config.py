"""Loading of chain description files and frozen modulator coefficients.

Chain files are versioned JSON documents. The canonical ``reference.chain`` and its
modulator coefficients ship as package data; coefficient references in a chain
file on disk resolve relative to that file's directory.
"""

from __future__ import annotations

from importlib import resources
import json
import logging
from pathlib import Path

from flatten_dict import flatten  # type: ignore[import-untyped]
from pydantic import ValidationError

from ..domain.models import ChainConfigFile, ModulatorCoefficients
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)

REFERENCE_CHAIN = "reference.chain"
DEFAULT_MODULATOR = "sd_modulator.json"


def _read_package_text(name: str) -> str:
    resource = resources.files("sigma_decim") / "configs" / name
    return resource.read_text(encoding="utf-8")


def _parse_json(text: str, source: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        logger.exception("Invalid JSON in %s", source)
        raise ConfigurationError(f"{source}: invalid JSON ({e.msg} at line {e.lineno})") from e


def _first_error(source: str, exc: ValidationError) -> ConfigurationError:
    err = exc.errors()[0]
    where = ".".join(str(part) for part in err["loc"]) or "document"
    return ConfigurationError(f"{source}: {where}: {err['msg']}")


def load_chain_config(path: Path | None = None) -> ChainConfigFile:
    """Parse and validate a chain file, or the packaged reference configuration.

    Raises:
        ConfigurationError: unreadable file, bad JSON, or a violated constraint
            (the message names the failing field).
    """
    if path is None:
        source = REFERENCE_CHAIN
        text = _read_package_text(REFERENCE_CHAIN)
    else:
        source = str(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"{source}: cannot read ({e.strerror})") from e
    try:
        config = ChainConfigFile.model_validate(_parse_json(text, source))
    except ValidationError as e:
        raise _first_error(source, e) from e
    logger.info(
        "Loaded %s: %d FIR stages, %.0f Hz -> %.0f Hz",
        source,
        len(config.fir_stages),
        config.input_rate_hz,
        config.output_rate_hz,
    )
    return config


def load_modulator_coefficients(
    config: ChainConfigFile, chain_path: Path | None = None
) -> ModulatorCoefficients:
    """Resolve the chain's coefficient reference to frozen loop coefficients."""
    ref = config.modulator.coefficients or DEFAULT_MODULATOR
    if chain_path is None:
        source = ref
        text = _read_package_text(ref)
    else:
        target = Path(ref)
        if not target.is_absolute():
            target = chain_path.parent / target
        source = str(target)
        try:
            text = target.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"{source}: cannot read ({e.strerror})") from e
    try:
        return ModulatorCoefficients.model_validate(_parse_json(text, source))
    except ValidationError as e:
        raise _first_error(source, e) from e


def default_modulator() -> ModulatorCoefficients:
    return ModulatorCoefficients.model_validate(
        _parse_json(_read_package_text(DEFAULT_MODULATOR), DEFAULT_MODULATOR)
    )


def config_metadata(config: ChainConfigFile) -> dict[str, str]:
    """Flatten the configuration into dot-joined keys for report headers."""
    flat: dict[str, object] = flatten(
        config.model_dump(mode="json"), reducer="dot", enumerate_types=(list,)
    )
    return {key: str(value) for key, value in sorted(flat.items())}
