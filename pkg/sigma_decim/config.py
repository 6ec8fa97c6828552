"""Runtime settings read from the environment.

An optional ``.env`` file in the working directory is loaded first; variables
already set in the environment win.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import os
from pathlib import Path

from dotenv import load_dotenv

_PREFIX = "SIGMA_DECIM_"
_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


@dataclass(frozen=True)
class RunSettings:
    """Defaults the CLI falls back to when a flag is not given."""

    log_dir: Path | None = None
    log_level: int = logging.INFO
    out_dir: Path = Path("out")
    seed: int = 1

    @classmethod
    def load(cls, env_file: Path | None = None) -> RunSettings:
        """Build settings from ``SIGMA_DECIM_*`` variables, ignoring invalid values."""
        load_dotenv(env_file, override=False)
        defaults = cls()
        log_dir = os.environ.get(f"{_PREFIX}LOG_DIR")
        level = _LEVELS.get(
            os.environ.get(f"{_PREFIX}LOG_LEVEL", "").upper(), defaults.log_level
        )
        out_dir = os.environ.get(f"{_PREFIX}OUT_DIR")
        seed_text = os.environ.get(f"{_PREFIX}SEED", "")
        seed = int(seed_text) if seed_text.isdigit() and int(seed_text) > 0 else defaults.seed
        return cls(
            log_dir=Path(log_dir) if log_dir else None,
            log_level=level,
            out_dir=Path(out_dir) if out_dir else defaults.out_dir,
            seed=seed,
        )
