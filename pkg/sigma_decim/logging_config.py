"""Logging setup for the sigma-decim command line.

Console output goes to stderr so stdout stays clean for reports; a rotating
file handler keeps a persistent run log.
"""

from __future__ import annotations

import logging
from logging import INFO, Formatter, basicConfig, getLogger
from logging.handlers import RotatingFileHandler
from pathlib import Path
import platform
import sys

APP_NAME = "SigmaDecim"
DEFAULT_LOG_FILENAME = "sigma-decim.log"
_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def default_log_dir() -> Path:
    home = Path.home()
    if platform.system() == "Darwin":
        return home / "Library" / "Logs" / APP_NAME
    return home / ".local" / "share" / APP_NAME / "logs"


def configure_logging(log_dir: Path | None = None, *, level: int = INFO) -> Path:
    """Configure the root logger and attach one RotatingFileHandler per log file.

    Returns the path to the log file used.
    """
    basicConfig(level=level, format=_FORMAT, datefmt="%H:%M:%S", stream=sys.stderr)

    target_dir = default_log_dir() if log_dir is None else log_dir
    target_dir.mkdir(parents=True, exist_ok=True)
    log_path = target_dir / DEFAULT_LOG_FILENAME

    root = getLogger()
    for h in list(root.handlers):
        if isinstance(h, RotatingFileHandler) and h.baseFilename == str(log_path):
            return log_path

    handler = RotatingFileHandler(str(log_path), maxBytes=5_000_000, backupCount=3)
    handler.setLevel(level)
    handler.setFormatter(Formatter(_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    root.addHandler(handler)
    root.setLevel(min(root.level, level) if root.level else level)

    logging.getLogger(__name__).debug("Logging to %s", log_path)
    return log_path
