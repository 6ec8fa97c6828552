"""Chain description files and stream/report file formats."""

from sigma_decim.data.chain_config import load_chain_config, load_modulator_coefficients
from sigma_decim.data.stream_io import read_stream, write_stream

__all__ = [
    "load_chain_config",
    "load_modulator_coefficients",
    "read_stream",
    "write_stream",
]
