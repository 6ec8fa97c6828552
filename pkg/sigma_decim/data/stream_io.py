"""Stream, coefficient and report files.

Binary stream layout (little-endian)::

    magic    4s   b"SDST"
    version  H    1
    format   B    0 = integer, 1 = real
    width    B    integer bit width, 0 for real streams
    fs       d    sample rate in Hz
    count    Q    number of samples

followed by ``count`` signed integers of 1, 2, 4 or 8 bytes (the smallest that
holds ``width``) or ``count`` float64 values. CSV files carry ``# key=value``
metadata lines before an ``index,value`` header.
"""

from __future__ import annotations

import csv
import logging
import math
import struct
from typing import TYPE_CHECKING

import numpy as np

from ..domain.models import FirFilter, SampleStream, StreamFormat
from ..errors import StreamFormatError

if TYPE_CHECKING:
    from collections.abc import Mapping
    from pathlib import Path

    from ..domain.models import ResponseTable, SpectrumReport

logger = logging.getLogger(__name__)

MAGIC = b"SDST"
VERSION = 1
HEADER = struct.Struct("<4sHBBdQ")
SPECTRUM_SCHEMA = "spectrum/1"
RESPONSE_SCHEMA = "response/1"
_FORMAT_CODES = {StreamFormat.INTEGER: 0, StreamFormat.REAL: 1}


def _int_dtype(width: int) -> np.dtype[np.signedinteger]:
    for size in (1, 2, 4, 8):
        if width <= size * 8:
            return np.dtype(f"<i{size}")
    raise StreamFormatError(f"width {width} does not fit 64-bit samples")


def write_stream_binary(path: Path, stream: SampleStream) -> None:
    width = stream.width if stream.fmt is StreamFormat.INTEGER else 0
    header = HEADER.pack(
        MAGIC, VERSION, _FORMAT_CODES[stream.fmt], width or 0, stream.fs, len(stream)
    )
    if stream.fmt is StreamFormat.INTEGER and stream.width is not None:
        payload = np.asarray(stream.samples).astype(_int_dtype(stream.width)).tobytes()
    else:
        payload = stream.as_float().astype("<f8").tobytes()
    path.write_bytes(header + payload)


def read_stream_binary(path: Path) -> SampleStream:
    """Read a packed stream file.

    Raises:
        StreamFormatError: wrong magic, unknown version or format, truncated data.
    """
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise StreamFormatError(f"{path}: shorter than the stream header")
    magic, version, code, width, fs, count = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise StreamFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise StreamFormatError(f"{path}: unsupported version {version}")
    body = memoryview(data)[HEADER.size :]
    if code == _FORMAT_CODES[StreamFormat.INTEGER]:
        dtype = _int_dtype(width)
    elif code == _FORMAT_CODES[StreamFormat.REAL]:
        dtype = np.dtype("<f8")
    else:
        raise StreamFormatError(f"{path}: unknown format code {code}")
    if len(body) != count * dtype.itemsize:
        raise StreamFormatError(
            f"{path}: expected {count} samples, payload holds {len(body) // dtype.itemsize}"
        )
    samples = np.frombuffer(body, dtype=dtype)
    if code == _FORMAT_CODES[StreamFormat.INTEGER]:
        return SampleStream.integer(samples.astype(np.int64), fs, width)
    return SampleStream.real(samples.astype(np.float64), fs)


def _metadata_lines(lines: Mapping[str, object]) -> list[str]:
    return [f"# {key}={value}\n" for key, value in lines.items()]


def write_stream_csv(
    path: Path, stream: SampleStream, metadata: Mapping[str, str] | None = None
) -> None:
    header: dict[str, object] = {
        "format": stream.fmt.value,
        "fs": repr(stream.fs),
        "count": len(stream),
    }
    if stream.width is not None:
        header["width"] = stream.width
    header.update(metadata or {})
    with path.open("w", encoding="utf-8", newline="") as f:
        f.writelines(_metadata_lines(header))
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["index", "value"])
        if stream.fmt is StreamFormat.INTEGER:
            writer.writerows(enumerate(np.asarray(stream.samples).tolist()))
        else:
            writer.writerows((i, repr(v)) for i, v in enumerate(stream.as_float().tolist()))


def _read_csv(path: Path) -> tuple[dict[str, str], list[list[str]]]:
    meta: dict[str, str] = {}
    rows: list[list[str]] = []
    with path.open(encoding="utf-8", newline="") as f:
        body: list[str] = []
        for line in f:
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
            else:
                body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None:
        raise StreamFormatError(f"{path}: missing column header")
    rows.extend(row for row in reader if row)
    return meta, rows


def read_stream_csv(path: Path) -> SampleStream:
    meta, rows = _read_csv(path)
    try:
        fs = float(meta["fs"])
        fmt = StreamFormat(meta.get("format", StreamFormat.REAL.value))
    except (KeyError, ValueError) as e:
        raise StreamFormatError(f"{path}: missing or invalid fs/format metadata") from e
    if fmt is StreamFormat.INTEGER and "width" not in meta:
        raise StreamFormatError(f"{path}: integer stream without width")
    try:
        values = [row[1] for row in rows]
        if fmt is StreamFormat.INTEGER:
            samples = np.array([int(v) for v in values], dtype=np.int64)
            return SampleStream.integer(samples, fs, int(meta["width"]))
        return SampleStream.real(np.array([float(v) for v in values]), fs)
    except (IndexError, ValueError) as e:
        raise StreamFormatError(f"{path}: malformed sample row ({e})") from e


def write_stream(path: Path, stream: SampleStream) -> None:
    """Write by suffix: ``.csv`` as text, anything else packed binary."""
    if path.suffix.lower() == ".csv":
        write_stream_csv(path, stream)
    else:
        write_stream_binary(path, stream)
    logger.debug("Wrote %d samples to %s", len(stream), path)


def read_stream(path: Path) -> SampleStream:
    if path.suffix.lower() == ".csv":
        return read_stream_csv(path)
    return read_stream_binary(path)


def write_coefficients(path: Path, fir: FirFilter) -> None:
    header: dict[str, object] = {
        "name": fir.name,
        "fs_in": repr(fir.fs_in),
        "decim": fir.decim,
        "taps": fir.taps,
    }
    if fir.coeff_width is not None:
        header["coeff_width"] = fir.coeff_width
    with path.open("w", encoding="utf-8", newline="") as f:
        f.writelines(_metadata_lines(header))
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["index", "value"])
        writer.writerows((i, repr(c)) for i, c in enumerate(fir.coeffs))


def read_coefficients(path: Path) -> FirFilter:
    meta, rows = _read_csv(path)
    try:
        return FirFilter(
            name=meta.get("name", path.stem),
            coeffs=tuple(float(row[1]) for row in rows),
            fs_in=float(meta["fs_in"]),
            decim=int(meta.get("decim", "1")),
            coeff_width=int(meta["coeff_width"]) if "coeff_width" in meta else None,
        )
    except (KeyError, ValueError, IndexError) as e:
        raise StreamFormatError(f"{path}: malformed coefficient file ({e})") from e


def _db_text(value: float) -> str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return f"{value:.6f}"


def write_spectrum_csv(
    path: Path, report: SpectrumReport, metadata: Mapping[str, str] | None = None
) -> None:
    """``freq_hz,psd_db`` rows; zero-power bins are written as ``-inf``."""
    header: dict[str, object] = {
        "schema": SPECTRUM_SCHEMA,
        "window": report.window.value,
        "n_fft": report.n_fft,
        "fs": repr(report.fs),
    }
    if report.snr_db is not None:
        header["snr_db"] = _db_text(report.snr_db)
        header["signal_bin"] = report.signal_bin
    if report.band is not None:
        header["band_hz"] = f"{report.band[0]}-{report.band[1]}"
    header.update(metadata or {})
    with path.open("w", encoding="utf-8", newline="") as f:
        f.writelines(_metadata_lines(header))
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["freq_hz", "psd_db"])
        writer.writerows(
            (f"{freq:.6f}", _db_text(db))
            for freq, db in zip(report.freqs.tolist(), report.psd_db.tolist(), strict=True)
        )


def write_response_csv(
    path: Path, table: ResponseTable, metadata: Mapping[str, str] | None = None
) -> None:
    """``freq_hz,gain_db`` plus one dB column per stage."""
    names = list(table.stage_gains)
    header: dict[str, object] = {"schema": RESPONSE_SCHEMA, "stages": "+".join(names)}
    header.update(metadata or {})
    columns = [table.composite_db.tolist()]
    with np.errstate(divide="ignore"):
        columns.extend(
            (20.0 * np.log10(table.stage_gains[name])).tolist() for name in names
        )
    with path.open("w", encoding="utf-8", newline="") as f:
        f.writelines(_metadata_lines(header))
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["freq_hz", "gain_db", *names])
        for i, freq in enumerate(table.freqs.tolist()):
            writer.writerow([f"{freq:.6f}", *(_db_text(col[i]) for col in columns)])
