"""MELS v1 feature files.

Layout (little endian): magic `MELS`, u32 version, u32 rows, u32 cols,
rows * cols float32 values row-major, u32 metadata length, then UTF-8
`key=value` lines describing the front-end configuration.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from spoofguard.errors import FeatureFileError
from spoofguard.features.types import FrontEndConfig, MelSpectrogram
from spoofguard.helpers.file_utils import write_bytes_atomic

MAGIC = b"MELS"
VERSION = 1
HEADER = struct.Struct("<4sIII")
LENGTH = struct.Struct("<I")

_INT_FIELDS = ("n_fft", "hop", "n_mels", "out_height", "out_width")
_FLOAT_FIELDS = ("fmin_hz", "fmax_hz", "db_floor")


def _encode_metadata(spectrogram: MelSpectrogram) -> bytes:
    entries = dict(spectrogram.config.as_dict())
    entries["sample_rate_hz"] = spectrogram.sample_rate_hz
    entries["source_id"] = spectrogram.source_id
    entries["units"] = spectrogram.units
    lines = [f"{key}={'none' if value is None else value!s}" for key, value in entries.items()]
    return "\n".join(lines).encode("utf-8")


def _decode_metadata(block: bytes) -> dict[str, str]:
    metadata = {}
    for line in block.decode("utf-8").splitlines():
        key, separator, value = line.partition("=")
        if not separator:
            message = f"malformed metadata line {line!r}"
            raise FeatureFileError(message)
        metadata[key] = value

    return metadata


def encode_mels(spectrogram: MelSpectrogram) -> bytes:
    """Serialize a spectrogram to MELS v1 bytes."""
    rows, cols = spectrogram.shape
    data = spectrogram.values.astype("<f4").tobytes()
    metadata = _encode_metadata(spectrogram)
    return HEADER.pack(MAGIC, VERSION, rows, cols) + data + LENGTH.pack(len(metadata)) + metadata


def decode_mels(payload: bytes, source: str = "<bytes>") -> MelSpectrogram:
    """Parse MELS v1 bytes."""
    if len(payload) < HEADER.size:
        message = f"{source}: truncated MELS header"
        raise FeatureFileError(message)

    magic, version, rows, cols = HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        message = f"{source}: bad magic {magic!r}, expected {MAGIC!r}"
        raise FeatureFileError(message)
    if version != VERSION:
        message = f"{source}: unsupported MELS version {version}"
        raise FeatureFileError(message)

    data_end = HEADER.size + 4 * rows * cols
    if len(payload) < data_end + LENGTH.size:
        message = f"{source}: truncated MELS data ({rows}x{cols} declared)"
        raise FeatureFileError(message)

    values = np.frombuffer(payload, dtype="<f4", count=rows * cols, offset=HEADER.size)
    (meta_length,) = LENGTH.unpack_from(payload, data_end)
    meta_start = data_end + LENGTH.size
    if len(payload) != meta_start + meta_length:
        message = f"{source}: metadata block length does not match file size"
        raise FeatureFileError(message)

    metadata = _decode_metadata(payload[meta_start:])
    try:
        config = FrontEndConfig(
            **{name: int(metadata[name]) for name in _INT_FIELDS},
            **{
                name: None if metadata[name] == "none" else float(metadata[name])
                for name in _FLOAT_FIELDS
            },
        )
        sample_rate_hz = int(metadata["sample_rate_hz"])
    except (KeyError, ValueError) as error:
        message = f"{source}: incomplete front-end metadata ({error})"
        raise FeatureFileError(message) from error

    return MelSpectrogram(
        values=values.reshape(rows, cols),
        config=config,
        sample_rate_hz=sample_rate_hz,
        source_id=metadata.get("source_id", ""),
        units=metadata.get("units", "dB"),
    )


def save_mels(spectrogram: MelSpectrogram, path: str | Path) -> None:
    """Write a MELS v1 file."""
    write_bytes_atomic(path, encode_mels(spectrogram))


def load_mels(path: str | Path) -> MelSpectrogram:
    """Read a MELS v1 file."""
    return decode_mels(Path(path).read_bytes(), source=str(path))
