"""Waveform ingestion: RIFF/WAVE decoding into a canonical mono buffer.

The reader walks the chunk list, skipping chunks it does not know, and accepts
PCM16 and IEEE-float32 data with one or two channels. Stereo is averaged to mono
and no resampling is performed: the native rate travels with the samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from spoofguard.errors import AudioFormatError
from spoofguard.helpers.config import PCM16_SCALE
from spoofguard.helpers.file_utils import write_bytes_atomic

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

RIFF_HEADER = struct.Struct("<4sI4s")
CHUNK_HEADER = struct.Struct("<4sI")
FMT_BODY = struct.Struct("<HHIIHH")


@dataclass(frozen=True)
class AudioBuffer:
    """Mono waveform with amplitudes in [-1, 1] and its sample rate."""

    samples: np.ndarray
    sample_rate_hz: int
    source_id: str = ""

    def __post_init__(self) -> None:
        """Freeze the sample array and check the buffer invariants."""
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            message = "AudioBuffer needs a non-empty 1-D sample array"
            raise ValueError(message)

        if not np.all(np.isfinite(samples)) or np.max(np.abs(samples)) > 1.0:
            message = "AudioBuffer samples must be finite and within [-1, 1]"
            raise ValueError(message)

        if self.sample_rate_hz <= 0:
            message = f"sample_rate_hz must be positive, got {self.sample_rate_hz}"
            raise ValueError(message)

        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        """Length of the buffer in seconds."""
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class _WaveFormat:
    format_tag: int
    channels: int
    sample_rate_hz: int
    block_align: int
    bits_per_sample: int


def read_wav(path: str | Path) -> AudioBuffer:
    """Decode a RIFF/WAVE file into a mono `AudioBuffer`."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as error:
        raise AudioFormatError(str(path), 0, f"unreadable file ({error})") from error

    if len(payload) < RIFF_HEADER.size:
        raise AudioFormatError(str(path), 0, "file too short for a RIFF header")

    riff, _, wave = RIFF_HEADER.unpack_from(payload, 0)
    if riff != b"RIFF":
        raise AudioFormatError(str(path), 0, f"bad magic {riff!r}, expected b'RIFF'")
    if wave != b"WAVE":
        raise AudioFormatError(str(path), 8, f"bad form type {wave!r}, expected b'WAVE'")

    wave_format = None
    offset = RIFF_HEADER.size
    while offset + CHUNK_HEADER.size <= len(payload):
        chunk_id, chunk_size = CHUNK_HEADER.unpack_from(payload, offset)
        body_offset = offset + CHUNK_HEADER.size

        if chunk_id == b"fmt ":
            wave_format = _parse_fmt(payload, body_offset, chunk_size, str(path))
        elif chunk_id == b"data":
            if wave_format is None:
                raise AudioFormatError(str(path), offset, "'data' chunk before 'fmt '")
            if body_offset + chunk_size > len(payload):
                reason = (
                    f"truncated data chunk: declares {chunk_size} bytes, "
                    f"{len(payload) - body_offset} present"
                )
                raise AudioFormatError(str(path), body_offset, reason)

            body = payload[body_offset:body_offset + chunk_size]
            samples = _decode_samples(body, wave_format, body_offset, str(path))
            return AudioBuffer(samples, wave_format.sample_rate_hz, path.stem)

        # Chunks are word aligned.
        offset = body_offset + chunk_size + (chunk_size & 1)

    raise AudioFormatError(str(path), offset, "no 'data' chunk found")


def _parse_fmt(payload: bytes, offset: int, size: int, path: str) -> _WaveFormat:
    """Parse and validate the `fmt ` chunk body."""
    if size < FMT_BODY.size or offset + FMT_BODY.size > len(payload):
        raise AudioFormatError(path, offset, "truncated 'fmt ' chunk")

    tag, channels, rate, _, block_align, bits = FMT_BODY.unpack_from(payload, offset)
    if tag == WAVE_FORMAT_EXTENSIBLE:
        # cbSize, valid bits, channel mask, then the sub-format GUID.
        if size < 40:
            raise AudioFormatError(path, offset, "truncated WAVE_FORMAT_EXTENSIBLE")
        (tag,) = struct.unpack_from("<H", payload, offset + 24)

    if tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
        raise AudioFormatError(path, offset, f"unsupported encoding tag 0x{tag:04X}")
    if tag == WAVE_FORMAT_PCM and bits != 16:
        raise AudioFormatError(path, offset + 14, f"unsupported PCM bit depth {bits}")
    if tag == WAVE_FORMAT_IEEE_FLOAT and bits != 32:
        raise AudioFormatError(path, offset + 14, f"unsupported float bit depth {bits}")
    if channels not in (1, 2):
        raise AudioFormatError(path, offset + 2, f"unsupported channel count {channels}")
    if rate == 0:
        raise AudioFormatError(path, offset + 4, "sample rate is zero")
    if block_align != channels * bits // 8:
        raise AudioFormatError(path, offset + 12, f"inconsistent block align {block_align}")

    return _WaveFormat(tag, channels, rate, block_align, bits)


def _decode_samples(
    body: bytes,
    wave_format: _WaveFormat,
    offset: int,
    path: str,
) -> np.ndarray:
    """Convert the `data` chunk body to mono float64 samples."""
    if len(body) == 0:
        raise AudioFormatError(path, offset, "empty data chunk")
    if len(body) % wave_format.block_align:
        reason = f"truncated data chunk: {len(body)} bytes is not a whole number of frames"
        raise AudioFormatError(path, offset + len(body), reason)

    if wave_format.format_tag == WAVE_FORMAT_PCM:
        samples = np.frombuffer(body, dtype="<i2").astype(np.float64) / PCM16_SCALE
    else:
        samples = np.frombuffer(body, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise AudioFormatError(path, offset + 4 * bad, "non-finite float sample")
        samples = np.clip(samples, -1.0, 1.0)

    frames = samples.reshape(-1, wave_format.channels)
    return frames.mean(axis=1) if wave_format.channels == 2 else frames[:, 0]


def encode_wav(buf: AudioBuffer) -> bytes:
    """Serialize a buffer as a mono PCM16 RIFF/WAVE byte string."""
    quantized = np.clip(np.round(buf.samples * PCM16_SCALE), -32768, 32767)
    data = quantized.astype("<i2").tobytes()

    fmt = FMT_BODY.pack(WAVE_FORMAT_PCM, 1, buf.sample_rate_hz, buf.sample_rate_hz * 2, 2, 16)
    chunks = (
        CHUNK_HEADER.pack(b"fmt ", len(fmt)) + fmt
        + CHUNK_HEADER.pack(b"data", len(data)) + data
    )
    return RIFF_HEADER.pack(b"RIFF", 4 + len(chunks), b"WAVE") + chunks


def write_wav(buf: AudioBuffer, path: str | Path) -> None:
    """Write a buffer as mono PCM16."""
    write_bytes_atomic(path, encode_wav(buf))


def peak_normalize(buf: AudioBuffer) -> AudioBuffer:
    """Scale so the largest absolute sample is exactly 1; silence is returned as is."""
    peak_index = int(np.argmax(np.abs(buf.samples)))
    peak = abs(buf.samples[peak_index])
    if peak == 0.0:
        return buf

    scaled = buf.samples / peak
    # Division can land one ulp away from 1.0.
    scaled[peak_index] = np.sign(buf.samples[peak_index])
    return AudioBuffer(np.clip(scaled, -1.0, 1.0), buf.sample_rate_hz, buf.source_id)
