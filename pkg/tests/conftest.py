"""Shared fixtures: WAV byte builders and the finite-difference gradient checker."""

from __future__ import annotations

import struct
from typing import Callable

import numpy as np
import pytest

from spoofguard.neuralnet.tensor import Tensor


def riff_chunk(chunk_id: bytes, body: bytes) -> bytes:
    """One RIFF chunk with its pad byte."""
    return struct.pack("<4sI", chunk_id, len(body)) + body + (b"\x00" if len(body) % 2 else b"")


def fmt_body(format_tag: int = 1, channels: int = 1, rate: int = 16000, bits: int = 16) -> bytes:
    """A plain 16-byte `fmt ` body."""
    block_align = channels * bits // 8
    return struct.pack("<HHIIHH", format_tag, channels, rate, rate * block_align, block_align, bits)


def wave_file(*chunks: bytes) -> bytes:
    """Wrap chunks into a RIFF/WAVE container."""
    body = b"WAVE" + b"".join(chunks)
    return struct.pack("<4sI", b"RIFF", len(body)) + body


def pcm16_wave(samples: list[int], channels: int = 1, rate: int = 16000) -> bytes:
    """A PCM16 file from interleaved integer samples."""
    data = struct.pack(f"<{len(samples)}h", *samples)
    return wave_file(riff_chunk(b"fmt ", fmt_body(1, channels, rate, 16)), riff_chunk(b"data", data))


def check_gradients(
    operation: Callable[..., Tensor],
    arrays: list[np.ndarray],
    rng: np.random.Generator,
    rtol: float = 1e-4,
    atol: float = 1e-7,
    eps: float = 1e-6,
) -> None:
    """Compare backward() against central differences of sum(op(*inputs) * upstream).

    Everything runs in float64 through the same code path as float32 training.
    """
    tensors = [Tensor(np.array(a, dtype=np.float64), requires_grad=True, dtype=np.float64) for a in arrays]
    out = operation(*tensors)
    upstream = np.asarray(rng.standard_normal(out.shape))
    out.backward(upstream)
    analytic = [t.grad.copy() for t in tensors]

    def objective() -> float:
        return float(np.sum(operation(*tensors).data * upstream))

    for tensor, expected in zip(tensors, analytic):
        numeric = np.zeros_like(tensor.data)
        for index in np.ndindex(tensor.data.shape):
            original = tensor.data[index]
            tensor.data[index] = original + eps
            plus = objective()
            tensor.data[index] = original - eps
            minus = objective()
            tensor.data[index] = original
            numeric[index] = (plus - minus) / (2 * eps)

        scale = max(1.0, float(np.max(np.abs(numeric))))
        np.testing.assert_allclose(expected, numeric, rtol=rtol, atol=atol * scale)


@pytest.fixture
def rng() -> np.random.Generator:
    """A fixed-seed generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def write_wave(tmp_path):
    """Write raw WAV bytes to a temporary file and return its path."""

    def write(payload: bytes, name: str = "clip.wav"):
        path = tmp_path / name
        path.write_bytes(payload)
        return path

    return write
