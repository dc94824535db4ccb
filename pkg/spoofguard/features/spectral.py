"""Spectral building blocks of the Mel front-end.

Mel scale conversions, the periodic Hann window, framing, a radix-2 FFT and the
triangular Mel filterbank. Everything works on float64 numpy arrays and is pure.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from spoofguard.audio import AudioBuffer
from spoofguard.errors import ConfigurationError
from spoofguard.helpers.config import DB_FLOOR, POWER_EPS

if TYPE_CHECKING:
    from spoofguard.features.types import FrontEndConfig


def hz_to_mel(f: float | np.ndarray) -> float | np.ndarray:
    """Convert Hz to Mel with 2595 * log10(1 + f / 700)."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        message = "hz_to_mel expects non-negative frequencies"
        raise ValueError(message)

    mel = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(mel) if mel.ndim == 0 else mel


def mel_to_hz(m: float | np.ndarray) -> float | np.ndarray:
    """Convert Mel back to Hz with 700 * (10 ** (m / 2595) - 1)."""
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0):
        message = "mel_to_hz expects non-negative Mel values"
        raise ValueError(message)

    hz = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(hz) if hz.ndim == 0 else hz


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window, w[i] = 0.5 * (1 - cos(2 * pi * i / n))."""
    if n < 2:
        message = f"Hann window length must be at least 2, got {n}"
        raise ValueError(message)

    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def frame_signal(buf: AudioBuffer | np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    """Cut a signal into frames of `n_fft` samples starting every `hop` samples.

    Frames lie fully inside the signal; a signal shorter than one frame is
    zero-padded at the end to exactly one frame.
    """
    samples = buf.samples if isinstance(buf, AudioBuffer) else np.asarray(buf, dtype=np.float64)
    if samples.size < n_fft:
        padded = np.zeros(n_fft)
        padded[:samples.size] = samples
        return padded[np.newaxis, :]

    windows = np.lib.stride_tricks.sliding_window_view(samples, n_fft)
    return np.ascontiguousarray(windows[::hop])


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _bit_reverse_indices(n: int) -> np.ndarray:
    """Bit-reversal permutation for power-of-two `n`."""
    bits = n.bit_length() - 1
    indices = np.arange(n)
    reversed_indices = np.zeros(n, dtype=np.intp)
    for bit in range(bits):
        reversed_indices |= ((indices >> bit) & 1) << (bits - 1 - bit)

    return reversed_indices


def fft(frames: np.ndarray) -> np.ndarray:
    """Iterative radix-2 Cooley-Tukey DFT along the last axis.

    Accepts a single frame or a stack of frames; the length must be a power of two.
    """
    x = np.asarray(frames)
    n = x.shape[-1]
    if not _is_power_of_two(n):
        message = f"FFT length must be a power of two, got {n}"
        raise ValueError(message)

    x = x[..., _bit_reverse_indices(n)].astype(np.complex128)
    leading = x.shape[:-1]

    size = 2
    while size <= n:
        half = size // 2
        twiddles = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = x.reshape(*leading, n // size, size)
        upper = blocks[..., :half]
        lower = blocks[..., half:] * twiddles
        x = np.concatenate((upper + lower, upper - lower), axis=-1).reshape(*leading, n)
        size *= 2

    return x


def fft_power(frames: np.ndarray) -> np.ndarray:
    """Power spectrum |X[k]|^2 for k in [0, n/2] of each windowed frame."""
    spectrum = fft(frames)
    n = spectrum.shape[-1]
    kept = spectrum[..., : n // 2 + 1]
    return kept.real**2 + kept.imag**2


def triangle_weight(
    f: float | np.ndarray,
    lo: float,
    center: float,
    hi: float,
) -> float | np.ndarray:
    """Unnormalized triangle rising from `lo` to 1 at `center` and back to 0 at `hi`."""
    f = np.asarray(f, dtype=np.float64)
    rising = (f - lo) / (center - lo)
    falling = (hi - f) / (hi - center)
    weight = np.maximum(0.0, np.minimum(rising, falling))
    return float(weight) if weight.ndim == 0 else weight


def mel_break_frequencies(n_mels: int, fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """The n_mels + 2 filter break frequencies in Hz, equally spaced in Mel."""
    mels = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2)
    return mel_to_hz(mels)


def mel_filterbank(cfg: FrontEndConfig, sample_rate_hz: int) -> np.ndarray:
    """Triangular Mel filterbank of shape (n_mels, n_fft / 2 + 1).

    Filter k rises from break k to break k + 1 and falls to break k + 2; FFT bin j
    sits at j * sample_rate / n_fft Hz.
    """
    n_mels, n_fft = cfg.n_mels, cfg.n_fft
    breaks = mel_break_frequencies(n_mels, cfg.fmin_hz, cfg.resolve_fmax(sample_rate_hz))
    bin_hz = np.arange(n_fft // 2 + 1) * sample_rate_hz / n_fft

    weights = np.zeros((n_mels, bin_hz.size))
    for band in range(n_mels):
        weights[band] = triangle_weight(bin_hz, *breaks[band:band + 3])

    empty = np.flatnonzero(~np.any(weights > 0, axis=1))
    if empty.size:
        message = (
            f"Mel band {int(empty[0])} has no FFT bin under it: {n_mels} bands are "
            f"too many for n_fft={n_fft} at {sample_rate_hz} Hz"
        )
        raise ConfigurationError(message)

    return weights


def power_to_db(power: np.ndarray, db_floor: float = DB_FLOOR) -> np.ndarray:
    """Decibels relative to the grid maximum, clamped below at `db_floor`.

    An all-zero grid carries no level information and maps to `db_floor` everywhere.
    """
    power = np.asarray(power, dtype=np.float64)
    if np.any(power < 0):
        message = "power_to_db expects non-negative power values"
        raise ValueError(message)

    peak = float(power.max())
    if peak == 0.0:
        return np.full(power.shape, db_floor)

    reference = max(peak, POWER_EPS)
    db = 10.0 * np.log10(np.maximum(power, POWER_EPS) / reference)
    return np.maximum(db, db_floor)
