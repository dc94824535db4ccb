"""Image-style operations on feature grids: bilinear resizing and PGM export."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from spoofguard.features.types import MelSpectrogram
from spoofguard.helpers.file_utils import write_bytes_atomic


def _source_coordinates(out_size: int, in_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pixel-center sampling positions: lower index, upper index, fractional weight."""
    scale = in_size / out_size
    coords = (np.arange(out_size) + 0.5) * scale - 0.5
    coords = np.clip(coords, 0, in_size - 1)
    lower = np.floor(coords).astype(np.intp)
    upper = np.minimum(lower + 1, in_size - 1)
    return lower, upper, coords - lower


def resize_bilinear(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Center-aligned bilinear resize with edge clamping."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        message = "resize_bilinear expects a non-empty 2-D grid"
        raise ValueError(message)
    if out_h < 1 or out_w < 1:
        message = f"output size must be positive, got {out_h}x{out_w}"
        raise ValueError(message)

    in_h, in_w = grid.shape
    top, bottom, wy = _source_coordinates(out_h, in_h)
    left, right, wx = _source_coordinates(out_w, in_w)

    rows = grid[top] + wy[:, np.newaxis] * (grid[bottom] - grid[top])
    resized = rows[:, left] + wx[np.newaxis, :] * (rows[:, right] - rows[:, left])
    return np.clip(resized, grid.min(), grid.max())


def pgm_pixels(values: np.ndarray, db_floor: float) -> np.ndarray:
    """Quantize a dB grid to 8 bits: db_floor -> 0, 0 dB -> 255. Row order unchanged."""
    scaled = 255.0 * (np.asarray(values, dtype=np.float64) - db_floor) / (0.0 - db_floor)
    return np.clip(np.round(scaled), 0, 255).astype(np.uint8)


def encode_pgm(spectrogram: MelSpectrogram) -> bytes:
    """Binary P5 image with the highest Mel band on the top row."""
    pixels = pgm_pixels(spectrogram.values, spectrogram.config.db_floor)[::-1]
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels).tobytes()


def export_pgm(spectrogram: MelSpectrogram, path: str | Path) -> None:
    """Write a dB-scaled spectrogram as an 8-bit PGM image."""
    write_bytes_atomic(path, encode_pgm(spectrogram))
