"""Module to handle common tasks.

This module includes functions to create output directories, resolve the worker
count, derive independent seeded random streams and format durations, making them
reusable across the toolkit.
"""

from __future__ import annotations

import datetime
import logging
import os
import zlib
from pathlib import Path

import numpy as np

from .config import DEFAULT_MAX_WORKERS, THREADS_ENV_VAR


def create_output_directory(directory_name: str | Path) -> Path:
    """Create a directory for saving files if it does not already exist."""
    filepath = Path(directory_name)
    filepath.mkdir(parents=True, exist_ok=True)
    return filepath


def resolve_max_workers() -> int:
    """Return the worker count.

    The default is the smaller of DEFAULT_MAX_WORKERS and the CPU count.
    SPOOFGUARD_THREADS can lower it, never raise it; values below 1 mean 1.
    """
    default = min(DEFAULT_MAX_WORKERS, os.cpu_count() or 1)
    value = os.environ.get(THREADS_ENV_VAR)
    if value is None:
        return default

    try:
        workers = int(value)
    except ValueError:
        logging.error("Ignoring non-integer %s=%r", THREADS_ENV_VAR, value)
        return default

    return min(default, max(1, workers))


def derive_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """Return a generator seeded from (seed, *keys), independent of call order.

    String keys are folded to integers with CRC32 so the stream is stable across
    interpreter runs (unlike `hash`).
    """
    entropy = [int(seed)]
    for key in keys:
        if isinstance(key, str):
            entropy.append(zlib.crc32(key.encode("utf-8")))
        else:
            entropy.append(int(key))

    return np.random.default_rng(np.random.SeedSequence(entropy))


def format_duration(seconds: float) -> str:
    """Format a duration in seconds as `hh hrs mm mins ss secs`."""
    time_delta = datetime.timedelta(seconds=seconds)

    hours = time_delta.seconds // 3600
    minutes = (time_delta.seconds % 3600) // 60
    secs = time_delta.seconds % 60

    return f"{hours:02} hrs {minutes:02} mins {secs:02} secs"
