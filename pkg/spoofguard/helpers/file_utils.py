"""Utility functions for file input and output operations.

It includes methods to read UTF-8 text files, write artifacts atomically,
remove partial outputs after a failure, parse `key=value` configuration files and
append run manifests to the run log.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

from spoofguard.errors import TextEncodingError
from spoofguard.helpers.config import RUN_LOG


def read_file(filename: str | Path) -> list[str]:
    """Read a UTF-8 text file into its lines.

    Undecodable input raises `TextEncodingError` naming the line of the first bad byte.
    """
    payload = Path(filename).read_bytes()
    try:
        return payload.decode("utf-8").splitlines()
    except UnicodeDecodeError as error:
        raise TextEncodingError(str(filename), payload.count(b"\n", 0, error.start) + 1) from error


def write_bytes_atomic(filename: str | Path, payload: bytes) -> None:
    """Write bytes through a sibling temporary file so readers never see a torn file."""
    target = Path(filename)
    temporary = target.with_name(f".{target.name}.part")
    with temporary.open("wb") as file:
        file.write(payload)
    os.replace(temporary, target)


def write_text_atomic(filename: str | Path, content: str) -> None:
    """Write UTF-8 text atomically."""
    write_bytes_atomic(filename, content.encode("utf-8"))


def remove_partial_outputs(paths: list[Path]) -> None:
    """Delete the files a failed command already produced."""
    for path in paths:
        try:
            Path(path).unlink(missing_ok=True)
        except OSError:
            logging.exception("Could not remove partial output %s", path)


def read_key_value_file(filename: str | Path) -> dict[str, str]:
    """Parse `key=value` lines, ignoring blanks and `#` comments.

    Keys are normalized to use underscores so `n-fft` and `n_fft` are the same key.
    """
    settings = {}
    for line_number, raw_line in enumerate(read_file(filename), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        if "=" not in line:
            message = f"{filename}:{line_number}: expected key=value, got {raw_line!r}"
            raise ValueError(message)

        key, value = line.split("=", 1)
        settings[key.strip().replace("-", "_")] = value.strip()

    return settings


def write_on_run_log(directory: str | Path, record: dict) -> Path:
    """Append a run manifest as one JSON line to the run log of a directory."""
    log_path = Path(directory) / RUN_LOG
    with log_path.open("a", encoding="utf-8") as file:
        file.write(json.dumps(record, sort_keys=True) + "\n")

    return log_path
