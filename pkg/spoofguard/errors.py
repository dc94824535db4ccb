"""Exception types raised by spoofguard.

Every error derives from `SpoofGuardError` and from the builtin it specializes, so
callers can catch either the toolkit base class or the usual `ValueError`.
"""

from __future__ import annotations


class SpoofGuardError(Exception):
    """Base class for all toolkit errors."""


class AudioFormatError(SpoofGuardError, ValueError):
    """Raised when a WAV file cannot be decoded."""

    def __init__(self, path: str, offset: int, reason: str) -> None:
        """Record the file and the byte offset where decoding failed."""
        self.path = path
        self.offset = offset
        self.reason = reason
        super().__init__(f"{path}: {reason} (at byte offset {offset})")


class FeatureFileError(SpoofGuardError, ValueError):
    """Raised when a MELS feature file is malformed."""


class ConfigurationError(SpoofGuardError, ValueError):
    """Raised when a configuration value violates its constraints."""


class ShapeMismatchError(SpoofGuardError, ValueError):
    """Raised when tensor shapes do not agree."""


class WeightFileError(SpoofGuardError, ValueError):
    """Raised when an SGW1 weight file is malformed or does not fit the network."""


class ProtocolError(SpoofGuardError, ValueError):
    """Raised when a trial protocol line cannot be parsed."""

    def __init__(self, path: str, line_number: int, reason: str) -> None:
        """Record the file and the 1-based line number of the offending line."""
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {reason}")


class ScoreFileError(SpoofGuardError, ValueError):
    """Raised when a score file is malformed or cannot be joined with a protocol."""


class DatasetError(SpoofGuardError, ValueError):
    """Raised when a training dataset is unusable."""


class MetricError(SpoofGuardError, ValueError):
    """Raised when a metric is undefined for the given inputs."""


class TextEncodingError(SpoofGuardError, ValueError):
    """Raised when a text input is not valid UTF-8."""

    def __init__(self, path: str, line_number: int) -> None:
        """Record the file and the 1-based line holding the first bad byte."""
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: not valid UTF-8 text")
