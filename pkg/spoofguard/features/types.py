"""Configuration and result types of the Mel front-end."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from spoofguard.errors import ConfigurationError
from spoofguard.helpers.config import (
    DB_FLOOR,
    FMIN_HZ,
    HOP_LENGTH,
    N_FFT,
    N_MELS,
    OUT_HEIGHT,
    OUT_WIDTH,
)


@dataclass(frozen=True)
class FrontEndConfig:
    """Parameters of the Mel-spectrogram extraction.

    `fmax_hz=None` means half the sample rate of whatever buffer is processed.
    """

    n_fft: int = N_FFT
    hop: int = HOP_LENGTH
    n_mels: int = N_MELS
    fmin_hz: float = FMIN_HZ
    fmax_hz: float | None = None
    out_height: int = OUT_HEIGHT
    out_width: int = OUT_WIDTH
    db_floor: float = DB_FLOOR

    def __post_init__(self) -> None:
        """Normalize numeric types and check the rate-independent constraints."""
        object.__setattr__(self, "fmin_hz", float(self.fmin_hz))
        object.__setattr__(self, "db_floor", float(self.db_floor))
        if self.fmax_hz is not None:
            object.__setattr__(self, "fmax_hz", float(self.fmax_hz))

        if self.n_fft < 2 or self.n_fft & (self.n_fft - 1):
            message = f"n_fft must be a power of two >= 2, got {self.n_fft}"
            raise ConfigurationError(message)
        if not 0 < self.hop <= self.n_fft:
            message = f"hop must be in (0, n_fft], got {self.hop}"
            raise ConfigurationError(message)
        if self.n_mels < 2:
            message = f"n_mels must be at least 2, got {self.n_mels}"
            raise ConfigurationError(message)
        if self.fmin_hz < 0:
            message = f"fmin_hz must be non-negative, got {self.fmin_hz}"
            raise ConfigurationError(message)
        if self.out_height < 1 or self.out_width < 1:
            message = "output dimensions must be positive"
            raise ConfigurationError(message)
        if not self.db_floor < 0:
            message = f"db_floor must be negative, got {self.db_floor}"
            raise ConfigurationError(message)

    def resolve_fmax(self, sample_rate_hz: int) -> float:
        """Upper filterbank edge for a given rate, validated against Nyquist."""
        nyquist = sample_rate_hz / 2
        fmax = nyquist if self.fmax_hz is None else float(self.fmax_hz)
        if not self.fmin_hz < fmax <= nyquist:
            message = (
                f"need 0 <= fmin_hz < fmax_hz <= {nyquist} for {sample_rate_hz} Hz audio, "
                f"got fmin_hz={self.fmin_hz}, fmax_hz={fmax}"
            )
            raise ConfigurationError(message)

        return fmax

    def as_dict(self) -> dict:
        """Field values keyed by name."""
        return asdict(self)


@dataclass(frozen=True)
class MelSpectrogram:
    """Time-frequency feature map: rows are Mel bands (low to high), columns are time."""

    values: np.ndarray
    config: FrontEndConfig = field(default_factory=FrontEndConfig)
    sample_rate_hz: int = 0
    source_id: str = ""
    units: str = "dB"

    def __post_init__(self) -> None:
        """Store the grid as a read-only float32 array."""
        values = np.array(self.values, dtype=np.float32)
        if values.ndim != 2 or values.size == 0:
            message = "MelSpectrogram values must be a non-empty 2-D grid"
            raise ValueError(message)
        if not np.all(np.isfinite(values)):
            message = "MelSpectrogram values must be finite"
            raise ValueError(message)

        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, columns) of the grid."""
        return self.values.shape
