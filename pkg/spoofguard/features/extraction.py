"""The Mel-spectrogram front-end pipeline.

frame -> Hann window -> power spectrum -> Mel filterbank -> dB -> resize.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from spoofguard.audio import AudioBuffer
from spoofguard.features.image import resize_bilinear
from spoofguard.features.spectral import (
    fft_power,
    frame_signal,
    hann_window,
    mel_filterbank,
    power_to_db,
)
from spoofguard.features.types import FrontEndConfig, MelSpectrogram


@lru_cache(maxsize=16)
def _cached_filterbank(cfg: FrontEndConfig, sample_rate_hz: int) -> np.ndarray:
    weights = mel_filterbank(cfg, sample_rate_hz)
    weights.setflags(write=False)
    return weights


def mel_power(buf: AudioBuffer, cfg: FrontEndConfig) -> np.ndarray:
    """Mel-band power grid of shape (n_mels, n_frames), before dB mapping."""
    frames = frame_signal(buf, cfg.n_fft, cfg.hop) * hann_window(cfg.n_fft)
    power = fft_power(frames)
    return _cached_filterbank(cfg, buf.sample_rate_hz) @ power.T


def extract_mel_spectrogram(
    buf: AudioBuffer,
    cfg: FrontEndConfig | None = None,
) -> MelSpectrogram:
    """Fixed-size dB Mel-spectrogram of an utterance."""
    cfg = cfg or FrontEndConfig()
    db = power_to_db(mel_power(buf, cfg), cfg.db_floor)
    resized = resize_bilinear(db, cfg.out_height, cfg.out_width)
    return MelSpectrogram(
        values=resized,
        config=cfg,
        sample_rate_hz=buf.sample_rate_hz,
        source_id=buf.source_id,
    )
