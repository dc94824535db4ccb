"""Deterministic synthetic bona fide speech and its replayed counterfeit.

Bona fide utterances are a gliding harmonic source shaped by two formant
resonators, an amplitude envelope and a weak noise floor. Spoofed utterances are
the bona fide utterance of the same index captured by a coarse recorder
(requantization), then played back through a loudspeaker band-pass into a room
with an exponentially decaying impulse response. Filtering after the recorder keeps
its quantization noise out of the band above the loudspeaker cut-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from spoofguard.audio import AudioBuffer
from spoofguard.data.protocol import BONAFIDE, KEYS, SPOOF
from spoofguard.errors import ConfigurationError
from spoofguard.helpers.config import (
    DEV_FRACTION,
    EVAL_REPLAY_BITS,
    EVAL_REPLAY_DECAY_S,
    REPLAY_BAND_HZ,
    REPLAY_BITS,
    REPLAY_DECAY_S,
    REPLAY_FILTER_ORDER,
    SEED,
    SYNTH_F0_RANGE_HZ,
    SYNTH_HARMONICS,
    SYNTH_MAX_DURATION_S,
    SYNTH_MIN_DURATION_S,
    SYNTH_NOISE_FLOOR_DB,
    SYNTH_PEAK,
    SYNTH_SAMPLE_RATE_HZ,
)
from spoofguard.helpers.general_utils import derive_rng

FORMANT_RANGES_HZ = ((300.0, 900.0), (900.0, 2500.0))
FORMANT_BANDWIDTH_HZ = 120.0
FADE_S = 0.02
LN_1000 = np.log(1000.0)


@dataclass(frozen=True)
class ReplayChannel:
    """Loudspeaker band, room decay time (60 dB) and recorder bit depth."""

    band_hz: tuple[float, float] = REPLAY_BAND_HZ
    filter_order: int = REPLAY_FILTER_ORDER
    decay_s: float = REPLAY_DECAY_S
    bits: int = REPLAY_BITS


@dataclass(frozen=True)
class SynthConfig:
    """Size, timing and replay conditions of a synthetic corpus.

    `n_bonafide` and `n_spoof` are shared between train and dev according to
    `dev_fraction`; the optional eval split has its own counts and replays through
    an unseen channel.
    """

    seed: int = SEED
    n_bonafide: int = 50
    n_spoof: int = 50
    sample_rate_hz: int = SYNTH_SAMPLE_RATE_HZ
    min_duration_s: float = SYNTH_MIN_DURATION_S
    max_duration_s: float = SYNTH_MAX_DURATION_S
    replay_band_hz: tuple[float, float] = REPLAY_BAND_HZ
    replay_filter_order: int = REPLAY_FILTER_ORDER
    replay_decay_s: float = REPLAY_DECAY_S
    replay_bits: int = REPLAY_BITS
    dev_fraction: float = DEV_FRACTION
    n_eval_bonafide: int = 0
    n_eval_spoof: int = 0
    eval_replay_decay_s: float = EVAL_REPLAY_DECAY_S
    eval_replay_bits: int = EVAL_REPLAY_BITS

    def __post_init__(self) -> None:
        """Validate counts, durations and replay parameters."""
        object.__setattr__(self, "replay_band_hz", tuple(float(f) for f in self.replay_band_hz))
        if self.n_bonafide < 1 or self.n_spoof < 1:
            message = f"need at least one utterance per class, got {self.n_bonafide}/{self.n_spoof}"
            raise ConfigurationError(message)
        if self.n_eval_bonafide < 0 or self.n_eval_spoof < 0:
            message = "eval counts must not be negative"
            raise ConfigurationError(message)
        if self.sample_rate_hz <= 0:
            message = f"sample_rate_hz must be positive, got {self.sample_rate_hz}"
            raise ConfigurationError(message)
        if not 0 < self.min_duration_s <= self.max_duration_s:
            message = f"invalid duration range [{self.min_duration_s}, {self.max_duration_s}]"
            raise ConfigurationError(message)
        if not 0.0 < self.dev_fraction < 1.0:
            message = f"dev_fraction must lie in (0, 1), got {self.dev_fraction}"
            raise ConfigurationError(message)

        low, high = self.replay_band_hz
        if not 0 < low < high < self.sample_rate_hz / 2:
            message = f"replay band {self.replay_band_hz} must lie inside (0, {self.sample_rate_hz / 2}) Hz"
            raise ConfigurationError(message)
        if self.replay_filter_order < 1:
            message = f"replay_filter_order must be positive, got {self.replay_filter_order}"
            raise ConfigurationError(message)
        for decay in (self.replay_decay_s, self.eval_replay_decay_s):
            if decay <= 0:
                message = f"replay decay time must be positive, got {decay}"
                raise ConfigurationError(message)
        for bits in (self.replay_bits, self.eval_replay_bits):
            if not 2 <= bits <= 24:
                message = f"requantization bits must lie in [2, 24], got {bits}"
                raise ConfigurationError(message)

    def replay_channel(self, split: str = "train") -> ReplayChannel:
        """The channel spoofs of a split are replayed through; eval uses unseen conditions."""
        if split == "eval":
            return ReplayChannel(
                self.replay_band_hz,
                self.replay_filter_order,
                self.eval_replay_decay_s,
                self.eval_replay_bits,
            )

        return ReplayChannel(
            self.replay_band_hz,
            self.replay_filter_order,
            self.replay_decay_s,
            self.replay_bits,
        )


def _resonator(frequency_hz: float, sample_rate_hz: int) -> tuple[np.ndarray, np.ndarray]:
    radius = np.exp(-np.pi * FORMANT_BANDWIDTH_HZ / sample_rate_hz)
    theta = 2.0 * np.pi * frequency_hz / sample_rate_hz
    return np.array([1.0 - radius]), np.array([1.0, -2.0 * radius * np.cos(theta), radius**2])


def _fade(t: np.ndarray) -> np.ndarray:
    """Linear ramps of FADE_S at both ends."""
    return np.clip(np.minimum(t, t[-1] - t) / FADE_S, 0.0, 1.0)


def _envelope(t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    syllable_rate = rng.uniform(2.0, 5.0)
    envelope = 0.2 + 0.8 * np.sin(np.pi * syllable_rate * t + rng.uniform(0, np.pi)) ** 2
    return envelope * _fade(t)


def _peak_to(samples: np.ndarray, peak: float) -> np.ndarray:
    top = np.max(np.abs(samples))
    return samples * (peak / top) if top > 0 else samples


def bonafide_waveform(cfg: SynthConfig, index: int) -> np.ndarray:
    """Voiced harmonic signal of one synthetic utterance, peak SYNTH_PEAK."""
    rng = derive_rng(cfg.seed, index, BONAFIDE)
    sr = cfg.sample_rate_hz
    n_samples = round(rng.uniform(cfg.min_duration_s, cfg.max_duration_s) * sr)
    t = np.arange(n_samples) / sr

    f0 = rng.uniform(*SYNTH_F0_RANGE_HZ)
    glide = f0 * (1.0 + 0.05 * np.sin(2.0 * np.pi * rng.uniform(0.5, 3.0) * t))
    phase = 2.0 * np.pi * np.cumsum(glide) / sr
    source = sum(np.sin(k * phase) / k for k in range(1, SYNTH_HARMONICS + 1) if k * f0 * 1.05 < sr / 2)

    voiced = source
    for low, high in FORMANT_RANGES_HZ:
        b, a = _resonator(rng.uniform(low, high), sr)
        voiced = voiced + signal.lfilter(b, a, source) * 4.0
    voiced = voiced * _envelope(t, rng)

    rms = np.sqrt(np.mean(voiced**2))
    noise = rng.standard_normal(n_samples) * rms * 10.0 ** (SYNTH_NOISE_FLOOR_DB / 20.0)
    return _peak_to(voiced + noise, SYNTH_PEAK)


def impulse_response(channel: ReplayChannel, sample_rate_hz: int, rng: np.random.Generator) -> np.ndarray:
    """Direct path plus exponentially decaying noise reaching -60 dB at `decay_s`."""
    length = max(2, round(channel.decay_s * sample_rate_hz))
    t = np.arange(length) / sample_rate_hz
    response = rng.standard_normal(length) * np.exp(-LN_1000 * t / channel.decay_s)
    response[0] = 1.0
    return response / np.sqrt(np.sum(response**2))


def requantize(samples: np.ndarray, bits: int) -> np.ndarray:
    """Round to a signed `bits`-deep grid over [-1, 1]."""
    levels = 2.0 ** (bits - 1)
    return np.clip(np.round(samples * levels), -levels, levels - 1) / levels


def replay(samples: np.ndarray, channel: ReplayChannel, sample_rate_hz: int, rng: np.random.Generator) -> np.ndarray:
    """Record a waveform, then play it through the loudspeaker into the room."""
    recorded = requantize(samples, channel.bits)
    sos = signal.butter(channel.filter_order, channel.band_hz, btype="bandpass", fs=sample_rate_hz, output="sos")
    played = signal.sosfilt(sos, recorded)
    reverberant = signal.fftconvolve(played, impulse_response(channel, sample_rate_hz, rng), mode="full")
    # Cut the tail at the input length and fade both ends.
    captured = reverberant[: samples.size] * _fade(np.arange(samples.size) / sample_rate_hz)
    return _peak_to(captured, SYNTH_PEAK)


def synth_utterance(
    cfg: SynthConfig,
    index: int,
    label: str,
    split: str = "train",
    source_id: str = "",
) -> AudioBuffer:
    """Generate utterance `index` of a class; identical arguments give identical audio."""
    if label not in KEYS:
        message = f"label must be one of {KEYS}, got {label!r}"
        raise ConfigurationError(message)

    samples = bonafide_waveform(cfg, index)
    if label == SPOOF:
        rng = derive_rng(cfg.seed, index, SPOOF)
        samples = replay(samples, cfg.replay_channel(split), cfg.sample_rate_hz, rng)

    return AudioBuffer(samples, cfg.sample_rate_hz, source_id)
