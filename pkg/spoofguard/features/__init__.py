"""Mel-spectrogram front-end.

Modules:
    - spectral: Mel scale, Hann window, framing, radix-2 FFT, filterbank, dB mapping.
    - image: bilinear resizing and PGM export of feature grids.
    - extraction: the end-to-end extraction pipeline.
    - mels_file: the MELS v1 feature file format.
    - types: FrontEndConfig and MelSpectrogram.
"""

from spoofguard.features.extraction import extract_mel_spectrogram, mel_power
from spoofguard.features.image import export_pgm, pgm_pixels, resize_bilinear
from spoofguard.features.mels_file import load_mels, save_mels
from spoofguard.features.spectral import (
    fft,
    fft_power,
    frame_signal,
    hann_window,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    power_to_db,
    triangle_weight,
)
from spoofguard.features.types import FrontEndConfig, MelSpectrogram

__all__ = [
    "FrontEndConfig",
    "MelSpectrogram",
    "export_pgm",
    "extract_mel_spectrogram",
    "fft",
    "fft_power",
    "frame_signal",
    "hann_window",
    "hz_to_mel",
    "load_mels",
    "mel_filterbank",
    "mel_power",
    "mel_to_hz",
    "pgm_pixels",
    "power_to_db",
    "resize_bilinear",
    "save_mels",
    "triangle_weight",
]
