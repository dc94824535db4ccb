"""Synthetic corpus layout: speaker-disjoint splits, protocols and PCM16 WAV files.

    <out_dir>/train.txt, dev.txt[, eval.txt]
    <out_dir>/wav/<utt_id>.wav
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from spoofguard.audio import write_wav
from spoofguard.data.protocol import BONAFIDE, NOT_APPLICABLE, SPOOF, Trial, write_protocol
from spoofguard.data.synth import SynthConfig, synth_utterance
from spoofguard.errors import ConfigurationError
from spoofguard.helpers.config import (
    DEV_PROTOCOL,
    EVAL_PROTOCOL,
    SPEAKERS_PER_SPLIT,
    TRAIN_PROTOCOL,
    WAV_FOLDER,
)
from spoofguard.helpers.general_utils import create_output_directory, resolve_max_workers

if TYPE_CHECKING:
    from spoofguard.helpers.managers.live_manager import LiveManager

PROTOCOL_FILES = {"train": TRAIN_PROTOCOL, "dev": DEV_PROTOCOL, "eval": EVAL_PROTOCOL}
ATTACK_IDS = {"train": "RP01", "dev": "RP01", "eval": "RP02"}


@dataclass(frozen=True)
class PlannedUtterance:
    """One utterance of the corpus and the generator index that produces it."""

    split: str
    index: int
    trial: Trial


def split_counts(cfg: SynthConfig) -> dict[str, tuple[int, int]]:
    """(bonafide, spoof) counts per split; dev takes `dev_fraction` of each class."""

    def dev_share(count: int) -> int:
        return math.floor(count * cfg.dev_fraction + 0.5)

    counts = {
        "train": (cfg.n_bonafide - dev_share(cfg.n_bonafide), cfg.n_spoof - dev_share(cfg.n_spoof)),
        "dev": (dev_share(cfg.n_bonafide), dev_share(cfg.n_spoof)),
    }
    for split, pair in counts.items():
        if min(pair) < 1:
            message = f"{split} split would get {pair[0]} bonafide / {pair[1]} spoof utterances"
            raise ConfigurationError(message)

    if cfg.n_eval_bonafide or cfg.n_eval_spoof:
        counts["eval"] = (cfg.n_eval_bonafide, cfg.n_eval_spoof)

    return counts


def plan_corpus(cfg: SynthConfig) -> list[PlannedUtterance]:
    """Every utterance in protocol order; speakers never repeat across splits."""
    planned = []
    index = 0
    for split_number, (split, (n_bonafide, n_spoof)) in enumerate(split_counts(cfg).items()):
        prefix = f"SG_{split[0].upper()}"
        first_speaker = split_number * SPEAKERS_PER_SPLIT
        labels = [BONAFIDE] * n_bonafide + [SPOOF] * n_spoof
        for position, label in enumerate(labels):
            speaker = f"SG_{first_speaker + position % SPEAKERS_PER_SPLIT:04d}"
            attack = ATTACK_IDS[split] if label == SPOOF else NOT_APPLICABLE
            trial = Trial(speaker, f"{prefix}_{index:07d}", NOT_APPLICABLE, attack, label)
            planned.append(PlannedUtterance(split, index, trial))
            index += 1

    return planned


def corpus_outputs(cfg: SynthConfig, out_dir: str | Path) -> list[Path]:
    """Every file build_corpus writes for a configuration."""
    out_dir = Path(out_dir)
    paths = [out_dir / PROTOCOL_FILES[split] for split in split_counts(cfg)]
    paths.extend(out_dir / WAV_FOLDER / f"{item.trial.utt_id}.wav" for item in plan_corpus(cfg))
    return paths


def _write_utterance(cfg: SynthConfig, item: PlannedUtterance, wav_dir: Path) -> Path:
    buffer = synth_utterance(cfg, item.index, item.trial.key, item.split, item.trial.utt_id)
    path = wav_dir / f"{item.trial.utt_id}.wav"
    write_wav(buffer, path)
    return path


def build_corpus(
    cfg: SynthConfig,
    out_dir: str | Path,
    live_manager: LiveManager | None = None,
) -> dict[str, list[Trial]]:
    """Generate the WAV files and protocol files of a synthetic corpus."""
    out_dir = create_output_directory(out_dir)
    wav_dir = create_output_directory(out_dir / WAV_FOLDER)
    planned = plan_corpus(cfg)

    if live_manager is not None:
        live_manager.start_stage("Writing WAVs", len(planned))
    with ThreadPoolExecutor(max_workers=resolve_max_workers()) as executor:
        futures = [executor.submit(_write_utterance, cfg, item, wav_dir) for item in planned]
        for future in futures:
            future.result()
            if live_manager is not None:
                live_manager.advance_stage()

    protocols = {}
    for split in split_counts(cfg):
        trials = [item.trial for item in planned if item.split == split]
        write_protocol(trials, out_dir / PROTOCOL_FILES[split])
        protocols[split] = trials
        logging.info("Wrote %d %s trials to %s", len(trials), split, out_dir / PROTOCOL_FILES[split])

    return protocols
