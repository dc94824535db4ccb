"""Score files (`<utt_id> <score>` per line) and their join with protocols."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from spoofguard.data.protocol import NOT_APPLICABLE, Trial
from spoofguard.errors import ScoreFileError, TextEncodingError
from spoofguard.helpers.file_utils import read_file, write_text_atomic
from spoofguard.metrics import ScoreSet

MISSING_POLICIES = ("error", "skip")
ASV_KEYS = ("target", "nontarget", "spoof")
ZERO_SCORE = "0.000000"

ScoreEntry = tuple[str, float]


@dataclass(frozen=True)
class JoinedScores:
    """Scores matched to protocol trials, in protocol order."""

    trials: list[Trial]
    scores: np.ndarray
    skipped: list[str]

    @property
    def score_set(self) -> ScoreSet:
        """Bona fide and spoof populations for the metrics."""
        bonafide = np.array([trial.is_bonafide for trial in self.trials], dtype=bool)
        return ScoreSet(bonafide_scores=self.scores[bonafide], spoof_scores=self.scores[~bonafide])

    def spoof_scores_by_attack(self) -> dict[str, np.ndarray]:
        """Spoof scores grouped by attack id; `-` attacks are grouped under the system id."""
        groups: dict[str, list[float]] = {}
        for trial, score in zip(self.trials, self.scores):
            if trial.is_bonafide:
                continue
            attack = trial.attack_id if trial.attack_id != NOT_APPLICABLE else trial.system_id
            groups.setdefault(attack, []).append(float(score))

        return {attack: np.asarray(values) for attack, values in groups.items()}


def parse_score_lines(lines: list[str], source: str = "<scores>") -> list[ScoreEntry]:
    """Parse `<utt_id> <score>` lines; blank lines are skipped."""
    entries = []
    seen = set()
    for line_number, line in enumerate(lines, start=1):
        fields = line.split()
        if not fields:
            continue

        if len(fields) != 2:
            message = f"{source}:{line_number}: expected '<utt_id> <score>', got {line!r}"
            raise ScoreFileError(message)

        utt_id, raw_score = fields
        try:
            score = float(raw_score)
        except ValueError as error:
            message = f"{source}:{line_number}: score {raw_score!r} is not a number"
            raise ScoreFileError(message) from error

        if not math.isfinite(score):
            message = f"{source}:{line_number}: score {raw_score!r} is not finite"
            raise ScoreFileError(message)
        if utt_id in seen:
            message = f"{source}:{line_number}: duplicate score for {utt_id!r}"
            raise ScoreFileError(message)

        seen.add(utt_id)
        entries.append((utt_id, score))

    return entries


def _read_score_file(path: str | Path) -> list[str]:
    try:
        return read_file(path)
    except TextEncodingError as error:
        message = f"{path}:{error.line_number}: not valid UTF-8 text"
        raise ScoreFileError(message) from error


def read_scores(path: str | Path) -> list[ScoreEntry]:
    """Read a score file in file order."""
    return parse_score_lines(_read_score_file(path), source=str(path))


def format_score(score: float) -> str:
    """Six decimals; scores that round to zero print unsigned."""
    text = f"{score:.6f}"
    return ZERO_SCORE if text == f"-{ZERO_SCORE}" else text


def format_scores(entries: list[ScoreEntry]) -> str:
    """Serialize scores, one `<utt_id> <score>` line each."""
    return "".join(f"{utt_id} {format_score(score)}\n" for utt_id, score in entries)


def write_scores(entries: list[ScoreEntry], path: str | Path) -> None:
    """Write scores to a file."""
    write_text_atomic(path, format_scores(entries))


def join_scores(
    trials: list[Trial],
    entries: list[ScoreEntry],
    missing: str = "error",
) -> JoinedScores:
    """Match scores to trials by utterance id.

    A score for an utterance outside the protocol is always an error. A protocol
    trial without a score is an error under `missing="error"` and is dropped (and
    reported) under `missing="skip"`.
    """
    if missing not in MISSING_POLICIES:
        message = f"missing policy must be one of {MISSING_POLICIES}, got {missing!r}"
        raise ScoreFileError(message)

    by_utt = dict(entries)
    known = {trial.utt_id for trial in trials}
    unknown = [utt_id for utt_id, _ in entries if utt_id not in known]
    if unknown:
        message = f"{len(unknown)} scores for utterances not in the protocol, first {unknown[0]!r}"
        raise ScoreFileError(message)

    skipped = [trial.utt_id for trial in trials if trial.utt_id not in by_utt]
    if skipped and missing == "error":
        message = f"{len(skipped)} protocol trials have no score, first {skipped[0]!r}"
        raise ScoreFileError(message)
    if skipped:
        logging.warning("Skipping %d protocol trials without a score", len(skipped))

    kept = [trial for trial in trials if trial.utt_id in by_utt]
    scores = np.array([by_utt[trial.utt_id] for trial in kept], dtype=np.float64)
    return JoinedScores(trials=kept, scores=scores, skipped=skipped)


def fuse_scores(score_lists: list[list[ScoreEntry]]) -> list[ScoreEntry]:
    """Average several systems' scores per utterance, in the first system's order."""
    if not score_lists:
        message = "fuse_scores needs at least one score list"
        raise ScoreFileError(message)

    reference = [utt_id for utt_id, _ in score_lists[0]]
    maps = [dict(entries) for entries in score_lists]
    for index, scores in enumerate(maps[1:], start=2):
        if scores.keys() != set(reference):
            message = f"score list {index} does not cover the same utterances as score list 1"
            raise ScoreFileError(message)

    return [
        (utt_id, float(np.mean([scores[utt_id] for scores in maps])))
        for utt_id in reference
    ]


def read_asv_scores(path: str | Path) -> dict[str, np.ndarray]:
    """Read external ASV scores grouped by key.

    Each line ends with `<key> <score>`, key one of target, nontarget or spoof; any
    leading columns (speaker, attack) are ignored, so ASVspoof 2019 ASV score files
    read unchanged.
    """
    groups: dict[str, list[float]] = {key: [] for key in ASV_KEYS}
    for line_number, line in enumerate(_read_score_file(path), start=1):
        fields = line.split()
        if not fields:
            continue

        if len(fields) < 2 or fields[-2] not in ASV_KEYS:
            message = f"{path}:{line_number}: expected '... <target|nontarget|spoof> <score>', got {line!r}"
            raise ScoreFileError(message)
        try:
            score = float(fields[-1])
        except ValueError as error:
            message = f"{path}:{line_number}: score {fields[-1]!r} is not a number"
            raise ScoreFileError(message) from error

        groups[fields[-2]].append(score)

    return {key: np.asarray(values, dtype=np.float64) for key, values in groups.items()}
