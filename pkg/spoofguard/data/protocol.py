"""Trial protocols: one `speaker utt system attack key` line per utterance.

The five-column layout is the one used by the public ASVspoof 2019 protocol files,
so those parse unchanged.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from spoofguard.errors import ProtocolError, TextEncodingError
from spoofguard.helpers.file_utils import read_file, write_text_atomic

BONAFIDE = "bonafide"
SPOOF = "spoof"
KEYS = (BONAFIDE, SPOOF)
NOT_APPLICABLE = "-"


@dataclass(frozen=True)
class Trial:
    """One labeled utterance of a protocol."""

    speaker_id: str
    utt_id: str
    system_id: str
    attack_id: str
    key: str

    @property
    def is_bonafide(self) -> bool:
        """Whether the utterance is genuine speech."""
        return self.key == BONAFIDE

    def to_line(self) -> str:
        """The protocol line of this trial."""
        return f"{self.speaker_id} {self.utt_id} {self.system_id} {self.attack_id} {self.key}"


def parse_protocol_lines(lines: list[str], source: str = "<protocol>") -> list[Trial]:
    """Parse protocol lines; blank lines are skipped."""
    trials = []
    seen = {}
    for line_number, line in enumerate(lines, start=1):
        fields = line.split()
        if not fields:
            continue

        if len(fields) != 5:
            reason = f"expected 5 fields (speaker utt system attack key), got {len(fields)}"
            raise ProtocolError(source, line_number, reason)

        trial = Trial(*fields)
        if trial.key not in KEYS:
            reason = f"unknown key {trial.key!r}, expected one of {', '.join(KEYS)}"
            raise ProtocolError(source, line_number, reason)
        if trial.utt_id in seen:
            reason = f"duplicate utterance id {trial.utt_id!r} (first on line {seen[trial.utt_id]})"
            raise ProtocolError(source, line_number, reason)

        seen[trial.utt_id] = line_number
        trials.append(trial)

    return trials


def parse_protocol(path: str | Path) -> list[Trial]:
    """Read a protocol file into trials in file order."""
    try:
        lines = read_file(path)
    except TextEncodingError as error:
        raise ProtocolError(str(path), error.line_number, "not valid UTF-8 text") from error
    return parse_protocol_lines(lines, source=str(path))


def format_protocol(trials: list[Trial]) -> str:
    """Serialize trials, one line each."""
    return "".join(trial.to_line() + "\n" for trial in trials)


def write_protocol(trials: list[Trial], path: str | Path) -> None:
    """Write trials to a protocol file."""
    write_text_atomic(path, format_protocol(trials))


def label_counts(trials: list[Trial]) -> dict[str, int]:
    """Number of trials per key, both keys always present."""
    counts = Counter(trial.key for trial in trials)
    return {key: counts.get(key, 0) for key in KEYS}
