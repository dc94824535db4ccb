"""Trial protocols, score files and the synthetic corpus.

Modules:
    - protocol: Trial and the five-column protocol format.
    - scores: score files, the protocol join and score fusion.
    - synth: SynthConfig and the bona fide / replay generator.
    - corpus: speaker-disjoint splits written to disk.
"""

from spoofguard.data.corpus import build_corpus, corpus_outputs, plan_corpus, split_counts
from spoofguard.data.protocol import (
    BONAFIDE,
    SPOOF,
    Trial,
    label_counts,
    parse_protocol,
    write_protocol,
)
from spoofguard.data.scores import (
    JoinedScores,
    fuse_scores,
    join_scores,
    read_asv_scores,
    read_scores,
    write_scores,
)
from spoofguard.data.synth import ReplayChannel, SynthConfig, replay, synth_utterance

__all__ = [
    "BONAFIDE",
    "SPOOF",
    "JoinedScores",
    "ReplayChannel",
    "SynthConfig",
    "Trial",
    "build_corpus",
    "corpus_outputs",
    "fuse_scores",
    "join_scores",
    "label_counts",
    "parse_protocol",
    "plan_corpus",
    "read_asv_scores",
    "read_scores",
    "replay",
    "split_counts",
    "synth_utterance",
    "write_protocol",
    "write_scores",
]
