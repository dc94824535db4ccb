"""The full synth -> featurize -> train -> score -> evaluate pipeline on a small corpus."""

from pathlib import Path

import pytest

from spoofguard.cli import main
from spoofguard.metrics import parse_report


def run_pipeline(root: Path) -> dict[str, Path]:
    corpus = root / "corpus"
    feats = root / "feats"
    weights = root / "model" / "tiny.sgw"
    scores = root / "dev.scores"
    report = root / "dev.report"

    steps = [
        ["synth", "--out", corpus, "--seed", "7", "--bonafide", "80", "--spoof", "80", "--dev-fraction", "0.375"],
        [
            "featurize", "--protocol", corpus / "train.txt", corpus / "dev.txt", "--out", feats,
            "--height", "64", "--width", "64",
        ],
        [
            "train", "--protocol", corpus / "train.txt", "--dev-protocol", corpus / "dev.txt",
            "--features", feats, "--weights", weights, "--preset", "tiny", "--epochs", "8", "--batch", "16",
        ],
        ["score", "--protocol", corpus / "dev.txt", "--features", feats, "--weights", weights, "--out", scores],
        ["evaluate", "--protocol", corpus / "dev.txt", "--scores", scores, "--out", report],
    ]
    for step in steps:
        assert main([str(token) for token in [step[0], "--no-live", *step[1:]]]) == 0

    return {"feats": feats, "weights": weights, "scores": scores, "report": report}


@pytest.mark.slow
def test_pipeline_detects_replay_and_is_reproducible(tmp_path, monkeypatch):
    monkeypatch.setenv("SPOOFGUARD_THREADS", "2")
    first = run_pipeline(tmp_path / "first")

    values = parse_report(first["report"].read_text())
    assert values["bonafide_trials"] == 30
    assert values["spoof_trials"] == 30
    assert values["eer"] <= 5.0

    losses = first["weights"].with_name("tiny.sgw.losses").read_text().splitlines()
    assert len(losses) == 8
    assert losses[0].startswith("epoch=1 loss=")
    assert "dev_eer=" in losses[-1]

    second = run_pipeline(tmp_path / "second")
    assert first["weights"].read_bytes() == second["weights"].read_bytes()
    assert first["scores"].read_text() == second["scores"].read_text()
    for path in sorted(first["feats"].glob("*.mels")):
        assert path.read_bytes() == (second["feats"] / path.name).read_bytes()
