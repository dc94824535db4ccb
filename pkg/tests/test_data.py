import logging

import numpy as np
import pytest

from spoofguard.data import (
    BONAFIDE,
    SPOOF,
    SynthConfig,
    Trial,
    build_corpus,
    corpus_outputs,
    fuse_scores,
    join_scores,
    label_counts,
    parse_protocol,
    plan_corpus,
    read_asv_scores,
    read_scores,
    split_counts,
    synth_utterance,
    write_protocol,
    write_scores,
)
from spoofguard.data.protocol import parse_protocol_lines
from spoofguard.data.scores import format_scores, parse_score_lines
from spoofguard.data.synth import impulse_response, requantize
from spoofguard.errors import ConfigurationError, ProtocolError, ScoreFileError
from spoofguard.helpers.general_utils import derive_rng

EXAMPLE_LINE = "LA_0079 LA_T_1138215 - - bonafide"


def band_energy_db(samples: np.ndarray, sample_rate_hz: int, low_hz: float) -> float:
    """Energy above `low_hz` relative to the total, in dB."""
    power = np.abs(np.fft.rfft(samples)) ** 2
    frequencies = np.fft.rfftfreq(samples.size, 1 / sample_rate_hz)
    return float(10 * np.log10(power[frequencies >= low_hz].sum() / power.sum()))


def small_trials() -> list[Trial]:
    return [
        Trial("S1", "u1", "-", "-", BONAFIDE),
        Trial("S1", "u2", "-", "A01", SPOOF),
        Trial("S2", "u3", "-", "-", BONAFIDE),
        Trial("S2", "u4", "SYS9", "-", SPOOF),
    ]


class TestProtocol:
    def test_example_line(self):
        (trial,) = parse_protocol_lines([EXAMPLE_LINE])
        assert trial == Trial("LA_0079", "LA_T_1138215", "-", "-", "bonafide")
        assert trial.is_bonafide

    def test_wrong_field_count_names_the_line(self):
        with pytest.raises(ProtocolError) as error:
            parse_protocol_lines([EXAMPLE_LINE, "", "LA_0079 LA_T_2 - bonafide"], source="p.txt")
        assert error.value.line_number == 3
        assert str(error.value).startswith("p.txt:3:")

    def test_unknown_key(self):
        with pytest.raises(ProtocolError, match="unknown key"):
            parse_protocol_lines(["S u1 - - genuine"])

    def test_duplicate_utterance(self):
        with pytest.raises(ProtocolError, match="first on line 1"):
            parse_protocol_lines(["S u1 - - bonafide", "S u1 - A01 spoof"])

    def test_file_round_trip(self, tmp_path):
        trials = small_trials()
        path = tmp_path / "protocol.txt"
        write_protocol(trials, path)
        assert parse_protocol(path) == trials
        assert path.read_text().splitlines()[1] == "S1 u2 - A01 spoof"

    def test_undecodable_file_names_the_line(self, tmp_path):
        path = tmp_path / "latin1.txt"
        path.write_bytes("S1 u1 - - bonafide\nS1 caf\u00e9 - - spoof\n".encode("latin-1"))
        with pytest.raises(ProtocolError, match=":2: not valid UTF-8") as raised:
            parse_protocol(path)
        assert raised.value.line_number == 2

    def test_label_counts(self):
        assert label_counts(small_trials()) == {BONAFIDE: 2, SPOOF: 2}
        assert label_counts([]) == {BONAFIDE: 0, SPOOF: 0}


class TestScores:
    def test_single_line(self):
        assert parse_score_lines(["utt1 1.25"]) == [("utt1", 1.25)]

    @pytest.mark.parametrize("line", ["utt1", "utt1 1.0 extra", "utt1 abc", "utt1 nan", "utt1 inf"])
    def test_malformed_lines(self, line):
        with pytest.raises(ScoreFileError):
            parse_score_lines([line])

    def test_duplicate(self):
        with pytest.raises(ScoreFileError, match="duplicate"):
            parse_score_lines(["u1 1", "u1 2"])

    def test_undecodable_file(self, tmp_path):
        path = tmp_path / "latin1.scores"
        path.write_bytes(b"u1 0.5\nu2 0.25\nu\xe9 0.1\n")
        with pytest.raises(ScoreFileError, match=":3: not valid UTF-8"):
            read_scores(path)

    def test_negative_zero_prints_as_zero(self):
        entries = [("u1", -0.0), ("u2", -1e-9), ("u3", -4.9e-7), ("u4", 1e-9)]
        assert format_scores(entries) == "u1 0.000000\nu2 0.000000\nu3 0.000000\nu4 0.000000\n"
        assert format_scores([("u5", -2e-6)]) == "u5 -0.000002\n"

    def test_file_round_trip(self, tmp_path, rng):
        entries = [(f"utt{i}", float(score)) for i, score in enumerate(rng.normal(0, 5, 1000))]
        first = tmp_path / "first.txt"
        write_scores(entries, first)
        loaded = read_scores(first)
        assert [utt for utt, _ in loaded] == [utt for utt, _ in entries]
        np.testing.assert_allclose([s for _, s in loaded], [s for _, s in entries], atol=1e-6)

        second = tmp_path / "second.txt"
        write_scores(loaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_join_keeps_protocol_order(self):
        joined = join_scores(small_trials(), [("u4", 0.1), ("u3", 2.0), ("u2", 0.3), ("u1", 1.0)])
        np.testing.assert_array_equal(joined.scores, [1.0, 0.3, 2.0, 0.1])
        np.testing.assert_array_equal(joined.score_set.bonafide_scores, [1.0, 2.0])
        np.testing.assert_array_equal(joined.score_set.spoof_scores, [0.3, 0.1])

    def test_attack_grouping_falls_back_to_system(self):
        joined = join_scores(small_trials(), [("u1", 1.0), ("u2", 0.3), ("u3", 2.0), ("u4", 0.1)])
        groups = joined.spoof_scores_by_attack()
        assert sorted(groups) == ["A01", "SYS9"]

    def test_unknown_utterance(self):
        with pytest.raises(ScoreFileError, match="not in the protocol"):
            join_scores(small_trials(), [("u1", 1.0), ("zz", 0.0)], missing="skip")

    def test_missing_score_is_an_error(self):
        with pytest.raises(ScoreFileError, match="'u3'"):
            join_scores(small_trials(), [("u1", 1.0), ("u2", 0.3), ("u4", 0.1)])

    def test_missing_score_can_be_skipped(self, caplog):
        with caplog.at_level(logging.WARNING):
            joined = join_scores(small_trials(), [("u1", 1.0), ("u2", 0.3), ("u4", 0.1)], missing="skip")
        assert joined.skipped == ["u3"]
        assert len(joined.trials) == 3
        assert "Skipping 1" in caplog.text

    def test_fuse_averages_in_first_order(self):
        fused = fuse_scores([[("a", 1.0), ("b", 3.0)], [("b", 1.0), ("a", 2.0)]])
        assert fused == [("a", 1.5), ("b", 2.0)]

    def test_fuse_needs_matching_utterances(self):
        with pytest.raises(ScoreFileError, match="score list 2"):
            fuse_scores([[("a", 1.0)], [("b", 1.0)]])

    def test_asv_scores(self, tmp_path):
        path = tmp_path / "asv.txt"
        path.write_text("LA_0001 - target 2.5\nLA_0002 A01 spoof -1\nnontarget 0.5\n")
        groups = read_asv_scores(path)
        np.testing.assert_array_equal(groups["target"], [2.5])
        np.testing.assert_array_equal(groups["nontarget"], [0.5])
        np.testing.assert_array_equal(groups["spoof"], [-1.0])

    def test_asv_scores_bad_key(self, tmp_path):
        path = tmp_path / "asv.txt"
        path.write_text("LA_0001 bonafide 2.5\n")
        with pytest.raises(ScoreFileError, match=":1:"):
            read_asv_scores(path)


class TestSynth:
    def test_same_arguments_same_audio(self):
        cfg = SynthConfig(seed=11)
        for label in (BONAFIDE, SPOOF):
            first = synth_utterance(cfg, 3, label)
            second = synth_utterance(cfg, 3, label)
            assert first.samples.tobytes() == second.samples.tobytes()

    def test_seed_changes_audio(self):
        first = synth_utterance(SynthConfig(seed=1), 0, BONAFIDE).samples
        second = synth_utterance(SynthConfig(seed=2), 0, BONAFIDE).samples
        assert first.size != second.size or not np.array_equal(first, second)

    def test_levels_and_duration(self):
        cfg = SynthConfig()
        for index in range(5):
            for label in (BONAFIDE, SPOOF):
                buf = synth_utterance(cfg, index, label)
                assert np.max(np.abs(buf.samples)) <= 1.0
                assert cfg.min_duration_s - 1e-3 <= buf.duration_s <= cfg.max_duration_s + 1e-3

    @pytest.mark.parametrize("split", ["train", "eval"])
    def test_every_spoof_loses_high_frequencies(self, split):
        cfg = SynthConfig(seed=5, n_eval_bonafide=1, n_eval_spoof=1)
        for i in range(5):
            bonafide = synth_utterance(cfg, i, BONAFIDE, split).samples
            spoof = synth_utterance(cfg, i, SPOOF, split).samples
            margin = band_energy_db(bonafide, cfg.sample_rate_hz, 5000.0) - band_energy_db(spoof, cfg.sample_rate_hz, 5000.0)
            assert margin >= 20.0, f"utterance {i}: {margin:.2f} dB"

    def test_spoof_fades_out(self):
        spoof = synth_utterance(SynthConfig(seed=5), 0, SPOOF).samples
        assert spoof[-1] == 0.0
        assert np.abs(spoof).max() == pytest.approx(0.9)

    def test_band_energy_separates_the_classes(self):
        cfg = SynthConfig(seed=8)
        bonafide = [band_energy_db(synth_utterance(cfg, i, BONAFIDE).samples, 16000, 5000.0) for i in range(20)]
        spoof = [band_energy_db(synth_utterance(cfg, i, SPOOF).samples, 16000, 5000.0) for i in range(20, 40)]
        values = np.array(bonafide + spoof)
        labels = np.array([1] * 20 + [0] * 20)
        accuracy = max(np.mean((values > threshold) == labels) for threshold in values)
        assert accuracy >= 0.95

    def test_impulse_response_shape(self, rng):
        cfg = SynthConfig()
        response = impulse_response(cfg.replay_channel(), 16000, rng)
        assert response.size == round(cfg.replay_decay_s * 16000)
        assert np.sum(response**2) == pytest.approx(1.0)
        assert np.abs(response[-100:]).max() < 0.01 * response[0]

    def test_requantize_grid(self):
        np.testing.assert_array_equal(requantize(np.array([0.3, -1.0, 1.0]), 2), [0.5, -1.0, 0.5])

    def test_eval_channel_differs(self):
        cfg = SynthConfig(n_eval_bonafide=1, n_eval_spoof=1)
        assert cfg.replay_channel("eval").bits == 10
        assert cfg.replay_channel("dev") == cfg.replay_channel("train")

    def test_derive_rng_is_order_independent(self):
        first = derive_rng(7, 1, "spoof").random()
        derive_rng(7, 2, "spoof").random()
        assert derive_rng(7, 1, "spoof").random() == first
        assert derive_rng(7, 1, "bonafide").random() != first

    @pytest.mark.parametrize(
        "kwargs",
        [{"n_bonafide": 0}, {"dev_fraction": 1.0}, {"replay_bits": 1}, {"replay_band_hz": (300.0, 9000.0)}],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ConfigurationError):
            SynthConfig(**kwargs)

    def test_unknown_label(self):
        with pytest.raises(ConfigurationError):
            synth_utterance(SynthConfig(), 0, "replayed")


class TestCorpus:
    def test_split_counts(self):
        assert split_counts(SynthConfig(n_bonafide=80, n_spoof=80, dev_fraction=0.375)) == {
            "train": (50, 50),
            "dev": (30, 30),
        }
        counts = split_counts(SynthConfig(n_bonafide=5, n_spoof=5, n_eval_bonafide=2, n_eval_spoof=3))
        assert counts["eval"] == (2, 3)

    def test_empty_split_is_rejected(self):
        with pytest.raises(ConfigurationError, match="dev split"):
            split_counts(SynthConfig(n_bonafide=1, n_spoof=1))

    def test_plan_is_speaker_disjoint(self):
        planned = plan_corpus(SynthConfig(n_eval_bonafide=4, n_eval_spoof=4))
        speakers = {}
        for item in planned:
            speakers.setdefault(item.split, set()).add(item.trial.speaker_id)
        assert speakers["train"].isdisjoint(speakers["dev"])
        assert speakers["train"].isdisjoint(speakers["eval"])
        assert speakers["dev"].isdisjoint(speakers["eval"])
        assert len({item.trial.utt_id for item in planned}) == len(planned)
        assert planned[0].trial.utt_id == "SG_T_0000000"
        assert {item.trial.attack_id for item in planned if item.split == "eval" and item.trial.key == SPOOF} == {"RP02"}

    def test_build_writes_every_file_and_is_reproducible(self, tmp_path):
        cfg = SynthConfig(seed=3, n_bonafide=50, n_spoof=50)
        protocols = build_corpus(cfg, tmp_path / "first")
        build_corpus(cfg, tmp_path / "second")

        assert sum(len(trials) for trials in protocols.values()) == 100
        wavs = sorted((tmp_path / "first" / "wav").glob("*.wav"))
        assert len(wavs) == 100
        assert sorted(corpus_outputs(cfg, tmp_path / "first")) == sorted(
            [tmp_path / "first" / "train.txt", tmp_path / "first" / "dev.txt", *wavs],
        )
        for path in [tmp_path / "first" / "train.txt", tmp_path / "first" / "dev.txt", *wavs]:
            twin = tmp_path / "second" / path.relative_to(tmp_path / "first")
            assert path.read_bytes() == twin.read_bytes()

        assert parse_protocol(tmp_path / "first" / "dev.txt") == protocols["dev"]
        assert label_counts(protocols["dev"]) == {BONAFIDE: 20, SPOOF: 20}
