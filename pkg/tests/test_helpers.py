import io
import json

import numpy as np
import pytest
from rich.console import Console

from spoofguard.errors import TextEncodingError
from spoofguard.helpers.file_utils import (
    read_file,
    read_key_value_file,
    remove_partial_outputs,
    write_bytes_atomic,
    write_on_run_log,
)
from spoofguard.helpers.general_utils import format_duration, resolve_max_workers
from spoofguard.helpers.managers.live_manager import LiveManager, initialize_managers
from spoofguard.helpers.managers.log_manager import LoggerTable
from spoofguard.helpers.managers.progress_manager import ProgressManager
from spoofguard.neuralnet import FeatureDataset, NetworkConfig, TrainRunConfig, build_network, train


def quiet_live_manager() -> LiveManager:
    return initialize_managers("Training", "Epoch", console=Console(file=io.StringIO()))


class TestFileUtils:
    def test_key_value_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\n\nn-fft = 1024\nout=feats # trailing\n")
        assert read_key_value_file(path) == {"n_fft": "1024", "out": "feats"}

    def test_key_value_file_rejects_bare_words(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("pgm\n")
        with pytest.raises(ValueError, match=":1:"):
            read_key_value_file(path)

    def test_read_file_reports_the_undecodable_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_bytes(b"a=1\nb=\xff\nc=3\n")
        with pytest.raises(TextEncodingError, match="run.cfg:2: not valid UTF-8") as excinfo:
            read_file(path)
        assert excinfo.value.line_number == 2

    def test_read_file_splits_lines(self, tmp_path):
        path = tmp_path / "notes.txt"
        path.write_text("café\nb\n", encoding="utf-8")
        assert read_file(path) == ["café", "b"]

    def test_atomic_write_leaves_no_temporary(self, tmp_path):
        target = tmp_path / "blob.bin"
        write_bytes_atomic(target, b"abc")
        write_bytes_atomic(target, b"de")
        assert target.read_bytes() == b"de"
        assert [p.name for p in tmp_path.iterdir()] == ["blob.bin"]

    def test_remove_partial_outputs(self, tmp_path):
        written = tmp_path / "written.mels"
        written.write_bytes(b"x")
        remove_partial_outputs([written, tmp_path / "never-written.mels"])
        assert not written.exists()

    def test_run_log_appends_json_lines(self, tmp_path):
        write_on_run_log(tmp_path, {"command": "synth", "status": "ok"})
        log_path = write_on_run_log(tmp_path, {"command": "score", "status": "failed"})
        records = [json.loads(line) for line in log_path.read_text().splitlines()]
        assert [r["command"] for r in records] == ["synth", "score"]


class TestGeneralUtils:
    def test_thread_override_only_lowers(self, monkeypatch):
        monkeypatch.delenv("SPOOFGUARD_THREADS", raising=False)
        default = resolve_max_workers()
        monkeypatch.setenv("SPOOFGUARD_THREADS", "3")
        assert resolve_max_workers() == min(3, default)
        monkeypatch.setenv("SPOOFGUARD_THREADS", "64")
        assert resolve_max_workers() == default
        monkeypatch.setenv("SPOOFGUARD_THREADS", "1")
        assert resolve_max_workers() == 1
        monkeypatch.setenv("SPOOFGUARD_THREADS", "0")
        assert resolve_max_workers() == 1

    def test_bad_thread_override_falls_back(self, monkeypatch):
        monkeypatch.setenv("SPOOFGUARD_THREADS", "many")
        assert 1 <= resolve_max_workers() <= 4

    def test_format_duration(self):
        assert format_duration(3725) == "01 hrs 02 mins 05 secs"


class TestManagers:
    def test_logger_keeps_recent_rows(self):
        logger = LoggerTable(max_rows=2)
        for index in range(3):
            logger.log("Epoch finished", f"epoch {index}")
        assert [row[2] for row in logger.row_buffer] == ["epoch 1", "epoch 2"]
        assert len(logger.history) == 3

    def test_finished_unit_is_hidden(self):
        progress = ProgressManager("Scoring", "Batch")
        unit_id = progress.start_unit(1, total=2)
        progress.advance_unit(unit_id)
        assert progress.unit_progress.tasks[unit_id].visible
        progress.advance_unit(unit_id)
        assert not progress.unit_progress.tasks[unit_id].visible

    def test_training_reports_each_epoch(self, rng):
        live_manager = quiet_live_manager()
        labels = np.array([0, 1, 0, 1])
        inputs = rng.uniform(0, 1, (4, 1, 64, 64)).astype(np.float32)
        train(
            build_network(NetworkConfig.from_preset("tiny")),
            FeatureDataset(inputs, labels),
            TrainRunConfig(epochs=2, batch_size=4),
            live_manager=live_manager,
        )
        events = [event for event, _ in live_manager.logger.history]
        assert events.count("Epoch finished") == 2
        stage = live_manager.progress_manager.stage_progress.tasks[0]
        assert stage.completed == 2
        assert all(not unit.visible for unit in live_manager.progress_manager.unit_progress.tasks)

    def test_failed_run_ends_with_an_error_row(self):
        live_manager = quiet_live_manager()
        live_manager.stop("failed")
        assert live_manager.logger.history[-1][0] == "Run failed"
        assert live_manager.logger.row_buffer[-1][3] == "bold red"
