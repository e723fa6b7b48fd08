"""Tests for the run log and the metrics track."""
import json

import pytest
from rich.console import Console

from flowcodec import FlowCodecError, LogLevel, MetricsTrack, RunLog
from flowcodec.track import read_metrics_csv


def _console():
    return Console(record=True, width=200, force_terminal=False)


class TestLogLevels:
    """Tests for level validation and console filtering."""

    def test_validate_normalizes_case(self):
        """Level names are case-insensitive."""
        assert LogLevel.validate("WARN") == "warn"
        assert LogLevel.validate("Debug") == "debug"

    def test_validate_rejects_unknown_level(self):
        """Anything outside the five levels is a ValueError."""
        with pytest.raises(ValueError, match="Invalid log level"):
            LogLevel.validate("verbose")

    def test_console_filters_below_level(self):
        """Records under the threshold are kept but not printed."""
        console = _console()
        run_log = RunLog(console=console, level="warn")
        run_log.log("quiet", level="info")
        run_log.log("loud", level="error")
        text = console.export_text()
        assert "loud" in text
        assert "quiet" not in text
        assert [r["message"] for r in run_log.records] == ["quiet", "loud"]

    def test_level_from_runtime(self):
        """Without an explicit level the log follows Runtime.log_level."""
        from flowcodec.config import Runtime

        Runtime.log_level = "error"
        assert RunLog(console=_console()).level == "error"


class TestRunLogRecords:
    """Tests for record structure and the JSONL sink."""

    def test_record_fields(self):
        """Every record carries ts, level, message and metadata."""
        run_log = RunLog(console=_console(), clock=lambda: 12.5)
        run_log.log("started", metadata={"preset": "tiny"})
        assert run_log.records == [
            {"ts": 12.5, "level": "info", "message": "started", "metadata": {"preset": "tiny"}}
        ]

    def test_jsonl_file(self, tmp_path):
        """A bound log appends one JSON object per record, creating directories."""
        path = tmp_path / "logs" / "run.jsonl"
        run_log = RunLog(path, console=_console(), level="fatal", clock=lambda: 1.0)
        run_log.log("one")
        run_log.log("two", level="debug", metadata={"epoch": 3})
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert [entry["message"] for entry in lines] == ["one", "two"]
        assert lines[1]["level"] == "debug"
        assert lines[1]["metadata"] == {"epoch": 3}

    def test_numpy_values_serialize(self, tmp_path):
        """numpy scalars in metadata are written as plain numbers."""
        import numpy as np

        path = tmp_path / "run.jsonl"
        RunLog(path, console=_console()).log("m", metadata={"psnr": np.float32(31.5)})
        assert json.loads(path.read_text())["metadata"]["psnr"] == 31.5


class TestLogBuilder:
    """Tests for the fluent builder form."""

    def test_builder_levels(self):
        """log() without a message returns a builder with one method per level."""
        run_log = RunLog(console=_console())
        for level in ["debug", "info", "warn", "error", "fatal"]:
            getattr(run_log.log(), level)(f"{level} message")
        assert [r["level"] for r in run_log.records] == ["debug", "info", "warn", "error", "fatal"]

    def test_builder_merges_metadata(self):
        """Keyword metadata on the level method wins over log(metadata=...)."""
        run_log = RunLog(console=_console())
        run_log.log(metadata={"epoch": 1, "lr": 0.1}).info("epoch done", lr=0.05)
        assert run_log.records[0]["metadata"] == {"epoch": 1, "lr": 0.05}

    def test_markup_is_escaped(self):
        """Messages print literally, rich markup included."""
        console = _console()
        RunLog(console=console, level="debug").log("[bold]not markup[/bold]")
        assert "[bold]not markup[/bold]" in console.export_text()


class TestMetricsTrack:
    """Tests for the per-epoch CSV track."""

    def test_in_memory_track(self):
        """Without a path rows stay in memory with their raw values."""
        track = MetricsTrack()
        track.append(epoch=0, lr=5e-4, loss=0.1, psnr=20.0).append(epoch=1, lr=4e-4, loss=0.05, psnr=22.0)
        assert len(track) == 2
        assert track.read()[1] == {"epoch": 1, "lr": 4e-4, "loss": 0.05, "psnr": 22.0}

    def test_csv_round_trip(self, tmp_path):
        """Flushed rows are on disk with a header and read back as numbers."""
        path = tmp_path / "metrics.csv"
        track = MetricsTrack(path)
        track.append(epoch=0, lr=5e-4, loss=0.125, psnr=19.5)
        assert track.flush() == 1
        track.append(epoch=1, lr=2.5e-4, loss=0.0625, psnr=23.25)
        assert track.flush() == 1
        assert path.read_text().splitlines()[0] == "epoch,lr,loss,psnr"
        assert read_metrics_csv(path) == [
            {"epoch": 0, "lr": 5e-4, "loss": 0.125, "psnr": 19.5},
            {"epoch": 1, "lr": 2.5e-4, "loss": 0.0625, "psnr": 23.25},
        ]

    def test_floats_written_exactly(self, tmp_path):
        """Floats use repr so they read back bit-identical."""
        path = tmp_path / "metrics.csv"
        MetricsTrack(path).append(epoch=0, lr=0.1 + 0.2, loss=1 / 3, psnr=None).flush()
        row = read_metrics_csv(path)[0]
        assert row["lr"] == 0.1 + 0.2
        assert row["loss"] == 1 / 3
        assert row["psnr"] is None

    def test_unknown_column_rejected(self):
        """append() refuses keys outside the declared columns."""
        with pytest.raises(FlowCodecError, match="unknown column"):
            MetricsTrack().append(epoch=0, accuracy=0.9)

    def test_empty_flush(self, tmp_path):
        """Flushing nothing writes nothing."""
        track = MetricsTrack(tmp_path / "m.csv")
        assert track.flush() == 0
        assert not (tmp_path / "m.csv").exists()
