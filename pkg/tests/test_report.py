"""Tests for figure rendering: files exist, non-empty, byte-deterministic."""

import numpy as np

from protograde import report_from_predictions
from protograde.report import (
    plot_confusion,
    plot_group_accuracy,
    plot_history,
    plot_projection,
)
from protograde.trainer import EpochRecord, TrainHistory


def sample_report():
    rng = np.random.default_rng(0)
    truths = rng.integers(0, 4, size=40)
    preds = np.where(rng.random(40) < 0.6, truths, rng.integers(0, 4, size=40))
    groups = [f"g{i % 3}" for i in range(40)]
    return report_from_predictions(preds, truths, groups,
                                   ("L0", "L1", "L2", "L3"), "test")


def sample_history():
    epochs = [EpochRecord(i, 2.0 / (i + 1), 0.4 + 0.05 * i, 0.5 + 0.04 * i)
              for i in range(8)]
    return TrainHistory(epochs=epochs, best_epoch=7, best_val_macro_acc=0.75,
                        stopped_early=False)


class TestFigures:
    def test_confusion_png(self, tmp_path):
        path = tmp_path / "confusion.png"
        plot_confusion(sample_report(), path)
        data = path.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 1000

    def test_history_png(self, tmp_path):
        path = tmp_path / "history.png"
        plot_history(sample_history(), path)
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_group_accuracy_png(self, tmp_path):
        path = tmp_path / "groups.png"
        plot_group_accuracy(sample_report(), path)
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_projection_png(self, tmp_path):
        rng = np.random.default_rng(1)
        coords = rng.normal(size=(30, 2))
        labels = rng.integers(0, 3, size=30)
        preds = rng.integers(0, 3, size=30)
        path = tmp_path / "proj.png"
        plot_projection(coords, labels, preds, ("A", "B", "C"), path)
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_byte_determinism(self, tmp_path):
        report = sample_report()
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        plot_confusion(report, a)
        plot_confusion(report, b)
        assert a.read_bytes() == b.read_bytes()
        history = sample_history()
        plot_history(history, a)
        plot_history(history, b)
        assert a.read_bytes() == b.read_bytes()
