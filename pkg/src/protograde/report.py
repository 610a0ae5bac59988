"""Figure rendering for training and evaluation reports.

All figures are written as PNG files next to the delimited outputs.  The
Agg backend and pinned PNG metadata keep renders byte-deterministic for
identical inputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import EvalReport
from .trainer import TrainHistory

_DPI = 120
# Overriding the default Software chunk keeps PNG bytes stable across
# matplotlib versions and repeated runs.
_PNG_METADATA = {"Software": "protograde"}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def plot_confusion(report: EvalReport, path) -> None:
    """Heatmap of the confusion matrix with per-cell counts."""
    mat = np.asarray(report.confusion, dtype=np.float64)
    names = list(report.level_names)
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    im = ax.imshow(mat, cmap="Blues")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted level")
    ax.set_ylabel("true level")
    ax.set_title(f"Confusion matrix ({report.split}, n={report.num_samples})")
    threshold = mat.max() / 2 if mat.max() > 0 else 0.5
    for i in range(len(names)):
        for j in range(len(names)):
            color = "white" if mat[i, j] > threshold else "black"
            ax.text(j, i, f"{int(mat[i, j])}", ha="center", va="center", color=color)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    _save(fig, path)


def plot_history(history: TrainHistory, path) -> None:
    """Training loss and validation macro accuracy per epoch."""
    epochs = [e.epoch for e in history.epochs]
    losses = [e.train_loss for e in history.epochs]
    macro = [e.val_macro_acc for e in history.epochs]
    fig, ax_loss = plt.subplots(figsize=(6.4, 4.0))
    ax_loss.plot(epochs, losses, color="tab:red", label="train loss")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss", color="tab:red")
    ax_loss.tick_params(axis="y", labelcolor="tab:red")
    ax_acc = ax_loss.twinx()
    ax_acc.plot(epochs, macro, color="tab:blue", label="valid macro acc")
    ax_acc.set_ylabel("validation macro accuracy", color="tab:blue")
    ax_acc.tick_params(axis="y", labelcolor="tab:blue")
    ax_acc.set_ylim(0.0, 1.05)
    if history.best_epoch >= 0:
        ax_acc.axvline(history.best_epoch, color="gray", linestyle=":",
                       label=f"best epoch {history.best_epoch}")
    ax_loss.set_title("Training history")
    fig.tight_layout()
    _save(fig, path)


def plot_group_accuracy(report: EvalReport, path) -> None:
    """Bar chart of exact accuracy per group tag."""
    tags = list(report.group_acc)
    values = [report.group_acc[t] for t in tags]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(tags) + 2.0), 3.8))
    bars = ax.bar(range(len(tags)), values, color="tab:blue")
    ax.bar_label(bars, fmt="%.2f")
    ax.set_xticks(range(len(tags)), tags, rotation=30, ha="right")
    ax.set_ylim(0.0, 1.1)
    ax.set_ylabel("accuracy")
    ax.set_title(f"Per-group accuracy ({report.split})")
    fig.tight_layout()
    _save(fig, path)


def plot_projection(coords: np.ndarray, labels, preds, level_names, path) -> None:
    """Scatter of the 2-D projected embeddings; mispredictions ringed."""
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    preds = np.asarray(preds)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    cmap = plt.get_cmap("viridis", len(level_names))
    for level, name in enumerate(level_names):
        mask = labels == level
        if not mask.any():
            continue
        ax.scatter(coords[mask, 0], coords[mask, 1], s=28, color=cmap(level),
                   label=name, alpha=0.85)
    wrong = preds != labels
    if wrong.any():
        ax.scatter(coords[wrong, 0], coords[wrong, 1], s=90, facecolors="none",
                   edgecolors="tab:red", linewidths=1.2, label="mispredicted")
    ax.set_xlabel("principal direction 1")
    ax.set_ylabel("principal direction 2")
    ax.set_title("Projected embeddings")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)
