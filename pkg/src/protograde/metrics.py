"""Evaluation metrics, reports, and the delimited/JSON writers.

The suite covers exact and adjacent accuracy, macro (per-level-averaged)
variants, RMSE on the ordinal indices, Pearson correlation, the confusion
matrix, and per-group accuracy.  Definitions that matter for comparisons:

* adjacent accuracy (adj): fraction of predictions within one ordinal index
  of the truth, all level pairs treated uniformly;
* macro accuracy (acc_macro): mean per-level recall over the levels that
  appear in the truths;
* macro RMSE (rmse_macro): mean of per-level RMSE over the same levels;
* RMSE/PCC act on the raw ordinal indices 0..J-1, and PCC is reported as
  None whenever either side has zero variance instead of silently 0.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, split_matrix
from .errors import DataError
from .model import HeadModel

# Formatting used for every float written to report files: 12 significant
# digits keeps the values diff-stable across platforms.
_SIG_DIGITS = 12


def _round_sig(value: float) -> float:
    return float(f"{value:.{_SIG_DIGITS}g}")


def _check_pair(preds, truths, num_levels: int | None = None):
    p = np.asarray(preds)
    t = np.asarray(truths)
    if p.ndim != 1 or p.shape != t.shape:
        raise DataError(f"predictions {p.shape} and truths {t.shape} must be equal-length vectors")
    if p.size == 0:
        raise DataError("metrics require at least one prediction")
    if num_levels is not None:
        for name, arr in (("prediction", p), ("truth", t)):
            if np.any(arr < 0) or np.any(arr >= num_levels):
                raise DataError(f"{name} index outside [0, {num_levels})")
    return p.astype(np.int64), t.astype(np.int64)


def confusion_matrix(preds, truths, num_levels: int) -> np.ndarray:
    """Counts matrix with rows = true level, columns = predicted level."""
    p, t = _check_pair(preds, truths, num_levels)
    mat = np.zeros((num_levels, num_levels), dtype=np.int64)
    np.add.at(mat, (t, p), 1)
    return mat


def pearson(preds, truths) -> float | None:
    """Pearson correlation of the ordinal indices; None when undefined."""
    p = np.asarray(preds, dtype=np.float64)
    t = np.asarray(truths, dtype=np.float64)
    dp = p - p.mean()
    dt = t - t.mean()
    denom = np.sqrt((dp @ dp) * (dt @ dt))
    if denom == 0.0:
        return None
    return float(dp @ dt / denom)


def standard_metrics(preds, truths) -> dict:
    """acc, adjacent acc, rmse, and pcc over ordinal level indices."""
    p, t = _check_pair(preds, truths)
    diff = p - t
    return {
        "acc": float(np.mean(diff == 0)),
        "adj": float(np.mean(np.abs(diff) <= 1)),
        "rmse": float(np.sqrt(np.mean(diff.astype(np.float64) ** 2))),
        "pcc": pearson(p, t),
    }


def macro_metrics(preds, truths) -> dict:
    """Per-level means over levels present in the truths.

    acc_macro is the mean per-level recall; rmse_macro the mean per-level
    RMSE.  Absent levels are skipped, not counted as zero.
    """
    p, t = _check_pair(preds, truths)
    recalls, rmses = [], []
    for level in np.unique(t):
        diff = (p[t == level] - level).astype(np.float64)
        recalls.append(float(np.mean(diff == 0)))
        rmses.append(float(np.sqrt(np.mean(diff ** 2))))
    return {
        "acc_macro": float(np.mean(recalls)),
        "rmse_macro": float(np.mean(rmses)),
    }


def group_accuracy(preds, truths, groups) -> dict:
    """Exact accuracy per group tag; untagged records pool under "unknown"."""
    p, t = _check_pair(preds, truths)
    tags = list(groups)
    if len(tags) != p.size:
        raise DataError(f"groups length {len(tags)} does not match predictions {p.size}")
    hits_by_tag: dict[str, list] = {}
    for pi, ti, tag in zip(p, t, tags):
        hits_by_tag.setdefault("unknown" if tag is None else str(tag), []).append(pi == ti)
    return {tag: float(np.mean(hits)) for tag, hits in sorted(hits_by_tag.items())}


@dataclass(frozen=True)
class EvalReport:
    """Everything a single-split evaluation produces."""

    split: str
    num_samples: int
    acc: float
    adj: float
    acc_macro: float
    rmse: float
    rmse_macro: float
    pcc: float | None
    confusion: np.ndarray
    group_acc: dict
    per_level: dict
    level_names: tuple
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def scalar_metrics(self) -> dict:
        return {
            "acc": self.acc,
            "adj": self.adj,
            "acc_macro": self.acc_macro,
            "rmse": self.rmse,
            "rmse_macro": self.rmse_macro,
            "pcc": self.pcc,
        }


def report_from_predictions(preds, truths, groups, level_names, split: str,
                            seed: int | None = None) -> EvalReport:
    """Assemble the full metric suite from already-computed predictions."""
    names = tuple(level_names)
    J = len(names)
    p, t = _check_pair(preds, truths, J)
    scalars = standard_metrics(p, t)
    scalars.update(macro_metrics(p, t))
    per_level = {}
    for level, name in enumerate(names):
        mask = t == level
        per_level[name] = {
            "support": int(mask.sum()),
            "recall": float(np.mean(p[mask] == level)) if mask.any() else None,
        }
    return EvalReport(
        split=split,
        num_samples=int(p.size),
        acc=scalars["acc"],
        adj=scalars["adj"],
        acc_macro=scalars["acc_macro"],
        rmse=scalars["rmse"],
        rmse_macro=scalars["rmse_macro"],
        pcc=scalars["pcc"],
        confusion=confusion_matrix(p, t, J),
        group_acc=group_accuracy(p, t, groups),
        per_level=per_level,
        level_names=names,
        seed=seed,
    )


def evaluate(model: HeadModel, dataset: Dataset, split: str,
             seed: int | None = None) -> EvalReport:
    """Run the full metric suite for one split of a dataset."""
    if tuple(dataset.schema.names) != tuple(model.schema.names):
        raise DataError(
            f"dataset levels {dataset.schema.names} do not match model levels "
            f"{model.schema.names}")
    X, y, groups, _ = split_matrix(dataset, split)
    if len(y) == 0:
        raise DataError(f"split {split!r} has no records to evaluate")
    if X.shape[1] != model.dim:
        raise DataError(
            f"dataset embedding dim {X.shape[1]} does not match model dim {model.dim}")
    preds = model.predict_batch(X)
    return report_from_predictions(preds, y, groups, model.schema.names, split, seed)


# -- writers -----------------------------------------------------------------

def _jsonable(value):
    if value is None:
        return None
    if isinstance(value, float):
        return _round_sig(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def write_metrics_json(report: EvalReport, path) -> None:
    doc = {
        "split": report.split,
        "num_samples": report.num_samples,
        "levels": list(report.level_names),
        "metrics": _jsonable(report.scalar_metrics()),
        "per_level": _jsonable(report.per_level),
    }
    if report.seed is not None:
        doc["seed"] = report.seed
    doc.update(_jsonable(report.extra))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_confusion_csv(report: EvalReport, path) -> None:
    """Confusion counts as CSV: first row/column carry the level names."""
    names = list(report.level_names)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["truth\\pred"] + names)
        for i, name in enumerate(names):
            writer.writerow([name] + [int(v) for v in report.confusion[i]])


def write_group_json(report: EvalReport, path) -> None:
    doc = {
        "split": report.split,
        "group_accuracy": _jsonable(report.group_acc),
    }
    if report.seed is not None:
        doc["seed"] = report.seed
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
