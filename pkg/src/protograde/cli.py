"""Command-line interface.

Subcommands: gen-synth, class-weights, train, eval, project.  Exit codes:
0 success, 1 usage error, 2 data/validation error, 3 numeric failure.  Any
failure prints a single-line diagnostic to stderr; outputs are computed
fully before files are written, so failed runs leave no partial outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import SynthParams, gen_synthetic, load_dataset, save_dataset, class_frequencies
from .errors import DataError, NumericError, ProtogradeError, UsageError
from .loss import ClassWeightScheme
from .metrics import evaluate, write_confusion_csv, write_group_json, write_metrics_json
from .model import load_checkpoint, save_checkpoint
from .presets import synth_preset, synth_train_config
from .trainer import TrainConfig, train

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as UsageError."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="protograde",
                     description="Prototype-based ordinal grading over pooled embeddings.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_gen = sub.add_parser("gen-synth", help="generate a synthetic .embl dataset",
                           description="Generate the bundled synthetic benchmark "
                                       "(or a custom variant from --config).")
    p_gen.add_argument("--out", required=True, help="output .embl path")
    p_gen.add_argument("--config", help="JSON file of generator parameters")
    p_gen.add_argument("--seed", type=int, default=None,
                       help=f"generator seed (default {DEFAULT_SEED})")

    p_w = sub.add_parser("class-weights", help="compute loss re-weighting vectors",
                         description="Compute per-level loss weights from split counts.")
    p_w.add_argument("--data", required=True, help="input .embl path")
    p_w.add_argument("--scheme", choices=["none", "alpha", "inverse"], default="inverse")
    p_w.add_argument("--alpha", type=float, default=0.5,
                     help="damping exponent for --scheme alpha (default 0.5)")
    p_w.add_argument("--split", choices=["train", "valid", "test"], default="train")
    p_w.add_argument("--out", help="optional output JSON path (also printed)")
    p_w.add_argument("--seed", type=int, default=None)

    p_train = sub.add_parser("train", help="train a head on an .embl dataset",
                             description="Train and write checkpoint + history.")
    p_train.add_argument("--config", help="training config JSON (default: bundled preset)")
    p_train.add_argument("--data", required=True, help="input .embl path")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
    p_train.add_argument("--warm-start", help="checkpoint to copy projection weights from")
    p_train.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a split",
                            description="Write metrics.json, confusion.csv, "
                                        "group_accuracy.json for one split.")
    p_eval.add_argument("--model", required=True, help="checkpoint .ckpt.json path")
    p_eval.add_argument("--data", required=True, help="input .embl path")
    p_eval.add_argument("--split", choices=["train", "valid", "test"], default="test")
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_proj = sub.add_parser("project", help="export 2-D projected embeddings",
                            description="Project embeddings onto their top-2 principal "
                                        "directions and write coordinates as CSV.")
    p_proj.add_argument("--model", required=True, help="checkpoint .ckpt.json path")
    p_proj.add_argument("--data", required=True, help="input .embl path")
    p_proj.add_argument("--split", choices=["train", "valid", "test"], default="test")
    p_proj.add_argument("--out", required=True, help="output directory")
    p_proj.add_argument("--seed", type=int, default=None)
    p_proj.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def principal_directions(X: np.ndarray, num_directions: int = 2, seed: int = 0,
                         iterations: int = 300) -> np.ndarray:
    """Top principal directions of centered X via seeded power iteration.

    Deflation keeps successive directions orthogonal; the sign is fixed so
    the largest-magnitude component is positive.
    """
    X = np.asarray(X, dtype=np.float64)
    cov = np.cov(X, rowvar=False, bias=True)
    cov = np.atleast_2d(cov)
    rng = np.random.default_rng(seed)
    found: list[np.ndarray] = []
    for _ in range(num_directions):
        v = rng.normal(size=cov.shape[0])
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            w = cov @ v
            for u in found:
                w -= (w @ u) * u
            norm = np.linalg.norm(w)
            if norm < 1e-300:
                # Degenerate remainder (rank-deficient data): keep any unit
                # vector orthogonal to what we already have.
                break
            v = w / norm
        for u in found:
            v -= (v @ u) * u
        norm = np.linalg.norm(v)
        v = v / norm if norm > 0 else v
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        found.append(v)
    return np.stack(found)


def _load_synth_params(path, seed: int) -> SynthParams:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise DataError(f"{path}: generator config must be a JSON object")
    base = synth_preset(seed)
    allowed = {"dim", "counts", "gap_positions", "noise_sigma", "seed",
               "level_names", "group_tags"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise DataError(f"unknown generator config keys: {', '.join(unknown)}")
    settings = {
        "dim": base.dim,
        "counts": base.counts,
        "gap_positions": base.gap_positions,
        "noise_sigma": base.noise_sigma,
        "seed": seed,
        "level_names": base.level_names,
        "group_tags": base.group_tags,
    }
    settings.update(doc)
    return SynthParams(**settings)


def _cmd_gen_synth(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    params = _load_synth_params(args.config, seed) if args.config else synth_preset(seed)
    if args.seed is not None and params.seed != args.seed:
        params = dataclasses.replace(params, seed=args.seed)
    dataset = gen_synthetic(params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out)
    print(f"wrote {out} ({len(dataset)} records, dim={dataset.dim})")
    return 0


def _cmd_class_weights(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    dataset = load_dataset(args.data)
    counts, _ = class_frequencies(dataset, args.split)
    scheme = ClassWeightScheme(args.scheme, args.alpha if args.scheme == "alpha" else None)
    weights = scheme.weights_for(counts)
    doc = {
        "scheme": args.scheme,
        "alpha": args.alpha if args.scheme == "alpha" else None,
        "weights": [float(f"{w:.12g}") for w in weights],
        "split": args.split,
        "counts": [int(c) for c in counts],
        "levels": list(dataset.schema.names),
        "seed": seed,
    }
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _cmd_train(args) -> int:
    config = TrainConfig.from_json(args.config) if args.config else synth_train_config()
    if args.seed is not None:
        config = TrainConfig.from_dict({**config.to_dict(), "seed": args.seed})
    dataset = load_dataset(args.data)
    warm = load_checkpoint(args.warm_start) if args.warm_start else None
    model, history = train(config, dataset, warm_start=warm)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out / "model.ckpt.json", config=config.to_dict(), seed=config.seed)
    history_doc = history.to_dict()
    history_doc["seed"] = config.seed
    with open(out / "model.history.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(history_doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    if not args.no_figures:
        from .report import plot_history
        plot_history(history, out / "history.png")
    print(f"trained {config.head} for {len(history.epochs)} epochs "
          f"(best epoch {history.best_epoch}, "
          f"valid macro acc {history.best_val_macro_acc:.4f}); wrote {out}")
    return 0


def _cmd_eval(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    model = load_checkpoint(args.model)
    dataset = load_dataset(args.data)
    report = evaluate(model, dataset, args.split, seed=seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_json(report, out / "metrics.json")
    write_confusion_csv(report, out / "confusion.csv")
    write_group_json(report, out / "group_accuracy.json")
    if not args.no_figures:
        from .report import plot_confusion, plot_group_accuracy
        plot_confusion(report, out / "confusion.png")
        if report.group_acc:
            plot_group_accuracy(report, out / "group_accuracy.png")
    pcc = "undefined" if report.pcc is None else f"{report.pcc:.4f}"
    print(f"eval {args.split}: acc {report.acc:.4f}, macro acc {report.acc_macro:.4f}, "
          f"rmse {report.rmse:.4f}, pcc {pcc}; wrote {out}")
    return 0


def _cmd_project(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    model = load_checkpoint(args.model)
    dataset = load_dataset(args.data)
    if dataset.dim != model.dim:
        raise DataError(
            f"dataset embedding dim {dataset.dim} does not match model dim {model.dim}")
    from .dataset import split_matrix
    X, y, _, ids = split_matrix(dataset, args.split)
    detail = model.forward_detail(X)
    projected = detail["Xp"]
    preds = np.argmax(detail["probs"], axis=1)
    directions = principal_directions(projected, 2, seed)
    coords = (projected - projected.mean(axis=0)) @ directions.T

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["id,label,pred,x,y"]
    for i, rid in enumerate(ids):
        lines.append(f"{rid},{int(y[i])},{int(preds[i])},{coords[i, 0]:.12g},{coords[i, 1]:.12g}")
    with open(out / "projection.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    if not args.no_figures:
        from .report import plot_projection
        plot_projection(coords, y, preds, model.schema.names, out / "projection.png")
    print(f"projected {len(ids)} {args.split} records onto 2 principal directions; wrote {out}")
    return 0


_COMMANDS = {
    "gen-synth": _cmd_gen_synth,
    "class-weights": _cmd_class_weights,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "project": _cmd_project,
}


def run(argv) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (see --help)")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ProtogradeError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
