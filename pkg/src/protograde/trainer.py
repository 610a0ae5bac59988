"""Mini-batch training loop with AdamW and early stopping.

Training is fully deterministic for a fixed config and dataset: shuffling,
initialization, and clustering all derive from the config seed, and the
arithmetic is plain float64 numpy.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import Dataset, class_frequencies, split_matrix
from .errors import DataError
from .loss import WEIGHTING_KINDS, ClassWeightScheme, loss_and_grads
from .model import (AGGREGATIONS, HEADS, PROJECTIONS, PROTO_INITS, HeadModel,
                    init_prototypes)


@dataclass(frozen=True)
class TrainConfig:
    """Everything the training loop needs, JSON-serializable."""

    head: str = "proto_sed"
    projection: str = "linear"
    proj_dim: int | None = None
    hidden_width: int = 256
    aggregation: str = "mean_sim"
    proto_init: str = "class_kmeans"
    num_prototypes: int = 3
    weighting: str = "none"
    alpha: float = 0.5
    learning_rate: float = 5e-5
    batch_size: int = 8
    max_epochs: int = 100
    patience: int = 10
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 42
    normalize_inputs: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.head in HEADS, f"head must be one of {HEADS}, got {self.head!r}"),
            (self.projection in PROJECTIONS,
             f"projection must be one of {PROJECTIONS}, got {self.projection!r}"),
            (self.aggregation in AGGREGATIONS,
             f"aggregation must be one of {AGGREGATIONS}, got {self.aggregation!r}"),
            (self.proto_init in PROTO_INITS,
             f"proto_init must be one of {PROTO_INITS}, got {self.proto_init!r}"),
            (self.weighting in WEIGHTING_KINDS,
             f"weighting must be one of {WEIGHTING_KINDS}, got {self.weighting!r}"),
            (self.num_prototypes >= 1, "num_prototypes must be at least 1"),
            (self.hidden_width >= 1, "hidden_width must be at least 1"),
            (self.proj_dim is None or self.proj_dim >= 1, "proj_dim must be at least 1"),
            (self.learning_rate > 0, "learning_rate must be positive"),
            (self.batch_size >= 1, "batch_size must be at least 1"),
            (self.max_epochs >= 1, "max_epochs must be at least 1"),
            (self.patience >= 0, "patience must be non-negative"),
            (self.weight_decay >= 0, "weight_decay must be non-negative"),
            (0 < self.beta1 < 1, "beta1 must lie in (0, 1)"),
            (0 < self.beta2 < 1, "beta2 must lie in (0, 1)"),
            (self.epsilon > 0, "epsilon must be positive"),
            (0.0 <= self.alpha <= 1.0, "alpha must lie in [0, 1]"),
        ]
        for ok, message in checks:
            if not ok:
                raise DataError(f"invalid training config: {message}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(doc) - known)
        if unknown:
            raise DataError(f"unknown training config keys: {', '.join(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: not valid JSON ({exc.msg})") from None
        if not isinstance(doc, dict):
            raise DataError(f"{path}: training config must be a JSON object")
        return cls.from_dict(doc)


class AdamW(object):
    """AdamW with decoupled weight decay, updating parameters in place."""

    def __init__(self, params: dict, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8, weight_decay: float = 0.0):
        self.params = params
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in params.items()}
        self.v = {name: np.zeros_like(p) for name, p in params.items()}

    def step(self, grads: dict) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for name, p in self.params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * np.square(g)
            update = self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.epsilon)
            if self.weight_decay:
                update = update + self.lr * self.weight_decay * p
            p -= update


@dataclass(frozen=True)
class EpochRecord:
    """One epoch's progress snapshot."""

    epoch: int
    train_loss: float
    val_macro_acc: float
    val_acc: float


@dataclass
class TrainHistory:
    """Full per-epoch history plus the early-stopping outcome."""

    epochs: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_macro_acc: float = float("-inf")
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return {
            "epochs": [asdict(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_val_macro_acc": self.best_val_macro_acc,
            "stopped_early": self.stopped_early,
        }


def _macro_accuracy(preds: np.ndarray, truths: np.ndarray, num_levels: int) -> float:
    recalls = []
    for level in range(num_levels):
        mask = truths == level
        if mask.any():
            recalls.append(float(np.mean(preds[mask] == level)))
    return float(np.mean(recalls))


def warm_start_model(model: HeadModel, source: HeadModel, dataset: Dataset,
                     rng: np.random.Generator, proto_init: str) -> None:
    """Copy projection weights from a donor model, then re-seed prototypes.

    The donor's projection must match shape-for-shape; prototypes are
    re-initialized under the copied projection rather than copied, since the
    donor may use a different head or prototype count.
    """
    if source.projection.kind != model.projection.kind:
        raise DataError(
            f"warm start projection kind {source.projection.kind!r} does not match "
            f"target {model.projection.kind!r}")
    for name, arr in model.projection.params.items():
        donor = source.projection.params.get(name)
        if donor is None or donor.shape != arr.shape:
            raise DataError(
                f"warm start parameter {name!r} has shape "
                f"{None if donor is None else donor.shape}, target expects {arr.shape}")
        arr[...] = donor
    if model.head != "baseline":
        model.prototypes[...] = init_prototypes(
            dataset, model.projection, model.num_prototypes, proto_init, rng,
            num_levels=model.schema.num_levels, normalize_inputs=model.normalize_inputs)


def train(config: TrainConfig, dataset: Dataset, warm_start: HeadModel | None = None):
    """Train a head on the dataset's train split, early-stopping on valid.

    Returns (model, history) where model carries the parameters of the best
    validation epoch (highest macro accuracy, earliest epoch on ties).
    """
    rng = np.random.default_rng(config.seed)
    X_train, y_train, _, _ = split_matrix(dataset, "train")
    X_val, y_val, _, _ = split_matrix(dataset, "valid")
    if len(y_train) == 0:
        raise DataError("training requires a non-empty train split")
    if len(y_val) == 0:
        raise DataError("early stopping requires a non-empty valid split")
    J = dataset.schema.num_levels

    model = HeadModel.create(
        dataset.schema, dataset.dim, config.head,
        projection=config.projection, proj_dim=config.proj_dim,
        hidden_width=config.hidden_width, aggregation=config.aggregation,
        num_prototypes=config.num_prototypes,
        proto_init="random" if warm_start is not None else config.proto_init,
        normalize_inputs=config.normalize_inputs, rng=rng, dataset=dataset)
    if warm_start is not None:
        warm_start_model(model, warm_start, dataset, rng, config.proto_init)

    counts, _ = class_frequencies(dataset, "train")
    scheme = ClassWeightScheme(config.weighting,
                               config.alpha if config.weighting == "alpha" else None)
    weights = scheme.weights_for(counts)

    params = model.parameters()
    trainable = {name: params[name] for name in model.trainable_names()}
    optimizer = AdamW(trainable, config.learning_rate, config.beta1, config.beta2,
                      config.epsilon, config.weight_decay)

    history = TrainHistory()
    best_snapshot = model.copy()
    bad_epochs = 0
    effective_patience = max(config.patience, 1)
    n = len(y_train)

    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads = loss_and_grads(model, X_train[batch], y_train[batch], weights)
            optimizer.step({name: grads[name] for name in trainable})
            epoch_loss += loss * len(batch)
        epoch_loss /= n

        val_preds = model.predict_batch(X_val)
        val_macro = _macro_accuracy(val_preds, y_val, J)
        val_acc = float(np.mean(val_preds == y_val))
        history.epochs.append(EpochRecord(epoch, epoch_loss, val_macro, val_acc))

        if val_macro > history.best_val_macro_acc:
            history.best_val_macro_acc = val_macro
            history.best_epoch = epoch
            best_snapshot = model.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= effective_patience:
                history.stopped_early = True
                break

    model.load_values(best_snapshot)
    return model, history
