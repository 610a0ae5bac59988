"""Classification heads over pooled embeddings.

Two head families share a trainable projection (the stand-in for encoder
fine-tuning): a plain affine classifier, and a prototype head that scores a
response by its similarity to per-level prototype vectors.  Similarities are
either cosine (with a learnable scale) or squared Euclidean distance; the
distance enters the logits negated so that closer means more probable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, LevelSchema, split_matrix
from .errors import DataError, NumericError

CHECKPOINT_SCHEMA = "proto-grade-v1"

HEADS = ("baseline", "proto_cos", "proto_sed")
PROJECTIONS = ("identity", "linear", "mlp_one_hidden")
AGGREGATIONS = ("mean_sim", "centroid")
PROTO_INITS = ("random", "class_kmeans")

# Jitter scale used to break exact prototype duplicates after k-means.
_PROTO_JITTER = 1e-4


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the ordinal levels."""

    probs: np.ndarray

    def validate(self, tol: float = 1e-9) -> None:
        p = self.probs
        if p.ndim != 1 or np.any(p < 0) or abs(float(p.sum()) - 1.0) > tol:
            raise NumericError(f"invalid distribution: sum={float(p.sum())!r}")


def sim_cos(x, c) -> float:
    """Cosine similarity between two vectors, in [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if x.shape != c.shape:
        raise DataError(f"dimension mismatch: {x.shape} vs {c.shape}")
    nx, nc = np.linalg.norm(x), np.linalg.norm(c)
    if nx == 0.0 or nc == 0.0:
        raise NumericError("cosine similarity undefined for zero-norm input")
    return float(x @ c / (nx * nc))


def sim_sed(x, c) -> float:
    """Squared Euclidean distance between two vectors (non-negative)."""
    x = np.asarray(x, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if x.shape != c.shape:
        raise DataError(f"dimension mismatch: {x.shape} vs {c.shape}")
    d = x - c
    return float(d @ d)


def aggregate_similarity(x, prototypes, sim: str, aggregation: str) -> float:
    """Aggregate similarity of x to one level's K prototypes.

    mean_sim averages the K similarity values; centroid replaces the K
    prototypes by their mean before the (single) similarity call.  The value
    is the raw similarity: cosine for "cos", squared distance for "sed"
    (sign handling for logits lives in the forward pass).
    """
    protos = np.asarray(prototypes, dtype=np.float64)
    if protos.ndim != 2 or protos.shape[0] < 1:
        raise DataError(f"prototypes must be a K x d matrix with K >= 1, got {protos.shape}")
    fn = {"cos": sim_cos, "sed": sim_sed}.get(sim)
    if fn is None:
        raise DataError(f"unknown similarity kind {sim!r}")
    if aggregation == "mean_sim":
        return float(np.mean([fn(x, protos[k]) for k in range(protos.shape[0])]))
    if aggregation == "centroid":
        return fn(x, protos.mean(axis=0))
    raise DataError(f"unknown aggregation kind {aggregation!r}")


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict(dist) -> int:
    """Argmax level index; ties break toward the lowest index."""
    probs = dist.probs if isinstance(dist, Distribution) else np.asarray(dist)
    return int(np.argmax(probs))


class Projection(object):
    """Trainable map from input embeddings to the head space."""

    def __init__(self, kind: str, dim_in: int, dim_out: int, params: dict,
                 hidden_width: int = 0):
        if kind not in PROJECTIONS:
            raise DataError(f"unknown projection kind {kind!r}")
        if dim_out < 1:
            raise DataError(f"projection output dimension must be positive, got {dim_out}")
        if kind == "identity" and dim_in != dim_out:
            raise DataError(f"identity projection requires dim_out == dim_in ({dim_in})")
        self.kind = kind
        self.dim_in = dim_in
        self.dim_out = dim_out
        self.hidden_width = hidden_width
        self.params = params

    @classmethod
    def create(cls, kind: str, dim_in: int, dim_out: int | None = None,
               hidden_width: int = 256, rng: np.random.Generator | None = None):
        dim_out = dim_in if dim_out is None else dim_out
        rng = rng or np.random.default_rng(0)
        params: dict[str, np.ndarray] = {}
        if kind == "linear":
            if dim_out == dim_in:
                w = np.eye(dim_out)
            else:
                w = rng.normal(size=(dim_out, dim_in)) * np.sqrt(2.0 / (dim_in + dim_out))
            params = {"proj_w": w, "proj_b": np.zeros(dim_out)}
        elif kind == "mlp_one_hidden":
            w1 = rng.normal(size=(hidden_width, dim_in)) * np.sqrt(2.0 / (dim_in + hidden_width))
            w2 = rng.normal(size=(dim_out, hidden_width)) * np.sqrt(2.0 / (hidden_width + dim_out))
            params = {
                "proj_w1": w1, "proj_b1": np.zeros(hidden_width),
                "proj_w2": w2, "proj_b2": np.zeros(dim_out),
            }
        return cls(kind, dim_in, dim_out, params, hidden_width if kind == "mlp_one_hidden" else 0)

    def forward(self, X: np.ndarray) -> np.ndarray:
        return self.forward_cached(X)[0]

    def forward_cached(self, X: np.ndarray):
        if X.shape[1] != self.dim_in:
            raise DataError(f"projection expects dim {self.dim_in}, got {X.shape[1]}")
        if self.kind == "identity":
            return X, {}
        if self.kind == "linear":
            return X @ self.params["proj_w"].T + self.params["proj_b"], {}
        pre = X @ self.params["proj_w1"].T + self.params["proj_b1"]
        hidden = np.maximum(pre, 0.0)
        out = hidden @ self.params["proj_w2"].T + self.params["proj_b2"]
        return out, {"pre": pre, "hidden": hidden}

    def backward(self, X: np.ndarray, cache: dict, d_out: np.ndarray) -> dict:
        """Parameter gradients for a batch given the upstream d(loss)/d(output)."""
        if self.kind == "identity":
            return {}
        if self.kind == "linear":
            return {"proj_w": d_out.T @ X, "proj_b": d_out.sum(axis=0)}
        d_hidden = d_out @ self.params["proj_w2"]
        d_pre = d_hidden * (cache["pre"] > 0.0)
        return {
            "proj_w1": d_pre.T @ X, "proj_b1": d_pre.sum(axis=0),
            "proj_w2": d_out.T @ cache["hidden"], "proj_b2": d_out.sum(axis=0),
        }


class HeadModel(object):
    """A projection plus one classification head, with explicit parameters.

    Prototype heads hold a (num_levels, K, dim_out) tensor of free learnable
    prototypes and scalar similarity parameters (scale, bias).  The bias adds
    equally to all logits, so the softmax is computed without it; it is kept
    as a parameter for interface fidelity and is a provable no-op.
    """

    def __init__(self, schema: LevelSchema, dim: int, head: str, projection: Projection,
                 aggregation: str = "mean_sim", prototypes: np.ndarray | None = None,
                 scale=1.0, bias=0.0, scale_bias_learnable: bool = False,
                 cls_w: np.ndarray | None = None, cls_b: np.ndarray | None = None,
                 normalize_inputs: bool = False):
        if head not in HEADS:
            raise DataError(f"unknown head kind {head!r}")
        if aggregation not in AGGREGATIONS:
            raise DataError(f"unknown aggregation kind {aggregation!r}")
        self.schema = schema
        self.dim = dim
        self.head = head
        self.projection = projection
        self.aggregation = aggregation
        self.prototypes = prototypes
        self.scale = np.asarray(float(scale))
        self.bias = np.asarray(float(bias))
        self.scale_bias_learnable = bool(scale_bias_learnable)
        self.cls_w = cls_w
        self.cls_b = cls_b
        self.normalize_inputs = normalize_inputs
        self._check_shapes()

    def _check_shapes(self):
        J, d_out = self.schema.num_levels, self.projection.dim_out
        if self.head == "baseline":
            if self.cls_w is None or self.cls_w.shape != (J, d_out) or self.cls_b.shape != (J,):
                raise DataError(f"baseline head weights inconsistent with ({J}, {d_out})")
        else:
            if self.prototypes is None or self.prototypes.ndim != 3:
                raise DataError("prototype head requires a (levels, K, dim) tensor")
            if self.prototypes.shape[0] != J or self.prototypes.shape[2] != d_out:
                raise DataError(
                    f"prototype tensor shape {self.prototypes.shape} inconsistent "
                    f"with ({J}, K, {d_out})"
                )
            if self.prototypes.shape[1] < 1:
                raise DataError("need at least one prototype per level")
            if not np.all(np.isfinite(self.prototypes)):
                raise NumericError("prototype tensor contains non-finite values")
            if self.head == "proto_sed" and (float(self.scale) != 1.0 or float(self.bias) != 0.0
                                             or self.scale_bias_learnable):
                raise DataError("SED head requires scale=1, bias=0, not learnable")

    @property
    def num_prototypes(self) -> int:
        return 0 if self.prototypes is None else self.prototypes.shape[1]

    @classmethod
    def create(cls, schema: LevelSchema, dim: int, head: str = "proto_sed", *,
               projection: str = "linear", proj_dim: int | None = None,
               hidden_width: int = 256, aggregation: str = "mean_sim",
               num_prototypes: int = 3, proto_init: str = "class_kmeans",
               normalize_inputs: bool = False, rng: np.random.Generator | None = None,
               dataset: Dataset | None = None):
        """Build a freshly initialized model.

        class_kmeans prototype initialization requires the training dataset.
        """
        rng = rng or np.random.default_rng(0)
        proj = Projection.create(projection, dim, proj_dim, hidden_width, rng)
        J = schema.num_levels
        if head == "baseline":
            return cls(schema, dim, head, proj, aggregation,
                       cls_w=np.zeros((J, proj.dim_out)), cls_b=np.zeros(J),
                       normalize_inputs=normalize_inputs)
        if head == "proto_cos":
            scale, bias, learnable = 10.0, 0.0, True
        else:
            scale, bias, learnable = 1.0, 0.0, False
        model = cls(schema, dim, head, proj, aggregation,
                    prototypes=np.zeros((J, num_prototypes, proj.dim_out)),
                    scale=scale, bias=bias, scale_bias_learnable=learnable,
                    normalize_inputs=normalize_inputs)
        model.prototypes = init_prototypes(dataset, proj, num_prototypes, proto_init, rng,
                                           num_levels=J, normalize_inputs=normalize_inputs)
        return model

    # -- parameter access ---------------------------------------------------

    def parameters(self) -> dict:
        """All parameter tensors by name (views, mutated in place by training)."""
        out = dict(self.projection.params)
        if self.head == "baseline":
            out["cls_w"] = self.cls_w
            out["cls_b"] = self.cls_b
        else:
            out["protos"] = self.prototypes
            out["scale"] = self.scale
            out["bias"] = self.bias
        return out

    def trainable_names(self) -> list:
        names = list(self.projection.params)
        if self.head == "baseline":
            names += ["cls_w", "cls_b"]
        else:
            names.append("protos")
            if self.scale_bias_learnable:
                names += ["scale", "bias"]
        return names

    def copy(self) -> "HeadModel":
        proj = Projection(self.projection.kind, self.projection.dim_in, self.projection.dim_out,
                          {k: v.copy() for k, v in self.projection.params.items()},
                          self.projection.hidden_width)
        return HeadModel(
            self.schema, self.dim, self.head, proj, self.aggregation,
            prototypes=None if self.prototypes is None else self.prototypes.copy(),
            scale=float(self.scale), bias=float(self.bias),
            scale_bias_learnable=self.scale_bias_learnable,
            cls_w=None if self.cls_w is None else self.cls_w.copy(),
            cls_b=None if self.cls_b is None else self.cls_b.copy(),
            normalize_inputs=self.normalize_inputs,
        )

    def load_values(self, other: "HeadModel") -> None:
        """Copy parameter values from another model of identical shape."""
        for name, arr in other.parameters().items():
            self.parameters()[name][...] = arr

    # -- forward ------------------------------------------------------------

    def _prepare(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError(f"expected a batch matrix, got shape {X.shape}")
        if X.shape[1] != self.dim:
            raise DataError(f"model expects input dim {self.dim}, data has dim {X.shape[1]}")
        if self.normalize_inputs:
            norms = np.linalg.norm(X, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise NumericError("cannot normalize a zero-norm input vector")
            X = X / norms
        return X

    def forward_detail(self, X: np.ndarray) -> dict:
        """Forward pass keeping the intermediates needed for backprop.

        Returns probs, report logits (scale * effsim + bias), effective
        similarities, and head-specific caches.
        """
        X = self._prepare(X)
        Xp, proj_cache = self.projection.forward_cached(X)
        detail = {"X": X, "Xp": Xp, "proj_cache": proj_cache}

        if self.head == "baseline":
            logits = Xp @ self.cls_w.T + self.cls_b
            detail["effsim"] = logits
            detail["logits"] = logits
        elif self.head == "proto_cos":
            xn = np.linalg.norm(Xp, axis=1)
            if np.any(xn == 0.0):
                raise NumericError("cosine head: zero-norm projected embedding")
            Xhat = Xp / xn[:, None]
            if self.aggregation == "mean_sim":
                C = self.prototypes
                cn = np.linalg.norm(C, axis=2)
                if np.any(cn == 0.0):
                    raise NumericError("cosine head: zero-norm prototype")
                Chat = C / cn[:, :, None]
                cos = np.einsum("id,jkd->ijk", Xhat, Chat)
                effsim = cos.mean(axis=2)
                detail.update(xn=xn, Xhat=Xhat, cn=cn, Chat=Chat, cos=cos)
            else:
                C = self.prototypes.mean(axis=1)
                cn = np.linalg.norm(C, axis=1)
                if np.any(cn == 0.0):
                    raise NumericError("cosine head: zero-norm prototype centroid")
                Chat = C / cn[:, None]
                cos = Xhat @ Chat.T
                effsim = cos
                detail.update(xn=xn, Xhat=Xhat, cn=cn, Chat=Chat, cos=cos)
            detail["effsim"] = effsim
        else:  # proto_sed: effective similarity is the negated squared distance
            if self.aggregation == "mean_sim":
                diff = Xp[:, None, None, :] - self.prototypes[None, :, :, :]
                dist = np.einsum("ijkd,ijkd->ijk", diff, diff)
                effsim = -dist.mean(axis=2)
            else:
                diff = Xp[:, None, :] - self.prototypes.mean(axis=1)[None, :, :]
                dist = np.einsum("ijd,ijd->ij", diff, diff)
                effsim = -dist
            detail.update(diff=diff, effsim=effsim)

        s, b = float(self.scale), float(self.bias)
        # The shared bias cancels inside the softmax; leaving it out makes the
        # output bit-identical for every value of bias.
        probs = softmax(s * detail["effsim"]) if self.head != "baseline" else softmax(detail["effsim"])
        if not np.all(np.isfinite(probs)):
            raise NumericError("non-finite probabilities in forward pass")
        if self.head != "baseline":
            detail["logits"] = s * detail["effsim"] + b
        detail["probs"] = probs
        return detail

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        """Probability matrix (n, num_levels) for a batch."""
        return self.forward_detail(X)["probs"]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward_batch(X), axis=1)


def proto_forward(x, model: HeadModel) -> Distribution:
    """Distribution over levels for one embedding under a prototype head."""
    if model.head == "baseline":
        raise DataError("proto_forward requires a prototype head")
    probs = model.forward_batch(np.asarray(x, dtype=np.float64)[None, :])[0]
    return Distribution(probs)


def baseline_forward(x, model: HeadModel) -> Distribution:
    """Distribution over levels for one embedding under the baseline head."""
    if model.head != "baseline":
        raise DataError("baseline_forward requires a baseline head")
    probs = model.forward_batch(np.asarray(x, dtype=np.float64)[None, :])[0]
    return Distribution(probs)


# -- prototype initialization ----------------------------------------------

def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator, max_iters: int = 50):
    """Plain k-means (squared-Euclidean), seeded from k distinct samples."""
    idx = rng.choice(points.shape[0], size=k, replace=False)
    centers = points[idx].astype(np.float64).copy()
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = points[assign == j]
            if len(members):
                new_centers[j] = members.mean(axis=0)
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
    return centers


def init_prototypes(dataset: Dataset | None, projection: Projection, num_prototypes: int,
                    mode: str, rng: np.random.Generator, *, num_levels: int | None = None,
                    normalize_inputs: bool = False) -> np.ndarray:
    """Initialize the (levels, K, dim_out) prototype tensor.

    random draws from a seeded Gaussian; class_kmeans clusters each level's
    projected training embeddings.  Levels with fewer than K samples get the
    level centroid replicated with small seeded jitter, and exact duplicate
    centroids are jittered as well so training can separate them.
    """
    if mode not in PROTO_INITS:
        raise DataError(f"unknown prototype init mode {mode!r}")
    if num_prototypes < 1:
        raise DataError(f"need at least one prototype per level, got {num_prototypes}")

    if mode == "random":
        if num_levels is None:
            num_levels = dataset.schema.num_levels
        return rng.normal(size=(num_levels, num_prototypes, projection.dim_out))

    if dataset is None:
        raise DataError("class_kmeans initialization requires a training dataset")
    J = dataset.schema.num_levels
    X, y, _, _ = split_matrix(dataset, "train")
    if normalize_inputs:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise NumericError("cannot normalize a zero-norm input vector")
        X = X / norms
    Xp = projection.forward(X)

    protos = np.zeros((J, num_prototypes, projection.dim_out))
    for level in range(J):
        members = Xp[y == level]
        if len(members) == 0:
            raise DataError(f"class_kmeans: level {level} has no training samples")
        if len(members) < num_prototypes:
            centroid = members.mean(axis=0)
            protos[level] = centroid + _PROTO_JITTER * rng.normal(
                size=(num_prototypes, projection.dim_out))
            continue
        centers = _kmeans(members, num_prototypes, rng)
        seen = set()
        for k in range(num_prototypes):
            key = centers[k].tobytes()
            if key in seen:
                centers[k] = centers[k] + _PROTO_JITTER * rng.normal(size=projection.dim_out)
            seen.add(key)
        protos[level] = centers
    return protos


# -- checkpoints -------------------------------------------------------------

def save_checkpoint(model: HeadModel, path, config: dict | None = None,
                    seed: int | None = None) -> None:
    """Write the model as a .ckpt.json document (deterministic bytes)."""
    doc = {
        "schema": CHECKPOINT_SCHEMA,
        "levels": list(model.schema.names),
        "dim": model.dim,
        "proj_dim": model.projection.dim_out,
        "head": model.head,
        "projection": model.projection.kind,
        "hidden_width": model.projection.hidden_width,
        "aggregation": model.aggregation,
        "num_prototypes": model.num_prototypes,
        "normalize_inputs": model.normalize_inputs,
        "scale_bias_learnable": model.scale_bias_learnable,
        "params": {name: arr.tolist() for name, arr in model.parameters().items()},
        "config": config or {},
    }
    if seed is not None:
        doc["seed"] = seed
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_checkpoint(path) -> HeadModel:
    """Load a .ckpt.json file back into a HeadModel."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc.msg})") from None
    if not isinstance(doc, dict) or doc.get("schema") != CHECKPOINT_SCHEMA:
        raise DataError(
            f"{path}: incompatible checkpoint schema tag "
            f"{doc.get('schema') if isinstance(doc, dict) else None!r}, "
            f"expected {CHECKPOINT_SCHEMA!r}"
        )
    try:
        schema = LevelSchema(tuple(doc["levels"]))
        params = {name: np.asarray(v, dtype=np.float64) for name, v in doc["params"].items()}
        proj_params = {k: v for k, v in params.items() if k.startswith("proj_")}
        proj = Projection(doc["projection"], doc["dim"], doc["proj_dim"], proj_params,
                          doc.get("hidden_width", 0))
        head = doc["head"]
        if head == "baseline":
            model = HeadModel(schema, doc["dim"], head, proj, doc["aggregation"],
                              cls_w=params["cls_w"], cls_b=params["cls_b"],
                              normalize_inputs=doc["normalize_inputs"])
        else:
            model = HeadModel(schema, doc["dim"], head, proj, doc["aggregation"],
                              prototypes=params["protos"],
                              scale=float(params["scale"]), bias=float(params["bias"]),
                              scale_bias_learnable=doc["scale_bias_learnable"],
                              normalize_inputs=doc["normalize_inputs"])
    except KeyError as exc:
        raise DataError(f"{path}: checkpoint is missing field {exc}") from None
    return model
