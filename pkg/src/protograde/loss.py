"""Class re-weighting schemes and the weighted cross-entropy objective.

Gradients are derived by hand and vectorized with numpy; the fused
softmax/cross-entropy form keeps them numerically stable.  The shared
similarity bias receives an exactly-zero gradient because it cancels in the
softmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError
from .model import Distribution, HeadModel

PROB_FLOOR = 1e-12

WEIGHTING_KINDS = ("none", "alpha", "inverse")


def weights_alpha(freqs, alpha: float) -> np.ndarray:
    """Exponent-damped inverse-frequency weights from normalized frequencies.

    Each class gets (f_i ** alpha / sum_j f_j ** alpha) / f_i: alpha = 1
    gives uniform weights, alpha = 0 gives plain inverse frequency scaled
    by 1/J.
    """
    f = np.asarray(freqs, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise DataError(f"frequencies must be a non-empty vector, got shape {f.shape}")
    if np.any(f <= 0.0):
        raise DataError("class frequencies must all be positive to compute weights")
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must lie in [0, 1], got {alpha!r}")
    damped = f ** alpha
    return damped / damped.sum() / f


def weights_inverse(counts) -> np.ndarray:
    """Inverse-frequency weights from raw counts: total / count_i."""
    c = np.asarray(counts, dtype=np.float64)
    if c.ndim != 1 or c.size == 0:
        raise DataError(f"counts must be a non-empty vector, got shape {c.shape}")
    if np.any(c <= 0.0):
        raise DataError("every class needs at least one sample to compute inverse weights")
    return c.sum() / c


@dataclass(frozen=True)
class ClassWeightScheme:
    """Which re-weighting rule to apply, if any.

    alpha is meaningful (and required) only for the "alpha" kind.
    """

    kind: str = "none"
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in WEIGHTING_KINDS:
            raise DataError(f"unknown weighting kind {self.kind!r}; "
                            f"expected one of {WEIGHTING_KINDS}")
        if (self.kind == "alpha") != (self.alpha is not None):
            raise DataError("alpha must be given exactly when kind is 'alpha'")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise DataError(f"alpha must lie in [0, 1], got {self.alpha!r}")

    def weights_for(self, counts) -> np.ndarray:
        """Per-class weight vector for the given training counts."""
        c = np.asarray(counts, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise DataError(f"counts must be a non-empty vector, got shape {c.shape}")
        if self.kind == "none":
            return np.ones(c.shape[0])
        if self.kind == "inverse":
            return weights_inverse(c)
        if np.any(c <= 0.0):
            raise DataError("every class needs at least one sample to compute weights")
        return weights_alpha(c / c.sum(), self.alpha)


def weighted_ce(dist, label: int, weights) -> float:
    """Re-weighted cross entropy for one record: -w_label * ln(p_label).

    The probability is clamped at 1e-12 so the loss stays finite.
    """
    probs = dist.probs if isinstance(dist, Distribution) else np.asarray(dist, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if probs.ndim != 1 or w.shape != probs.shape:
        raise DataError(f"inconsistent shapes: probs {probs.shape}, weights {w.shape}")
    label = int(label)
    if not 0 <= label < probs.shape[0]:
        raise DataError(f"label {label} outside the level range [0, {probs.shape[0]})")
    return float(-w[label] * np.log(max(float(probs[label]), PROB_FLOOR)))


def batch_weighted_ce(probs: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    """Mean re-weighted cross entropy over a batch of probability rows."""
    probs = np.asarray(probs, dtype=np.float64)
    y = np.asarray(y)
    w = np.asarray(weights, dtype=np.float64)
    if probs.ndim != 2 or y.shape != (probs.shape[0],) or w.shape != (probs.shape[1],):
        raise DataError(
            f"inconsistent shapes: probs {probs.shape}, labels {y.shape}, weights {w.shape}")
    if np.any(y < 0) or np.any(y >= probs.shape[1]):
        raise DataError("label index outside the level range")
    p_true = np.maximum(probs[np.arange(len(y)), y], PROB_FLOOR)
    return float(np.mean(-w[y] * np.log(p_true)))


def loss_and_grads(model: HeadModel, X: np.ndarray, y: np.ndarray,
                   weights: np.ndarray):
    """Weighted-CE loss and analytic gradients for every trainable parameter.

    Returns (loss, grads) with grads keyed like model.parameters(); only
    trainable names appear.  The similarity bias, when learnable, gets an
    exact 0.0 because it shifts all logits equally.
    """
    y = np.asarray(y)
    w = np.asarray(weights, dtype=np.float64)
    detail = model.forward_detail(X)
    probs = detail["probs"]
    n, J = probs.shape
    if n == 0:
        raise DataError("loss requires a non-empty batch")
    if y.shape != (n,) or np.any(y < 0) or np.any(y >= J):
        raise DataError(f"labels must be {n} indices in [0, {J})")
    if w.shape != (J,):
        raise DataError(f"weights must have shape ({J},), got {w.shape}")
    loss = batch_weighted_ce(probs, y, w)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss value {loss!r}")

    # Fused softmax/cross-entropy gradient w.r.t. the softmax input.
    G = probs.copy()
    G[np.arange(n), y] -= 1.0
    G *= (w[y] / n)[:, None]

    grads: dict[str, np.ndarray] = {}
    Xp = detail["Xp"]

    if model.head == "baseline":
        grads["cls_w"] = G.T @ Xp
        grads["cls_b"] = G.sum(axis=0)
        dXp = G @ model.cls_w
    else:
        s = float(model.scale)
        K = model.num_prototypes
        if model.scale_bias_learnable:
            grads["scale"] = np.asarray(float(np.sum(G * detail["effsim"])))
            grads["bias"] = np.asarray(0.0)
        if model.head == "proto_cos":
            Xhat, xn = detail["Xhat"], detail["xn"]
            Chat, cn, cos = detail["Chat"], detail["cn"], detail["cos"]
            if model.aggregation == "mean_sim":
                A = (s / K) * G[:, :, None]                      # (n, J, K)
                dXp = (np.einsum("ijk,jkd->id", A, Chat)
                       - np.einsum("ijk,ijk->i", A, cos)[:, None] * Xhat) / xn[:, None]
                dC = (np.einsum("ijk,id->jkd", A, Xhat)
                      - np.einsum("ijk,ijk->jk", A, cos)[:, :, None] * Chat) / cn[:, :, None]
                grads["protos"] = dC
            else:
                A = s * G                                         # (n, J)
                dXp = (A @ Chat - np.einsum("ij,ij->i", A, cos)[:, None] * Xhat) / xn[:, None]
                dCbar = (A.T @ Xhat
                         - np.einsum("ij,ij->j", A, cos)[:, None] * Chat) / cn[:, None]
                grads["protos"] = np.repeat(dCbar[:, None, :], K, axis=1) / K
        else:  # proto_sed
            diff = detail["diff"]
            if model.aggregation == "mean_sim":
                dXp = -(2.0 * s / K) * np.einsum("ij,ijkd->id", G, diff)
                grads["protos"] = (2.0 * s / K) * np.einsum("ij,ijkd->jkd", G, diff)
            else:
                dXp = -2.0 * s * np.einsum("ij,ijd->id", G, diff)
                dCbar = 2.0 * s * np.einsum("ij,ijd->jd", G, diff)
                grads["protos"] = np.repeat(dCbar[:, None, :], K, axis=1) / K

    grads.update(model.projection.backward(detail["X"], detail["proj_cache"], dXp))
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r}")
    return loss, grads
