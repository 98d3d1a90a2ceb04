"""Label-smoothed cross-entropy and a small softmax-regression trainer.

The trainer stands in for a fine-tuned classifier head: a linear map from
features to logits trained with mini-batch first-order updates. It supports
training from scratch with hard or smoothed targets and continued training on a
small target-domain sample (few-shot adaptation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .core import _LOG_FLOOR, PredictionSet, log_softmax

FEWSHOT_BUDGET = 2500


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class SmoothingSpec:
    alpha: float = 0.1

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"smoothing alpha must lie in [0, 1), got {self.alpha}")


def smooth_labels(label: int, num_classes: int, spec: SmoothingSpec = SmoothingSpec()) -> np.ndarray:
    """Soft target: ``1 - alpha`` on ``label``, ``alpha / (K - 1)`` on every other class.

    >>> smooth_labels(1, 3, SmoothingSpec(0.1))
    array([0.05, 0.9 , 0.05])
    """
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if not 0 <= label < num_classes:
        raise ValueError(f"label {label} outside [0, {num_classes})")
    return smooth_label_matrix(np.array([label]), num_classes, spec)[0]


def smooth_label_matrix(labels, num_classes: int, spec: SmoothingSpec = SmoothingSpec()) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    Y = np.full((len(labels), num_classes), spec.alpha / (num_classes - 1))
    Y[np.arange(len(labels)), labels] = 1.0 - spec.alpha
    return Y


def ls_cross_entropy(logits, label: int, spec: SmoothingSpec = SmoothingSpec()) -> float:
    """``-sum_k y_k log p_k`` against the smoothed target of ``label``."""
    logp = log_softmax(logits)
    y = smooth_labels(label, len(logp), spec)
    return float(-(y * np.maximum(logp, _LOG_FLOOR)).sum())


def ls_gradient(logits, label: int, spec: SmoothingSpec = SmoothingSpec()) -> np.ndarray:
    """Gradient of :func:`ls_cross_entropy` with respect to the logits, ``p - y``."""
    p = np.exp(log_softmax(logits))
    return p - smooth_labels(label, len(p), spec)


@dataclass(eq=False)
class FeatureDataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int | None = None
    language: str = ""

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError(f"features must be a non-empty (n, D) array, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"expected {X.shape[0]} labels, got shape {y.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if np.any(y < 0):
            raise ValueError("labels must be non-negative")
        k = self.num_classes if self.num_classes is not None else max(2, int(y.max()) + 1)
        if int(y.max()) >= k:
            raise ValueError(f"label {int(y.max())} outside [0, {k})")
        self.features, self.labels, self.num_classes = X, y, int(k)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FeatureDataset):
            return NotImplemented
        return (self.num_classes == other.num_classes and self.language == other.language
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels))

    def head(self, n: int) -> FeatureDataset:
        return FeatureDataset(self.features[:n], self.labels[:n], self.num_classes, self.language)


def apply_budget(data: FeatureDataset, budget: int | None = FEWSHOT_BUDGET) -> FeatureDataset:
    """Keep the first ``min(budget, len(data))`` examples in file order."""
    if budget is None or len(data) <= budget:
        return data
    if budget < 1:
        raise ValueError("budget must be positive")
    return data.head(budget)


@dataclass(eq=False)
class LinearSoftmaxModel:
    """Multinomial logistic regression: ``logits(x) = W x + b``."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64)
        self.bias = np.array(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("weights must be (K, D) and bias (K,)")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("model parameters must be finite")

    @classmethod
    def zeros(cls, num_classes: int, dim: int) -> LinearSoftmaxModel:
        return cls(np.zeros((num_classes, dim)), np.zeros(num_classes))

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LinearSoftmaxModel):
            return NotImplemented
        return np.array_equal(self.weights, other.weights) and np.array_equal(self.bias, other.bias)

    def logits(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights.T + self.bias

    def predictions(self, data: FeatureDataset) -> PredictionSet:
        return PredictionSet(self.logits(data.features), data.labels, data.language)

    def to_json(self) -> str:
        doc = {"K": self.num_classes, "D": self.dim,
               "weights": self.weights.ravel().tolist(), "bias": self.bias.tolist()}
        return json.dumps(doc) + "\n"

    @classmethod
    def from_json(cls, text: str) -> LinearSoftmaxModel:
        doc = json.loads(text)
        K, D = int(doc["K"]), int(doc["D"])
        W = np.array(doc["weights"], dtype=np.float64)
        if W.size != K * D:
            raise ValueError(f"expected {K * D} weights, found {W.size}")
        return cls(W.reshape(K, D), doc["bias"])


class Optimizer(str, Enum):
    GD = "gd"
    ADAM = "adam"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 10
    batch_size: int = 8
    seed: int = 0
    optimizer: Optimizer = Optimizer.ADAM
    smoothing: SmoothingSpec = field(default_factory=SmoothingSpec)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        # lr = 0 is allowed: it turns training into an exact no-op
        if not (self.learning_rate >= 0 and math.isfinite(self.learning_rate)):
            raise ValueError(f"learning rate must be non-negative, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))


def mean_loss(model: LinearSoftmaxModel, data: FeatureDataset, spec: SmoothingSpec = SmoothingSpec(0.0)) -> float:
    """Mean label-smoothed cross-entropy of ``model`` on ``data``."""
    logp = np.maximum(log_softmax(model.logits(data.features)), _LOG_FLOOR)
    Y = smooth_label_matrix(data.labels, model.num_classes, spec)
    return float(-(Y * logp).sum(axis=1).mean())


@np.errstate(over="ignore", invalid="ignore")
def _optimize(model: LinearSoftmaxModel, data: FeatureDataset, config: TrainConfig,
              callback: Callable[[int, LinearSoftmaxModel], None] | None) -> LinearSoftmaxModel:
    W = model.weights.copy()
    b = model.bias.copy()
    X = data.features
    Y = smooth_label_matrix(data.labels, W.shape[0], config.smoothing)
    n = len(data)
    rng = np.random.default_rng(config.seed)
    lr = config.learning_rate
    adam = config.optimizer is Optimizer.ADAM
    mW, vW = np.zeros_like(W), np.zeros_like(W)
    mb, vb = np.zeros_like(b), np.zeros_like(b)
    step = 0

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for batch, start in enumerate(range(0, n, config.batch_size), start=1):
            idx = order[start:start + config.batch_size]
            logp = log_softmax(X[idx] @ W.T + b)
            loss = -(Y[idx] * np.maximum(logp, _LOG_FLOOR)).sum(axis=1).mean()
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at epoch {epoch}, batch {batch}")
            G = (np.exp(logp) - Y[idx]) / len(idx)
            gW = G.T @ X[idx]
            gb = G.sum(axis=0)
            if adam:
                step += 1
                mW = config.beta1 * mW + (1 - config.beta1) * gW
                vW = config.beta2 * vW + (1 - config.beta2) * gW * gW
                mb = config.beta1 * mb + (1 - config.beta1) * gb
                vb = config.beta2 * vb + (1 - config.beta2) * gb * gb
                c1 = 1 - config.beta1 ** step
                c2 = 1 - config.beta2 ** step
                W -= lr * (mW / c1) / (np.sqrt(vW / c2) + config.eps)
                b -= lr * (mb / c1) / (np.sqrt(vb / c2) + config.eps)
            else:
                W -= lr * gW
                b -= lr * gb
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise TrainingDivergedError(f"non-finite parameters at epoch {epoch}, batch {batch}")
        if callback is not None:
            callback(epoch, LinearSoftmaxModel(W.copy(), b.copy()))

    return LinearSoftmaxModel(W, b)


def train(data: FeatureDataset, config: TrainConfig = TrainConfig(),
          callback: Callable[[int, LinearSoftmaxModel], None] | None = None) -> LinearSoftmaxModel:
    """Train a :class:`LinearSoftmaxModel` from zero weights.

    Mini-batches are drawn from a fresh permutation each epoch using
    ``config.seed``, so a given config and dataset always produce the same
    model. ``callback(epoch, model)`` is invoked after every epoch.
    """
    model = LinearSoftmaxModel.zeros(data.num_classes, data.dim)
    return _optimize(model, data, config, callback)


def continue_finetune(model: LinearSoftmaxModel, fewshot: FeatureDataset, config: TrainConfig = TrainConfig(),
                      budget: int | None = FEWSHOT_BUDGET,
                      callback: Callable[[int, LinearSoftmaxModel], None] | None = None) -> LinearSoftmaxModel:
    """Continue training ``model`` on target-domain examples.

    At most ``budget`` examples are used, taken from the front of ``fewshot``;
    pass ``budget=None`` to use all of them. Optimizer state starts fresh.
    """
    if fewshot.dim != model.dim:
        raise ValueError(f"feature dimension {fewshot.dim} does not match model dimension {model.dim}")
    if fewshot.num_classes > model.num_classes:
        raise ValueError(f"data has {fewshot.num_classes} classes but model has {model.num_classes}")
    fewshot = apply_budget(fewshot, budget)
    return _optimize(model, fewshot, config, callback)
