"""ERM base models trained with plain mini-batch SGD, plus subset-masked risk.

Two architectures are supported: a linear model and a multilayer perceptron
with tanh hidden units. Classifiers emit one sigmoid score per class and are
trained with per-class binary cross-entropy; regressors emit one linear output
trained with mean squared error on internally standardised targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ConfigurationError,
    DataError,
    DimensionError,
    InsufficientDataError,
    LossKind,
    SampleWindow,
    TaskKind,
    batch_loss,
    mask,
)


@dataclass(frozen=True)
class ModelSpec:
    """Architecture and optimiser settings.

    ``hidden_sizes`` empty means a linear model; otherwise an MLP with one
    tanh layer per entry.
    """

    hidden_sizes: tuple[int, ...] = (32, 16)
    epochs: int = 200
    learning_rate: float = 0.1
    batch_size: int = 32
    l2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if any(h < 1 for h in self.hidden_sizes):
            raise ConfigurationError("hidden layer sizes must be positive", key="hidden")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be positive", key="epochs")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning rate must be positive", key="lr")
        if self.batch_size < 1:
            raise ConfigurationError("batch size must be positive", key="batch")
        if self.l2 < 0:
            raise ConfigurationError("l2 must be nonnegative", key="l2")

    @classmethod
    def linear(cls, **kw) -> "ModelSpec":
        return cls(hidden_sizes=(), **kw)

    @classmethod
    def mlp(cls, hidden_sizes: Sequence[int] = (32, 16), **kw) -> "ModelSpec":
        if not hidden_sizes:
            raise ConfigurationError("an MLP needs at least one hidden layer", key="hidden")
        return cls(hidden_sizes=tuple(hidden_sizes), **kw)

    @property
    def architecture(self) -> str:
        return "mlp" if self.hidden_sizes else "linear"


Params = tuple[tuple[np.ndarray, np.ndarray], ...]


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ModelSpec
    parameters: Params = field(repr=False)
    task: TaskKind
    input_dim: int
    target_shift: float = 0.0
    target_scale: float = 1.0

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Scores ``(m, C)`` for classification, values ``(m,)`` for regression."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise DimensionError(f"expected inputs with {self.input_dim} features, got shape {X.shape}")
        out = _forward(self.parameters, X)[-1]
        if self.task.is_classification:
            return _sigmoid(out)
        return out[:, 0] * self.target_scale + self.target_shift

    def predict_class(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_batch(X), axis=-1)


def predict(model: TrainedModel, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("predict takes a single feature vector")
    out = model.predict_batch(x[None, :])
    return out[0] if model.task.is_classification else float(out[0])


# ---------------------------------------------------------------------------
# Network internals
# ---------------------------------------------------------------------------


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _forward(params: Params, X: np.ndarray) -> list[np.ndarray]:
    """Activations per layer; the first entry is the input, the last the raw output."""
    acts = [X]
    h = X
    for i, (W, b) in enumerate(params):
        z = h @ W + b
        h = z if i == len(params) - 1 else np.tanh(z)
        acts.append(h)
    return acts


def _init_params(sizes: Sequence[int], rng: np.random.Generator) -> list[list[np.ndarray]]:
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        params.append([rng.uniform(-a, a, size=(fan_in, fan_out)), np.zeros(fan_out)])
    return params


def _encode_targets(y: np.ndarray, task: TaskKind) -> np.ndarray:
    if task.is_classification:
        cls = y.astype(np.int64)
        if np.any(cls != y) or np.any(cls < 0) or np.any(cls >= task.n_classes):
            raise DataError(f"class targets must be integers in [0, {task.n_classes - 1}]")
        T = np.zeros((len(y), task.n_classes))
        T[np.arange(len(y)), cls] = 1.0
        return T
    return y.reshape(-1, 1)


def objective(params: Params, X: np.ndarray, T: np.ndarray, task: TaskKind, l2: float = 0.0) -> float:
    """Training objective on encoded targets ``T`` (one-hot or standardised values)."""
    out = _forward(params, X)[-1]
    m = X.shape[0]
    if task.is_classification:
        # log(1 + e^z) - t*z, stable form of per-class binary cross-entropy
        val = np.sum(np.logaddexp(0.0, out) - T * out) / m
    else:
        val = np.sum((out - T) ** 2) / m
    if l2:
        val += 0.5 * l2 * sum(np.sum(W * W) for W, _ in params)
    return float(val)


def gradients(params: Params, X: np.ndarray, T: np.ndarray, task: TaskKind, l2: float = 0.0):
    """Backpropagated gradients of :func:`objective`, same nesting as ``params``."""
    acts = _forward(params, X)
    m = X.shape[0]
    out = acts[-1]
    if task.is_classification:
        g = (_sigmoid(out) - T) / m
    else:
        g = 2.0 * (out - T) / m
    grads = []
    for i in range(len(params) - 1, -1, -1):
        W, _ = params[i]
        gW = acts[i].T @ g
        gb = g.sum(axis=0)
        if l2:
            gW = gW + l2 * W
        grads.append((gW, gb))
        if i > 0:
            g = (g @ W.T) * (1.0 - acts[i] ** 2)
    return tuple(reversed(grads))


def fit(train: SampleWindow, spec: ModelSpec, task: TaskKind, seed: int) -> TrainedModel:
    """Minimise the training objective by mini-batch SGD.

    Identical ``(train, spec, task, seed)`` give bit-identical parameters.

    Raises:
        InsufficientDataError: empty window.
        DataError: non-finite features or invalid class labels.
    """
    if len(train) == 0:
        raise InsufficientDataError("cannot fit a model on an empty window")
    train.check_finite()
    X = np.asarray(train.X)
    y = np.asarray(train.y)
    m, d = X.shape

    shift, scale = 0.0, 1.0
    if not task.is_classification:
        shift = float(y.mean())
        scale = float(y.std()) or 1.0
        y = (y - shift) / scale
    T = _encode_targets(y, task)

    out_dim = task.n_classes if task.is_classification else 1
    sizes = [d, *spec.hidden_sizes, out_dim]
    rng = np.random.default_rng(seed)
    params = _init_params(sizes, rng)

    bs = min(spec.batch_size, m)
    lr = spec.learning_rate
    for _ in range(spec.epochs):
        order = rng.permutation(m)
        for start in range(0, m, bs):
            idx = order[start:start + bs]
            grads = gradients(params, X[idx], T[idx], task, spec.l2)
            for p, (gW, gb) in zip(params, grads):
                p[0] -= lr * gW
                p[1] -= lr * gb

    frozen = []
    for W, b in params:
        W.setflags(write=False)
        b.setflags(write=False)
        frozen.append((W, b))
    model = TrainedModel(spec, tuple(frozen), task, d, shift, scale)
    if not np.all(np.isfinite(model.predict_batch(X))):
        raise DataError("training diverged; lower the learning rate")
    return model


# ---------------------------------------------------------------------------
# Risk
# ---------------------------------------------------------------------------


def subset_risk(model: TrainedModel, window: SampleWindow, S: Iterable[int], loss_kind: LossKind) -> float:
    """Empirical risk after zero-projecting every input onto ``S``."""
    if len(window) == 0:
        raise InsufficientDataError("risk of an empty window is undefined")
    loss_kind.check_task(model.task)
    Xm = mask(window.X, S)
    losses = batch_loss(loss_kind, model.predict_batch(Xm), np.asarray(window.y))
    return float(np.mean(losses))


def empirical_risk(model: TrainedModel, window: SampleWindow, loss_kind: LossKind) -> float:
    return subset_risk(model, window, range(model.input_dim), loss_kind)
