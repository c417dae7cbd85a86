"""Domain types, losses, coordinate masking and run configuration."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class DriftError(ValueError):
    """Base class for all errors raised by this package."""


class DimensionError(DriftError):
    pass


class ConfigurationError(DriftError):
    """Invalid parameter combination. ``key`` names the offending setting when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class InsufficientDataError(DriftError):
    pass


class DataError(DriftError):
    pass


class ProtocolError(DriftError):
    """Windows that violate the two-sample protocol (e.g. unequal sizes)."""


# ---------------------------------------------------------------------------
# Samples and windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledSample:
    features: tuple[float, ...]
    target: float

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))
        object.__setattr__(self, "target", float(self.target))
        if len(self.features) < 1:
            raise DimensionError("a sample needs at least one feature")

    @property
    def d(self) -> int:
        return len(self.features)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SampleWindow:
    """Ordered block of consecutive stream samples.

    Features are held as an ``(m, d)`` array and targets as an ``(m,)`` array;
    both are read-only so a window can be shared freely.
    """

    X: np.ndarray
    y: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(len(y), -1) if len(y) else X.reshape(0, 0)
        if X.ndim != 2:
            raise DimensionError("window features must be a 2-d array")
        if X.shape[0] != y.shape[0]:
            raise DimensionError(
                f"{X.shape[0]} feature rows but {y.shape[0]} targets"
            )
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "start_index", int(self.start_index))

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample], start_index: int = 0) -> "SampleWindow":
        if not samples:
            return cls(np.zeros((0, 0)), np.zeros(0), start_index)
        d = samples[0].d
        if any(s.d != d for s in samples):
            raise DimensionError("samples in one window must share dimensionality")
        X = np.array([s.features for s in samples], dtype=float)
        y = np.array([s.target for s in samples], dtype=float)
        return cls(X, y, start_index)

    def __len__(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> tuple[LabeledSample, ...]:
        return tuple(LabeledSample(tuple(row), t) for row, t in zip(self.X, self.y))

    def slice(self, start: int, stop: int) -> "SampleWindow":
        """Sub-window by local positions; the global start index is carried along."""
        return SampleWindow(self.X[start:stop], self.y[start:stop], self.start_index + start)

    def check_finite(self) -> None:
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise DataError(f"non-finite values in window starting at {self.start_index}")


def as_arrays(stream) -> tuple[np.ndarray, np.ndarray]:
    """Accept a ``SampleWindow``, an ``(X, y)`` pair or a sequence of samples."""
    if isinstance(stream, SampleWindow):
        return np.asarray(stream.X), np.asarray(stream.y)
    if isinstance(stream, tuple) and len(stream) == 2 and isinstance(stream[0], np.ndarray):
        X, y = stream
        return np.asarray(X, dtype=float), np.asarray(y, dtype=float).reshape(-1)
    w = SampleWindow.from_samples(list(stream))
    return np.asarray(w.X), np.asarray(w.y)


# ---------------------------------------------------------------------------
# Task and loss
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaskKind:
    """Classification with ``n_classes`` labels, or regression when ``n_classes`` is None."""

    n_classes: int | None = None

    def __post_init__(self):
        if self.n_classes is not None and self.n_classes < 2:
            raise ConfigurationError("classification needs at least 2 classes", key="task")

    @classmethod
    def classification(cls, n_classes: int = 2) -> "TaskKind":
        return cls(int(n_classes))

    @classmethod
    def regression(cls) -> "TaskKind":
        return cls(None)

    @property
    def is_classification(self) -> bool:
        return self.n_classes is not None

    def default_loss(self) -> "LossKind":
        return LossKind.ZERO_ONE if self.is_classification else LossKind.SQUARED

    def __str__(self) -> str:
        return f"classification({self.n_classes})" if self.is_classification else "regression"


class LossKind(Enum):
    ZERO_ONE = "zero_one"
    SQUARED = "squared"

    def check_task(self, task: TaskKind) -> None:
        if (self is LossKind.ZERO_ONE) != task.is_classification:
            raise ConfigurationError(f"{self.value} loss does not fit a {task} task", key="task")


def predicted_class(scores: np.ndarray) -> np.ndarray:
    """Argmax over the last axis; ``np.argmax`` already breaks ties toward the lowest index."""
    return np.argmax(scores, axis=-1)


def loss(kind: LossKind, prediction, target) -> float:
    """Per-sample loss.

    For ``ZERO_ONE`` the prediction may be a class index or a score vector
    (reduced by argmax). For ``SQUARED`` it must be a scalar.
    """
    if kind is LossKind.ZERO_ONE:
        p = np.asarray(prediction)
        cls = int(predicted_class(p)) if p.ndim == 1 else int(p)
        if float(target) != int(target):
            raise ConfigurationError("zero-one loss needs an integer class target", key="task")
        return 0.0 if cls == int(target) else 1.0
    if kind is LossKind.SQUARED:
        p = np.asarray(prediction, dtype=float)
        if p.ndim != 0:
            raise ConfigurationError("squared loss needs a scalar prediction", key="task")
        return float((float(p) - float(target)) ** 2)
    raise ConfigurationError(f"unknown loss {kind!r}")


def batch_loss(kind: LossKind, predictions: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Vectorised :func:`loss` over a batch (scores ``(m, C)`` or values ``(m,)``)."""
    if kind is LossKind.ZERO_ONE:
        return (predicted_class(predictions) != targets.astype(np.int64)).astype(float)
    return (np.asarray(predictions, dtype=float).reshape(-1) - targets) ** 2


# ---------------------------------------------------------------------------
# Masking
# ---------------------------------------------------------------------------


def _check_subset(S: Iterable[int], d: int) -> tuple[int, ...]:
    idx = tuple(sorted(set(int(i) for i in S)))
    if idx and (idx[0] < 0 or idx[-1] >= d):
        raise DimensionError(f"feature index set {idx} out of range for d={d}")
    return idx


def mask(x, S: Iterable[int]) -> np.ndarray:
    """Zero every coordinate of ``x`` outside ``S``. Returns a new array."""
    x = np.asarray(x, dtype=float)
    idx = _check_subset(S, x.shape[-1])
    out = np.zeros_like(x)
    out[..., list(idx)] = x[..., list(idx)]
    return out


def subset_to_bits(S: Iterable[int]) -> int:
    bits = 0
    for i in S:
        bits |= 1 << int(i)
    return bits


def bits_to_subset(bits: int) -> frozenset[int]:
    return frozenset(i for i in range(bits.bit_length()) if bits >> i & 1)


def bits_to_vector(bits: int, d: int) -> np.ndarray:
    return np.array([(bits >> i) & 1 for i in range(d)], dtype=float)


# ---------------------------------------------------------------------------
# Standardisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-feature affine map to zero mean / unit variance.

    With standardised inputs, zero-masking a feature coincides with imputing
    its mean over the block the statistics came from.
    """

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        if X.shape[0] == 0:
            raise InsufficientDataError("cannot standardise an empty block")
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        return cls(_readonly(X.mean(axis=0)), _readonly(sd))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorConfig:
    n: int = 1000
    r: float = 0.8
    delta: int = 50
    alpha: float = 0.05
    K: int = 100
    subset_budget: int = 0
    seed: int = 0
    task: TaskKind = field(default_factory=TaskKind.classification)
    model_spec: "ModelSpec | None" = None

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError("window size n must be at least 2", key="n")
        if not 0 < self.r < 1:
            raise ConfigurationError("train fraction r must lie in (0, 1)", key="r")
        if not 1 <= self.delta <= self.n:
            raise ConfigurationError("slide step delta must lie in [1, n]", key="delta")
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)", key="alpha")
        if self.K < 1:
            raise ConfigurationError("bootstrap count K must be at least 1", key="K")
        if self.subset_budget < 0:
            raise ConfigurationError("subset_budget must be nonnegative", key="subset_budget")
        if self.n_train < 1 or self.n_eff < 1:
            raise ConfigurationError("n and r leave an empty train or test block", key="r")
        if self.model_spec is None:
            from .model import ModelSpec

            object.__setattr__(self, "model_spec", ModelSpec())

    @property
    def n_train(self) -> int:
        return int(math.floor(self.n * self.r))

    @property
    def n_eff(self) -> int:
        """Effective window size: samples per window that enter the test."""
        return self.n - self.n_train

    @property
    def loss_kind(self) -> LossKind:
        return self.task.default_loss()


def max_workers() -> int:
    """Thread cap from ``DRIFT_THREADS``; defaults to the CPU count."""
    raw = os.environ.get("DRIFT_THREADS", "")
    try:
        val = int(raw)
    except ValueError:
        val = 0
    return val if val > 0 else (os.cpu_count() or 1)
