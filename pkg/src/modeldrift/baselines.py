"""Comparison detectors: feature-wise two-sample KS ("Marginal") and DDM.

Both come with stream runners that share the main detector's window layout
and retrain-on-drift protocol, so average performance and detection
precision/recall are comparable across methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import (
    ConfigurationError,
    DetectorConfig,
    InsufficientDataError,
    SampleWindow,
    as_arrays,
)
from .detector import derive_seed, performance_metric
from .model import fit

# ---------------------------------------------------------------------------
# Marginal KS
# ---------------------------------------------------------------------------


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS distance ``max_t |F_a(t) - F_b(t)|`` over the pooled sample points."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError("KS statistic needs two nonempty samples")
    t = np.concatenate([a, b])
    Fa = np.searchsorted(a, t, side="right") / a.size
    Fb = np.searchsorted(b, t, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))


def ks_critical_value(alpha: float, m: int, n: int) -> float:
    """Asymptotic two-sided critical value ``sqrt(-ln(alpha/2)/2) * sqrt((m+n)/(m*n))``."""
    return math.sqrt(-math.log(alpha / 2) / 2) * math.sqrt((m + n) / (m * n))


def marginal_ks(Zr: SampleWindow, Zn: SampleWindow, alpha: float) -> list[tuple[float, bool]]:
    """Per-feature KS statistic and flag at the Bonferroni level ``alpha/d``."""
    if len(Zr) == 0 or len(Zn) == 0:
        raise InsufficientDataError("both windows must be nonempty")
    d = Zr.d
    crit = ks_critical_value(alpha / d, len(Zr), len(Zn))
    out = []
    for k in range(d):
        D = ks_statistic(Zr.X[:, k], Zn.X[:, k])
        out.append((D, D > crit))
    return out


@dataclass(frozen=True)
class BaselineTrace:
    detections: tuple[int, ...]
    flagged_features: tuple[frozenset[int], ...]
    performance: tuple[float, ...]


def run_marginal(stream, config: DetectorConfig) -> BaselineTrace:
    """Marginal KS under the same sliding-window and retraining protocol as the main detector."""
    X, y = as_arrays(stream)
    L = len(y)
    n, n_train, n_eff = config.n, config.n_train, config.n_eff
    if L < 2 * n:
        raise InsufficientDataError(f"stream of {L} samples is shorter than 2n = {2 * n}")
    full = SampleWindow(X, y)
    fits = 0
    model = fit(full.slice(0, n_train), config.model_spec, config.task, derive_seed(config.seed, 1, fits))
    Zr = full.slice(n_train, n)
    det, feats, perf = [], [], []
    i = n
    while i + n <= L:
        Zn = full.slice(i, i + n)
        flags = frozenset(k for k, (_, f) in enumerate(marginal_ks(Zr, Zn.slice(0, n_eff), config.alpha)) if f)
        if flags:
            det.append(i)
            feats.append(flags)
            fits += 1
            model = fit(Zn.slice(0, n_train), config.model_spec, config.task, derive_seed(config.seed, 1, fits))
            Zr = Zn.slice(n_train, n)
            perf.append(performance_metric(model, Zr, config.task))
            i += n
        else:
            perf.append(performance_metric(model, Zn, config.task))
            i += config.delta
    return BaselineTrace(tuple(det), tuple(feats), tuple(perf))


# ---------------------------------------------------------------------------
# DDM
# ---------------------------------------------------------------------------

DDM_WARMUP = 30
DDM_WARNING = 2.0
DDM_DRIFT = 3.0


class DdmLevel(Enum):
    IN_CONTROL = "in_control"
    WARNING = "warning"
    DRIFT = "drift"


@dataclass(frozen=True)
class DdmState:
    sample_count: int = 0
    p: float = 0.0
    s: float = 0.0
    p_min: float = math.inf
    s_min: float = math.inf
    level: DdmLevel = DdmLevel.IN_CONTROL


def ddm_update(state: DdmState, error: int) -> DdmState:
    """One step of DDM on a 0/1 error indicator.

    The running error rate ``p`` and its binomial std ``s`` are tracked along
    with the minimum of ``p + s``. After a 30-sample warm-up the level is
    Warning once ``p + s`` exceeds ``p_min + 2 s_min`` and Drift once it exceeds
    ``p_min + 3 s_min``. A Drift state is returned with the counters already
    reset, so the next update starts fresh.
    """
    if error not in (0, 1):
        raise ConfigurationError("DDM takes 0/1 error indicators")
    i = state.sample_count + 1
    p = state.p + (error - state.p) / i
    s = math.sqrt(p * (1 - p) / i)
    p_min, s_min = state.p_min, state.s_min
    if i < DDM_WARMUP:
        return DdmState(i, p, s, p_min, s_min, DdmLevel.IN_CONTROL)
    if p + s <= p_min + s_min:
        p_min, s_min = p, s
    if p + s > p_min + DDM_DRIFT * s_min:
        return replace(DdmState(), level=DdmLevel.DRIFT)
    level = DdmLevel.WARNING if p + s > p_min + DDM_WARNING * s_min else DdmLevel.IN_CONTROL
    return DdmState(i, p, s, p_min, s_min, level)


def run_ddm(stream, config: DetectorConfig) -> BaselineTrace:
    """DDM on the model's per-sample errors, retraining on the next ``floor(n*r)`` samples after a drift.

    Performance entries are accuracies over consecutive blocks of ``n``
    monitored samples. Classification only.
    """
    if not config.task.is_classification:
        raise ConfigurationError("DDM needs a classification task", key="task")
    X, y = as_arrays(stream)
    L = len(y)
    n_train = config.n_train
    if L < 2 * config.n:
        raise InsufficientDataError(f"stream of {L} samples is shorter than 2n = {2 * config.n}")
    full = SampleWindow(X, y)
    fits = 0
    model = fit(full.slice(0, n_train), config.model_spec, config.task, derive_seed(config.seed, 1, fits))
    correct = model.predict_class(X) == y.astype(np.int64)
    state = DdmState()
    det, hits = [], []
    t = n_train
    while t < L:
        hits.append(bool(correct[t]))
        state = ddm_update(state, 0 if correct[t] else 1)
        if state.level is DdmLevel.DRIFT:
            det.append(t)
            if t + 1 + n_train > L:
                break
            fits += 1
            model = fit(full.slice(t + 1, t + 1 + n_train), config.model_spec, config.task,
                        derive_seed(config.seed, 1, fits))
            correct = model.predict_class(X) == y.astype(np.int64)
            state = DdmState()
            t += 1 + n_train
            continue
        t += 1
    blocks = [float(np.mean(hits[j:j + config.n])) for j in range(0, len(hits), config.n)]
    return BaselineTrace(tuple(det), tuple(frozenset() for _ in det), tuple(blocks))
