"""Detection precision/recall, average performance, occlusion and empirical power."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ConfigurationError,
    DetectorConfig,
    InsufficientDataError,
    SampleWindow,
    Standardizer,
    TaskKind,
    max_workers,
)
from .datagen import StreamSpec, generate_arrays
from .detector import DetectionTrace, check_window, derive_seed, performance_metric
from .model import TrainedModel, fit
from .statistic import build_subset_plan


@dataclass(frozen=True)
class DetectionScore:
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int


def detection_pr(detected: Sequence[int], truth: Sequence[int], tolerance: int) -> DetectionScore:
    """Match detections to true drifts within ``tolerance`` samples.

    Detections are taken in index order; each claims the earliest unmatched
    truth within range. Unclaimed detections, including a second one near an
    already-matched drift, are false positives.
    """
    if tolerance < 0:
        raise ConfigurationError("tolerance must be nonnegative", key="tolerance")
    matched = [False] * len(truth)
    tp = 0
    for det in sorted(detected):
        for j, t in enumerate(truth):
            if not matched[j] and abs(det - t) <= tolerance:
                matched[j] = True
                tp += 1
                break
    fp = len(detected) - tp
    fn = len(truth) - tp
    if not detected and not truth:
        return DetectionScore(1.0, 1.0, 0, 0, 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return DetectionScore(precision, recall, tp, fp, fn)


def average_performance(trace: DetectionTrace | Iterable[float]) -> float:
    perf = list(trace.performance if isinstance(trace, DetectionTrace) else trace)
    if not perf:
        raise InsufficientDataError("no performance values recorded")
    return float(np.mean(perf))


def _impute(window: SampleWindow, S: Iterable[int]) -> SampleWindow:
    X = np.array(window.X)
    for k in S:
        X[:, k] = X[:, k].mean()
    return SampleWindow(X, window.y, window.start_index)


def occlusion_score(model: TrainedModel, Zr: SampleWindow, Zn: SampleWindow, S: Iterable[int],
                    task: TaskKind) -> float:
    """Share of the cross-window performance drop explained by the features in ``S``.

    Returns ``dA(all) - dA(S imputed)``, where ``dA`` is performance on ``Zr``
    minus performance on ``Zn`` and imputation replaces each feature of ``S``
    by its mean within the window being scored. Fractions, not percent.
    """
    S = sorted(set(int(k) for k in S))
    if not S:
        raise ConfigurationError("occlusion needs a nonempty feature set")
    if len(Zr) == 0 or len(Zn) == 0:
        raise InsufficientDataError("both windows must be nonempty")
    full = performance_metric(model, Zr, task) - performance_metric(model, Zn, task)
    occluded = performance_metric(model, _impute(Zr, S), task) - performance_metric(model, _impute(Zn, S), task)
    return full - occluded


def occlusion_mean(trace: DetectionTrace) -> float:
    """Mean occlusion score over every drift event, each with its own flagged features."""
    if not trace.events:
        raise InsufficientDataError("occlusion needs at least one drift event")
    scores = []
    for e in trace.events:
        if e.model is None:
            raise InsufficientDataError("trace was recorded without model snapshots")
        scores.append(occlusion_score(e.model, e.reference, e.current, e.flagged_features, trace.config.task))
    return float(np.mean(scores))


def _power_trial(spec: StreamSpec, config: DetectorConfig, trial: int, standardize: bool) -> bool:
    n, n_train, n_eff = config.n, config.n_train, config.n_eff
    seed = derive_seed(spec.seed, n, trial)
    drift = (n,) if spec.drift_points else ()
    X, y, _ = generate_arrays(replace(spec, length=n + n_eff, drift_points=drift, seed=seed))
    if standardize:
        X = Standardizer.fit(X[:n_train]).transform(X)
    w = SampleWindow(X, y)
    model = fit(w.slice(0, n_train), config.model_spec, config.task, seed)
    plan = build_subset_plan(w.d, config.subset_budget, seed)
    res = check_window(model, w.slice(n_train, n), w.slice(n, n + n_eff), config, plan, seed)
    return any(r.flagged for r in res)


def power_curve(spec: StreamSpec, window_sizes: Sequence[int], trials: int, config: DetectorConfig,
                standardize: bool = False, require_drift: bool = True) -> list[tuple[int, float]]:
    """Empirical rejection rate of one check per window size.

    Each trial trains on ``floor(n*r)`` pre-drift samples, takes the next
    ``n - floor(n*r)`` as reference and the same number right after the
    drift as the new window. With ``require_drift=False`` a drift-free spec
    is accepted and the result is the test's size.
    """
    if trials < 20:
        raise ConfigurationError("power estimates need at least 20 trials", key="trials")
    if require_drift and not spec.drift_points:
        raise ConfigurationError("power curve needs a spec with a drift", key="drifts")
    out = []
    for n in window_sizes:
        cfg = replace(config, n=int(n), delta=min(config.delta, int(n)), task=spec.task)
        with ThreadPoolExecutor(max_workers=max_workers()) as pool:
            hits = list(pool.map(lambda t: _power_trial(spec, cfg, t, standardize), range(trials)))
        out.append((int(n), float(np.mean(hits))))
    return out
