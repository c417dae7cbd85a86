"""Sliding-window risk-based drift detection with retraining on drift."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import thresholds_from_pool
from .core import (
    DataError,
    DetectorConfig,
    InsufficientDataError,
    ProtocolError,
    SampleWindow,
    TaskKind,
    as_arrays,
)
from .model import TrainedModel, fit
from .statistic import FeatureTestResult, PooledLosses, SubsetPlan, build_subset_plan, feature_statistics

logger = logging.getLogger(__name__)


def derive_seed(master: int, *keys: int) -> int:
    """Stable 32-bit child seed of ``master`` for a tuple of integer keys."""
    return int(np.random.SeedSequence([int(master) & 0xFFFFFFFFFFFFFFFF, *keys]).generate_state(1)[0])


# tags for derive_seed
_FIT, _PLAN, _BOOT = 1, 2, 3


@dataclass(frozen=True, eq=False)
class DriftEvent:
    """A declared drift.

    ``model``, ``reference`` and ``current`` snapshot the model that was
    active when the drift fired and the two windows it was tested on; they
    feed the occlusion metric and are excluded from comparisons.
    """

    stream_index: int
    flagged_features: frozenset[int]
    per_feature: tuple[FeatureTestResult, ...]
    model: TrainedModel | None = field(default=None, repr=False, compare=False)
    reference: SampleWindow | None = field(default=None, repr=False, compare=False)
    current: SampleWindow | None = field(default=None, repr=False, compare=False)

    def __eq__(self, other):
        return (isinstance(other, DriftEvent) and self.stream_index == other.stream_index
                and self.flagged_features == other.flagged_features and self.per_feature == other.per_feature)

    __hash__ = None


@dataclass(frozen=True)
class DetectionTrace:
    events: tuple[DriftEvent, ...]
    performance: tuple[float, ...]
    config: DetectorConfig
    stream_length: int
    check_indices: tuple[int, ...] = ()

    @property
    def drift_indices(self) -> list[int]:
        return [e.stream_index for e in self.events]


def performance_metric(model: TrainedModel, window: SampleWindow, task: TaskKind) -> float:
    """Accuracy for classification, unclamped R^2 for regression."""
    if len(window) == 0:
        raise InsufficientDataError("performance of an empty window is undefined")
    y = np.asarray(window.y)
    if task.is_classification:
        return float(np.mean(model.predict_class(window.X) == y.astype(np.int64)))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DataError("R^2 is undefined for constant targets")
    ss_res = float(np.sum((model.predict_batch(window.X) - y) ** 2))
    return 1.0 - ss_res / ss_tot


def check_window(model: TrainedModel, Zr: SampleWindow, Zn_prefix: SampleWindow, config: DetectorConfig,
                 plan: SubsetPlan | None = None, seed: int | None = None) -> list[FeatureTestResult]:
    """Test every feature of ``Zr`` against ``Zn_prefix``.

    The observed statistics and all bootstrap replicates share one subset
    plan and one loss matrix. A feature is flagged when its statistic is
    strictly above its threshold.
    """
    if len(Zr) != len(Zn_prefix):
        raise ProtocolError(f"window sizes differ: {len(Zr)} vs {len(Zn_prefix)}")
    if plan is None:
        plan = build_subset_plan(Zr.d, config.subset_budget, config.seed)
    seed = config.seed if seed is None else seed
    pool = PooledLosses(model, Zr, Zn_prefix, plan, config.loss_kind)
    stats, subsets = feature_statistics(pool)
    thr = thresholds_from_pool(pool, config.alpha, config.K, seed).thresholds
    return [
        FeatureTestResult(k, float(stats[k]), float(thr[k]), bool(stats[k] > thr[k]), subsets[k])
        for k in range(plan.d)
    ]


def run_detector(stream, config: DetectorConfig, keep_snapshots: bool = True) -> DetectionTrace:
    """Run the detector over a finite stream.

    ``stream`` is a sequence of ``LabeledSample``, a ``SampleWindow`` or an
    ``(X, y)`` array pair. The first ``floor(n*r)`` samples train the model and
    the rest of the first ``n`` form the reference window. Each iteration tests
    the first ``n - floor(n*r)`` samples of the next ``n``; on drift the model
    is retrained on that ``n``-block (reference = its tail) and the cursor jumps
    by ``n``, otherwise it slides by ``delta``. The loop stops once fewer than
    ``n`` samples remain.
    """
    X, y = as_arrays(stream)
    L = len(y)
    n, n_train, n_eff = config.n, config.n_train, config.n_eff
    if L < 2 * n:
        raise InsufficientDataError(f"stream of {L} samples is shorter than 2n = {2 * n}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("stream contains non-finite values")
    full = SampleWindow(X, y, 0)
    d = full.d
    master = config.seed
    task = config.task

    n_fits = 0
    model = fit(full.slice(0, n_train), config.model_spec, task, derive_seed(master, _FIT, n_fits))
    Zr = full.slice(n_train, n)

    events: list[DriftEvent] = []
    perf: list[float] = []
    checks: list[int] = []
    i = n
    it = 0
    while i + n <= L:
        Zn = full.slice(i, i + n)
        prefix = Zn.slice(0, n_eff)
        plan = build_subset_plan(d, config.subset_budget, derive_seed(master, _PLAN, it))
        results = check_window(model, Zr, prefix, config, plan, derive_seed(master, _BOOT, it))
        checks.append(i)
        flagged = frozenset(r.feature for r in results if r.flagged)
        if flagged:
            logger.debug("drift at %d, features %s", i, sorted(flagged))
            events.append(DriftEvent(
                i, flagged, tuple(results),
                model if keep_snapshots else None,
                Zr if keep_snapshots else None,
                prefix if keep_snapshots else None,
            ))
            n_fits += 1
            model = fit(Zn.slice(0, n_train), config.model_spec, task, derive_seed(master, _FIT, n_fits))
            Zr = Zn.slice(n_train, n)
            perf.append(performance_metric(model, Zr, task))
            i += n
        else:
            perf.append(performance_metric(model, Zn, task))
            i += config.delta
        it += 1
    return DetectionTrace(tuple(events), tuple(perf), config, L, tuple(checks))
