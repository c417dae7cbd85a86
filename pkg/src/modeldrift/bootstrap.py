"""Null simulation by re-splitting the pooled windows, and Bonferroni thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, LossKind, ProtocolError, SampleWindow
from .model import TrainedModel
from .statistic import PooledLosses, SubsetPlan


@dataclass(frozen=True, eq=False)
class ThresholdSet:
    thresholds: np.ndarray
    alpha: float
    K: int
    seed: int
    replicates: np.ndarray | None = None  # (d, K) raw replicate statistics

    def __eq__(self, other):
        return (isinstance(other, ThresholdSet)
                and np.array_equal(self.thresholds, other.thresholds)
                and (self.alpha, self.K, self.seed) == (other.alpha, other.K, other.seed))

    __hash__ = None


def quantile_index(q: float, K: int) -> int:
    """0-based position of the empirical ``q``-quantile in ``K`` sorted values.

    Uses the ``ceil(q*K)``-th order statistic, clamped to ``[0, K-1]``. The
    product is rounded to 9 decimals first so that e.g. ``0.99 * 100`` is not
    pushed up to the next integer by representation error.
    """
    return min(max(math.ceil(round(q * K, 9)) - 1, 0), K - 1)


def empirical_quantile(values: np.ndarray, q: float) -> np.ndarray:
    """Quantile along the last axis by :func:`quantile_index`."""
    values = np.sort(np.asarray(values, dtype=float), axis=-1)
    return values[..., quantile_index(q, values.shape[-1])]


def split_masks(n_eff: int, K: int, seed: int) -> np.ndarray:
    """``(2n, K)`` 0/1 matrix; column ``i`` marks a uniformly random half of the pool.

    Column ``i`` depends only on ``(seed, i)``.
    """
    out = np.zeros((2 * n_eff, K))
    for i in range(K):
        rng = np.random.default_rng([seed, i])
        out[rng.permutation(2 * n_eff)[:n_eff], i] = 1.0
    return out


def replicate_statistics(pool: PooledLosses, K: int, seed: int, multiplier: float | None = None) -> np.ndarray:
    """Statistics of ``K`` shuffled splits, shape ``(len(pool.features), K)``."""
    vals, _ = pool.statistics(*pool.resampled_sums(split_masks(pool.n_eff, K, seed)), multiplier)
    return vals


def thresholds_from_pool(pool: PooledLosses, alpha: float, K: int, seed: int,
                         multiplier: float | None = None) -> ThresholdSet:
    if K < 1:
        raise ConfigurationError("bootstrap count K must be at least 1", key="K")
    if not 0 < alpha < 1:
        raise ConfigurationError("alpha must lie in (0, 1)", key="alpha")
    reps = replicate_statistics(pool, K, seed, multiplier)
    q = 1.0 - alpha / pool.plan.d
    thr = empirical_quantile(reps, q)
    thr.setflags(write=False)
    return ThresholdSet(thr, alpha, K, seed, reps)


def bootstrap_thresholds(model: TrainedModel, Zr: SampleWindow, Zn: SampleWindow, alpha: float, K: int,
                         plan: SubsetPlan, loss_kind: LossKind, seed: int) -> ThresholdSet:
    """Per-feature ``(1 - alpha/d)`` quantiles of the statistic under resampled splits.

    The ``2n`` pooled samples are shuffled ``K`` times and cut into two
    pseudo-windows of ``n`` each; each cut yields one replicate statistic per
    feature computed with the same subset plan as the observed one.

    Raises:
        ProtocolError: the windows differ in size.
        ConfigurationError: ``K < 1`` or ``alpha`` outside ``(0, 1)``.
    """
    if len(Zr) != len(Zn):
        raise ProtocolError(f"window sizes differ: {len(Zr)} vs {len(Zn)}")
    if K < 1:
        raise ConfigurationError("bootstrap count K must be at least 1", key="K")
    pool = PooledLosses(model, Zr, Zn, plan, loss_kind)
    return thresholds_from_pool(pool, alpha, K, seed)
