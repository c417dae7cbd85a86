"""Feature-interaction-aware drift statistic.

For feature ``k`` and a family of subsets ``S`` not containing ``k``, the
statistic compares how much adding ``k`` to ``S`` lowers the masked risk on
one window against the same drop on the other window, and takes the largest
absolute discrepancy. Scaling by the per-window sample count gives the test
statistic.

Every quantity here is a mean of per-sample losses under a fixed model, so a
check evaluates the model once per (mask, sample) pair into a loss matrix.
Real and resampled statistics are then column sums of that matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ConfigurationError,
    InsufficientDataError,
    LossKind,
    ProtocolError,
    SampleWindow,
    batch_loss,
    bits_to_subset,
    bits_to_vector,
    subset_to_bits,
)
from .model import TrainedModel, subset_risk

# masks evaluated per forward pass when building a loss matrix
_MASK_CHUNK = 64


@dataclass(frozen=True)
class SubsetPlan:
    """Per-feature ordered subset families, stored as bitmasks.

    ``per_feature_subsets[k]`` never contains bit ``k``; it always starts with
    the empty set, and the full complement of ``k`` is always present.
    """

    d: int
    per_feature_subsets: tuple[tuple[int, ...], ...]
    exhaustive: bool
    seed: int

    def subsets(self, k: int) -> list[frozenset[int]]:
        return [bits_to_subset(b) for b in self.per_feature_subsets[k]]

    def masks(self, features: Iterable[int] | None = None) -> list[int]:
        """Every mask needed (``S`` and ``S | {k}``), in first-use order."""
        features = range(self.d) if features is None else features
        seen: dict[int, None] = {}
        for k in features:
            for s in self.per_feature_subsets[k]:
                seen.setdefault(s, None)
                seen.setdefault(s | (1 << k), None)
        return list(seen)


def _all_subsets(others: Sequence[int]) -> list[int]:
    out = []
    for size in range(len(others) + 1):
        for combo in itertools.combinations(others, size):
            out.append(subset_to_bits(combo))
    return out


def build_subset_plan(d: int, budget: int = 0, seed: int = 0) -> SubsetPlan:
    """Subsets to search per feature.

    Exhaustive when ``budget`` is 0 or covers all ``2**(d-1)`` subsets.
    Otherwise each feature gets the empty set, its full complement, and up to
    ``budget - 2`` sampled subsets: a size drawn uniformly from
    ``1..d-2``, then a uniform subset of that size (duplicates dropped).
    """
    if d < 1:
        raise ConfigurationError("d must be at least 1", key="d")
    if budget < 0:
        raise ConfigurationError("subset budget must be nonnegative", key="subset_budget")
    exhaustive = budget == 0 or 2 ** (d - 1) <= budget
    rng = np.random.default_rng(seed)
    per_feature = []
    for k in range(d):
        others = [j for j in range(d) if j != k]
        if exhaustive:
            per_feature.append(tuple(_all_subsets(others)))
            continue
        chosen = {0: None, subset_to_bits(others): None}
        if d >= 3:
            for _ in range(budget - 2):
                size = int(rng.integers(1, d - 1))
                pick = rng.choice(others, size=size, replace=False)
                chosen.setdefault(subset_to_bits(pick.tolist()), None)
        per_feature.append(tuple(chosen))
    return SubsetPlan(d, tuple(per_feature), exhaustive, seed)


@dataclass(frozen=True)
class FeatureTestResult:
    feature: int
    statistic: float
    threshold: float
    flagged: bool
    argmax_subset: frozenset[int]


# ---------------------------------------------------------------------------
# Loss-matrix machinery
# ---------------------------------------------------------------------------


def loss_matrix(model: TrainedModel, X: np.ndarray, y: np.ndarray, masks: Sequence[int],
                loss_kind: LossKind) -> np.ndarray:
    """Per-sample losses ``(len(masks), m)`` with inputs zero-projected by each mask."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    m, d = X.shape
    out = np.empty((len(masks), m))
    for start in range(0, len(masks), _MASK_CHUNK):
        chunk = masks[start:start + _MASK_CHUNK]
        mv = np.stack([bits_to_vector(b, d) for b in chunk])
        Xs = (mv[:, None, :] * X[None, :, :]).reshape(-1, d)
        preds = model.predict_batch(Xs)
        out[start:start + len(chunk)] = batch_loss(loss_kind, preds, np.tile(y, len(chunk))).reshape(len(chunk), m)
    return out


class PooledLosses:
    """Loss matrix of two equal windows stacked as ``[Dp | Dq]``.

    ``split_sums`` gives per-mask loss totals for the observed split,
    ``resampled_sums`` the same for arbitrary splits of the pooled samples.
    """

    def __init__(self, model: TrainedModel, Dp: SampleWindow, Dq: SampleWindow, plan: SubsetPlan,
                 loss_kind: LossKind, features: Sequence[int] | None = None):
        if len(Dp) == 0 or len(Dq) == 0:
            raise InsufficientDataError("both windows must be nonempty")
        if len(Dp) != len(Dq):
            raise ProtocolError(f"window sizes differ: {len(Dp)} vs {len(Dq)}")
        if Dp.d != plan.d or Dq.d != plan.d:
            raise ProtocolError("plan dimensionality does not match the windows")
        loss_kind.check_task(model.task)
        self.n_eff = len(Dp)
        self.plan = plan
        self.features = list(range(plan.d)) if features is None else list(features)
        self.masks = plan.masks(self.features)
        pos = {b: i for i, b in enumerate(self.masks)}
        self._s_idx = []
        self._sk_idx = []
        for k in self.features:
            subs = plan.per_feature_subsets[k]
            self._s_idx.append(np.array([pos[s] for s in subs]))
            self._sk_idx.append(np.array([pos[s | (1 << k)] for s in subs]))
        X = np.vstack([Dp.X, Dq.X])
        y = np.concatenate([Dp.y, Dq.y])
        self.L = loss_matrix(model, X, y, self.masks, loss_kind)

    def split_sums(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-mask loss totals of the observed ``Dp`` and ``Dq``."""
        n = self.n_eff
        return self.L[:, :n].sum(axis=1), self.L[:, n:].sum(axis=1)

    def resampled_sums(self, first_half: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Loss totals for ``K`` splits; ``first_half`` is a 0/1 ``(2n, K)`` membership matrix."""
        sp = self.L @ first_half
        return sp, self.L.sum(axis=1, keepdims=True) - sp

    def discrepancies(self, Sp: np.ndarray, Sq: np.ndarray) -> list[np.ndarray]:
        """Per feature, ``|drop_p - drop_q|`` in loss-total units for every planned subset."""
        out = []
        for s, sk in zip(self._s_idx, self._sk_idx):
            out.append(np.abs((Sp[s] - Sp[sk]) - (Sq[s] - Sq[sk])))
        return out

    def statistics(self, Sp: np.ndarray, Sq: np.ndarray, multiplier: float | None = None
                   ) -> tuple[np.ndarray, list[int]]:
        """``multiplier * d_hat`` per feature and the plan position attaining the max.

        Working on loss totals keeps zero-one statistics exact integers when
        the multiplier is the window size, so ties with thresholds are exact.
        """
        mult = self.n_eff if multiplier is None else multiplier
        disc = self.discrepancies(Sp, Sq)
        vals = np.array([mult * dk.max(axis=0) / self.n_eff for dk in disc])
        arg = [int(np.argmax(dk)) if dk.ndim == 1 else -1 for dk in disc]
        return vals, arg


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def delta_term(model: TrainedModel, Dp: SampleWindow, Dq: SampleWindow, S: Iterable[int], k: int,
               loss_kind: LossKind) -> float:
    """Signed difference between the risk drops from adding ``k`` to ``S`` on ``Dp`` and on ``Dq``."""
    S = frozenset(int(i) for i in S)
    if k in S:
        raise ConfigurationError(f"feature {k} must not be in the subset")
    Sk = S | {k}
    drop_p = subset_risk(model, Dp, S, loss_kind) - subset_risk(model, Dp, Sk, loss_kind)
    drop_q = subset_risk(model, Dq, S, loss_kind) - subset_risk(model, Dq, Sk, loss_kind)
    return drop_p - drop_q


def _max_discrepancy(model: TrainedModel, Dp: SampleWindow, Dq: SampleWindow, k: int, plan: SubsetPlan,
                     loss_kind: LossKind) -> tuple[float, int]:
    """Largest ``|(T_p[S]-T_p[S+k]) - (T_q[S]-T_q[S+k])|`` over the plan, with ``T`` loss totals
    for equal windows and mean losses otherwise; also returns its plan position."""
    if not 0 <= k < plan.d:
        raise ConfigurationError(f"plan does not cover feature {k}")
    if len(Dp) == 0 or len(Dq) == 0:
        raise InsufficientDataError("both windows must be nonempty")
    loss_kind.check_task(model.task)
    masks = plan.masks([k])
    pos = {b: i for i, b in enumerate(masks)}
    subs = plan.per_feature_subsets[k]
    s_idx = np.array([pos[s] for s in subs])
    sk_idx = np.array([pos[s | (1 << k)] for s in subs])
    reduce = np.sum if len(Dp) == len(Dq) else np.mean
    Tp = reduce(loss_matrix(model, Dp.X, Dp.y, masks, loss_kind), axis=1)
    Tq = reduce(loss_matrix(model, Dq.X, Dq.y, masks, loss_kind), axis=1)
    disc = np.abs((Tp[s_idx] - Tp[sk_idx]) - (Tq[s_idx] - Tq[sk_idx]))
    j = int(np.argmax(disc))
    return float(disc[j]), j


def d_hat(model: TrainedModel, Dp: SampleWindow, Dq: SampleWindow, k: int, plan: SubsetPlan,
          loss_kind: LossKind) -> tuple[float, frozenset[int]]:
    """Largest ``|delta_term|`` over the plan's subsets for ``k``; earliest subset wins ties.

    For equal window sizes the value is computed from integer-valued loss
    totals and divided once, so zero-one results are correctly rounded.
    """
    value, j = _max_discrepancy(model, Dp, Dq, k, plan, loss_kind)
    if len(Dp) == len(Dq):
        value /= len(Dp)
    return value, bits_to_subset(plan.per_feature_subsets[k][j])


def test_statistic(model: TrainedModel, Dp: SampleWindow, Dq: SampleWindow, k: int, plan: SubsetPlan,
                   loss_kind: LossKind) -> float:
    """Window size times :func:`d_hat`; both windows must hold the same number of samples."""
    if len(Dp) != len(Dq):
        raise ProtocolError(f"window sizes differ: {len(Dp)} vs {len(Dq)}")
    return _max_discrepancy(model, Dp, Dq, k, plan, loss_kind)[0]


# keep pytest from collecting the function above as a test
test_statistic.__test__ = False


def feature_statistics(pool: PooledLosses, multiplier: float | None = None
                       ) -> tuple[np.ndarray, list[frozenset[int]]]:
    """Observed statistics for every feature in ``pool`` and their maximising subsets."""
    vals, arg = pool.statistics(*pool.split_sums(), multiplier)
    subsets = [bits_to_subset(pool.plan.per_feature_subsets[k][j]) for k, j in zip(pool.features, arg)]
    return vals, subsets
