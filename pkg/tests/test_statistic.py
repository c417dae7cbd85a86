from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modeldrift.core import ConfigurationError, InsufficientDataError, LossKind, ProtocolError, SampleWindow
from modeldrift.statistic import (
    PooledLosses,
    build_subset_plan,
    d_hat,
    delta_term,
    feature_statistics,
    loss_matrix,
    test_statistic as statistic_of,
)
from oracles import brute_force_dhat

ZO = LossKind.ZERO_ONE


def _windows(seed, m=25, d=4):
    rng = np.random.default_rng(seed)
    Xp = rng.normal(size=(m, d))
    Xq = rng.normal(size=(m, d)) + 0.3
    yp = (Xp[:, 0] > 0).astype(float)
    yq = (Xq[:, 1] > 0).astype(float)
    return SampleWindow(Xp, yp), SampleWindow(Xq, yq)


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
def test_exhaustive_plan_shape(d):
    plan = build_subset_plan(d)
    assert plan.exhaustive
    for k in range(d):
        subs = plan.per_feature_subsets[k]
        assert len(subs) == len(set(subs)) == 2 ** (d - 1)
        assert subs[0] == 0
        assert all(not (s >> k) & 1 for s in subs)
        sizes = [bin(s).count("1") for s in subs]
        assert sizes == sorted(sizes)


def test_plan_masks_cover_both_sides():
    plan = build_subset_plan(3)
    masks = set(plan.masks())
    assert masks == set(range(8))


@given(st.integers(3, 20), st.integers(2, 40), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=40, deadline=None)
def test_sampled_plan_invariants(d, budget, seed):
    plan = build_subset_plan(d, budget, seed)
    for k in range(d):
        subs = plan.per_feature_subsets[k]
        assert subs[0] == 0
        full = (1 << d) - 1 ^ (1 << k)
        assert full in subs
        assert all(not (s >> k) & 1 for s in subs)
        assert len(subs) == len(set(subs)) <= max(budget, 2)
    assert build_subset_plan(d, budget, seed) == plan


def test_small_budget_falls_back_to_exhaustive():
    assert build_subset_plan(3, budget=4).exhaustive
    assert not build_subset_plan(6, budget=4).exhaustive


def test_plan_errors():
    with pytest.raises(ConfigurationError):
        build_subset_plan(0)
    with pytest.raises(ConfigurationError):
        build_subset_plan(3, budget=-1)


def test_loss_matrix_rows_match_masked_risk(small_model):
    Dp, _ = _windows(0)
    masks = [0, 0b1, 0b1010, 0b1111]
    L = loss_matrix(small_model, Dp.X, Dp.y, masks, ZO)
    from modeldrift.model import subset_risk
    from modeldrift.core import bits_to_subset
    for row, b in zip(L, masks):
        assert row.mean() == subset_risk(small_model, Dp, bits_to_subset(b), ZO)


def test_delta_term_antisymmetric(small_model):
    Dp, Dq = _windows(1)
    a = delta_term(small_model, Dp, Dq, {0, 2}, 1, ZO)
    b = delta_term(small_model, Dq, Dp, {0, 2}, 1, ZO)
    assert a == -b
    with pytest.raises(ConfigurationError):
        delta_term(small_model, Dp, Dq, {1}, 1, ZO)


def test_dhat_zero_on_identical_windows(small_model):
    Dp, _ = _windows(2)
    plan = build_subset_plan(4)
    for k in range(4):
        assert d_hat(small_model, Dp, Dp, k, plan, ZO)[0] == 0.0


@pytest.mark.parametrize("seed", range(8))
def test_dhat_equals_fraction_oracle(small_model, seed):
    Dp, Dq = _windows(seed, m=20)
    plan = build_subset_plan(4)
    for k in range(4):
        value, S = d_hat(small_model, Dp, Dq, k, plan, ZO)
        exact = brute_force_dhat(small_model, Dp.X, Dp.y, Dq.X, Dq.y, k)
        assert value == float(exact)
        # the reported argmax attains the maximum
        assert abs(Fraction(delta_term(small_model, Dp, Dq, S, k, ZO)).limit_denominator(20)) == exact


def test_dhat_unequal_windows(small_model):
    Dp, Dq = _windows(3)
    plan = build_subset_plan(4)
    value, _ = d_hat(small_model, Dp, Dq.slice(0, 15), 0, plan, ZO)
    exact = brute_force_dhat(small_model, Dp.X, Dp.y, Dq.X[:15], Dq.y[:15], 0)
    assert value == pytest.approx(float(exact), abs=1e-12)


def test_test_statistic_is_window_size_times_dhat(small_model):
    Dp, Dq = _windows(4)
    plan = build_subset_plan(4)
    for k in range(4):
        stat = statistic_of(small_model, Dp, Dq, k, plan, ZO)
        assert stat == float(brute_force_dhat(small_model, Dp.X, Dp.y, Dq.X, Dq.y, k) * len(Dp))
        assert stat == int(stat)
    with pytest.raises(ProtocolError):
        statistic_of(small_model, Dp, Dq.slice(0, 10), 0, plan, ZO)


def test_pooled_statistics_match_direct(small_model):
    Dp, Dq = _windows(5)
    plan = build_subset_plan(4)
    pool = PooledLosses(small_model, Dp, Dq, plan, ZO)
    vals, subsets = feature_statistics(pool)
    for k in range(4):
        assert vals[k] == statistic_of(small_model, Dp, Dq, k, plan, ZO)
        assert subsets[k] == d_hat(small_model, Dp, Dq, k, plan, ZO)[1]


def test_pooled_resample_equals_explicit_split(small_model):
    Dp, Dq = _windows(6)
    plan = build_subset_plan(4)
    pool = PooledLosses(small_model, Dp, Dq, plan, ZO)
    rng = np.random.default_rng(0)
    m = len(Dp)
    perm = rng.permutation(2 * m)
    member = np.zeros((2 * m, 1))
    member[perm[:m], 0] = 1.0
    vals, _ = pool.statistics(*pool.resampled_sums(member))
    X = np.vstack([Dp.X, Dq.X])
    y = np.concatenate([Dp.y, Dq.y])
    first = SampleWindow(X[perm[:m]], y[perm[:m]])
    second = SampleWindow(X[np.sort(perm[m:])], y[np.sort(perm[m:])])
    for k in range(4):
        assert vals[k, 0] == statistic_of(small_model, first, second, k, plan, ZO)


def test_pooled_errors(small_model):
    Dp, Dq = _windows(7)
    plan = build_subset_plan(4)
    with pytest.raises(ProtocolError):
        PooledLosses(small_model, Dp, Dq.slice(0, 5), plan, ZO)
    with pytest.raises(InsufficientDataError):
        PooledLosses(small_model, Dp.slice(0, 0), Dq.slice(0, 0), plan, ZO)
    with pytest.raises(ProtocolError):
        PooledLosses(small_model, Dp, Dq, build_subset_plan(3), ZO)


def test_d1_interaction_term_nonzero(d1_stream, d1_model):
    w, _ = d1_stream
    pre, post = w.slice(600, 800), w.slice(800, 1000)
    assert delta_term(d1_model, pre, post, {0}, 1, ZO) != 0.0


def test_squared_loss_statistic_runs():
    from modeldrift.core import TaskKind
    from modeldrift.model import ModelSpec, fit
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(80, 3))
    y = X[:, 0] * 2.0
    model = fit(SampleWindow(X, y), ModelSpec(hidden_sizes=(4,), epochs=5), TaskKind.regression(), 0)
    Dp, Dq = SampleWindow(X[:40], y[:40]), SampleWindow(X[40:], -y[40:])
    value, _ = d_hat(model, Dp, Dq, 0, build_subset_plan(3), LossKind.SQUARED)
    assert value > 0
