import numpy as np
import pytest

from conftest import CUBE
from modeldrift.core import DataError, DimensionError, InsufficientDataError, LossKind, SampleWindow, TaskKind
from modeldrift.model import ModelSpec, _init_params, fit, gradients, objective, predict, subset_risk


def _numeric_grad(params, X, T, task, l2, eps=1e-6):
    out = []
    for layer in params:
        gl = []
        for arr in layer:
            g = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                old = arr[i]
                arr[i] = old + eps
                up = objective(params, X, T, task, l2)
                arr[i] = old - eps
                down = objective(params, X, T, task, l2)
                arr[i] = old
                g[i] = (up - down) / (2 * eps)
            gl.append(g)
        out.append(gl)
    return out


@pytest.mark.parametrize("task,out_dim", [(TaskKind.classification(3), 3), (TaskKind.regression(), 1)])
@pytest.mark.parametrize("l2", [0.0, 0.1])
def test_gradient_matches_finite_differences(task, out_dim, l2):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(7, 4))
    if task.is_classification:
        T = np.eye(3)[rng.integers(0, 3, 7)]
    else:
        T = rng.normal(size=(7, 1))
    params = _init_params([4, 5, 3, out_dim], rng)
    analytic = gradients(params, X, T, task, l2)
    numeric = _numeric_grad(params, X, T, task, l2)
    for (gW, gb), (nW, nb) in zip(analytic, numeric):
        for a, b in ((gW, nW), (gb, nb)):
            err = np.max(np.abs(a - b)) / max(1e-8, np.max(np.abs(a) + np.abs(b)))
            assert err < 1e-4


def test_d1_fit_learns_truth_table(d1_stream, d1_model):
    w, _ = d1_stream
    pre = w.slice(0, 800)
    assert np.mean(d1_model.predict_class(pre.X) == pre.y) >= 0.99
    x1, x2, x3 = CUBE.T.astype(bool)
    expected = ((x1 ^ x2) | x3).astype(int)
    assert d1_model.predict_class(CUBE).tolist() == expected.tolist()


def test_predict_single_vector(d1_model):
    assert int(np.argmax(predict(d1_model, (1.0, 0.0, 0.0)))) == 1
    with pytest.raises(DimensionError):
        predict(d1_model, [[1.0, 0.0, 0.0]])
    with pytest.raises(DimensionError):
        predict(d1_model, (1.0, 0.0))


def test_subset_risk_against_cube_oracle(d1_stream, d1_model):
    w, _ = d1_stream
    pre = w.slice(0, 800)
    # oracle: group the window by cube point, evaluate the masked point once each
    def oracle(S):
        keep = np.array([k in S for k in range(3)], dtype=float)
        total = 0
        for x, t in zip(pre.X, pre.y):
            total += int(d1_model.predict_class((x * keep)[None, :])[0] != t)
        return total / len(pre)

    for S in ({2}, {0, 1, 2}, set(), {0, 2}):
        assert subset_risk(d1_model, pre, S, LossKind.ZERO_ONE) == pytest.approx(oracle(S), abs=0)
    assert subset_risk(d1_model, pre, {2}, LossKind.ZERO_ONE) > subset_risk(d1_model, pre, {0, 1, 2},
                                                                             LossKind.ZERO_ONE)


def test_subset_risk_rejects_mismatched_loss(d1_stream, d1_model):
    w, _ = d1_stream
    with pytest.raises(Exception):
        subset_risk(d1_model, w.slice(0, 10), {0}, LossKind.SQUARED)


def test_fit_is_deterministic():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 3))
    y = (X[:, 0] > 0).astype(float)
    w = SampleWindow(X, y)
    spec = ModelSpec(hidden_sizes=(6,), epochs=5)
    a = fit(w, spec, TaskKind.classification(), seed=9)
    b = fit(w, spec, TaskKind.classification(), seed=9)
    c = fit(w, spec, TaskKind.classification(), seed=10)
    for (Wa, ba), (Wb, bb) in zip(a.parameters, b.parameters):
        assert np.array_equal(Wa, Wb) and np.array_equal(ba, bb)
    assert not np.array_equal(a.parameters[0][0], c.parameters[0][0])


def test_linear_and_regression_fit():
    rng = np.random.default_rng(1)
    X = rng.uniform(size=(400, 2))
    y = 5.0 + 3.0 * X[:, 0] - 2.0 * X[:, 1]
    m = fit(SampleWindow(X, y), ModelSpec.linear(epochs=100, learning_rate=0.05), TaskKind.regression(), 0)
    assert len(m.parameters) == 1
    np.testing.assert_allclose(m.predict_batch(X), y, atol=0.05)


def test_fit_errors():
    spec = ModelSpec(hidden_sizes=(4,), epochs=1)
    with pytest.raises(InsufficientDataError):
        fit(SampleWindow(np.zeros((0, 2)), np.zeros(0)), spec, TaskKind.classification(), 0)
    with pytest.raises(DataError):
        fit(SampleWindow(np.array([[np.inf, 0.0]]), np.zeros(1)), spec, TaskKind.classification(), 0)
    with pytest.raises(DataError):
        fit(SampleWindow(np.zeros((2, 2)), np.array([0.0, 2.0])), spec, TaskKind.classification(), 0)


@pytest.mark.parametrize("kw,key", [({"hidden_sizes": (0,)}, "hidden"), ({"epochs": 0}, "epochs"),
                                    ({"learning_rate": 0.0}, "lr"), ({"batch_size": 0}, "batch"),
                                    ({"l2": -1.0}, "l2")])
def test_model_spec_validation(kw, key):
    with pytest.raises(Exception) as exc:
        ModelSpec(**kw)
    assert exc.value.key == key


def test_architecture_names():
    assert ModelSpec.linear().architecture == "linear"
    assert ModelSpec.mlp((4, 4)).architecture == "mlp"
