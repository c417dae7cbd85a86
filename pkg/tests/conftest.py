import itertools

import numpy as np
import pytest

from modeldrift import ModelSpec, SampleWindow, StreamSpec, TaskKind, fit, generate_arrays

CUBE = np.array(list(itertools.product([0.0, 1.0], repeat=3)))


@pytest.fixture(scope="session")
def d1_stream():
    X, y, truth = generate_arrays(StreamSpec("d1", 1600, (800,), seed=0))
    return SampleWindow(X, y), truth


@pytest.fixture(scope="session")
def d1_model(d1_stream):
    w, _ = d1_stream
    return fit(w.slice(0, 800), ModelSpec(), TaskKind.classification(), seed=0)


@pytest.fixture(scope="session")
def small_model():
    """Cheap 4-feature classifier, good enough to exercise the statistic."""
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 4))
    y = (X[:, 0] + X[:, 1] * X[:, 2] > 0).astype(float)
    return fit(SampleWindow(X, y), ModelSpec(hidden_sizes=(8,), epochs=20), TaskKind.classification(), seed=1)


# (criterion number, title, passed, detail) lines filled in by test_acceptance
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
