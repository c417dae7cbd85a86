"""Synthetic drift streams with ground truth, and CSV / truth-file I/O.

Each generator yields an ``(X, y)`` stream whose concept changes at the
requested drift points; ``GroundTruth`` records which features' relation to
the label changed at every drift. Apart from D1 and D2 the formulas are
reconstructions of the usual benchmark streams.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ConfigurationError, DriftError, LabeledSample, TaskKind


class ParseError(DriftError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class FormatError(DriftError):
    pass


class Generator(str, Enum):
    SINE = "sine"
    SINE_IMBALANCE = "sine_imbalance"
    SEA = "sea"
    SEA_GRADUAL = "sea_gradual"
    MIXED = "mixed"
    AUG_MIXED = "aug_mixed"
    AGRAWAL = "agrawal"
    AGRAWAL_IMBALANCE = "agrawal_imbalance"
    HYPERPLANE = "hyperplane"
    FRIEDMANN = "friedmann"
    D1 = "d1"
    D2 = "d2"


DIMENSIONS = {
    Generator.SINE: 4, Generator.SINE_IMBALANCE: 4,
    Generator.SEA: 3, Generator.SEA_GRADUAL: 3,
    Generator.MIXED: 6, Generator.AUG_MIXED: 6,
    Generator.AGRAWAL: 9, Generator.AGRAWAL_IMBALANCE: 9,
    Generator.HYPERPLANE: 10, Generator.FRIEDMANN: 4,
    Generator.D1: 3, Generator.D2: 4,
}

AGRAWAL_COLUMNS = ("salary", "commission", "age", "elevel", "car", "zipcode", "hvalue", "hyears", "loan")

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)
SEA_TRANSITION = 500
IMBALANCE_KEEP = 0.25
HYPERPLANE_DRIFTING = 5
HYPERPLANE_STEP = 0.001
HYPERPLANE_FLIP = 0.1


def task_for(generator: Generator | str) -> TaskKind:
    g = Generator(generator)
    return TaskKind.regression() if g is Generator.FRIEDMANN else TaskKind.classification(2)


def feature_names(generator: Generator | str) -> list[str]:
    g = Generator(generator)
    if g in (Generator.AGRAWAL, Generator.AGRAWAL_IMBALANCE):
        return list(AGRAWAL_COLUMNS)
    return [f"x{i + 1}" for i in range(DIMENSIONS[g])]


@dataclass(frozen=True)
class StreamSpec:
    generator: Generator
    length: int
    drift_points: tuple[int, ...] = ()
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "generator", Generator(self.generator))
        except ValueError:
            raise ConfigurationError(f"unknown generator {self.generator!r}", key="generator") from None
        object.__setattr__(self, "drift_points", tuple(int(p) for p in self.drift_points))
        if self.length < 1:
            raise ConfigurationError("stream length must be positive", key="length")
        pts = self.drift_points
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ConfigurationError("drift points must be strictly increasing", key="drifts")
        if pts and (pts[0] < 0 or pts[-1] >= self.length):
            raise ConfigurationError("drift points must lie in [0, length)", key="drifts")
        if not 0.0 <= self.noise < 1.0:
            raise ConfigurationError("noise must lie in [0, 1)", key="noise")

    @property
    def d(self) -> int:
        return DIMENSIONS[self.generator]

    @property
    def task(self) -> TaskKind:
        return task_for(self.generator)


@dataclass(frozen=True)
class GroundTruth:
    drift_points: tuple[int, ...]
    drift_features: tuple[frozenset[int], ...] = field(default=())

    def __post_init__(self):
        if len(self.drift_points) != len(self.drift_features):
            raise ConfigurationError("drift features must align with drift points")


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _concepts(length: int, drift_points: Sequence[int]) -> np.ndarray:
    """Concept index per position: number of drift points at or before it."""
    return np.array([bisect_right(drift_points, t) for t in range(length)], dtype=np.int64)


def _rejection(draw, length: int, concepts: np.ndarray, keep_class1: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Fill each concept segment by drawing and dropping class-1 rows with prob ``1 - keep_class1``."""
    Xs, ys = [], []
    for c in np.unique(concepts):
        need = int(np.sum(concepts == c))
        got_X, got_y, have = [], [], 0
        while have < need:
            X, y = draw(max(2 * need, 64), c)
            keep = (y == 0) | (rng.random(len(y)) < keep_class1)
            got_X.append(X[keep])
            got_y.append(y[keep])
            have += int(keep.sum())
        Xs.append(np.vstack(got_X)[:need])
        ys.append(np.concatenate(got_y)[:need])
    return np.vstack(Xs), np.concatenate(ys)


def _sine(rng, length, concepts, imbalance):
    def draw(m, c):
        X = rng.random((m, 4))
        y = (X[:, 1] < np.sin(X[:, 0])).astype(float)
        if c % 2:
            y = 1.0 - y
        return X, y

    if imbalance:
        return _rejection(draw, length, concepts, IMBALANCE_KEEP, rng)
    X = rng.random((length, 4))
    y = (X[:, 1] < np.sin(X[:, 0])).astype(float)
    odd = concepts % 2 == 1
    y[odd] = 1.0 - y[odd]
    return X, y


def _sea(rng, length, drift_points, gradual):
    X = rng.random((length, 3)) * 10.0
    concepts = _concepts(length, drift_points)
    if gradual:
        t = np.arange(length)
        for j, p in enumerate(drift_points):
            window = (t >= p) & (t < p + SEA_TRANSITION)
            still_old = rng.random(length) >= (t - p) / SEA_TRANSITION
            concepts[window & still_old] = j
    theta = np.array(SEA_THRESHOLDS)[concepts % len(SEA_THRESHOLDS)]
    y = (X[:, 0] + X[:, 1] <= theta).astype(float)
    return X, y


def _mixed(rng, length, concepts, augmented):
    X = rng.random((length, 6))
    X[:, 0] = X[:, 0] < 0.5
    X[:, 1] = X[:, 1] < 0.5
    curve = 0.5 + 0.3 * np.sin(3 * np.pi * X[:, 2])
    odd = concepts % 2 == 1
    below = X[:, 3] < curve
    cond = np.where(odd, ~below, below)
    y = ((X[:, 0] + X[:, 1] + cond) >= 2).astype(float)
    if augmented:
        y[odd] = 1.0 - y[odd]
    return X, y


def _agrawal_features(rng, m):
    salary = 20000 + 130000 * rng.random(m)
    commission = np.where(salary >= 75000, 0.0, 10000 + 65000 * rng.random(m))
    age = rng.integers(20, 81, m).astype(float)
    elevel = rng.integers(0, 5, m).astype(float)
    car = rng.integers(1, 21, m).astype(float)
    zipcode = rng.integers(0, 9, m).astype(float)
    hvalue = (9 - zipcode) * 100000 * (0.5 + rng.random(m))
    hyears = rng.integers(1, 31, m).astype(float)
    loan = 500000 * rng.random(m)
    return np.column_stack([salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan])


def _agrawal_label(X, function):
    salary, age, elevel = X[:, 0], X[:, 2], X[:, 3]
    young, mid = age < 40, (age >= 40) & (age < 60)
    old = ~(young | mid)
    if function == 0:
        group_a = young | old
    elif function == 1:
        group_a = (young & (salary >= 50000) & (salary <= 100000)) \
            | (mid & (salary >= 75000) & (salary <= 125000)) \
            | (old & (salary >= 25000) & (salary <= 75000))
    else:
        group_a = (young & (elevel <= 1)) | (mid & (elevel >= 1) & (elevel <= 3)) | (old & (elevel >= 2))
    return (~group_a).astype(float)


AGRAWAL_FUNCTION_FEATURES = (frozenset({2}), frozenset({0, 2}), frozenset({2, 3}))


def _agrawal(rng, length, concepts, imbalance):
    def draw(m, c):
        X = _agrawal_features(rng, m)
        return X, _agrawal_label(X, c % 3)

    if imbalance:
        return _rejection(draw, length, concepts, IMBALANCE_KEEP, rng)
    X = _agrawal_features(rng, length)
    y = np.empty(length)
    for c in np.unique(concepts):
        sel = concepts == c
        y[sel] = _agrawal_label(X[sel], c % 3)
    return X, y


def _hyperplane(rng, length, drift_points):
    d = 10
    X = rng.random((length, d))
    w0 = rng.random(d)
    direction = np.where(rng.random(HYPERPLANE_DRIFTING) < 0.5, -1.0, 1.0)
    active = np.zeros(length, dtype=bool)
    if drift_points:
        active[drift_points[0]:] = True
    flips = (rng.random((length, HYPERPLANE_DRIFTING)) < HYPERPLANE_FLIP) & active[:, None]
    signs = direction * np.where(np.cumsum(flips, axis=0) % 2 == 1, -1.0, 1.0)
    steps = HYPERPLANE_STEP * signs * active[:, None]
    W = np.tile(w0, (length, 1))
    W[:, :HYPERPLANE_DRIFTING] += np.cumsum(steps, axis=0)
    y = (np.sum(W * X, axis=1) > W.sum(axis=1) / 2).astype(float)
    return X, y


def _friedmann(rng, length, concepts):
    X = rng.random((length, 4))
    swapped = concepts % 2 == 1
    a = np.where(swapped, X[:, 3], X[:, 0])
    b = np.where(swapped, X[:, 0], X[:, 3])
    y = 10 * np.sin(np.pi * a * X[:, 1]) + 20 * (X[:, 2] - 0.5) ** 2 + 10 * b + rng.standard_normal(length)
    return X, y


def _boolean(rng, length, concepts, which):
    if which == 1:
        X = (rng.random((length, 3)) < 0.5).astype(float)
        x1, x2, x3 = (X[:, i].astype(bool) for i in range(3))
        pre = (x1 ^ x2) | x3
        post = x1 | x3
    else:
        X = (rng.random((length, 4)) < 0.5).astype(float)
        x1, x2, x3 = (X[:, i].astype(bool) for i in range(3))
        pre = x1 & x2
        post = x1 & x3
    y = np.where(concepts % 2 == 1, post, pre).astype(float)
    return X, y


def _truth_features(spec: StreamSpec) -> tuple[frozenset[int], ...]:
    g = spec.generator
    out = []
    for j in range(len(spec.drift_points)):
        if g in (Generator.SINE, Generator.SINE_IMBALANCE):
            f = {0, 1}
        elif g in (Generator.SEA, Generator.SEA_GRADUAL):
            f = {0, 1}
        elif g is Generator.MIXED:
            f = {2, 3}
        elif g is Generator.AUG_MIXED:
            f = {0, 1, 2, 3}
        elif g in (Generator.AGRAWAL, Generator.AGRAWAL_IMBALANCE):
            f = AGRAWAL_FUNCTION_FEATURES[j % 3] | AGRAWAL_FUNCTION_FEATURES[(j + 1) % 3]
        elif g is Generator.HYPERPLANE:
            f = set(range(HYPERPLANE_DRIFTING)) if j == 0 else set()
        elif g is Generator.FRIEDMANN:
            f = {0, 3}
        elif g is Generator.D1:
            f = {0, 1}
        else:
            f = {1, 2}
        out.append(frozenset(f))
    return tuple(out)


def generate_arrays(spec: StreamSpec) -> tuple[np.ndarray, np.ndarray, GroundTruth]:
    """Like :func:`generate` but returns ``(X, y, truth)`` arrays directly."""
    rng = np.random.default_rng(spec.seed)
    g = spec.generator
    L = spec.length
    concepts = _concepts(L, spec.drift_points)
    if g in (Generator.SINE, Generator.SINE_IMBALANCE):
        X, y = _sine(rng, L, concepts, g is Generator.SINE_IMBALANCE)
    elif g in (Generator.SEA, Generator.SEA_GRADUAL):
        X, y = _sea(rng, L, spec.drift_points, g is Generator.SEA_GRADUAL)
    elif g in (Generator.MIXED, Generator.AUG_MIXED):
        X, y = _mixed(rng, L, concepts, g is Generator.AUG_MIXED)
    elif g in (Generator.AGRAWAL, Generator.AGRAWAL_IMBALANCE):
        X, y = _agrawal(rng, L, concepts, g is Generator.AGRAWAL_IMBALANCE)
    elif g is Generator.HYPERPLANE:
        X, y = _hyperplane(rng, L, spec.drift_points)
    elif g is Generator.FRIEDMANN:
        X, y = _friedmann(rng, L, concepts)
    else:
        X, y = _boolean(rng, L, concepts, 1 if g is Generator.D1 else 2)

    if spec.noise > 0 and spec.task.is_classification:
        flip = rng.random(L) < spec.noise
        y = np.where(flip, 1.0 - y, y)
    return X, y, GroundTruth(spec.drift_points, _truth_features(spec))


def generate(spec: StreamSpec) -> tuple[list[LabeledSample], GroundTruth]:
    """Draw a labelled stream; deterministic in ``spec.seed``."""
    X, y, truth = generate_arrays(spec)
    return [LabeledSample(tuple(row), t) for row, t in zip(X, y)], truth


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def read_csv_arrays(path, task: TaskKind) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a stream CSV: header, feature columns, final ``label`` column.

    Returns ``(X, y, feature_names)``. Line numbers in errors are 1-based
    and count the header as line 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[-1] != "label":
            raise FormatError(f"{path}: last header column must be 'label'")
        if len(header) < 2:
            raise FormatError(f"{path}: no feature columns")
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} columns, found {len(row)}", line_no)
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ParseError(f"non-numeric cell ({exc})", line_no) from None
            if not all(np.isfinite(vals)):
                raise ParseError("non-finite cell", line_no)
            target = vals[-1]
            if task.is_classification and (target < 0 or target != int(target)):
                raise ParseError(f"classification label {row[-1]!r} is not a nonnegative integer", line_no)
            rows.append(vals[:-1])
            labels.append(target)
    d = len(header) - 1
    X = np.array(rows, dtype=float).reshape(len(rows), d)
    return X, np.array(labels, dtype=float), header[:-1]


def load_csv(path, task: TaskKind) -> list[LabeledSample]:
    X, y, _ = read_csv_arrays(path, task)
    return [LabeledSample(tuple(row), t) for row, t in zip(X, y)]


def write_csv(path, X: np.ndarray, y: np.ndarray, names: Sequence[str] | None = None) -> None:
    X = np.asarray(X)
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(X.shape[1])]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, "label"])
        for row, t in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [_label_text(t)])


def _label_text(t: float) -> str:
    t = float(t)
    return str(int(t)) if t == int(t) else repr(t)


def write_truth(path, drift_points: Sequence[int]) -> None:
    Path(path).write_text("".join(f"{int(p)}\n" for p in drift_points), encoding="utf-8")


def read_truth(path) -> list[int]:
    pts = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        try:
            pts.append(int(s))
        except ValueError:
            raise ParseError(f"drift index {s!r} is not an integer", line_no) from None
        if len(pts) > 1 and pts[-1] <= pts[-2]:
            raise ParseError("drift indices must be ascending", line_no)
    return pts
