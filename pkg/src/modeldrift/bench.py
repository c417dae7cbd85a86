"""Benchmark presets and suite runners over the synthetic roster."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .baselines import run_ddm, run_marginal
from .core import DetectorConfig, Standardizer
from .datagen import Generator, StreamSpec, generate_arrays
from .detector import DetectionTrace, run_detector
from .evaluation import average_performance, detection_pr, occlusion_mean, power_curve


@dataclass(frozen=True)
class Preset:
    """Stream layout and window size used for one benchmark dataset."""

    length: int
    drift_points: tuple[int, ...]
    n: int = 1000
    noise: float = 0.0
    standardize: bool = True
    has_truth: bool = True


PRESETS: dict[Generator, Preset] = {
    Generator.SINE: Preset(3000, (1500,)),
    Generator.SINE_IMBALANCE: Preset(3000, (1500,)),
    Generator.SEA: Preset(8000, (2000, 4000, 6000)),
    Generator.SEA_GRADUAL: Preset(8000, (2000, 4000, 6000), has_truth=False),
    Generator.MIXED: Preset(3000, (1500,)),
    Generator.AUG_MIXED: Preset(3000, (1500,)),
    Generator.AGRAWAL: Preset(3000, (1500,)),
    Generator.AGRAWAL_IMBALANCE: Preset(3000, (1500,)),
    Generator.HYPERPLANE: Preset(4000, (1000,), has_truth=False),
    Generator.FRIEDMANN: Preset(3000, (1500,)),
    Generator.D1: Preset(1600, (800,), n=600, standardize=False),
    Generator.D2: Preset(1600, (800,), n=600, standardize=False),
}

DETECTION_ROSTER = (Generator.SINE, Generator.SINE_IMBALANCE, Generator.SEA, Generator.MIXED,
                    Generator.AUG_MIXED, Generator.AGRAWAL, Generator.FRIEDMANN, Generator.D1, Generator.D2)
OCCLUSION_ROSTER = (Generator.D1, Generator.D2, Generator.SINE, Generator.SEA, Generator.MIXED, Generator.AUG_MIXED)


def preset_stream(generator: Generator | str, seed: int, *, length: int | None = None,
                  drift_points: tuple[int, ...] | None = None, noise: float | None = None,
                  standardize: bool | None = None, n_train: int | None = None):
    """Generate a preset stream, optionally standardised on its first training block.

    Returns ``(X, y, truth, spec)``.
    """
    g = Generator(generator)
    p = PRESETS[g]
    length = p.length if length is None else length
    if drift_points is None:
        drift_points = tuple(t for t in p.drift_points if t < length)
    spec = StreamSpec(g, length, drift_points, p.noise if noise is None else noise, seed)
    X, y, truth = generate_arrays(spec)
    if p.standardize if standardize is None else standardize:
        block = n_train if n_train is not None else int(p.n * 0.8)
        X = Standardizer.fit(X[:block]).transform(X)
    return X, y, truth, spec


def preset_config(generator: Generator | str, seed: int, **overrides) -> DetectorConfig:
    g = Generator(generator)
    p = PRESETS[g]
    cfg = DetectorConfig(n=p.n, seed=seed, task=StreamSpec(g, 1).task)
    return replace(cfg, **overrides) if overrides else cfg


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    method: str
    values: dict[str, float]


def _quick_overrides(quick: bool) -> dict:
    return {"K": 30} if quick else {}


def detection_suite(seed: int = 0, quick: bool = False, roster=DETECTION_ROSTER) -> list[BenchRow]:
    """Average performance and drift P/R for the risk detector, Marginal KS and DDM."""
    rows = []
    for g in roster:
        cfg = preset_config(g, seed, **_quick_overrides(quick))
        length = min(PRESETS[g].length, 3 * cfg.n) if quick else None
        X, y, truth, spec = preset_stream(g, seed, length=length, n_train=cfg.n_train)
        tol = cfg.n // 2
        has_truth = PRESETS[g].has_truth
        results = {"risk": run_detector((X, y), cfg, keep_snapshots=False)}
        results["marginal"] = run_marginal((X, y), cfg)
        if cfg.task.is_classification:
            results["ddm"] = run_ddm((X, y), cfg)
        for method, tr in results.items():
            det = tr.drift_indices if isinstance(tr, DetectionTrace) else list(tr.detections)
            vals = {"performance": average_performance(tr.performance)}
            if has_truth:
                sc = detection_pr(det, list(truth.drift_points), tol)
                vals.update(precision=sc.precision, recall=sc.recall)
            vals["detections"] = float(len(det))
            rows.append(BenchRow(g.value, method, vals))
    return rows


def occlusion_suite(seed: int = 0, quick: bool = False, roster=OCCLUSION_ROSTER) -> list[BenchRow]:
    """Mean occlusion score (percentage points) of the features the risk detector flags."""
    rows = []
    for g in roster:
        cfg = preset_config(g, seed, **_quick_overrides(quick))
        length = min(PRESETS[g].length, 3 * cfg.n) if quick else None
        X, y, _, _ = preset_stream(g, seed, length=length, n_train=cfg.n_train)
        tr = run_detector((X, y), cfg)
        vals = {"events": float(len(tr.events))}
        vals["occlusion"] = 100.0 * occlusion_mean(tr) if tr.events else float("nan")
        rows.append(BenchRow(g.value, "risk", vals))
    return rows


def power_suite(seed: int = 0, quick: bool = False, window_sizes=(100, 250, 500, 1000),
                trials: int = 50) -> list[BenchRow]:
    """Empirical power of one check on the Sine drift, per window size."""
    if quick:
        window_sizes, trials = tuple(w for w in window_sizes if w <= 250), 20
    spec = StreamSpec(Generator.SINE, 2, (1,), seed=seed)
    curve = power_curve(spec, window_sizes, trials, DetectorConfig(seed=seed), standardize=True)
    return [BenchRow("sine", "risk", {"n": float(n), "power": p}) for n, p in curve]


SUITES = {"detection": detection_suite, "occlusion": occlusion_suite, "power": power_suite}


def format_rows(rows: list[BenchRow]) -> str:
    keys: list[str] = []
    for r in rows:
        for k in r.values:
            if k not in keys:
                keys.append(k)
    lines = ["\t".join(["dataset", "method", *keys])]
    for r in rows:
        cells = [r.dataset, r.method]
        for k in keys:
            v = r.values.get(k)
            cells.append("-" if v is None or (isinstance(v, float) and np.isnan(v)) else f"{v:.4g}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
