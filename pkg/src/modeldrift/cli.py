"""``drift`` command line: run the detector, run benchmark suites, write synthetic streams.

Configuration is a flat ``key=value`` file (``#`` starts a comment) with
``--set key=value`` overrides; later settings win. Reports are ``key: value``
lines, one fact per line, with floats written by ``repr`` so that parsing a
report recovers every number exactly.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bench import SUITES, format_rows, preset_stream
from .core import ConfigurationError, DetectorConfig, DriftError, Standardizer, TaskKind
from .datagen import Generator, StreamSpec, feature_names, generate_arrays, read_csv_arrays, read_truth, \
    write_csv, write_truth
from .detector import DetectionTrace, run_detector
from .evaluation import average_performance, detection_pr, occlusion_mean
from .model import ModelSpec

logger = logging.getLogger("modeldrift")

CONFIG_KEYS = ("n", "r", "delta", "alpha", "K", "subset_budget", "seed", "task", "model", "hidden", "epochs",
               "lr", "batch", "l2", "standardize", "length", "drifts", "noise", "tolerance", "occlusion")

# report keys that vary between otherwise identical runs
VOLATILE_KEYS = frozenset({"runtime.seconds"})
# last key segments whose values are always comma-separated lists
LIST_FIELDS = frozenset({"hidden", "flagged", "statistic", "threshold", "values", "truth"})


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSettings:
    """Detector config plus the run-level options that sit next to it in a config file."""

    config: DetectorConfig
    task_given: bool = False
    standardize: bool | None = None
    length: int | None = None
    drifts: tuple[int, ...] | None = None
    noise: float | None = None
    tolerance: int | None = None
    occlusion: bool = False


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _task(text: str) -> TaskKind:
    t = text.strip().lower()
    if t == "regression":
        return TaskKind.regression()
    if t == "classification":
        return TaskKind.classification(2)
    if t.startswith("classification:"):
        return TaskKind.classification(int(t.split(":", 1)[1]))
    raise ValueError(f"expected 'classification[:C]' or 'regression', got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


_CONVERTERS = {
    "n": int, "delta": int, "K": int, "subset_budget": int, "seed": int, "epochs": int, "batch": int,
    "length": int, "tolerance": int, "r": float, "alpha": float, "lr": float, "l2": float, "noise": float,
    "task": _task, "hidden": _int_list, "drifts": _int_list, "standardize": _bool, "occlusion": _bool,
    "model": lambda s: s.strip().lower(),
}


def parse_config_lines(lines, source: str = "<config>") -> dict[str, object]:
    """Parse ``key=value`` lines into converted values. Unknown keys and bad values name their key."""
    out: dict[str, object] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{line_no}: expected key=value, got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _CONVERTERS:
            raise ConfigurationError(f"{source}:{line_no}: unknown config key {key!r}", key=key)
        try:
            out[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{line_no}: bad value for {key!r}: {exc}", key=key) from None
    return out


def build_settings(values: dict[str, object]) -> RunSettings:
    """Turn parsed config values into validated settings."""
    model = values.get("model", "mlp")
    if model not in ("mlp", "linear"):
        raise ConfigurationError(f"model must be 'mlp' or 'linear', got {model!r}", key="model")
    default = ModelSpec()
    hidden = () if model == "linear" else values.get("hidden", default.hidden_sizes)
    if model == "mlp" and not hidden:
        raise ConfigurationError("an MLP needs at least one hidden layer", key="hidden")
    spec = ModelSpec(
        hidden_sizes=hidden,
        epochs=values.get("epochs", default.epochs),
        learning_rate=values.get("lr", default.learning_rate),
        batch_size=values.get("batch", default.batch_size),
        l2=values.get("l2", default.l2),
    )
    base = DetectorConfig()
    cfg = DetectorConfig(
        n=values.get("n", base.n), r=values.get("r", base.r), delta=values.get("delta", base.delta),
        alpha=values.get("alpha", base.alpha), K=values.get("K", base.K),
        subset_budget=values.get("subset_budget", base.subset_budget), seed=values.get("seed", base.seed),
        task=values.get("task", base.task), model_spec=spec,
    )
    tol = values.get("tolerance")
    if tol is not None and tol < 0:
        raise ConfigurationError("tolerance must be nonnegative", key="tolerance")
    return RunSettings(cfg, "task" in values, values.get("standardize"), values.get("length"),
                       values.get("drifts"), values.get("noise"), tol, bool(values.get("occlusion", False)))


def load_settings(path: str | Path | None, overrides=()) -> RunSettings:
    values: dict[str, object] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_config_lines(text.splitlines(), str(path)))
    values.update(parse_config_lines(overrides, "--set"))
    return build_settings(values)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _list(values) -> str:
    return ",".join(_num(v) for v in values)


@dataclass
class RunReport:
    """Ordered ``key: value`` fields of one run."""

    fields: list[tuple[str, str]] = field(default_factory=list)

    def add(self, key: str, value) -> None:
        if isinstance(value, str):
            text = value
        elif isinstance(value, (list, tuple)):
            text = _list(value)
        else:
            text = _num(value)
        self.fields.append((key, text))

    def text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.fields)


def build_report(trace: DetectionTrace, source: str, names: list[str], settings: RunSettings,
                 truth: list[int] | None, seconds: float) -> RunReport:
    cfg = trace.config
    rep = RunReport()
    rep.add("source", source)
    for key, val in (("n", cfg.n), ("r", cfg.r), ("delta", cfg.delta), ("alpha", cfg.alpha), ("K", cfg.K),
                     ("subset_budget", cfg.subset_budget), ("seed", cfg.seed)):
        rep.add(f"config.{key}", val)
    rep.add("config.task", str(cfg.task))
    rep.add("config.model", cfg.model_spec.architecture)
    rep.add("config.hidden", list(cfg.model_spec.hidden_sizes))
    rep.add("config.epochs", cfg.model_spec.epochs)
    rep.add("config.lr", cfg.model_spec.learning_rate)
    rep.add("config.batch", cfg.model_spec.batch_size)
    rep.add("config.l2", cfg.model_spec.l2)
    rep.add("stream.length", trace.stream_length)
    rep.add("stream.features", ",".join(names))
    rep.add("checks.count", len(trace.check_indices))
    rep.add("events.count", len(trace.events))
    for j, e in enumerate(trace.events):
        flagged = sorted(e.flagged_features)
        rep.add(f"event.{j}.index", e.stream_index)
        rep.add(f"event.{j}.flagged", flagged)
        rep.add(f"event.{j}.flagged_names", ",".join(names[k] for k in flagged))
        rep.add(f"event.{j}.statistic", [r.statistic for r in e.per_feature])
        rep.add(f"event.{j}.threshold", [r.threshold for r in e.per_feature])
    rep.add("performance.count", len(trace.performance))
    rep.add("performance.values", list(trace.performance))
    rep.add("performance.mean", average_performance(trace))
    if truth is not None:
        tol = settings.tolerance if settings.tolerance is not None else cfg.n // 2
        sc = detection_pr(trace.drift_indices, truth, tol)
        rep.add("detection.truth", list(truth))
        rep.add("detection.tolerance", tol)
        rep.add("detection.precision", sc.precision)
        rep.add("detection.recall", sc.recall)
    if settings.occlusion:
        rep.add("occlusion.mean", 100.0 * occlusion_mean(trace) if trace.events else float("nan"))
    rep.add("runtime.seconds", seconds)
    return rep


def _parse_value(text: str, is_list: bool):
    parts = text.split(",") if text else []
    try:
        nums = [float(p) if any(c in p for c in ".eEn") else int(p) for p in parts]
    except ValueError:
        return text
    if is_list:
        return nums
    return nums[0] if len(nums) == 1 else text


def parse_report(text: str) -> dict[str, object]:
    """Inverse of :meth:`RunReport.text`: numbers and number lists come back exactly."""
    out: dict[str, object] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            key, value = line.rstrip(":"), ""
        out[key] = _parse_value(value, key.rsplit(".", 1)[-1] in LIST_FIELDS)
    return out


def numeric_fields(report: dict[str, object]) -> dict[str, object]:
    """Numeric entries of a parsed report, minus the wall-clock ones."""
    return {k: v for k, v in report.items()
            if k not in VOLATILE_KEYS and (isinstance(v, (int, float)) or isinstance(v, list))}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(config_path, gen: str | None = None, csv: str | None = None, truth_path: str | None = None,
            out: str | None = None, overrides=(), stdout=None) -> RunReport:
    """Run the detector on a generated or CSV stream and emit the report."""
    stdout = sys.stdout if stdout is None else stdout
    settings = load_settings(config_path, overrides)
    cfg = settings.config
    truth: list[int] | None = None
    if gen is not None:
        try:
            g = Generator(gen)
        except ValueError:
            raise ConfigurationError(f"unknown generator {gen!r}", key="generator") from None
        task = StreamSpec(g, 1).task
        if settings.task_given and cfg.task != task:
            raise ConfigurationError(f"generator {g.value} is a {task} task, config says {cfg.task}", key="task")
        cfg = replace(cfg, task=task)
        X, y, gt, _ = preset_stream(g, cfg.seed, length=settings.length, drift_points=settings.drifts,
                                    noise=settings.noise, standardize=settings.standardize, n_train=cfg.n_train)
        truth = list(gt.drift_points)
        names = feature_names(g)
        source = f"gen:{g.value}"
    else:
        X, y, names = read_csv_arrays(csv, cfg.task)
        if settings.standardize:
            X = Standardizer.fit(X[:cfg.n_train]).transform(X)
        source = f"csv:{Path(csv).name}"
    if truth_path is not None:
        truth = read_truth(truth_path)
    t0 = time.perf_counter()
    trace = run_detector((X, y), cfg, keep_snapshots=settings.occlusion)
    report = build_report(trace, source, names, settings, truth, time.perf_counter() - t0)
    text = report.text()
    stdout.write(text)
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return report


def cmd_bench(suite: str, seed: int = 0, quick: bool = False, stdout=None) -> str:
    """Run one benchmark suite over the synthetic roster and emit its table."""
    if suite not in SUITES:
        raise ConfigurationError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}", key="suite")
    table = format_rows(SUITES[suite](seed=seed, quick=quick))
    (sys.stdout if stdout is None else stdout).write(table)
    return table


def cmd_gen(name: str, length: int, drifts: tuple[int, ...], seed: int, out: str, truth_out: str | None,
            noise: float = 0.0) -> None:
    spec = StreamSpec(name, length, drifts, noise, seed)
    X, y, truth = generate_arrays(spec)
    write_csv(out, X, y, feature_names(spec.generator))
    if truth_out is not None:
        write_truth(truth_out, truth.drift_points)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drift", description="Model drift detection with feature attribution.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the detector over one stream")
    run.add_argument("--config", help="key=value config file")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--gen", choices=[g.value for g in Generator], help="synthetic generator preset")
    src.add_argument("--csv", help="stream CSV with a final 'label' column")
    run.add_argument("--truth", help="file of true drift indices, one per line")
    run.add_argument("--out", help="also write the report here")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key (repeatable)")

    bench = sub.add_parser("bench", help="run a benchmark suite")
    bench.add_argument("--suite", required=True, choices=list(SUITES))
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--quick", action="store_true", help="shorter streams and fewer replicates")

    gen = sub.add_parser("gen", help="write a synthetic stream to CSV")
    gen.add_argument("--name", required=True, choices=[g.value for g in Generator])
    gen.add_argument("--length", type=int, required=True)
    gen.add_argument("--drifts", default="", help="comma-separated drift indices")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--truth-out")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cmd_run(args.config, args.gen, args.csv, args.truth, args.out, args.overrides)
        elif args.command == "bench":
            cmd_bench(args.suite, args.seed, args.quick)
        else:
            try:
                drifts = _int_list(args.drifts)
            except ValueError:
                raise ConfigurationError(f"bad drift list {args.drifts!r}", key="drifts") from None
            cmd_gen(args.name, args.length, drifts, args.seed, args.out, args.truth_out, args.noise)
    except ConfigurationError as exc:
        where = f" [key {exc.key}]" if exc.key else ""
        print(f"drift: configuration error{where}: {exc}", file=sys.stderr)
        return 2
    except (DriftError, OSError) as exc:
        print(f"drift: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
