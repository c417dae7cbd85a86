import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modeldrift.cli import (
    RunReport,
    cmd_bench,
    load_settings,
    main,
    numeric_fields,
    parse_config_lines,
    parse_report,
)
from modeldrift.core import ConfigurationError
from modeldrift.datagen import read_truth

FAST = ["n=300", "delta=100", "K=20", "epochs=20", "hidden=8"]


def test_config_parsing_and_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nn = 400\nK=50  # trailing\ntask=classification:3\nhidden=8,4\nstandardize=no\n")
    s = load_settings(cfg, ["K=70"])
    assert (s.config.n, s.config.K) == (400, 70)
    assert s.config.task.n_classes == 3 and s.task_given
    assert s.config.model_spec.hidden_sizes == (8, 4)
    assert s.standardize is False
    assert load_settings(None, ["model=linear"]).config.model_spec.architecture == "linear"


@pytest.mark.parametrize("line,key", [("K=0", "K"), ("K=abc", "K"), ("bogus=1", "bogus"), ("r=1.5", "r"),
                                      ("model=tree", "model"), ("task=ranking", "task"), ("lr=-1", "lr"),
                                      ("standardize=maybe", "standardize")])
def test_config_errors_name_key(line, key):
    with pytest.raises(ConfigurationError) as exc:
        load_settings(None, [line])
    assert exc.value.key == key


def test_config_line_without_equals():
    with pytest.raises(ConfigurationError, match=":2:"):
        parse_config_lines(["n=5", "oops"])


def test_run_k0_exits_nonzero_naming_key(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("K=0\n")
    assert main(["run", "--config", str(cfg), "--gen", "d1"]) == 2
    out, err = capsys.readouterr()
    assert out == "" and "K" in err


def test_run_d1_report(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n=600\n")
    out_file = tmp_path / "r.txt"
    assert main(["run", "--config", str(cfg), "--gen", "d1", "--out", str(out_file), "--set", "occlusion=1"]) == 0
    text = capsys.readouterr().out
    assert out_file.read_text() == text
    rep = parse_report(text)
    assert rep["events.count"] == 1
    flagged = rep["event.0.flagged"]
    assert flagged and set(flagged) <= {0, 1}
    assert rep["detection.precision"] == 1.0 and rep["detection.recall"] == 1.0
    assert len(rep["event.0.statistic"]) == 3
    assert isinstance(rep["occlusion.mean"], float)


def test_run_csv_with_truth(tmp_path, capsys):
    data, truth = tmp_path / "s.csv", tmp_path / "t.txt"
    assert main(["gen", "--name", "d2", "--length", "900", "--drifts", "450", "--seed", "3",
                 "--out", str(data), "--truth-out", str(truth)]) == 0
    assert read_truth(truth) == [450]
    args = ["run", "--csv", str(data), "--truth", str(truth)] + [a for f in FAST for a in ("--set", f)]
    assert main(args) == 0
    rep = parse_report(capsys.readouterr().out)
    assert rep["source"] == "csv:s.csv" and rep["stream.length"] == 900
    assert "detection.recall" in rep


def test_run_csv_error_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,label\n1,0\nzz,1\n")
    assert main(["run", "--csv", str(bad)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_run_task_mismatch(capsys):
    assert main(["run", "--gen", "friedmann", "--set", "task=classification"]) == 2
    assert "task" in capsys.readouterr().err


def test_report_round_trip_exact():
    rep = RunReport()
    vals = [0.1, 1 / 3, 2.0, 1e-300, -7.25e12, float("inf")]
    rep.add("a.values", vals)
    rep.add("b.values", [0.5])
    rep.add("a.mean", 0.30000000000000004)
    rep.add("a.count", 6)
    rep.add("a.name", "x1,x2")
    rep.add("runtime.seconds", 1.5)
    back = parse_report(rep.text())
    assert back["a.values"] == vals and back["b.values"] == [0.5] and back["a.mean"] == 0.30000000000000004
    assert back["a.count"] == 6 and back["a.name"] == "x1,x2"
    assert "runtime.seconds" not in numeric_fields(back)


@given(st.lists(st.floats(allow_nan=False), min_size=1, max_size=10))
def test_report_float_lists_round_trip(vals):
    rep = RunReport()
    rep.add("p.values", vals)
    assert parse_report(rep.text())["p.values"] == vals


def test_identical_runs_identical_numbers(capsys):
    args = ["run", "--gen", "sine"] + [a for f in FAST + ["length=900"] for a in ("--set", f)]
    main(args)
    first = numeric_fields(parse_report(capsys.readouterr().out))
    main(args)
    second = numeric_fields(parse_report(capsys.readouterr().out))
    assert first == second and "performance.mean" in first


def test_bench_unknown_suite():
    with pytest.raises(ConfigurationError):
        cmd_bench("nope")
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--suite", "nope"])
    assert exc.value.code == 2


def test_bench_detection_roster_quick():
    from modeldrift.bench import DETECTION_ROSTER
    names = {g.value for g in DETECTION_ROSTER}
    assert {"sine", "sea", "mixed", "d1", "d2"} <= names
    from modeldrift import bench
    rows = bench.detection_suite(quick=True, roster=(bench.Generator.D1,))
    cmd_table = bench.format_rows(rows)
    assert cmd_table.splitlines()[0].startswith("dataset\tmethod")
    assert {r.method for r in rows} == {"risk", "marginal", "ddm"}


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modeldrift.cli", "run", "--gen", "sine", "--set", "K=0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stdout == "" and "K" in proc.stderr
