"""
From CSV to report
==================

The ``drift`` command reads any CSV whose last column is ``label``. Here we
write a synthetic stream to disk, run the command on it, and read the
report back. Every number in the report parses back exactly.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from modeldrift.cli import parse_report

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    data, truth, config = tmp / "d2.csv", tmp / "d2_truth.txt", tmp / "run.cfg"

    drift = [sys.executable, "-m", "modeldrift.cli"]
    subprocess.run(drift + ["gen", "--name", "d2", "--length", "1600", "--drifts", "800", "--seed", "4",
                            "--out", str(data), "--truth-out", str(truth)], check=True)
    print(data.read_text().splitlines()[:3])

    config.write_text("n = 600\nK = 100\nseed = 4\nocclusion = yes\n")
    out = subprocess.run(drift + ["run", "--config", str(config), "--csv", str(data), "--truth", str(truth)],
                         check=True, capture_output=True, text=True).stdout
    print(out)

report = parse_report(out)
for j in range(report["events.count"]):
    print(f"event {j}: index {report[f'event.{j}.index']}, flagged {report[f'event.{j}.flagged_names']}")
print("precision/recall:", report["detection.precision"], report["detection.recall"])
