"""Acceptance: engineered-advantage transfer to the classical model zoo.

The primary CLI engineers a maximally separating dataset (n = 10, E3,
600 points split 400/200, achieved g_gen >= 2); the projected-kernel
accuracy from the primary report must exceed the best classical baseline
accuracy by at least 5 percentage points.
"""

import json
import subprocess
import sys

from baselines import compare, run_baselines, write_results_csv


def report_line(num, name, ok, detail=""):
    print(f"[ACCEPTANCE {num}] {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def test_criterion_10_engineered_advantage_transfer(tmp_path):
    out = tmp_path / "eng"
    cmd = [
        sys.executable, "-m", "kernelscope.cli", "engineer",
        "--dataset", "gaussian", "--n", "10", "--N", "600",
        "--embedding", "e3", "--kernels", "pq,fidelity",
        "--mode", "median", "--n-train", "400",
        "--seed", "2", "--out", str(out),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr

    report = json.loads((out / "report.json").read_text())
    g_gen = report["achieved"]["g_gen"]
    assert g_gen >= 2.0, f"engineered g_gen {g_gen} below 2"
    assert report["split"] == {"n_train": 400, "n_test": 200}

    results = run_baselines(out / "engineered.csv", task="classification",
                            seed=0)
    bpath = tmp_path / "baselines.csv"
    write_results_csv(bpath, results)
    summary = compare(out / "report.json", bpath, tmp_path / "cmp")

    pq_acc = next(r["accuracy"] for r in report["models"]
                  if r["model"] == "projected_kernel")
    best_classical = summary["baseline_best"]["test_metric"]
    gap = pq_acc - best_classical
    ok = gap >= 0.05
    report_line(
        10, "engineered-advantage-transfer", ok,
        f"g_gen={g_gen:.2f}, projected-kernel acc {pq_acc:.3f}, best "
        f"classical {best_classical:.3f} ({summary['baseline_best']['model']}), "
        f"gap {gap:+.3f}",
    )
