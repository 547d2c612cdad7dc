"""Classical reference-model harness.

Trains the standard model zoo (feedforward nets, linear/RBF SVMs, random
forests, gradient boosting, AdaBoost) on datasets exported by the
kernelscope CLI, strictly through the CSV + JSON-sidecar interface: the
harness never recomputes kernels or labels. Grid search uses 5-fold CV
with seeded estimators, so results are reproducible for pinned library
versions.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import (
    AdaBoostClassifier,
    AdaBoostRegressor,
    GradientBoostingClassifier,
    GradientBoostingRegressor,
    RandomForestClassifier,
    RandomForestRegressor,
)
from sklearn.exceptions import ConvergenceWarning
from sklearn.kernel_ridge import KernelRidge
from sklearn.model_selection import GridSearchCV
from sklearn.neural_network import MLPClassifier, MLPRegressor
from sklearn.svm import SVC, SVR

C_GRID = [
    0.006, 0.015, 0.03, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0,
    8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0,
]
GAMMA_FACTORS = [0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 20.0]
HIDDEN_SIZES = [10, 25, 50, 75, 100, 125, 150, 200]
TREE_DEPTHS = [2, 3, 4, 5]
N_ESTIMATORS = [25, 50, 100, 200, 500]


class HashMismatch(Exception):
    """Dataset file does not match the hash recorded in its sidecar."""


@dataclass(frozen=True)
class BaselineResult:
    family: str
    params: dict
    cv_score: float
    test_metric: float
    metric_name: str
    dataset_sha256: str

    def to_row(self) -> dict:
        return {
            "family": self.family,
            "params": json.dumps(self.params, sort_keys=True),
            "cv_score": self.cv_score,
            "test_metric": self.test_metric,
            "metric_name": self.metric_name,
            "dataset_sha256": self.dataset_sha256,
        }


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def load_export(csv_path):
    """Read a kernelscope dataset CSV + sidecar, verifying the hash.

    Returns (x, y, sidecar, sha256). The sidecar's split indices (when
    present) define the train/test split.
    """
    sidecar_path = f"{csv_path}.meta.json"
    if not os.path.exists(sidecar_path):
        raise FileNotFoundError(sidecar_path)
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    digest = file_sha256(csv_path)
    recorded = sidecar.get("sha256")
    if recorded != digest:
        raise HashMismatch(
            f"{csv_path}: sha256 {digest} != sidecar {recorded}"
        )
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    n = sum(1 for c in header if c.startswith("x_"))
    body = np.array([[float(v) for v in r] for r in rows[1:]])
    x = body[:, :n]
    y = body[:, n]
    return x, y, sidecar, digest


def _rbf_gammas(x: np.ndarray) -> list[float]:
    var = float(np.var(x))
    return [f / (x.shape[1] * var) for f in GAMMA_FACTORS]


def _classifier_grids(x, seed):
    return {
        "neural_net": (
            MLPClassifier(max_iter=500, random_state=seed),
            {"hidden_layer_sizes": [(h,) for h in HIDDEN_SIZES]},
        ),
        "svm_linear": (SVC(kernel="linear"), {"C": C_GRID}),
        "svm_rbf": (SVC(kernel="rbf"), {"C": C_GRID, "gamma": _rbf_gammas(x)}),
        "random_forest": (
            RandomForestClassifier(random_state=seed),
            {"max_depth": TREE_DEPTHS, "n_estimators": N_ESTIMATORS},
        ),
        "gradient_boosting": (
            GradientBoostingClassifier(random_state=seed),
            {"max_depth": TREE_DEPTHS, "n_estimators": N_ESTIMATORS},
        ),
        "adaboost": (
            AdaBoostClassifier(random_state=seed),
            {"n_estimators": N_ESTIMATORS},
        ),
    }


def _regressor_grids(x, seed):
    gammas = _rbf_gammas(x)
    return {
        "neural_net": (
            MLPRegressor(max_iter=500, random_state=seed),
            {"hidden_layer_sizes": [(h,) for h in HIDDEN_SIZES]},
        ),
        # linear / RBF kernel methods: both SVR and KernelRidge compete,
        # the CV winner represents the family
        "svm_linear": (
            None,
            [
                (SVR(kernel="linear"), {"C": C_GRID}),
                (KernelRidge(kernel="linear"), {"alpha": [1.0 / c for c in C_GRID]}),
            ],
        ),
        "svm_rbf": (
            None,
            [
                (SVR(kernel="rbf"), {"C": C_GRID, "gamma": gammas}),
                (
                    KernelRidge(kernel="rbf"),
                    {"alpha": [1.0 / c for c in C_GRID], "gamma": gammas},
                ),
            ],
        ),
        "random_forest": (
            RandomForestRegressor(random_state=seed),
            {"max_depth": TREE_DEPTHS, "n_estimators": N_ESTIMATORS},
        ),
        "gradient_boosting": (
            GradientBoostingRegressor(random_state=seed),
            {"max_depth": TREE_DEPTHS, "n_estimators": N_ESTIMATORS},
        ),
        "adaboost": (
            AdaBoostRegressor(random_state=seed),
            {"n_estimators": N_ESTIMATORS},
        ),
    }


def _search(estimator, grid, x, y, scoring, n_jobs):
    gs = GridSearchCV(estimator, grid, cv=5, scoring=scoring, n_jobs=n_jobs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        gs.fit(x, y)
    return gs


def run_baselines(csv_path, task: str = "classification", seed: int = 0,
                  n_train: int | None = None, families=None,
                  n_jobs: int = -1) -> list[BaselineResult]:
    """Grid-search every family on the export's training split and score
    the held-out split."""
    x, y, sidecar, digest = load_export(csv_path)
    split = sidecar.get("meta", {}).get("split")
    if split:
        train = np.asarray(split["train"], dtype=int)
        test = np.asarray(split["test"], dtype=int)
    else:
        if n_train is None:
            raise ValueError(
                f"{csv_path}: sidecar has no split; pass n_train explicitly"
            )
        rng = np.random.default_rng(seed)
        perm = rng.permutation(x.shape[0])
        train, test = perm[:n_train], perm[n_train:]

    if task == "classification":
        grids = _classifier_grids(x[train], seed)
        scoring, metric_name = "accuracy", "accuracy"
    else:
        grids = _regressor_grids(x[train], seed)
        scoring, metric_name = "neg_mean_absolute_error", "mae"
    if families:
        grids = {k: v for k, v in grids.items() if k in families}

    results = []
    for family in sorted(grids):
        estimator, grid = grids[family]
        if estimator is None:
            candidates = [_search(est, g, x[train], y[train], scoring, n_jobs)
                          for est, g in grid]
            best = max(candidates, key=lambda gs: gs.best_score_)
        else:
            best = _search(estimator, grid, x[train], y[train], scoring, n_jobs)
        preds = best.best_estimator_.predict(x[test])
        if task == "classification":
            metric = float(np.mean(preds == y[test]))
        else:
            metric = float(np.mean(np.abs(preds - y[test])))
        params = {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in best.best_params_.items()
        }
        params["estimator"] = type(best.best_estimator_).__name__
        results.append(BaselineResult(
            family=family, params=params, cv_score=float(best.best_score_),
            test_metric=metric, metric_name=metric_name,
            dataset_sha256=digest,
        ))
    return results


def write_results_csv(path, results: list[BaselineResult]) -> None:
    rows = [r.to_row() for r in results]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for row in rows:
            w.writerow(row)


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def compare(primary_report_path, baselines_csv_path, out_dir) -> dict:
    """Merge the primary's kernel-model rows with the baseline table.

    Aborts on dataset-hash mismatch. Writes comparison.csv and
    comparison.json; the winner flag marks the best test metric.
    """
    with open(primary_report_path) as fh:
        report = json.load(fh)
    primary_hash = report.get("dataset_sha256")
    baseline_rows = read_results_csv(baselines_csv_path)
    hashes = {r["dataset_sha256"] for r in baseline_rows}
    if not primary_hash or hashes != {primary_hash}:
        raise HashMismatch(
            f"primary hash {primary_hash} vs baseline hashes {sorted(hashes)}"
        )
    metric_name = baseline_rows[0]["metric_name"]
    merged = []
    for row in report.get("models", []):
        merged.append({
            "source": "primary",
            "model": row["model"],
            "params": json.dumps({"lambda": row.get("lambda")}, sort_keys=True),
            "cv_score": "",
            "test_metric": float(row["accuracy"]),
            "metric_name": "accuracy",
            "dataset_sha256": primary_hash,
        })
    for row in baseline_rows:
        merged.append({
            "source": "baseline",
            "model": row["family"],
            "params": row["params"],
            "cv_score": row["cv_score"],
            "test_metric": float(row["test_metric"]),
            "metric_name": row["metric_name"],
            "dataset_sha256": row["dataset_sha256"],
        })
    better = max if metric_name == "accuracy" else min
    best_row = better(merged, key=lambda r: r["test_metric"])
    for row in merged:
        row["winner"] = row is best_row

    os.makedirs(out_dir, exist_ok=True)
    out_csv = os.path.join(out_dir, "comparison.csv")
    with open(out_csv, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(merged[0].keys()))
        w.writeheader()
        for row in merged:
            w.writerow(row)
    primary_best = better(
        (r for r in merged if r["source"] == "primary"),
        key=lambda r: r["test_metric"],
    )
    baseline_best = better(
        (r for r in merged if r["source"] == "baseline"),
        key=lambda r: r["test_metric"],
    )
    summary = {
        "metric": metric_name,
        "winner": {"source": best_row["source"], "model": best_row["model"],
                   "test_metric": best_row["test_metric"]},
        "primary_best": {"model": primary_best["model"],
                         "test_metric": primary_best["test_metric"]},
        "baseline_best": {"model": baseline_best["model"],
                          "test_metric": baseline_best["test_metric"]},
        "rows": len(merged),
        "dataset_sha256": primary_hash,
    }
    with open(os.path.join(out_dir, "comparison.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return summary
