"""Dual-form kernel ridge training, clamped prediction, metrics, and
cross-validated grid search over the regularization and kernel grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, ShapeError
from .kernels import GramMatrix
from .linalg import reg_solve

# regularization grid expressed as C values; lambda = 1/C
C_GRID = (
    0.006, 0.015, 0.03, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0,
    8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0,
)


@dataclass(frozen=True)
class TrainedModel:
    """Dual coefficients alpha = (K + lambda I)^-1 y plus kernel metadata."""

    alpha: np.ndarray
    lam: float
    kernel_id: str
    params: dict = field(default_factory=dict)
    data_ref: dict = field(default_factory=dict)
    used_pinv: bool = False

    def to_json_dict(self) -> dict:
        return {
            "alpha": [float(a) for a in self.alpha],
            "lambda": self.lam,
            "kernel_id": self.kernel_id,
            "params": self.params,
            "data_ref": self.data_ref,
            "used_pinv": self.used_pinv,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "TrainedModel":
        return cls(
            alpha=np.asarray(d["alpha"], dtype=np.float64),
            lam=float(d["lambda"]),
            kernel_id=d["kernel_id"],
            params=d.get("params", {}),
            data_ref=d.get("data_ref", {}),
            used_pinv=bool(d.get("used_pinv", False)),
        )


def save_model(path, model: TrainedModel) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_json_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(path) as fh:
        return TrainedModel.from_json_dict(json.load(fh))


def _fit_alpha(mat: np.ndarray, y: np.ndarray, lam: float):
    res = reg_solve(mat, lam, y)
    return res.x, res.used_pinv


def fit(k_train: GramMatrix, y: np.ndarray, lam: float) -> TrainedModel:
    """Least-squares kernel ridge in dual form.

    At lambda = 0 a rank-deficient Gram falls back to the pseudo-inverse
    (minimum-norm interpolant).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != k_train.n:
        raise ShapeError(f"{y.shape[0]} targets for a {k_train.n}-point Gram")
    if lam < 0:
        raise InvalidInput("lambda must be >= 0")
    alpha, used_pinv = _fit_alpha(k_train.values, y, lam)
    return TrainedModel(
        alpha=alpha, lam=float(lam), kernel_id=k_train.kernel_id,
        params=dict(k_train.params), data_ref=dict(k_train.provenance),
        used_pinv=used_pinv,
    )


def predict_raw(model: TrainedModel, k_cross: np.ndarray) -> np.ndarray:
    """Unclamped decision values sum_i k(x_i, x) alpha_i.

    ``k_cross`` has one row per training point and one column per new point
    (a plain vector is treated as a single new point).
    """
    k = np.asarray(k_cross, dtype=np.float64)
    single = k.ndim == 1
    if single:
        k = k[:, None]
    if k.shape[0] != model.alpha.shape[0]:
        raise ShapeError(
            f"cross-kernel has {k.shape[0]} rows, model has "
            f"{model.alpha.shape[0]} training points"
        )
    out = k.T @ model.alpha
    return out[0] if single else out


def predict(model: TrainedModel, k_cross: np.ndarray) -> np.ndarray:
    """Predictions clamped to [-1, 1]."""
    return np.clip(predict_raw(model, k_cross), -1.0, 1.0)


def evaluate(predictions: np.ndarray, targets: np.ndarray, task: str) -> dict:
    """Mean absolute error for regression; sign-readout accuracy otherwise."""
    p = np.atleast_1d(np.asarray(predictions, dtype=np.float64))
    t = np.atleast_1d(np.asarray(targets, dtype=np.float64))
    if p.shape != t.shape:
        raise ShapeError(f"{p.shape} predictions vs {t.shape} targets")
    if task == "regression":
        return {"mae": float(np.mean(np.abs(p - t)))}
    if task == "classification":
        signs = np.where(p >= 0.0, 1.0, -1.0)
        return {"accuracy": float(np.mean(signs == t))}
    raise InvalidInput(f"unknown task {task!r}")


def cv_folds(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic folds: contiguous blocks of a seeded shuffle."""
    if folds < 2 or folds > n:
        raise InvalidInput(f"folds must be in 2..{n}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


@dataclass(frozen=True)
class GridSearchResult:
    params: dict
    c: float
    lam: float
    cv_score: float
    task: str
    all_scores: list = field(default_factory=list)


def grid_search(x: np.ndarray, y: np.ndarray, kernel_factory, param_grid,
                c_grid=C_GRID, folds: int = 5, seed: int = 0,
                task: str = "regression") -> GridSearchResult:
    """Exhaustive CV sweep over kernel parameters and the C grid.

    ``kernel_factory(params)`` must return a function f(idx_a, idx_b) ->
    cross-kernel block between the listed data indices. The score is MAE
    for regression and error rate for classification, minimized; exact
    ties go to the larger lambda (stronger regularization), then to the
    earlier parameter-grid entry.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < folds:
        raise InvalidInput("need at least as many points as folds")
    fold_idx = cv_folds(n, folds, seed)
    records = []
    for pi, params in enumerate(param_grid):
        kernel = kernel_factory(params)
        full = kernel(np.arange(n), np.arange(n))
        for c in c_grid:
            lam = 1.0 / float(c)
            errs = []
            for test in fold_idx:
                train = np.setdiff1d(np.arange(n), test)
                alpha, _ = _fit_alpha(full[np.ix_(train, train)], y[train], lam)
                preds = np.clip(full[np.ix_(train, test)].T @ alpha, -1.0, 1.0)
                if task == "regression":
                    errs.append(np.mean(np.abs(preds - y[test])))
                else:
                    signs = np.where(preds >= 0.0, 1.0, -1.0)
                    errs.append(np.mean(signs != y[test]))
            score = float(np.mean(errs))
            records.append((score, -lam, pi, params, c, lam))
    records.sort(key=lambda r: (r[0], r[1], r[2]))
    score, _, _, params, c, lam = records[0]
    return GridSearchResult(
        params=dict(params), c=float(c), lam=float(lam), cv_score=score,
        task=task,
        all_scores=[
            {"params": dict(r[3]), "C": r[4], "lambda": r[5], "score": r[0]}
            for r in records
        ],
    )
