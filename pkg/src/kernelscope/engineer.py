"""Construct label vectors that saturate the geometric inequality between a
reference (quantum) kernel and a classical kernel.

The real-valued targets are y = sqrt(K_Q) v with v the top eigenvector of
sqrt(K_Q) sqrt(K_C) (K_C + lambda I)^-2 sqrt(K_C) sqrt(K_Q); they achieve
s_Q = 1 and regularized s_C = g_gen^2 by construction. Binarization turns
them into a classification task.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, ShapeError
from .geometry import LAMBDA_GRID, _check_normalized, _learner_mid, select_lambda
from .kernels import GramMatrix
from .linalg import DEFAULT_RCOND, psd_sqrt, spectral_norm, sym_eig

S_TRA_CAP = 0.002

BINARIZE_MODES = ("median", "sign_noise")


@dataclass(frozen=True)
class EngineeredLabels:
    """Saturating targets plus the construction metadata."""

    y_real: np.ndarray
    y_class: np.ndarray
    lam_used: float
    g_gen_achieved: float
    noise_seed: int | None
    mode: str
    eigenvector: np.ndarray
    s_tra_bound: float
    cap_satisfied: bool
    classical_id: str


def binarize(y_real: np.ndarray, mode: str, noise_p: float = 0.1,
             rng: np.random.Generator | None = None) -> np.ndarray:
    """Turn real targets into +/-1 labels.

    ``median``: +1 strictly above the median, -1 otherwise (ties down).
    ``sign_noise``: the sign (with sign(0) = +1), resampled uniformly at
    random with probability ``noise_p``.
    """
    y = np.asarray(y_real, dtype=np.float64)
    if y.size == 0:
        raise InvalidInput("empty target vector")
    if mode == "median":
        med = float(np.median(y))
        return np.where(y > med, 1, -1).astype(np.int64)
    if mode == "sign_noise":
        if rng is None:
            rng = np.random.default_rng(0)
        signs = np.where(y >= 0.0, 1, -1).astype(np.int64)
        resample = rng.random(y.size) < noise_p
        random_signs = rng.choice(np.array([-1, 1]), size=y.size)
        return np.where(resample, random_signs, signs)
    raise InvalidInput(f"unknown binarize mode {mode!r}")


def _saturating_vector(src_sqrt: np.ndarray, lrn_eig, lam: float,
                       rcond: float) -> tuple[np.ndarray, float]:
    """Top eigenpair of sqrt(K_Q) sqrt(K_C)(K_C+lam)^-2 sqrt(K_C) sqrt(K_Q)."""
    v = lrn_eig.eigenvectors
    mid_gen, _ = _learner_mid(lrn_eig, lam, rcond)
    half = src_sqrt @ (v * np.sqrt(mid_gen))
    e = sym_eig(half @ half.T)
    top = e.eigenvectors[:, 0]
    # deterministic sign: largest-magnitude component positive
    lead = int(np.argmax(np.abs(top)))
    if top[lead] < 0:
        top = -top
    return top, float(np.sqrt(max(e.eigenvalues[0], 0.0)))


def _s_tra_bound(src_sqrt: np.ndarray, lrn_eig, lam: float,
                 rcond: float) -> float:
    """lam^2 ||sqrt(K_Q)(K_C+lam)^-2 sqrt(K_Q)||: training-error budget."""
    if lam == 0.0:
        return 0.0
    v = lrn_eig.eigenvectors
    _, mid_tra = _learner_mid(lrn_eig, lam, rcond)
    half = src_sqrt @ (v * np.sqrt(mid_tra))
    return float(lam**2 * spectral_norm(half @ half.T))


def engineer_labels(k_c: GramMatrix, k_q: GramMatrix,
                    lambda_grid=LAMBDA_GRID, s_tra_cap: float = S_TRA_CAP,
                    mode: str = "sign_noise", noise_p: float = 0.1,
                    noise_seed: int = 0,
                    rcond: float = DEFAULT_RCOND) -> EngineeredLabels:
    """Sweep the lambda grid and return the most separating labels.

    Among grid points whose training-error budget stays at or below
    ``s_tra_cap``, the lambda with the largest g_gen wins. When no grid
    point meets the cap, the best achievable budget is used and flagged.
    """
    _check_normalized(k_c, "engineer_labels (classical)")
    _check_normalized(k_q, "engineer_labels (reference)")
    if k_c.n != k_q.n:
        raise ShapeError("Gram size mismatch")
    if mode not in BINARIZE_MODES:
        raise InvalidInput(f"unknown binarize mode {mode!r}")
    src_sqrt = psd_sqrt(k_q.base).mat
    lrn_eig = sym_eig(k_c.base)

    candidates = []
    for lam in lambda_grid:
        bound = _s_tra_bound(src_sqrt, lrn_eig, lam, rcond)
        v, g_gen = _saturating_vector(src_sqrt, lrn_eig, lam, rcond)
        candidates.append((lam, bound, g_gen, v))
    passing = [c for c in candidates if c[1] <= s_tra_cap]
    if passing:
        lam, bound, g_gen, v = max(passing, key=lambda c: c[2])
        ok = True
    else:
        lam, bound, g_gen, v = min(candidates, key=lambda c: c[1])
        ok = False

    y_real = src_sqrt @ v
    rng = np.random.default_rng(noise_seed)
    y_class = binarize(y_real, mode, noise_p=noise_p, rng=rng)
    return EngineeredLabels(
        y_real=y_real,
        y_class=y_class,
        lam_used=float(lam),
        g_gen_achieved=g_gen,
        noise_seed=noise_seed,
        mode=mode,
        eigenvector=v,
        s_tra_bound=bound,
        cap_satisfied=ok,
        classical_id=k_c.label(),
    )


def select_adversary(k_q: GramMatrix, classical_suite: list[GramMatrix],
                     lambda_grid=LAMBDA_GRID,
                     g_tra_cap: float = 0.045) -> GramMatrix:
    """Pick the classical suite member with the smallest screening g_gen
    (the strongest adversary to engineer against).

    Members whose training term cannot meet the cap at any grid lambda are
    not meaningful adversaries (their g_gen is not a valid bound), so they
    are skipped unless the whole suite fails the cap.
    """
    if not classical_suite:
        raise InvalidInput("empty classical suite")
    src_sqrt = psd_sqrt(k_q.base).mat
    scored = []
    for kc in classical_suite:
        _check_normalized(kc, "select_adversary")
        _, g_gen, _, ok = select_lambda(
            src_sqrt, sym_eig(kc.base), lambda_grid, g_tra_cap
        )
        scored.append((not ok, g_gen, len(scored), kc))
    scored.sort(key=lambda item: item[:3])
    return scored[0][3]
