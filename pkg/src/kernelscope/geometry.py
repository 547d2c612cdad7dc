"""Screening quantities for potential quantum prediction advantage.

Model complexity s (plain and regularized), the training-error scalar,
approximate effective dimension d, geometric difference (g_gen, g_tra),
and the flowchart verdict over a classical kernel suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NotNormalized, ShapeError
from .kernels import GramMatrix
from .linalg import DEFAULT_RCOND, psd_pinv, psd_sqrt, spectral_norm, sym_eig

# regularization grid used in screening sweeps
LAMBDA_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 0.025, 0.05, 0.1)

G_TRA_CAP = 0.045

VERDICT_CLASSICAL = "classical-competitive"
VERDICT_ADVANTAGE = "potential-advantage"
VERDICT_LABEL_DEPENDENT = "label-dependent"


@dataclass(frozen=True)
class ScreenThresholds:
    """Verdict cutoffs; the raw quantities are always reported alongside.

    ``g_classical``: min g at or below this counts as classical-competitive
    (the bound only says "small, of order one"). ``s_ratio``: with labels,
    s_C must exceed s_Q by this factor before advantage is claimed for the
    concrete dataset. ``dim_ratio``: min(d, Tr O^2)/N at or below this means
    the quantum kernel itself can learn any QNN on this encoding.
    """

    g_classical: float = 1.5
    g_tra_cap: float = G_TRA_CAP
    s_ratio: float = 2.0
    dim_ratio: float = 0.5


@dataclass(frozen=True)
class LearnerEntry:
    kernel_id: str
    params: dict
    lam: float
    g_gen: float
    g_tra: float
    cap_satisfied: bool

    def to_json_dict(self) -> dict:
        return {
            "kernel_id": self.kernel_id,
            "params": self.params,
            "lambda": self.lam,
            "g_gen": self.g_gen,
            "g_tra": self.g_tra,
            "cap_satisfied": self.cap_satisfied,
        }


@dataclass(frozen=True)
class GeometryReport:
    """Screening result for one reference (quantum) kernel."""

    n_data: int
    reference: str
    d_eff: float
    learners: list[LearnerEntry]
    verdict: str
    min_g: dict
    thresholds: ScreenThresholds
    input_dim: int | None = None
    s_values: dict = field(default_factory=dict)
    dim_check: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "n": self.input_dim,
            "N": self.n_data,
            "reference": self.reference,
            "d_eff": self.d_eff,
            "learners": [e.to_json_dict() for e in self.learners],
            "min_g": self.min_g,
            "s_values": self.s_values,
            "dim_check": self.dim_check,
            "verdict": self.verdict,
            "thresholds": {
                "g_classical": self.thresholds.g_classical,
                "g_tra_cap": self.thresholds.g_tra_cap,
                "s_ratio": self.thresholds.s_ratio,
                "dim_ratio": self.thresholds.dim_ratio,
            },
            "seeds": self.seeds,
            "warnings": self.warnings,
        }

    def csv_rows(self) -> list[dict]:
        """Flatten to one row per learner for plotting."""
        return [
            {
                "reference": self.reference,
                "N": self.n_data,
                "d_eff": self.d_eff,
                "learner": e.kernel_id,
                "learner_params": repr(e.params),
                "lambda": e.lam,
                "g_gen": e.g_gen,
                "g_tra": e.g_tra,
                "cap_satisfied": e.cap_satisfied,
                "verdict": self.verdict,
            }
            for e in self.learners
        ]


def _check_normalized(gram: GramMatrix, who: str) -> np.ndarray:
    mat = gram.values
    n = mat.shape[0]
    if abs(float(np.trace(mat)) - n) > 1e-8:
        raise NotNormalized(
            f"{who}: trace is {float(np.trace(mat))!r}, expected {n}"
        )
    return mat


def model_complexity(gram: GramMatrix, y: np.ndarray, lam: float = 0.0,
                     rcond: float = DEFAULT_RCOND) -> float:
    """Squared weight norm of the kernel model fitted to targets y.

    lam = 0 gives y^T K^+ y; lam > 0 gives y^T sqrt(K)(K+lam I)^-2 sqrt(K) y.
    """
    mat = _check_normalized(gram, "model_complexity")
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != mat.shape[0]:
        raise ShapeError(f"targets have length {y.shape[0]}, Gram is {mat.shape[0]}")
    if lam < 0:
        raise InvalidInput("lambda must be >= 0")
    if lam == 0.0:
        return float(y @ psd_pinv(gram.base, rcond=rcond).mat @ y)
    e = sym_eig(gram.base)
    t = np.clip(e.eigenvalues, 0.0, None)
    proj = e.eigenvectors.T @ y
    return float(np.sum(proj**2 * t / (t + lam) ** 2))


def train_error_scalar(gram: GramMatrix, y: np.ndarray, lam: float) -> float:
    """lam^2 * y^T (K + lam I)^-2 y: squared norm of the training residual."""
    mat = _check_normalized(gram, "train_error_scalar")
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != mat.shape[0]:
        raise ShapeError(f"targets have length {y.shape[0]}, Gram is {mat.shape[0]}")
    if lam == 0.0:
        return 0.0
    e = sym_eig(gram.base)
    t = np.clip(e.eigenvalues, 0.0, None)
    proj = e.eigenvectors.T @ y
    return float(lam**2 * np.sum(proj**2 / (t + lam) ** 2))


def effective_dimension(gram: GramMatrix) -> float:
    """Approximate dimension of the embedded training set.

    With eigenvalues t_1 >= ... >= t_N of the trace-normalized Gram:
    d = sum_k (sum_{l>=k} t_l) / (N - k + 1). The denominator counts the
    tail terms, so d hits exactly 1 on a rank-one Gram and exactly N on
    the identity.
    """
    mat = _check_normalized(gram, "effective_dimension")
    t = np.clip(sym_eig(gram.base).eigenvalues, 0.0, None)
    tails = np.cumsum(t[::-1])[::-1]
    n = t.size
    denom = np.arange(n, 0, -1, dtype=np.float64)
    return float(np.sum(tails / denom))


def _learner_mid(eig, lam: float, rcond: float) -> tuple[np.ndarray, np.ndarray]:
    """Spectral middle factors for g_gen and g_tra at one lambda."""
    t = np.clip(eig.eigenvalues, 0.0, None)
    if lam == 0.0:
        cutoff = rcond * max(float(t[0]), 0.0)
        inv = np.where(t > cutoff, 1.0 / np.where(t > cutoff, t, 1.0), 0.0)
        return inv, inv**2  # t * inv^2 == inv on the support
    return t / (t + lam) ** 2, 1.0 / (t + lam) ** 2


def _g_pair(src_sqrt: np.ndarray, lrn_eig, lam: float,
            rcond: float) -> tuple[float, float]:
    v = lrn_eig.eigenvectors
    mid_gen, mid_tra = _learner_mid(lrn_eig, lam, rcond)
    half = v * np.sqrt(mid_gen)
    m_gen = (src_sqrt @ half) @ (src_sqrt @ half).T
    g_gen = float(np.sqrt(spectral_norm(m_gen)))
    if lam == 0.0:
        return g_gen, 0.0
    half_t = v * np.sqrt(mid_tra)
    m_tra = (src_sqrt @ half_t) @ (src_sqrt @ half_t).T
    g_tra = float(lam * np.sqrt(spectral_norm(m_tra)))
    return g_gen, g_tra


def geometric_difference(k_src: GramMatrix, k_lrn: GramMatrix, lam: float,
                         rcond: float = DEFAULT_RCOND) -> tuple[float, float]:
    """Asymmetric geometry comparison (g_gen, g_tra).

    ``k_src`` is the reference whose functions are to be reproduced
    (quantum), ``k_lrn`` the learner (classical). For every y,
    s_lrn <= g_gen^2 * s_src, at the cost of a training error bounded by
    g_tra^2 * s_src.
    """
    a = _check_normalized(k_src, "geometric_difference (source)")
    b = _check_normalized(k_lrn, "geometric_difference (learner)")
    if a.shape != b.shape:
        raise ShapeError(f"size mismatch: {a.shape} vs {b.shape}")
    if lam < 0:
        raise InvalidInput("lambda must be >= 0")
    src_sqrt = psd_sqrt(k_src.base).mat
    lrn_eig = sym_eig(k_lrn.base)
    return _g_pair(src_sqrt, lrn_eig, lam, rcond)


def select_lambda(src_sqrt: np.ndarray, lrn_eig, lambda_grid,
                  g_tra_cap: float, rcond: float = DEFAULT_RCOND):
    """Largest lambda in the grid whose training term meets the cap.

    Returns (lam, g_gen, g_tra, cap_satisfied); when no grid point meets
    the cap the entry with the smallest g_tra is reported instead.
    """
    evaluated = []
    for lam in sorted(lambda_grid, reverse=True):
        g_gen, g_tra = _g_pair(src_sqrt, lrn_eig, lam, rcond)
        if g_tra <= g_tra_cap:
            return lam, g_gen, g_tra, True
        evaluated.append((g_tra, lam, g_gen))
    g_tra, lam, g_gen = min(evaluated)
    return lam, g_gen, g_tra, False


def screen(quantum_grams: list[GramMatrix], classical_suite: list[GramMatrix],
           lambda_grid=LAMBDA_GRID, thresholds: ScreenThresholds | None = None,
           observable_frobenius: float | None = None,
           y: np.ndarray | None = None, input_dim: int | None = None,
           seeds: dict | None = None) -> list[GeometryReport]:
    """Run the screening flowchart for each reference kernel.

    Each classical learner takes the largest grid lambda whose g_tra meets
    the cap; the verdict comes from the minimum g_gen over the suite, and,
    when labels are supplied, from the s_C versus s_Q comparison.
    """
    if not quantum_grams or not classical_suite:
        raise InvalidInput("need at least one reference and one classical kernel")
    th = thresholds or ScreenThresholds()
    classical_eigs = [(g, sym_eig(g.base)) for g in classical_suite]
    reports = []
    for kq in quantum_grams:
        _check_normalized(kq, "screen (reference)")
        warnings = []
        src_sqrt = psd_sqrt(kq.base).mat
        d_eff = effective_dimension(kq)
        learners = []
        for kc, eig in classical_eigs:
            _check_normalized(kc, "screen (classical)")
            if kc.n != kq.n:
                raise ShapeError("classical and reference Grams differ in size")
            lam, g_gen, g_tra, ok = select_lambda(
                src_sqrt, eig, lambda_grid, th.g_tra_cap
            )
            if not ok:
                warnings.append(
                    f"{kc.label()}: no lambda in grid meets g_tra cap "
                    f"{th.g_tra_cap}; best g_tra {g_tra:.4g}"
                )
            learners.append(LearnerEntry(
                kernel_id=kc.kernel_id, params=kc.params, lam=lam,
                g_gen=g_gen, g_tra=g_tra, cap_satisfied=ok,
            ))
        eligible = [e for e in learners if e.cap_satisfied] or learners
        best = min(eligible, key=lambda e: e.g_gen)
        min_g = {
            "kernel_id": best.kernel_id,
            "params": best.params,
            "lambda": best.lam,
            "g_gen": best.g_gen,
        }

        s_values = {}
        verdict = VERDICT_CLASSICAL if best.g_gen <= th.g_classical else VERDICT_ADVANTAGE
        if y is not None:
            y = np.asarray(y, dtype=np.float64)
            s_q = model_complexity(kq, y, 0.0)
            best_gram = next(
                kc for kc, _ in classical_eigs
                if kc.kernel_id == best.kernel_id and kc.params == best.params
            )
            s_c_reg = model_complexity(best_gram, y, best.lam)
            s_c0 = model_complexity(best_gram, y, 0.0)
            s_values = {
                f"{kq.label()}@0": s_q,
                f"{best_gram.label()}@{best.lam!r}": s_c_reg,
                f"{best_gram.label()}@0": s_c0,
            }
            if verdict == VERDICT_ADVANTAGE:
                # geometry admits a separation; check the actual labels
                if s_c_reg < th.s_ratio * s_q:
                    verdict = VERDICT_LABEL_DEPENDENT

        dim_check = {}
        if observable_frobenius is not None:
            bound = min(d_eff, float(observable_frobenius))
            dim_check = {
                "tr_o_squared": float(observable_frobenius),
                "min_d_tro2": bound,
                "ratio_to_n_data": bound / kq.n,
                "qk_learnable": bool(bound / kq.n <= th.dim_ratio),
            }

        reports.append(GeometryReport(
            n_data=kq.n,
            reference=kq.label(),
            d_eff=d_eff,
            learners=learners,
            verdict=verdict,
            min_g=min_g,
            thresholds=th,
            input_dim=input_dim,
            s_values=s_values,
            dim_check=dim_check,
            seeds=dict(seeds or {}),
            warnings=warnings,
        ))
    return reports
