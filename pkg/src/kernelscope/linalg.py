"""Deterministic dense symmetric linear algebra.

Eigendecomposition, PSD projection/square root, pseudo-inverse, spectral
norm, and regularized solves. Everything is built on LAPACK's direct
symmetric eigensolver (via ``numpy.linalg.eigh``), so results are
bit-reproducible for identical inputs on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, NotPSD, ShapeError

DEFAULT_RCOND = 1e-10


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix.

    Inputs are symmetrized as (A + A^T)/2 on construction so that
    last-bit asymmetry from parallel assembly cannot leak downstream.
    """

    mat: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.mat, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidMatrix(f"expected square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("matrix has non-finite entries")
        a = (a + a.T) / 2.0
        a.flags.writeable = False
        object.__setattr__(self, "mat", a)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def as_sym(a) -> SymMatrix:
    """Coerce an array (or SymMatrix) to a SymMatrix."""
    return a if isinstance(a, SymMatrix) else SymMatrix(np.asarray(a))


@dataclass(frozen=True)
class EigDecomp:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` are sorted descending; ``eigenvectors`` holds the
    matching orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SolveResult:
    x: np.ndarray
    used_pinv: bool


def eps_clamp(eigenvalues: np.ndarray, dim: int) -> float:
    """PSD tolerance: floating-point Gram assembly carries O(eps*N) noise."""
    lam_max = float(np.max(eigenvalues)) if eigenvalues.size else 0.0
    return 1e-10 * max(1.0, lam_max) * dim


def sym_eig(a) -> EigDecomp:
    """Eigendecompose a symmetric matrix, eigenvalues descending."""
    s = as_sym(a)
    vals, vecs = np.linalg.eigh(s.mat)
    order = np.arange(vals.size - 1, -1, -1)
    vals = np.ascontiguousarray(vals[order])
    vecs = np.ascontiguousarray(vecs[:, order])
    return EigDecomp(eigenvalues=vals, eigenvectors=vecs)


def _psd_eig(a, what: str) -> tuple[EigDecomp, float]:
    """Eigendecompose and verify PSD-ness up to the clamp tolerance."""
    s = as_sym(a)
    e = sym_eig(s)
    tol = eps_clamp(e.eigenvalues, s.dim)
    lam_min = float(e.eigenvalues[-1])
    if lam_min < -tol:
        raise NotPSD(lam_min, tol)
    return e, tol


def psd_sqrt(a) -> SymMatrix:
    """Symmetric PSD square root B with B @ B ~= A.

    Eigenvalues within the clamp tolerance of zero are clamped to 0;
    anything further below zero raises NotPSD.
    """
    e, _ = _psd_eig(a, "psd_sqrt")
    root = np.sqrt(np.clip(e.eigenvalues, 0.0, None))
    v = e.eigenvectors
    return SymMatrix((v * root) @ v.T)


def psd_pinv(a, rcond: float = DEFAULT_RCOND) -> SymMatrix:
    """Moore-Penrose pseudo-inverse of a PSD matrix.

    Eigenvalues below ``rcond * lambda_max`` are treated as exact zeros.
    """
    e, _ = _psd_eig(a, "psd_pinv")
    vals = e.eigenvalues
    cutoff = rcond * max(float(vals[0]), 0.0)
    inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    v = e.eigenvectors
    return SymMatrix((v * inv) @ v.T)


def spectral_norm(a) -> float:
    """Largest absolute eigenvalue."""
    e = sym_eig(a)
    return float(np.max(np.abs(e.eigenvalues)))


def reg_solve(a, lam: float, b: np.ndarray) -> SolveResult:
    """Solve (A + lam*I) x = b for PSD A.

    At lam = 0 on a rank-deficient A the solve falls back to the
    pseudo-inverse (least-squares solution) and flags ``used_pinv``.
    One step of iterative refinement keeps the residual at the
    1e-8 * ||b|| level for regular systems.
    """
    if lam < 0:
        raise InvalidMatrix(f"lambda must be >= 0, got {lam}")
    s = as_sym(a)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != s.dim:
        raise ShapeError(f"b has length {b.shape[0]}, matrix dim is {s.dim}")
    e, _ = _psd_eig(s, "reg_solve")
    vals = e.eigenvalues
    v = e.eigenvectors
    cutoff = DEFAULT_RCOND * max(float(vals[0]), 0.0)
    used_pinv = lam == 0.0 and bool(np.any(vals <= cutoff))
    if used_pinv:
        inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    else:
        inv = 1.0 / (vals + lam)

    def apply_inv(r):
        return (v * inv) @ (v.T @ r)

    x = apply_inv(b)
    shifted = s.mat + lam * np.eye(s.dim) if lam else s.mat
    x = x + apply_inv(b - shifted @ x)
    return SolveResult(x=x, used_pinv=used_pinv)
