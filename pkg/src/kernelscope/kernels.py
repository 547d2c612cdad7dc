"""Gram matrix assembly for every kernel family, plus trace normalization
and on-disk formats (binary with JSON sidecar, CSV export).

Every emitted GramMatrix is symmetric and PSD within the clamp tolerance.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CapacityExceeded,
    FormatError,
    InvalidInput,
    InvalidKernel,
    NotPSD,
    ShapeError,
)
from .linalg import SymMatrix, as_sym, eps_clamp, sym_eig
from .shadows import ShadowSet, qinf_estimate
from .statevec import StateVector, inner_product, rdm

GRAM_MAGIC = b"KSGRAM01"

# multipliers for the data-scaled RBF gamma grids; divide by (dim * Var)
GEOMETRY_RBF_GAMMA_FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
LEARNING_RBF_GAMMA_FACTORS = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 20.0)

KRDM_MAX_ORDER = 3
KRDM_MAX_QUBITS = 12


@dataclass(frozen=True)
class GramMatrix:
    """N x N kernel matrix with metadata.

    ``normalized`` means the trace has been rescaled to N. ``provenance``
    carries dataset hashes and seeds so reports can be reproduced.
    """

    base: SymMatrix
    kernel_id: str
    params: dict = field(default_factory=dict)
    normalized: bool = False
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        mat = self.base.mat
        diag = np.diag(mat)
        e = sym_eig(self.base)
        tol = eps_clamp(e.eigenvalues, self.n)
        lam_min = float(e.eigenvalues[-1])
        if lam_min < -tol:
            raise NotPSD(lam_min, tol)
        if np.min(diag) < -tol:
            raise InvalidKernel(f"negative diagonal entry {np.min(diag)!r}")
        if self.normalized and abs(float(np.trace(mat)) - self.n) > 1e-8:
            raise InvalidKernel(
                f"normalized flag set but trace is {float(np.trace(mat))!r}"
            )

    @property
    def n(self) -> int:
        return self.base.dim

    @property
    def values(self) -> np.ndarray:
        return self.base.mat

    def label(self) -> str:
        """Stable human-readable id including parameters."""
        if not self.params:
            return self.kernel_id
        inner = ",".join(f"{k}={self.params[k]!r}" for k in sorted(self.params))
        return f"{self.kernel_id}({inner})"


def _make(mat, kernel_id, params=None, normalized=False, provenance=None) -> GramMatrix:
    return GramMatrix(
        base=as_sym(mat),
        kernel_id=kernel_id,
        params=dict(params or {}),
        normalized=normalized,
        provenance=dict(provenance or {}),
    )


def normalize_trace(gram: GramMatrix) -> GramMatrix:
    """Rescale so the trace equals N."""
    tr = float(np.trace(gram.values))
    if tr <= 0.0:
        raise InvalidKernel(f"cannot normalize: trace is {tr!r}")
    if gram.normalized:
        return gram
    scaled = gram.values * (gram.n / tr)
    return replace(gram, base=SymMatrix(scaled), normalized=True)


def fidelity_gram(states: list[StateVector], provenance=None) -> GramMatrix:
    """K_ij = |<x_i|x_j>|^2 from materialized statevectors."""
    n_items = len(states)
    mat = np.empty((n_items, n_items))
    for i in range(n_items):
        mat[i, i] = 1.0
        for j in range(i + 1, n_items):
            mat[i, j] = mat[j, i] = abs(inner_product(states[i], states[j])) ** 2
    return _make(mat, "fidelity", normalized=True, provenance=provenance)


def fidelity_gram_blocks(count: int, state_at, block_size: int = 32,
                         provenance=None) -> GramMatrix:
    """Streaming fidelity Gram: states are produced per row block by
    ``state_at(i)`` and discarded, bounding memory at two blocks."""
    if block_size < 1:
        raise InvalidInput("block_size must be >= 1")
    mat = np.empty((count, count))
    starts = list(range(0, count, block_size))
    for bi in starts:
        rows = [state_at(i) for i in range(bi, min(bi + block_size, count))]
        amps_i = np.stack([s.amps for s in rows])
        for bj in starts:
            if bj < bi:
                continue
            if bj == bi:
                amps_j = amps_i
            else:
                cols = [state_at(j) for j in range(bj, min(bj + block_size, count))]
                amps_j = np.stack([s.amps for s in cols])
            block = np.abs(amps_i.conj() @ amps_j.T) ** 2
            mat[bi : bi + amps_i.shape[0], bj : bj + amps_j.shape[0]] = block
            mat[bj : bj + amps_j.shape[0], bi : bi + amps_i.shape[0]] = block.T
    np.fill_diagonal(mat, 1.0)
    return _make(mat, "fidelity", normalized=True, provenance=provenance)


def projected_gaussian_1rdm_gram(features: np.ndarray, gamma: float,
                                 provenance=None) -> GramMatrix:
    """Gaussian kernel on single-qubit Pauli expectation features.

    features has shape (N, n, 3); K_ij = exp(-gamma * ||f_i - f_j||^2).
    The Frobenius-distance form of the same kernel corresponds to doubling
    gamma (||rho_k - rho'_k||_F^2 is half the Pauli-vector distance).
    """
    if gamma < 0:
        raise InvalidInput("gamma must be >= 0")
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 3 or f.shape[2] != 3:
        raise ShapeError(f"expected (N, n, 3) features, got {f.shape}")
    flat = f.reshape(f.shape[0], -1)
    sq = np.sum(flat**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (flat @ flat.T)
    np.clip(d2, 0.0, None, out=d2)
    mat = np.exp(-gamma * d2)
    np.fill_diagonal(mat, 1.0)
    return _make(
        mat, "pq_gaussian_1rdm", params={"gamma": float(gamma)},
        normalized=True, provenance=provenance,
    )


def frobenius_gamma(pauli_gamma: float) -> float:
    """Gamma for the Frobenius-distance form equivalent to the Pauli form."""
    return 2.0 * pauli_gamma


def projected_linear_gram(features: np.ndarray | None = None, order: int = 1,
                          states: list[StateVector] | None = None,
                          provenance=None) -> GramMatrix:
    """Linear kernel on k-qubit reduced density matrices.

    order 1 uses Pauli expectation features (N, n, 3); order k in 2..3
    needs the statevectors and sums Tr(rho_S rho'_S) over all size-k
    qubit subsets S.
    """
    if order == 1:
        if features is None:
            raise InvalidInput("order 1 needs 1-RDM features")
        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 3 or f.shape[2] != 3:
            raise ShapeError(f"expected (N, n, 3) features, got {f.shape}")
        n_qubits = f.shape[1]
        flat = f.reshape(f.shape[0], -1)
        mat = (n_qubits + flat @ flat.T) / 2.0
        return _make(mat, "pq_linear_1rdm", params={"order": 1},
                     normalized=False, provenance=provenance)
    if order > KRDM_MAX_ORDER:
        raise CapacityExceeded(f"k-RDM order capped at {KRDM_MAX_ORDER}")
    if states is None:
        raise InvalidInput(f"order {order} needs statevectors")
    n_qubits = states[0].n_qubits
    if n_qubits > KRDM_MAX_QUBITS:
        raise CapacityExceeded(
            f"k-RDM kernels capped at {KRDM_MAX_QUBITS} qubits, got {n_qubits}"
        )
    from itertools import combinations

    subsets = list(combinations(range(n_qubits), order))
    vecs = np.empty((len(states), len(subsets) * 4**order), dtype=np.complex128)
    for i, s in enumerate(states):
        vecs[i] = np.concatenate([rdm(s, sub).reshape(-1) for sub in subsets])
    mat = np.real(vecs @ vecs.conj().T)
    return _make(mat, f"pq_linear_{order}rdm", params={"order": int(order)},
                 normalized=False, provenance=provenance)


def shadow_gram(shadow_sets: list[ShadowSet], gamma: float,
                provenance=None) -> GramMatrix:
    """All-orders RDM kernel estimated from per-datum shadow sets.

    Diagonal entries reuse the same set through the pair-excluded
    U-statistic. The estimate is noisy and can be indefinite, so the
    matrix is projected onto the PSD cone by eigenvalue clamping.
    """
    n_items = len(shadow_sets)
    mat = np.empty((n_items, n_items))
    for i in range(n_items):
        for j in range(i, n_items):
            v = qinf_estimate(shadow_sets[i], shadow_sets[j], gamma)
            mat[i, j] = mat[j, i] = v
    e = sym_eig(mat)
    clamped = np.clip(e.eigenvalues, 0.0, None)
    v = e.eigenvectors
    mat = (v * clamped) @ v.T
    return _make(mat, "shadow_qinf", params={"gamma": float(gamma)},
                 normalized=False, provenance=provenance)


def classical_gram(x: np.ndarray, kind: str, gamma: float | None = None,
                   provenance=None) -> GramMatrix:
    """Classical baseline kernels on raw inputs: linear or RBF."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidInput("inputs must be finite")
    if kind == "linear":
        return _make(x @ x.T, "linear", normalized=False, provenance=provenance)
    if kind == "rbf":
        if gamma is None or gamma < 0:
            raise InvalidInput("rbf kernel needs gamma >= 0")
        sq = np.sum(x**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        np.clip(d2, 0.0, None, out=d2)
        mat = np.exp(-gamma * d2)
        np.fill_diagonal(mat, 1.0)
        return _make(mat, "rbf", params={"gamma": float(gamma)},
                     normalized=True, provenance=provenance)
    raise InvalidInput(f"unknown classical kernel kind {kind!r}")


def dlog_quadratic_gram(z: np.ndarray, provenance=None) -> GramMatrix:
    """Quadratic kernel (z_i z_j + 1)^2 on projected discrete-log values."""
    z = np.asarray(z, dtype=np.float64)
    mat = (np.outer(z, z) + 1.0) ** 2
    return _make(mat, "dlog_quadratic", normalized=False, provenance=provenance)


def gamma_grid(values: np.ndarray, dim: int, factors) -> list[float]:
    """Data-scaled RBF gamma grid: factors / (dim * Var of all entries)."""
    var = float(np.var(np.asarray(values, dtype=np.float64)))
    if var <= 0.0:
        raise InvalidInput("cannot scale gamma grid: zero variance")
    return [float(f) / (dim * var) for f in factors]


# ---------------------------------------------------------------------------
# Rectangular cross-kernel blocks k(a_i, b_j) for prediction


def linear_cross(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    return np.asarray(xa, dtype=np.float64) @ np.asarray(xb, dtype=np.float64).T


def rbf_cross(xa: np.ndarray, xb: np.ndarray, gamma: float) -> np.ndarray:
    xa = np.asarray(xa, dtype=np.float64)
    xb = np.asarray(xb, dtype=np.float64)
    d2 = (
        np.sum(xa**2, axis=1)[:, None]
        + np.sum(xb**2, axis=1)[None, :]
        - 2.0 * (xa @ xb.T)
    )
    np.clip(d2, 0.0, None, out=d2)
    return np.exp(-gamma * d2)


def fidelity_cross(states_a: list[StateVector],
                   states_b: list[StateVector]) -> np.ndarray:
    amps_a = np.stack([s.amps for s in states_a])
    amps_b = np.stack([s.amps for s in states_b])
    return np.abs(amps_a.conj() @ amps_b.T) ** 2


def pq_gaussian_cross(feats_a: np.ndarray, feats_b: np.ndarray,
                      gamma: float) -> np.ndarray:
    fa = np.asarray(feats_a, dtype=np.float64).reshape(feats_a.shape[0], -1)
    fb = np.asarray(feats_b, dtype=np.float64).reshape(feats_b.shape[0], -1)
    return rbf_cross(fa, fb, gamma)


def dlog_quadratic_cross(za: np.ndarray, zb: np.ndarray) -> np.ndarray:
    return (np.outer(np.asarray(za, float), np.asarray(zb, float)) + 1.0) ** 2


def delta_cross(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """One-hot kernel: 1 where the rows are identical, else 0."""
    xa = np.atleast_2d(np.asarray(xa))
    xb = np.atleast_2d(np.asarray(xb))
    return np.all(xa[:, None, :] == xb[None, :, :], axis=2).astype(np.float64)


# ---------------------------------------------------------------------------
# On-disk formats


def _header_dict(gram: GramMatrix) -> dict:
    return {
        "N": gram.n,
        "kernel_id": gram.kernel_id,
        "params": gram.params,
        "normalized": gram.normalized,
        "provenance": gram.provenance,
    }


def write_gram(path, gram: GramMatrix) -> None:
    """Binary format: magic, length-prefixed JSON header, row-major float64.

    A JSON sidecar with the same header is written next to the file.
    Round-trips are bit-exact.
    """
    header = json.dumps(_header_dict(gram), sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(GRAM_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(np.ascontiguousarray(gram.values, dtype="<f8").tobytes())
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(_header_dict(gram), fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_gram(path) -> GramMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(len(GRAM_MAGIC))
        if magic != GRAM_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        try:
            header = json.loads(fh.read(hlen).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: corrupt header ({exc})") from exc
        n = int(header["N"])
        payload = fh.read(n * n * 8)
        if len(payload) != n * n * 8:
            raise FormatError(f"{path}: truncated payload")
        mat = np.frombuffer(payload, dtype="<f8").reshape(n, n).copy()
    return GramMatrix(
        base=SymMatrix(mat),
        kernel_id=header["kernel_id"],
        params=header.get("params", {}),
        normalized=bool(header.get("normalized", False)),
        provenance=header.get("provenance", {}),
    )


def export_gram_csv(path, gram: GramMatrix) -> None:
    """CSV alternative: shortest round-trippable decimal per entry,
    metadata in the JSON sidecar."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in gram.values:
            w.writerow([repr(float(v)) for v in row])
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(_header_dict(gram), fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_gram_csv(path) -> GramMatrix:
    with open(path, newline="") as fh:
        try:
            mat = np.array([[float(v) for v in row] for row in csv.reader(fh)])
        except ValueError as exc:
            raise FormatError(f"{path}: non-numeric cell ({exc})") from exc
    try:
        with open(f"{path}.meta.json") as fh:
            header = json.load(fh)
    except FileNotFoundError:
        header = {"kernel_id": "precomputed", "params": {},
                  "normalized": False, "provenance": {}}
    return GramMatrix(
        base=SymMatrix(mat),
        kernel_id=header["kernel_id"],
        params=header.get("params", {}),
        normalized=bool(header.get("normalized", False)),
        provenance=header.get("provenance", {}),
    )
