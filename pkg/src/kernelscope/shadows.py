"""Randomized Pauli measurements (classical shadows) and the all-orders
RDM kernel estimator, with exact enumeration oracles for small registers.

Basis codes are 0 = X, 1 = Y, 2 = Z; outcomes are +/-1.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, FormatError, InvalidInput, ShapeError
from .statevec import StateVector, _apply_1q

QINF_EXACT_MAX_QUBITS = 4
SHADOW_RDM_MAX_QUBITS = 3

_I2 = np.eye(2, dtype=np.complex128)
_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),       # X
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),    # Y
    np.array([[1, 0], [0, -1]], dtype=np.complex128),      # Z
)
# rotation mapping the eigenbasis of each Pauli to the computational basis
_ROT = (
    np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0),
    np.array([[1, -1j], [1, 1j]], dtype=np.complex128) / np.sqrt(2.0),
    _I2,
)


@dataclass(frozen=True)
class ShadowRecord:
    """One randomized measurement: per-qubit basis codes and +/-1 outcomes."""

    bases: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bases, dtype=np.uint8)
        s = np.asarray(self.outcomes, dtype=np.int8)
        if b.shape != s.shape or b.ndim != 1:
            raise ShapeError("bases and outcomes must be equal-length vectors")
        object.__setattr__(self, "bases", b)
        object.__setattr__(self, "outcomes", s)


@dataclass(frozen=True)
class ShadowSet:
    """N_s measurement records for one quantum state.

    ``bases`` and ``outcomes`` are (N_s, n) arrays; at least two records
    are required so pair statistics are well-defined.
    """

    n: int
    bases: np.ndarray
    outcomes: np.ndarray
    source_seed: int | None = None

    def __post_init__(self):
        b = np.asarray(self.bases, dtype=np.uint8)
        s = np.asarray(self.outcomes, dtype=np.int8)
        if b.ndim != 2 or b.shape[1] != self.n or b.shape != s.shape:
            raise ShapeError(f"expected (N_s, {self.n}) arrays, got {b.shape}")
        if b.shape[0] < 2:
            raise InvalidInput("a ShadowSet needs at least 2 records")
        if np.any(b > 2) or np.any(np.abs(s.astype(np.int64)) != 1):
            raise InvalidInput("basis codes must be 0..2 and outcomes +/-1")
        b.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "bases", b)
        object.__setattr__(self, "outcomes", s)

    @property
    def n_records(self) -> int:
        return self.bases.shape[0]

    def record(self, r: int) -> ShadowRecord:
        return ShadowRecord(bases=self.bases[r], outcomes=self.outcomes[r])


def collect(state: StateVector, n_records: int,
            rng: np.random.Generator) -> ShadowSet:
    """Sample randomized Pauli measurements of a state.

    Bases are uniform iid over {X, Y, Z} per qubit; each record's outcome
    string is drawn from the exact joint Born distribution of the
    basis-rotated state.
    """
    if n_records < 2:
        raise InvalidInput("need at least 2 records")
    n = state.n_qubits
    bases = rng.integers(0, 3, size=(n_records, n), dtype=np.uint8)
    outcomes = np.empty((n_records, n), dtype=np.int8)
    qubit_bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    prob_cache: dict[tuple, np.ndarray] = {}
    for r in range(n_records):
        combo = tuple(int(c) for c in bases[r])
        probs = prob_cache.get(combo)
        if probs is None:
            amps = state.amps
            for q, code in enumerate(combo):
                if code != 2:
                    amps = _apply_1q(amps, n, q, _ROT[code])
            probs = np.abs(amps) ** 2
            probs /= probs.sum()
            prob_cache[combo] = probs
        idx = rng.choice(2**n, p=probs)
        outcomes[r] = 1 - 2 * qubit_bits[idx]
    return ShadowSet(n=n, bases=bases, outcomes=outcomes)


def _factor(code: int, sign: int) -> np.ndarray:
    """Single-qubit shadow inverse-channel factor (I + 3*s*P)/2."""
    return (_I2 + 3.0 * sign * _PAULI[code]) / 2.0


def shadow_rdm(shadows: ShadowSet, qubits) -> np.ndarray:
    """Empirical shadow estimate of the reduced density matrix on ``qubits``."""
    qubits = list(qubits)
    k = len(qubits)
    if k > SHADOW_RDM_MAX_QUBITS:
        raise CapacityExceeded(
            f"shadow_rdm limited to {SHADOW_RDM_MAX_QUBITS} qubits, got {k}"
        )
    total = np.zeros((2**k, 2**k), dtype=np.complex128)
    for r in range(shadows.n_records):
        term = np.eye(1, dtype=np.complex128)
        for q in qubits:
            term = np.kron(term, _factor(shadows.bases[r, q], shadows.outcomes[r, q]))
        total += term
    return total / shadows.n_records


def enumerate_measurements(state: StateVector):
    """All (bases, outcomes) configurations with their Born probabilities.

    Returns (B, S, W): basis codes (m, n), outcome signs (m, n), and weights
    (m,) summing to 1, with m = 6^n configurations.
    """
    n = state.n_qubits
    if n > QINF_EXACT_MAX_QUBITS:
        raise CapacityExceeded(
            f"enumeration limited to {QINF_EXACT_MAX_QUBITS} qubits, got {n}"
        )
    qubit_bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    signs = (1 - 2 * qubit_bits).astype(np.int8)
    all_b, all_s, all_w = [], [], []
    basis_prob = 3.0 ** (-n)
    for combo in itertools.product(range(3), repeat=n):
        amps = state.amps
        for q, code in enumerate(combo):
            if code != 2:
                amps = _apply_1q(amps, n, q, _ROT[code])
        probs = np.abs(amps) ** 2
        all_b.append(np.tile(np.asarray(combo, dtype=np.uint8), (2**n, 1)))
        all_s.append(signs)
        all_w.append(basis_prob * probs)
    return np.vstack(all_b), np.vstack(all_s), np.concatenate(all_w)


def shadow_rdm_exact(state: StateVector, qubits) -> np.ndarray:
    """Infinite-sample limit of shadow_rdm: the mean over the full
    enumerated measurement distribution. Equals the true RDM."""
    qubits = list(qubits)
    k = len(qubits)
    bases, signs, weights = enumerate_measurements(state)
    total = np.zeros((2**k, 2**k), dtype=np.complex128)
    for b_row, s_row, w in zip(bases, signs, weights):
        if w == 0.0:
            continue
        term = np.eye(1, dtype=np.complex128)
        for q in qubits:
            term = np.kron(term, _factor(b_row[q], s_row[q]))
        total += w * term
    return total


def _pair_sums(bases_a, outcomes_a, bases_b, outcomes_b) -> np.ndarray:
    """Matrix of sum_p (9*delta_s*delta_b - 4) over record pairs."""
    match = (bases_a[:, None, :] == bases_b[None, :, :]) & (
        outcomes_a[:, None, :] == outcomes_b[None, :, :]
    )
    return 9.0 * match.sum(axis=2) - 4.0 * bases_a.shape[1]


def qinf_estimate(a: ShadowSet, b: ShadowSet, gamma: float) -> float:
    """U-statistic estimate of the all-orders RDM kernel.

    Averages exp((gamma/n) * sum_p (9*delta*delta - 4)) over ordered record
    pairs (r1 from ``a``, r2 from ``b``) with the index-coincident pairs
    r1 == r2 excluded; the exclusion keeps the self-kernel case (a is b)
    unbiased with a single shadow set.
    """
    if a.n != b.n:
        raise ShapeError(f"register mismatch: {a.n} vs {b.n}")
    sums = _pair_sums(a.bases, a.outcomes, b.bases, b.outcomes)
    vals = np.exp((gamma / a.n) * sums)
    m = min(a.n_records, b.n_records)
    vals[np.arange(m), np.arange(m)] = 0.0
    count = a.n_records * b.n_records - m
    return float(vals.sum() / count)


def qinf_exact(a: StateVector, b: StateVector, gamma: float) -> float:
    """Exact all-orders RDM kernel by full measurement enumeration (n <= 4)."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"register mismatch: {a.n_qubits} vs {b.n_qubits}")
    n = a.n_qubits
    ba, sa, wa = enumerate_measurements(a)
    bb, sb, wb = enumerate_measurements(b)
    vals = np.exp((gamma / n) * _pair_sums(ba, sa, bb, sb))
    return float(wa @ vals @ wb)


def qinf_moments_exact(a: StateVector, b: StateVector, max_order: int) -> np.ndarray:
    """Exact moments E[(sum_p (9dd-4))^k] for k = 0..max_order by enumeration."""
    ba, sa, wa = enumerate_measurements(a)
    bb, sb, wb = enumerate_measurements(b)
    sums = _pair_sums(ba, sa, bb, sb)
    return np.array(
        [float(wa @ (sums**k) @ wb) for k in range(max_order + 1)]
    )


def qinf_bootstrap_se(a: ShadowSet, b: ShadowSet, gamma: float,
                      n_boot: int = 200,
                      rng: np.random.Generator | None = None) -> float:
    """Bootstrap standard error of qinf_estimate (records resampled
    with replacement independently in each set)."""
    if a.n != b.n:
        raise ShapeError(f"register mismatch: {a.n} vs {b.n}")
    if rng is None:
        rng = np.random.default_rng(0)
    vals = np.exp((gamma / a.n) * _pair_sums(a.bases, a.outcomes, b.bases, b.outcomes))
    m = min(a.n_records, b.n_records)
    diag = np.arange(m)
    count = a.n_records * b.n_records - m
    stats = np.empty(n_boot)
    for t in range(n_boot):
        ia = rng.integers(0, a.n_records, size=a.n_records)
        ib = rng.integers(0, b.n_records, size=b.n_records)
        sub = vals[np.ix_(ia, ib)]
        sub[diag, diag] = 0.0
        stats[t] = sub.sum() / count
    return float(np.std(stats, ddof=1))


def save_shadow_csv(path, shadows: ShadowSet) -> None:
    """Write records as CSV: record index, basis codes, then outcomes."""
    n = shadows.n
    header = (
        ["record"]
        + [f"b{q}" for q in range(n)]
        + [f"s{q}" for q in range(n)]
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in range(shadows.n_records):
            w.writerow(
                [r]
                + [int(v) for v in shadows.bases[r]]
                + [int(v) for v in shadows.outcomes[r]]
            )


def load_shadow_csv(path) -> ShadowSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "record":
        raise FormatError(f"{path}: not a shadow CSV")
    n = (len(rows[0]) - 1) // 2
    if len(rows[0]) != 1 + 2 * n:
        raise FormatError(f"{path}: malformed header")
    try:
        bases = np.array([[int(v) for v in row[1 : 1 + n]] for row in rows[1:]],
                         dtype=np.uint8)
        outcomes = np.array([[int(v) for v in row[1 + n :]] for row in rows[1:]],
                            dtype=np.int8)
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer cell ({exc})") from exc
    return ShadowSet(n=n, bases=bases, outcomes=outcomes)
