"""Statevector simulation of the data-embedding circuits and the QNN labeler.

Conventions: qubit 0 is the least significant bit of the basis index
(little-endian). Registers are capped at 20 qubits; states are meant to be
produced per datum and discarded once features or inner products have been
extracted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, InvalidInput, ShapeError

MAX_QUBITS = 20
MAX_RDM_QUBITS = 5

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)

# Two-qubit Heisenberg generator XX + YY + ZZ, diagonalized once; every
# bond gate exp(-i*theta*(XX+YY+ZZ)) is assembled from this basis.
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_H2 = np.kron(_X, _X) + np.kron(_Y, _Y) + np.kron(_Z, _Z)
_H2_VALS, _H2_VECS = np.linalg.eigh(_H2)


@dataclass(frozen=True)
class StateVector:
    """Pure state of an n-qubit register as a dense amplitude array."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise CapacityExceeded(
                f"register size {self.n_qubits} outside 1..{MAX_QUBITS}"
            )
        a = np.asarray(self.amps, dtype=np.complex128)
        if a.shape != (2**self.n_qubits,):
            raise ShapeError(
                f"amplitude array has shape {a.shape}, "
                f"expected ({2**self.n_qubits},)"
            )
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > 1e-10:
            raise InvalidInput(f"state norm {norm!r} deviates from 1")
        a.flags.writeable = False
        object.__setattr__(self, "amps", a)


@dataclass(frozen=True)
class EmbeddingSpec:
    """Which embedding circuit to use and its fixed parameters.

    E3 acts on n+1 qubits (n chain bonds for an n-dimensional input) and
    defaults to 20 Trotter steps over evolution time n/3; its initial
    product state is drawn once from ``e3_haar_seed``.
    """

    scheme: str
    n: int
    e3_trotter_steps: int = 20
    e3_time: float | None = None
    e3_haar_seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("e1", "e2", "e3"):
            raise InvalidInput(f"unknown embedding scheme {self.scheme!r}")
        if self.n < 1:
            raise InvalidInput("input dimension must be >= 1")
        if self.register > MAX_QUBITS:
            raise CapacityExceeded(
                f"{self.scheme} on n={self.n} needs {self.register} qubits "
                f"(cap {MAX_QUBITS})"
            )

    @property
    def register(self) -> int:
        return self.n + 1 if self.scheme == "e3" else self.n


@dataclass(frozen=True)
class QnnSpec:
    """Trotterized Heisenberg-chain QNN measured with Z on qubit 0.

    ``couplings`` holds one bond coupling per neighboring qubit pair
    (length register-1, open chain).
    """

    couplings: np.ndarray
    trotter_steps: int = 10
    time: float = 10.0
    coupling_seed: int | None = None

    def __post_init__(self):
        j = np.asarray(self.couplings, dtype=np.float64)
        if j.ndim != 1 or not np.all(np.isfinite(j)):
            raise InvalidInput("couplings must be a finite 1-D vector")
        if self.trotter_steps < 1:
            raise InvalidInput("trotter_steps must be >= 1")
        j.flags.writeable = False
        object.__setattr__(self, "couplings", j)

    @classmethod
    def random(cls, register: int, seed: int, trotter_steps: int = 10,
               time: float = 10.0) -> "QnnSpec":
        """Standard-normal couplings for an open chain on ``register`` qubits."""
        rng = np.random.default_rng(seed)
        j = rng.normal(0.0, 1.0, size=register - 1)
        return cls(couplings=j, trotter_steps=trotter_steps, time=time,
                   coupling_seed=seed)


def _axis(n: int, qubit: int) -> int:
    return n - 1 - qubit


def _apply_1q(amps: np.ndarray, n: int, qubit: int, gate: np.ndarray) -> np.ndarray:
    psi = amps.reshape([2] * n)
    a = _axis(n, qubit)
    moved = np.moveaxis(psi, a, 0).reshape(2, -1)
    out = gate @ moved
    return np.moveaxis(out.reshape([2] * n), 0, a).reshape(-1)


def _apply_2q(amps: np.ndarray, n: int, q_hi: int, q_lo: int,
              gate: np.ndarray) -> np.ndarray:
    """Apply a 4x4 gate; q_hi indexes the gate's most significant bit."""
    psi = amps.reshape([2] * n)
    a, b = _axis(n, q_hi), _axis(n, q_lo)
    moved = np.moveaxis(psi, (a, b), (0, 1)).reshape(4, -1)
    out = gate @ moved
    return np.moveaxis(out.reshape([2] * n), (0, 1), (a, b)).reshape(-1)


def heisenberg_gate(theta: float) -> np.ndarray:
    """Dense 4x4 exp(-i*theta*(XX + YY + ZZ))."""
    phases = np.exp(-1j * theta * _H2_VALS)
    return (_H2_VECS * phases) @ _H2_VECS.conj().T


def _basis_signs(n: int) -> np.ndarray:
    """(2^n, n) array of +/-1 signs: column j is the Z eigenvalue of qubit j."""
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return 1.0 - 2.0 * bits


def embed_e1(x: np.ndarray) -> StateVector:
    """Separable rotation embedding: tensor product of exp(-i*X*x_j)|0>."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    amps = np.ones(1, dtype=np.complex128)
    for j in range(n):
        f = np.array([np.cos(x[j]), -1j * np.sin(x[j])], dtype=np.complex128)
        amps = np.kron(f, amps)
    return StateVector(n_qubits=n, amps=amps)


def embed_e2(x: np.ndarray) -> StateVector:
    """Hadamard-sandwiched diagonal-phase (IQP-style) embedding.

    The diagonal layer puts phase exp(i*(s + s^2)) on basis string z, with
    s = sum_j x_j z_j over z in {+1,-1}^n; the quadratic term is the full
    double sum over ordered pairs including j = j'.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    s = _basis_signs(n) @ x
    phase = np.exp(1j * (s + s * s))
    amps = np.full(2**n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    amps = phase * amps
    for q in range(n):
        amps = _apply_1q(amps, n, q, _H)
    amps = phase * amps
    return StateVector(n_qubits=n, amps=amps)


def haar_qubit(rng: np.random.Generator) -> StateVector:
    """Haar-random single-qubit state from two complex standard Gaussians."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return StateVector(n_qubits=1, amps=v / np.linalg.norm(v))


def e3_initial_state(register: int, haar_seed: int) -> StateVector:
    """Fixed product of Haar-random qubits used as the E3 starting state."""
    rng = np.random.default_rng(haar_seed)
    amps = np.ones(1, dtype=np.complex128)
    for _ in range(register):
        amps = np.kron(haar_qubit(rng).amps, amps)
    return StateVector(n_qubits=register, amps=amps)


def _trotter_chain(amps: np.ndarray, register: int, angles: np.ndarray,
                   steps: int) -> np.ndarray:
    """Apply ``steps`` sweeps of bond gates; angles[j] acts on (j, j+1)."""
    gates = {}
    for theta in angles:
        key = float(theta)
        if key not in gates:
            gates[key] = heisenberg_gate(key)
    for _ in range(steps):
        for j, theta in enumerate(angles):
            amps = _apply_2q(amps, register, j, j + 1, gates[float(theta)])
    return amps


def embed_e3(x: np.ndarray, spec: EmbeddingSpec) -> StateVector:
    """Trotterized Heisenberg-chain embedding on n+1 qubits.

    Each Trotter step applies, in bond order j = 0..n-1, the two-qubit gate
    exp(-i*(t/T)*x_j*(XX+YY+ZZ)) on qubits (j, j+1), starting from the
    seeded Haar product state.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if spec.scheme != "e3" or spec.n != n:
        raise InvalidInput("spec does not match input dimension or scheme")
    register = n + 1
    t = spec.e3_time if spec.e3_time is not None else n / 3.0
    steps = spec.e3_trotter_steps
    amps = e3_initial_state(register, spec.e3_haar_seed).amps.copy()
    amps = _trotter_chain(amps, register, (t / steps) * x, steps)
    return StateVector(n_qubits=register, amps=amps)


def embed_basis(bits: np.ndarray) -> StateVector:
    """Computational basis state |b_{n-1} ... b_0> for a 0/1 bit vector."""
    bits = np.asarray(bits, dtype=np.int64)
    n = bits.size
    if n > MAX_QUBITS:
        raise CapacityExceeded(f"register size {n} exceeds cap {MAX_QUBITS}")
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidInput("bits must be 0 or 1")
    idx = int(np.sum(bits * (1 << np.arange(n))))
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[idx] = 1.0
    return StateVector(n_qubits=n, amps=amps)


def embed(x: np.ndarray, spec: EmbeddingSpec) -> StateVector:
    """Dispatch to the embedding circuit named by the spec."""
    if spec.scheme == "e1":
        return embed_e1(x)
    if spec.scheme == "e2":
        return embed_e2(x)
    return embed_e3(x, spec)


def qnn_expectation(state: StateVector, qnn: QnnSpec) -> float:
    """<Z on qubit 0> after evolving the state through the QNN chain."""
    register = state.n_qubits
    if qnn.couplings.size != register - 1:
        raise ShapeError(
            f"{qnn.couplings.size} couplings for a register of {register} "
            f"qubits (need {register - 1})"
        )
    amps = state.amps.copy()
    if register > 1:
        angles = (qnn.time / qnn.trotter_steps) * qnn.couplings
        amps = _trotter_chain(amps, register, angles, qnn.trotter_steps)
    return z_expectation(StateVector(register, amps), 0)


def z_expectation(state: StateVector, qubit: int) -> float:
    """<Z> on one qubit: +1 weight on bit 0, -1 on bit 1."""
    n = state.n_qubits
    psi = state.amps.reshape([2] * n)
    moved = np.moveaxis(psi, _axis(n, qubit), 0).reshape(2, -1)
    probs = np.sum(np.abs(moved) ** 2, axis=1)
    return float(probs[0] - probs[1])


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> (conjugate-linear in the first argument)."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(
            f"register mismatch: {a.n_qubits} vs {b.n_qubits} qubits"
        )
    return complex(np.vdot(a.amps, b.amps))


def rdm(state: StateVector, qubits) -> np.ndarray:
    """Reduced density matrix of the listed qubits (partial trace of the rest).

    Row/column bits follow the listed order with qubits[0] as the most
    significant bit. Hermitian, trace-1, PSD up to float tolerance.
    """
    qubits = list(qubits)
    n = state.n_qubits
    k = len(qubits)
    if k > MAX_RDM_QUBITS:
        raise CapacityExceeded(f"rdm limited to {MAX_RDM_QUBITS} qubits, got {k}")
    if len(set(qubits)) != k:
        raise InvalidInput("qubit indices must be distinct")
    if any(q < 0 or q >= n for q in qubits):
        raise InvalidInput(f"qubit index out of range for {n}-qubit register")
    psi = state.amps.reshape([2] * n)
    keep = [_axis(n, q) for q in qubits]
    rest = [a for a in range(n) if a not in keep]
    m = np.transpose(psi, keep + rest).reshape(2**k, -1)
    return m @ m.conj().T


def pauli_expectations_1rdm(state: StateVector) -> np.ndarray:
    """(n, 3) array of single-qubit <X>, <Y>, <Z> for every qubit."""
    n = state.n_qubits
    psi = state.amps.reshape([2] * n)
    out = np.empty((n, 3), dtype=np.float64)
    for q in range(n):
        m = np.moveaxis(psi, _axis(n, q), 0).reshape(2, -1)
        rho = m @ m.conj().T
        out[q, 0] = 2.0 * rho[0, 1].real
        out[q, 1] = -2.0 * rho[0, 1].imag
        out[q, 2] = rho[0, 0].real - rho[1, 1].real
    return out
