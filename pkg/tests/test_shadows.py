"""Shadow collection, RDM reconstruction, and the all-orders kernel estimator."""

import math

import numpy as np
import pytest

from kernelscope import shadows as sh
from kernelscope import statevec as sv
from kernelscope.errors import CapacityExceeded, ShapeError

# chi-squared critical values for p = 0.001
CHI2_CRIT = {1: 10.828, 2: 13.816}


def make_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    amps /= np.linalg.norm(amps)
    return sv.StateVector(n, amps)


def test_collect_vacuum_z_basis_outcomes():
    state = sv.embed_basis(np.zeros(2, dtype=int))
    s = sh.collect(state, 500, np.random.default_rng(0))
    z_mask = s.bases == 2
    assert np.all(s.outcomes[z_mask] == 1)


def test_collect_plus_state_born_rule():
    plus = sv.StateVector(1, np.array([1.0, 1.0]) / np.sqrt(2.0))
    s = sh.collect(plus, 10_000, np.random.default_rng(1))
    x_rows = s.bases[:, 0] == 0
    assert np.all(s.outcomes[x_rows, 0] == 1)
    z_rows = s.outcomes[s.bases[:, 0] == 2, 0]
    n_plus = int(np.sum(z_rows == 1))
    n_total = z_rows.size
    # chi-squared against the fair +/- split
    expected = n_total / 2.0
    stat = (n_plus - expected) ** 2 / expected + (n_total - n_plus - expected) ** 2 / expected
    assert stat < CHI2_CRIT[1]


def test_collect_basis_frequencies_uniform():
    state = make_state(2, 2)
    s = sh.collect(state, 9_000, np.random.default_rng(3))
    counts = np.bincount(s.bases.reshape(-1), minlength=3)
    expected = s.bases.size / 3.0
    stat = float(np.sum((counts - expected) ** 2 / expected))
    assert stat < CHI2_CRIT[2]


def test_shadow_rdm_exact_enumeration_equals_rdm():
    for n in (1, 2, 3):
        state = make_state(n, 10 + n)
        for qubits in ([0], list(range(n))):
            got = sh.shadow_rdm_exact(state, qubits)
            want = sv.rdm(state, qubits)
            assert np.max(np.abs(got - want)) <= 1e-12


def test_shadow_rdm_concentrates():
    state = sv.embed_basis(np.zeros(1, dtype=int))
    s = sh.collect(state, 5000, np.random.default_rng(4))
    est = sh.shadow_rdm(s, [0])
    target = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    assert np.linalg.norm(est - target) <= 0.1


def test_shadow_rdm_trace_is_one_per_record():
    state = make_state(2, 5)
    s = sh.collect(state, 50, np.random.default_rng(6))
    est = sh.shadow_rdm(s, [0, 1])
    assert abs(np.trace(est) - 1.0) <= 1e-12


def test_qinf_estimate_gamma_zero():
    a = sh.collect(make_state(2, 7), 20, np.random.default_rng(7))
    b = sh.collect(make_state(2, 8), 20, np.random.default_rng(8))
    assert sh.qinf_estimate(a, b, 0.0) == 1.0


def test_qinf_estimate_matches_enumeration_single_qubit():
    state = sv.embed_basis(np.zeros(1, dtype=int))
    gamma = 0.8
    exact = sh.qinf_exact(state, state, gamma)
    rng = np.random.default_rng(9)
    a = sh.collect(state, 2000, rng)
    b = sh.collect(state, 2000, rng)
    est = sh.qinf_estimate(a, b, gamma)
    se = sh.qinf_bootstrap_se(a, b, gamma, rng=np.random.default_rng(10))
    assert abs(est - exact) <= 3.0 * se


def test_qinf_estimate_matches_enumeration_bell_vs_product():
    bell = sv.StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2.0))
    prod = sv.embed_e1(np.array([0.3, -0.7]))
    gamma = 0.5
    exact = sh.qinf_exact(bell, prod, gamma)
    rng = np.random.default_rng(11)
    a = sh.collect(bell, 2000, rng)
    b = sh.collect(prod, 2000, rng)
    est = sh.qinf_estimate(a, b, gamma)
    se = sh.qinf_bootstrap_se(a, b, gamma, rng=np.random.default_rng(12))
    assert abs(est - exact) <= 3.0 * se


def test_qinf_exact_gamma_zero_and_symmetry():
    a, b = make_state(2, 13), make_state(2, 14)
    assert sh.qinf_exact(a, b, 0.0) == pytest.approx(1.0)
    assert sh.qinf_exact(a, b, 0.4) == pytest.approx(sh.qinf_exact(b, a, 0.4))


def test_qinf_exact_matches_moment_series():
    a, b = make_state(2, 15), make_state(2, 16)
    gamma, n = 0.1, 2
    moments = sh.qinf_moments_exact(a, b, 8)
    series = sum(
        gamma**k / (math.factorial(k) * n**k) * moments[k] for k in range(9)
    )
    assert abs(sh.qinf_exact(a, b, gamma) - series) <= 1e-6


def test_qinf_exact_capacity():
    big = sv.embed_e1(np.zeros(5))
    with pytest.raises(CapacityExceeded):
        sh.qinf_exact(big, big, 0.1)


def test_qinf_estimate_shape_mismatch():
    a = sh.collect(make_state(1, 17), 10, np.random.default_rng(17))
    b = sh.collect(make_state(2, 18), 10, np.random.default_rng(18))
    with pytest.raises(ShapeError):
        sh.qinf_estimate(a, b, 0.1)


def test_qinf_estimate_unbiased():
    state = sv.embed_e1(np.array([0.4, 1.1]))
    gamma = 0.6
    exact = sh.qinf_exact(state, state, gamma)
    rng = np.random.default_rng(19)
    n_sets, n_records = 200, 40
    ests = np.empty(n_sets)
    for t in range(n_sets):
        a = sh.collect(state, n_records, rng)
        b = sh.collect(state, n_records, rng)
        ests[t] = sh.qinf_estimate(a, b, gamma)
    se_of_mean = np.std(ests, ddof=1) / np.sqrt(n_sets)
    assert abs(ests.mean() - exact) <= 4.0 * se_of_mean


def test_qinf_estimate_exchangeable():
    rng = np.random.default_rng(20)
    a = sh.collect(make_state(2, 21), 30, rng)
    b = sh.collect(make_state(2, 22), 30, rng)
    base = sh.qinf_estimate(a, b, 0.7)
    perm = np.random.default_rng(23).permutation(30)
    # permute both sets with the same permutation: the excluded diagonal
    # pairs map onto themselves, so the statistic is unchanged exactly
    ap = sh.ShadowSet(n=2, bases=a.bases[perm], outcomes=a.outcomes[perm])
    bp = sh.ShadowSet(n=2, bases=b.bases[perm], outcomes=b.outcomes[perm])
    assert sh.qinf_estimate(ap, bp, 0.7) == base


def test_collect_deterministic_given_seed():
    state = make_state(2, 24)
    a = sh.collect(state, 25, np.random.default_rng(25))
    b = sh.collect(state, 25, np.random.default_rng(25))
    assert np.array_equal(a.bases, b.bases)
    assert np.array_equal(a.outcomes, b.outcomes)


def test_shadow_csv_roundtrip(tmp_path):
    state = make_state(3, 26)
    s = sh.collect(state, 12, np.random.default_rng(26))
    path = tmp_path / "shadows.csv"
    sh.save_shadow_csv(path, s)
    loaded = sh.load_shadow_csv(path)
    assert loaded.n == s.n
    assert np.array_equal(loaded.bases, s.bases)
    assert np.array_equal(loaded.outcomes, s.outcomes)
