"""Symmetric linear algebra: examples against independent oracles."""

import numpy as np
import pytest

from kernelscope import linalg
from kernelscope.errors import InvalidMatrix, NotPSD


def cubic_eigenvalues_3x3(a):
    """Closed-form (trigonometric) roots of the characteristic cubic.

    Independent of any LAPACK eigensolver path.
    """
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    if p1 == 0.0:
        return np.sort(np.diag(a))[::-1]
    q = np.trace(a) / 3.0
    p2 = sum((a[i, i] - q) ** 2 for i in range(3)) + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    det_b = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    r = np.clip(det_b / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    e1 = q + 2.0 * p * np.cos(phi)
    e3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array([e1, e2, e3])


def power_iteration_norm(a, iters=5000):
    """Spectral norm of a symmetric matrix by plain power iteration on A^2."""
    rng = np.random.default_rng(7)
    v = rng.normal(size=a.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = a @ (a @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return float(np.sqrt(v @ (a @ (a @ v))))


def random_psd(rng, dim, rank=None):
    r = rng.normal(size=(dim, rank if rank is not None else dim + 5))
    return r @ r.T


def test_sym_eig_identity():
    e = linalg.sym_eig(np.eye(3))
    assert np.allclose(e.eigenvalues, [1.0, 1.0, 1.0])


def test_sym_eig_diagonal():
    e = linalg.sym_eig(np.diag([5.0, 2.0, -1.0]))
    assert np.allclose(e.eigenvalues, [5.0, 2.0, -1.0])
    # axis eigenvectors up to sign
    assert np.allclose(np.abs(e.eigenvectors), np.eye(3), atol=1e-12)


def test_sym_eig_matches_characteristic_cubic():
    rng = np.random.default_rng(0)
    for _ in range(25):
        a = rng.normal(size=(3, 3))
        a = (a + a.T) / 2.0
        got = linalg.sym_eig(a).eigenvalues
        want = cubic_eigenvalues_3x3(a)
        assert np.max(np.abs(got - want)) <= 1e-8


def test_sym_eig_invariants():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(8, 8))
    e = linalg.sym_eig(a)
    v = e.eigenvectors
    assert np.max(np.abs(v.T @ v - np.eye(8))) <= 1e-10
    recon = (v * e.eigenvalues) @ v.T
    scale = max(1.0, float(np.max(np.abs(e.eigenvalues))))
    assert np.max(np.abs(recon - linalg.as_sym(a).mat)) <= 1e-8 * scale


def test_sym_eig_rejects_nonfinite():
    a = np.eye(2)
    a[0, 1] = np.nan
    with pytest.raises(InvalidMatrix):
        linalg.sym_eig(a)


def test_sym_eig_permutation_invariant():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(6, 6))
    a = (a + a.T) / 2.0
    perm = rng.permutation(6)
    b = a[np.ix_(perm, perm)]
    ea = linalg.sym_eig(a).eigenvalues
    eb = linalg.sym_eig(b).eigenvalues
    assert np.max(np.abs(ea - eb)) <= 1e-10


def test_psd_sqrt_examples():
    assert np.allclose(linalg.psd_sqrt(np.diag([4.0, 1.0])).mat, np.diag([2.0, 1.0]))
    assert np.allclose(linalg.psd_sqrt(np.eye(5)).mat, np.eye(5))


def test_psd_sqrt_multiply_back():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 4))
    g = x.T @ x
    b = linalg.psd_sqrt(g).mat
    lam_max = float(np.max(linalg.sym_eig(g).eigenvalues))
    assert np.max(np.abs(b @ b - g)) <= 1e-7 * max(1.0, lam_max)


def test_psd_sqrt_property_random_trials():
    rng = np.random.default_rng(4)
    for _ in range(100):
        dim = int(rng.integers(1, 51))
        g = random_psd(rng, dim)
        b = linalg.psd_sqrt(g).mat
        lam_max = float(np.max(linalg.sym_eig(g).eigenvalues))
        assert np.max(np.abs(b @ b - linalg.as_sym(g).mat)) <= 1e-7 * max(1.0, lam_max)


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NotPSD) as exc:
        linalg.psd_sqrt(np.diag([1.0, -0.5]))
    assert exc.value.eigenvalue == pytest.approx(-0.5)


def test_psd_pinv_examples():
    got = linalg.psd_pinv(np.diag([2.0, 0.0]), rcond=1e-10).mat
    assert np.allclose(got, np.diag([0.5, 0.0]))
    assert np.allclose(linalg.psd_pinv(np.eye(4)).mat, np.eye(4))


def test_psd_pinv_multiply_back():
    rng = np.random.default_rng(5)
    a = random_psd(rng, 5)
    ap = linalg.psd_pinv(a).mat
    assert np.max(np.abs(ap @ a - np.eye(5))) <= 1e-7
    # Moore-Penrose identity holds on rank-deficient input too
    b = random_psd(rng, 6, rank=3)
    bp = linalg.psd_pinv(b).mat
    assert np.max(np.abs(b @ bp @ b - b)) <= 1e-7


def test_spectral_norm_examples():
    assert linalg.spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert linalg.spectral_norm(np.eye(7)) == pytest.approx(1.0)


def test_spectral_norm_matches_power_iteration():
    rng = np.random.default_rng(6)
    a = rng.normal(size=(10, 10))
    a = (a + a.T) / 2.0
    got = linalg.spectral_norm(a)
    want = power_iteration_norm(a)
    assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_spectral_norm_dominates_rayleigh_quotients():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(12, 12))
    a = (a + a.T) / 2.0
    norm = linalg.spectral_norm(a)
    vs = rng.normal(size=(1000, 12))
    vs /= np.linalg.norm(vs, axis=1, keepdims=True)
    quads = np.abs(np.einsum("ij,jk,ik->i", vs, a, vs))
    assert np.all(quads <= norm + 1e-8)


def test_reg_solve_examples():
    r = linalg.reg_solve(np.eye(2), 1.0, np.array([2.0, 4.0]))
    assert np.allclose(r.x, [1.0, 2.0])
    assert not r.used_pinv
    r = linalg.reg_solve(np.zeros((3, 3)), 1.0, np.array([1.0, -2.0, 0.5]))
    assert np.allclose(r.x, [1.0, -2.0, 0.5])


def test_reg_solve_residual():
    rng = np.random.default_rng(9)
    a = random_psd(rng, 20)
    b = rng.normal(size=20)
    r = linalg.reg_solve(a, 0.1, b)
    res = (linalg.as_sym(a).mat + 0.1 * np.eye(20)) @ r.x - b
    assert np.linalg.norm(res) <= 1e-8 * np.linalg.norm(b)


def test_reg_solve_singular_falls_back_to_pinv():
    a = np.diag([1.0, 0.0])
    b = np.array([3.0, 0.0])
    r = linalg.reg_solve(a, 0.0, b)
    assert r.used_pinv
    assert np.allclose(r.x, [3.0, 0.0])


def test_operations_bit_deterministic():
    rng = np.random.default_rng(10)
    a = random_psd(rng, 15)
    b = rng.normal(size=15)
    e1, e2 = linalg.sym_eig(a), linalg.sym_eig(a)
    assert np.array_equal(e1.eigenvalues, e2.eigenvalues)
    assert np.array_equal(e1.eigenvectors, e2.eigenvectors)
    assert np.array_equal(linalg.psd_sqrt(a).mat, linalg.psd_sqrt(a).mat)
    assert np.array_equal(
        linalg.reg_solve(a, 0.01, b).x, linalg.reg_solve(a, 0.01, b).x
    )


def test_symmetrization_on_construction():
    a = np.array([[1.0, 2.0], [0.0, 3.0]])
    s = linalg.as_sym(a)
    assert np.array_equal(s.mat, s.mat.T)
    assert s.mat[0, 1] == pytest.approx(1.0)
