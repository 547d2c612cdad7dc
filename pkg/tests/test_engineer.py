"""Saturating-label construction and binarization."""

import numpy as np
import pytest

from kernelscope import engineer as eng
from kernelscope import geometry as geo
from kernelscope import kernels as kn
from kernelscope.errors import InvalidInput


def normalized_psd(rng, n, rank=None):
    r = rng.normal(size=(n, rank if rank is not None else n + 5))
    return kn.normalize_trace(kn._make(r @ r.T, "precomputed"))


def test_identical_kernels_give_unit_g():
    g = kn._make(np.eye(6), "precomputed", normalized=True)
    out = eng.engineer_labels(g, g, lambda_grid=(0.0,))
    assert out.g_gen_achieved == pytest.approx(1.0, abs=1e-9)
    assert abs(np.linalg.norm(out.eigenvector) - 1.0) <= 1e-12
    assert geo.model_complexity(g, out.y_real, 0.0) == pytest.approx(1.0, abs=1e-6)


def test_saturation_at_lambda_zero():
    rng = np.random.default_rng(0)
    k_c = normalized_psd(rng, 15)
    k_q = normalized_psd(rng, 15)
    out = eng.engineer_labels(k_c, k_q, lambda_grid=(0.0,))
    s_q = geo.model_complexity(k_q, out.y_real, 0.0)
    s_c = geo.model_complexity(k_c, out.y_real, 0.0)
    assert s_q == pytest.approx(1.0, abs=1e-6)
    assert s_c == pytest.approx(out.g_gen_achieved**2, abs=1e-6)
    g_gen, _ = geo.geometric_difference(k_q, k_c, 0.0)
    assert out.g_gen_achieved == pytest.approx(g_gen, rel=1e-9)


def test_saturation_regularized():
    rng = np.random.default_rng(1)
    k_c = normalized_psd(rng, 20)
    k_q = normalized_psd(rng, 20)
    out = eng.engineer_labels(k_c, k_q)
    assert out.cap_satisfied
    assert out.s_tra_bound <= eng.S_TRA_CAP
    s_q = geo.model_complexity(k_q, out.y_real, 0.0)
    s_c_reg = geo.model_complexity(k_c, out.y_real, out.lam_used)
    assert s_q == pytest.approx(1.0, abs=1e-6)
    assert s_c_reg == pytest.approx(out.g_gen_achieved**2, abs=1e-6)


def test_matches_generalized_eigenproblem_oracle():
    # direct dense solve of K_Q K_C^{-1} y = g^2 y, rescaled to s_Q = 1
    rng = np.random.default_rng(2)
    n = 3
    k_c = normalized_psd(rng, n)
    k_q = normalized_psd(rng, n)
    out = eng.engineer_labels(k_c, k_q, lambda_grid=(0.0,))

    m = k_q.values @ np.linalg.inv(k_c.values)
    vals, vecs = np.linalg.eig(m)
    order = np.argsort(vals.real)[::-1]
    top = np.real(vecs[:, order[0]])
    top /= np.sqrt(top @ np.linalg.inv(k_q.values) @ top)
    lead = int(np.argmax(np.abs(out.y_real)))
    if np.sign(top[lead]) != np.sign(out.y_real[lead]):
        top = -top
    assert np.max(np.abs(out.y_real - top)) <= 1e-8
    assert vals.real[order[0]] == pytest.approx(out.g_gen_achieved**2, rel=1e-9)


def test_g_gen_non_increasing_as_cap_tightens():
    rng = np.random.default_rng(3)
    k_c = normalized_psd(rng, 18)
    k_q = normalized_psd(rng, 18)
    gs = []
    for cap in (0.002, 0.001, 0.0005, 0.0001):
        out = eng.engineer_labels(k_c, k_q, s_tra_cap=cap)
        gs.append(out.g_gen_achieved)
    assert all(gs[i] >= gs[i + 1] - 1e-12 for i in range(len(gs) - 1))


def test_no_lambda_meets_cap_is_flagged():
    rng = np.random.default_rng(4)
    # reference orthogonal to a nearly rank-deficient learner keeps the
    # training budget high for every grid lambda
    k_q = kn._make(np.eye(8), "precomputed", normalized=True)
    k_c = normalized_psd(rng, 8, rank=2)
    out = eng.engineer_labels(k_c, k_q, s_tra_cap=1e-12)
    assert not out.cap_satisfied
    assert out.s_tra_bound > 1e-12


def test_binarize_median():
    y = np.array([0.1, 0.5, -0.2, 0.9])
    got = eng.binarize(y, "median")
    assert np.array_equal(got, [-1, 1, -1, 1])


def test_binarize_median_count():
    rng = np.random.default_rng(5)
    for n in (9, 10, 101, 200):
        y = rng.normal(size=n)
        got = eng.binarize(y, "median")
        assert int(np.sum(got == -1)) == int(np.ceil(n / 2))


def test_binarize_sign_noise_zero_noise():
    y = np.array([0.3, -0.7, 0.0, 2.0])
    got = eng.binarize(y, "sign_noise", noise_p=0.0, rng=np.random.default_rng(6))
    assert np.array_equal(got, [1, -1, 1, 1])


def test_binarize_sign_noise_flip_fraction():
    rng = np.random.default_rng(7)
    y = rng.normal(size=10_000)
    got = eng.binarize(y, "sign_noise", noise_p=0.1, rng=np.random.default_rng(8))
    signs = np.where(y >= 0, 1, -1)
    flipped = np.mean(got != signs)
    # half of the 10% resamples land on the opposite sign
    p = 0.05
    sigma = np.sqrt(p * (1 - p) / y.size)
    assert abs(flipped - p) <= 3 * sigma


def test_binarize_rejects_unknown_mode():
    with pytest.raises(InvalidInput):
        eng.binarize(np.ones(3), "nope")


def test_select_adversary_prefers_matching_kernel():
    rng = np.random.default_rng(9)
    k_q = normalized_psd(rng, 10)
    other = normalized_psd(rng, 10)
    best = eng.select_adversary(k_q, [other, k_q])
    assert best is k_q


def test_engineer_deterministic():
    rng = np.random.default_rng(10)
    k_c = normalized_psd(rng, 12)
    k_q = normalized_psd(rng, 12)
    a = eng.engineer_labels(k_c, k_q, noise_seed=3)
    b = eng.engineer_labels(k_c, k_q, noise_seed=3)
    assert np.array_equal(a.y_real, b.y_real)
    assert np.array_equal(a.y_class, b.y_class)
