import numpy as np
import pytest

from derev import (
    ReverbKernel,
    SolverConfig,
    aux_gh,
    aux_gs,
    cost,
    cost_terms,
    forward_model,
    per_band_lambdas,
)
from derev.cnmf import first_differences
from derev.errors import DimensionMismatchError


def naive_forward(s, h):
    kk, n = s.shape
    nh = h.shape[1]
    x = np.zeros((kk, n))
    for k in range(kk):
        for t in range(n):
            for d in range(nh):
                if 0 <= t - d:
                    x[k, t] += s[k, t - d] * h[k, d]
    return x


def rand_instance(rng, kmax=8, nmax=64, nhmax=8):
    kk = int(rng.integers(1, kmax + 1))
    nh = int(rng.integers(2, nhmax + 1))
    n = int(rng.integers(nh + 1, nmax + 1))
    s = 1.0 - rng.random((kk, n))
    h = 1.0 - rng.random((kk, nh))
    y = 1.0 - rng.random((kk, n))
    return s, h, y


def test_forward_delta_kernel_identity():
    rng = np.random.default_rng(0)
    s = rng.random((5, 30))
    h = np.zeros((5, 4))
    h[:, 0] = 1.0
    assert np.array_equal(forward_model(s, h), s)


def test_forward_hand_example():
    x = forward_model(np.array([[1.0, 2.0, 3.0]]), np.array([[1.0, 0.5]]))
    assert np.allclose(x, [[1.0, 2.5, 4.0]], atol=1e-15)


def test_forward_zeros():
    assert np.all(forward_model(np.zeros((3, 10)), np.ones((3, 4))) == 0)


def test_forward_matches_naive():
    rng = np.random.default_rng(1)
    for _ in range(20):
        s, h, _ = rand_instance(rng)
        assert np.allclose(forward_model(s, h), naive_forward(s, h), rtol=1e-12)


def test_forward_bilinear():
    rng = np.random.default_rng(2)
    s1, h1, _ = rand_instance(rng)
    s2 = rng.random(s1.shape)
    h2 = rng.random(h1.shape)
    a, b = 0.7, 2.1
    lhs = forward_model(a * s1 + b * s2, h1)
    rhs = a * forward_model(s1, h1) + b * forward_model(s2, h1)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(rhs)
    lhs = forward_model(s1, a * h1 + b * h2)
    rhs = a * forward_model(s1, h1) + b * forward_model(s1, h2)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(rhs)


def test_forward_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        forward_model(np.zeros((3, 10)), np.zeros((4, 2)))


def test_per_band_lambdas():
    cfg = SolverConfig(lambda_h=1.0, lambda_s=1e-4)
    y = np.array([[1.0, 2.0], [0.0, 0.0]])
    lam_h, lam_s = per_band_lambdas(y, cfg)
    assert lam_h[0] == pytest.approx(5.0)
    assert lam_h[1] == 0.0
    assert np.all(lam_s == 1e-4)


def test_cost_exact_fit_zero():
    rng = np.random.default_rng(3)
    s, h, _ = rand_instance(rng)
    y = forward_model(s, h)
    cfg = SolverConfig(lambda_h=0.0, lambda_s=0.0, n_h=h.shape[1])
    assert cost(s, h, y, cfg) == 0.0


def test_cost_constant_kernel_no_smoothness():
    s = np.random.default_rng(4).random((3, 12))
    h = np.full((3, 5), 0.3)
    y = np.zeros((3, 12))
    cfg = SolverConfig(lambda_h=7.0, lambda_s=0.0, n_h=5)
    fid, sp, sm, total = cost_terms(s, h, y, cfg)
    assert sm == 0.0
    assert total == fid


def test_cost_hand_example():
    s = np.array([[1.0, 4.0]])
    h = np.array([[1.0, 0.0]])
    y = np.array([[0.0, 0.0]])
    cfg = SolverConfig(lambda_h=0.0, lambda_s=1.0, p=1.0, n_h=2)
    assert cost(s, h, y, cfg) == pytest.approx(22.0, rel=1e-14)


def test_aux_gs_identity_and_domination():
    rng = np.random.default_rng(5)
    for _ in range(100):
        s, h, y = rand_instance(rng)
        s_alt = 1.0 - rng.random(s.shape)
        cfg = SolverConfig(
            lambda_h=float(rng.choice([0.0, 1e-4, 1.0])),
            lambda_s=float(rng.choice([0.0, 1e-4, 1.0])),
            p=float(rng.choice([0.5, 1.0, 1.5])),
            n_h=h.shape[1],
        )
        j = cost(s, h, y, cfg)
        assert abs(aux_gs(s, s, h, y, cfg) - j) <= 1e-10 * j
        assert aux_gs(s, s_alt, h, y, cfg) >= j - 1e-10 * j


def test_aux_gh_identity_and_domination():
    rng = np.random.default_rng(6)
    for _ in range(100):
        s, h, y = rand_instance(rng)
        h_alt = 1.0 - rng.random(h.shape)
        cfg = SolverConfig(
            lambda_h=float(rng.choice([0.0, 1e-4, 1.0])),
            lambda_s=float(rng.choice([0.0, 1e-4, 1.0])),
            p=float(rng.choice([0.5, 1.0, 1.5])),
            n_h=h.shape[1],
        )
        j = cost(s, h, y, cfg)
        assert abs(aux_gh(h, h, s, y, cfg) - j) <= 1e-10 * j
        assert aux_gh(h, h_alt, s, y, cfg) >= j - 1e-10 * j


def test_aux_gh_smoothness_term_not_majorized():
    # The kernel-smoothness penalty enters the surrogate exactly as in the
    # cost, so changing lambda_h shifts both by the identical amount.
    rng = np.random.default_rng(7)
    s, h, y = rand_instance(rng)
    h_prev = 1.0 - rng.random(h.shape)
    base = dict(lambda_s=1e-4, p=1.0, n_h=h.shape[1])
    g0 = aux_gh(h, h_prev, s, y, SolverConfig(lambda_h=0.0, **base))
    g1 = aux_gh(h, h_prev, s, y, SolverConfig(lambda_h=3.0, **base))
    c0 = cost(s, h, y, SolverConfig(lambda_h=0.0, **base))
    c1 = cost(s, h, y, SolverConfig(lambda_h=3.0, **base))
    assert g1 - g0 == pytest.approx(c1 - c0, rel=1e-12)


@pytest.mark.parametrize("p", [0.5, 1.0, 1.5])
def test_scalar_majorizer_minimum(p):
    # Q(x) = (p/2) x^(p-2) s^2 + x^p - (p/2) x^p has its global minimum at
    # x = s with value s^p.
    s = 0.73
    q = lambda x: 0.5 * p * x ** (p - 2) * s**2 + x**p - 0.5 * p * x**p
    assert q(s) == pytest.approx(s**p, rel=1e-12)
    for x in np.linspace(0.05, 3.0, 200):
        assert q(x) >= s**p - 1e-12


def test_phase_randomization_expectation():
    rng = np.random.default_rng(8)
    draws = 20000
    for _ in range(5):
        nh = int(rng.integers(2, 9))
        s = rng.random(nh) + 1j * rng.random(nh)
        h = rng.random(nh) + 1j * rng.random(nh)
        phases = rng.uniform(-np.pi, np.pi, size=(draws, nh))
        vals = (
            np.abs(np.sum(s[None, :] * np.abs(h)[None, :] * np.exp(1j * phases), axis=1))
            ** 2
        )
        expected = np.sum(np.abs(s) ** 2 * np.abs(h) ** 2)
        tol = 5.0 * vals.std() / np.sqrt(draws)
        assert abs(vals.mean() - expected) <= tol


def test_first_differences():
    assert np.all(first_differences(np.full((4, 6), 3.3)) == 0.0)
    v = first_differences(np.array([[1.0, 4.0, 9.0]]))
    assert np.allclose(v, [[3.0, 5.0]])


def test_reverb_kernel_validation():
    with pytest.raises(ValueError):
        ReverbKernel(np.zeros((3, 1)))
    with pytest.raises(ValueError):
        ReverbKernel(np.array([[1.0, -0.1]]))
    assert ReverbKernel(np.ones((2, 3))).shape == (2, 3)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(p=0.0)
    with pytest.raises(ValueError):
        SolverConfig(p=2.0)
    with pytest.raises(ValueError):
        SolverConfig(lambda_h=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(n_h=1)
    defaults = SolverConfig()
    assert defaults.p == 1.0
    assert defaults.n_h == 15
    assert defaults.max_iter == 20
    assert defaults.delta_factor == 1e-3
    assert defaults.lambda_h == 1.0
    assert defaults.lambda_s == 1e-4
