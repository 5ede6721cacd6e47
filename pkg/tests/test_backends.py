import os
import subprocess
import sys

import numpy as np
import pytest

from derev import _kernels as kernels

BACKENDS = kernels.available_backends()


def naive_conv(s, h):
    kk, n = s.shape
    x = np.zeros((kk, n))
    for k in range(kk):
        for t in range(n):
            for d in range(h.shape[1]):
                if t - d >= 0:
                    x[k, t] += s[k, t - d] * h[k, d]
    return x


def naive_corr_short(h, m):
    kk, n = m.shape
    c = np.zeros((kk, n))
    for k in range(kk):
        for t in range(n):
            for d in range(h.shape[1]):
                if t + d < n:
                    c[k, t] += h[k, d] * m[k, t + d]
    return c


def naive_corr_long(s, m, nh):
    kk, n = s.shape
    z = np.zeros((kk, nh))
    for k in range(kk):
        for tau in range(nh):
            for t in range(tau, n):
                z[k, tau] += s[k, t - tau] * m[k, t]
    return z


def _rand_tridiag(rng, kk, m):
    a = rng.random((kk, m)) + 0.5
    b = rng.random((kk, m)) + 0.5
    lam = rng.random(kk) * 2.0
    stencil = np.full(m, 2.0)
    stencil[0] = stencil[-1] = 1.0
    lam_b = lam[:, None] * b
    diag = a + lam_b * stencil
    sub = -lam_b.copy()
    sub[:, 0] = 0.0
    sup = -lam_b.copy()
    sup[:, -1] = 0.0
    rhs = b * (rng.random((kk, m)) + 0.1)
    return sub, diag, sup, rhs


def _dense(sub_k, diag_k, sup_k):
    m = len(diag_k)
    a = np.diag(diag_k)
    a[np.arange(1, m), np.arange(m - 1)] = sub_k[1:]
    a[np.arange(m - 1), np.arange(1, m)] = sup_k[:-1]
    return a


@pytest.mark.parametrize("name", BACKENDS)
def test_conv_rows_oracle(name):
    mod = kernels.get_backend(name)
    rng = np.random.default_rng(0)
    s = rng.random((5, 24))
    h = rng.random((5, 6))
    assert np.allclose(mod.conv_rows(s, h), naive_conv(s, h), rtol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_corr_short_oracle(name):
    mod = kernels.get_backend(name)
    rng = np.random.default_rng(1)
    h = rng.random((4, 5))
    m = rng.random((4, 30))
    assert np.allclose(mod.corr_short(h, m), naive_corr_short(h, m), rtol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_corr_long_oracle(name):
    mod = kernels.get_backend(name)
    rng = np.random.default_rng(2)
    s = rng.random((4, 30))
    m = rng.random((4, 30))
    assert np.allclose(mod.corr_long(s, m, 6), naive_corr_long(s, m, 6), rtol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_thomas_solves_dominant_systems(name):
    mod = kernels.get_backend(name)
    rng = np.random.default_rng(3)
    sub, diag, sup, rhs = _rand_tridiag(rng, 20, 15)
    x, ok = mod.thomas_rows(sub, diag, sup, rhs)
    assert np.all(ok == 1)
    for k in range(20):
        a = _dense(sub[k], diag[k], sup[k])
        res = np.linalg.norm(a @ x[k] - rhs[k]) / np.linalg.norm(rhs[k])
        assert res <= 1e-12


@pytest.mark.parametrize("name", BACKENDS)
def test_thomas_flags_singular(name):
    mod = kernels.get_backend(name)
    zeros = np.zeros((2, 5))
    x, ok = mod.thomas_rows(zeros, zeros, zeros, zeros)
    assert np.all(ok == 0)
    assert np.all(x == 0)


@pytest.mark.parametrize("name", BACKENDS)
def test_thomas_flags_non_dominant(name):
    mod = kernels.get_backend(name)
    m = 5
    diag = np.full((1, m), 0.1)
    sub = np.full((1, m), -1.0)
    sub[:, 0] = 0.0
    sup = np.full((1, m), -1.0)
    sup[:, -1] = 0.0
    rhs = np.ones((1, m))
    _, ok = mod.thomas_rows(sub, diag, sup, rhs)
    assert ok[0] == 0


@pytest.mark.parametrize("name", BACKENDS)
def test_place_pulses_oracle(name):
    mod = kernels.get_backend(name)
    rng = np.random.default_rng(4)
    delays = rng.uniform(5.0, 180.0, size=40)
    amps = rng.random(40)
    out = np.zeros(220)
    mod.place_pulses(out, delays, amps, 32)

    expected = np.zeros(220)
    for d, a in zip(delays, amps):
        for n in range(max(0, int(np.ceil(d - 32))), min(220, int(np.floor(d + 32)) + 1)):
            u = n - d
            expected[n] += a * np.sinc(u) * 0.5 * (1 + np.cos(np.pi * u / 32))
    assert np.allclose(out, expected, rtol=1e-9, atol=1e-12)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_agree():
    py = kernels.get_backend("python")
    cy = kernels.get_backend("cython")
    rng = np.random.default_rng(5)
    s = rng.random((16, 100))
    h = rng.random((16, 15))
    assert np.allclose(py.conv_rows(s, h), cy.conv_rows(s, h), rtol=1e-10, atol=1e-14)
    assert np.allclose(py.corr_short(h, s), cy.corr_short(h, s), rtol=1e-10, atol=1e-14)
    assert np.allclose(
        py.corr_long(s, s, 15), cy.corr_long(s, s, 15), rtol=1e-10, atol=1e-14
    )
    sub, diag, sup, rhs = _rand_tridiag(rng, 16, 15)
    xp, okp = py.thomas_rows(sub, diag, sup, rhs)
    xc, okc = cy.thomas_rows(sub, diag, sup, rhs)
    assert np.array_equal(okp, okc)
    assert np.allclose(xp, xc, rtol=1e-10, atol=1e-14)

    out_p = np.zeros(500)
    out_c = np.zeros(500)
    delays = rng.uniform(0.0, 460.0, size=200)
    amps = rng.random(200)
    py.place_pulses(out_p, delays, amps, 32)
    cy.place_pulses(out_c, delays, amps, 32)
    assert np.allclose(out_p, out_c, rtol=1e-10, atol=1e-14)


def test_backend_env_override():
    code = (
        "import derev._kernels as k; "
        "assert k.BACKEND == 'python', k.BACKEND"
    )
    env = dict(os.environ, DEREV_BACKEND="python")
    subprocess.run([sys.executable, "-c", code], check=True, env=env)


def test_selected_backend_is_known():
    assert kernels.BACKEND in BACKENDS
