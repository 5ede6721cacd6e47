# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: convolutive-NMF solver loops and RIR pulse placement.

Same contracts as ``_py_kernels``; see that module for the reference
semantics. The NMF loops are tap-major so accumulation order matches the
numpy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, ceil, cos, fabs, isfinite, sin

cnp.import_array()

BACKEND_NAME = "cython"


def conv_rows(object s_in, object h_in):
    cdef double[:, ::1] s = np.ascontiguousarray(s_in, dtype=np.float64)
    cdef double[:, ::1] h = np.ascontiguousarray(h_in, dtype=np.float64)
    cdef Py_ssize_t kk = s.shape[0], n = s.shape[1], nh = h.shape[1]
    out_arr = np.zeros((kk, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, d, t
    cdef double hv
    for k in range(kk):
        for d in range(min(nh, n)):
            hv = h[k, d]
            if hv == 0.0:
                continue
            for t in range(d, n):
                out[k, t] = out[k, t] + hv * s[k, t - d]
    return out_arr


def corr_short(object h_in, object m_in):
    cdef double[:, ::1] h = np.ascontiguousarray(h_in, dtype=np.float64)
    cdef double[:, ::1] m = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef Py_ssize_t kk = m.shape[0], n = m.shape[1], nh = h.shape[1]
    out_arr = np.zeros((kk, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, d, t
    cdef double hv
    for k in range(kk):
        for d in range(min(nh, n)):
            hv = h[k, d]
            if hv == 0.0:
                continue
            for t in range(n - d):
                out[k, t] = out[k, t] + hv * m[k, t + d]
    return out_arr


def corr_long(object s_in, object m_in, Py_ssize_t n_lags):
    cdef double[:, ::1] s = np.ascontiguousarray(s_in, dtype=np.float64)
    cdef double[:, ::1] m = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef Py_ssize_t kk = s.shape[0], n = s.shape[1]
    out_arr = np.zeros((kk, n_lags), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, tau, t
    cdef double acc
    for k in range(kk):
        for tau in range(min(n_lags, n)):
            acc = 0.0
            for t in range(tau, n):
                acc += s[k, t - tau] * m[k, t]
            out[k, tau] = acc
    return out_arr


def thomas_rows(object sub_in, object diag_in, object sup_in, object rhs_in):
    cdef double[:, ::1] sub = np.ascontiguousarray(sub_in, dtype=np.float64)
    cdef double[:, ::1] diag = np.ascontiguousarray(diag_in, dtype=np.float64)
    cdef double[:, ::1] sup = np.ascontiguousarray(sup_in, dtype=np.float64)
    cdef double[:, ::1] rhs = np.ascontiguousarray(rhs_in, dtype=np.float64)
    cdef Py_ssize_t kk = diag.shape[0], m = diag.shape[1]

    x_arr = np.zeros((kk, m), dtype=np.float64)
    ok_arr = np.zeros(kk, dtype=np.uint8)
    cdef double[:, ::1] x = x_arr
    cdef unsigned char[::1] ok = ok_arr

    gamma_arr = np.zeros(m, dtype=np.float64)
    y_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] gamma = gamma_arr
    cdef double[::1] y = y_arr

    cdef Py_ssize_t k, i
    cdef double scale, slack, pivot_tol, beta, off, tiny
    cdef bint good
    tiny = np.finfo(np.float64).tiny
    cdef double eps = np.finfo(np.float64).eps

    for k in range(kk):
        scale = 0.0
        for i in range(m):
            if fabs(diag[k, i]) > scale:
                scale = fabs(diag[k, i])
            if i > 0 and fabs(sub[k, i]) > scale:
                scale = fabs(sub[k, i])
            if i < m - 1 and fabs(sup[k, i]) > scale:
                scale = fabs(sup[k, i])
        if scale == 0.0:
            continue
        slack = 8.0 * eps * scale
        pivot_tol = scale * 1e-14
        if pivot_tol < tiny:
            pivot_tol = tiny

        good = True
        for i in range(m):
            off = 0.0
            if i > 0:
                off += fabs(sub[k, i])
            if i < m - 1:
                off += fabs(sup[k, i])
            if fabs(diag[k, i]) + slack < off:
                good = False
                break
        if not good:
            continue

        beta = diag[k, 0]
        if fabs(beta) <= pivot_tol:
            continue
        gamma[0] = sup[k, 0] / beta
        y[0] = rhs[k, 0] / beta
        for i in range(1, m):
            beta = diag[k, i] - sub[k, i] * gamma[i - 1]
            if fabs(beta) <= pivot_tol:
                good = False
                break
            if i < m - 1:
                gamma[i] = sup[k, i] / beta
            y[i] = (rhs[k, i] - sub[k, i] * y[i - 1]) / beta
        if not good:
            continue

        x[k, m - 1] = y[m - 1]
        for i in range(m - 2, -1, -1):
            x[k, i] = y[i] - gamma[i] * x[k, i + 1]
        good = True
        for i in range(m):
            if not isfinite(x[k, i]):
                good = False
                break
        if good:
            ok[k] = 1
        else:
            for i in range(m):
                x[k, i] = 0.0
    return x_arr, ok_arr


def place_pulses(object out_in, object delays_in, object amps_in,
                 Py_ssize_t half_width):
    """Accumulate Hann-windowed sinc pulses at fractional sample delays.

    Uses sin(pi*(j - eta)) = -(-1)^j sin(pi*eta) so each pulse costs one
    sin/cos pair instead of a trig call per tap.
    """
    cdef double[::1] out = out_in
    cdef double[::1] delays = np.ascontiguousarray(delays_in, dtype=np.float64)
    cdef double[::1] amps = np.ascontiguousarray(amps_in, dtype=np.float64)
    cdef Py_ssize_t length = out.shape[0], m = delays.shape[0], w = half_width
    cdef Py_ssize_t taps = 2 * w + 1

    cj_arr = np.cos(np.pi * np.arange(taps) / w)
    sj_arr = np.sin(np.pi * np.arange(taps) / w)
    cdef double[::1] cj = cj_arr
    cdef double[::1] sj = sj_arr

    cdef Py_ssize_t i, j, n, base
    cdef double d, a, eta, s0, cg, sg, u, sinc, window
    for i in range(m):
        d = delays[i]
        a = amps[i]
        base = <Py_ssize_t>ceil(d - w)
        eta = d - base
        s0 = sin(M_PI * eta)
        cg = cos(M_PI * eta / w)
        sg = sin(M_PI * eta / w)
        for j in range(taps):
            n = base + j
            if n < 0 or n >= length:
                continue
            u = j - eta
            if u > w or u < -w:
                continue
            if fabs(u) < 1e-9:
                out[n] += a
                continue
            sinc = (s0 if j % 2 else -s0) / (M_PI * u)
            window = 0.5 * (1.0 + cj[j] * cg + sj[j] * sg)
            out[n] += a * sinc * window
    return out_in
