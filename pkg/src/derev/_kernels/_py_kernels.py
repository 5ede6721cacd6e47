"""Pure-numpy implementations of the solver's hot kernels.

Mirrors the compiled extension in ``_native.pyx``; the short-kernel loops
accumulate tap-major so both backends agree to the last few ulps.
"""

import numpy as np

BACKEND_NAME = "python"


def conv_rows(s, h):
    """Row-wise causal convolution truncated to the width of ``s``.

    out[k, n] = sum_d s[k, n-d] * h[k, d], with s[k, m] = 0 for m < 0.
    """
    s = np.asarray(s, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = s.shape[1]
    out = np.zeros_like(s)
    for d in range(min(h.shape[1], n)):
        out[:, d:] += h[:, d : d + 1] * s[:, : n - d]
    return out


def corr_short(h, m):
    """Row-wise cross-correlation with a short kernel.

    out[k, t] = sum_d h[k, d] * m[k, t+d] over t+d < m.shape[1].
    """
    h = np.asarray(h, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[1]
    out = np.zeros_like(m)
    for d in range(min(h.shape[1], n)):
        if d == 0:
            out += h[:, :1] * m
        else:
            out[:, :-d] += h[:, d : d + 1] * m[:, d:]
    return out


def corr_long(s, m, n_lags):
    """Lagged row-wise inner products.

    out[k, tau] = sum_n s[k, n-tau] * m[k, n] for tau = 0..n_lags-1.
    """
    s = np.asarray(s, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    n = s.shape[1]
    out = np.zeros((s.shape[0], n_lags))
    for tau in range(min(n_lags, n)):
        if tau == 0:
            out[:, 0] = np.einsum("kn,kn->k", s, m)
        else:
            out[:, tau] = np.einsum("kn,kn->k", s[:, :-tau], m[:, tau:])
    return out


def thomas_rows(sub, diag, sup, rhs):
    """Solve a batch of tridiagonal systems by elimination without pivoting.

    All arguments are (K, m); sub[:, 0] and sup[:, -1] are ignored. Returns
    (x, ok) where ok[k] is 0 when row k is not weakly diagonally dominant or
    a pivot underflows, in which case x[k] is all zeros and the caller must
    fall back to a least-squares solve.
    """
    sub = np.asarray(sub, dtype=np.float64)
    diag = np.asarray(diag, dtype=np.float64)
    sup = np.asarray(sup, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    kk, m = diag.shape

    scale = np.max(
        np.abs(diag), axis=1, initial=0.0
    )
    scale = np.maximum(scale, np.max(np.abs(sub[:, 1:]), axis=1, initial=0.0))
    scale = np.maximum(scale, np.max(np.abs(sup[:, :-1]), axis=1, initial=0.0))
    slack = 8.0 * np.finfo(np.float64).eps * scale

    off = np.zeros((kk, m))
    off += np.abs(np.concatenate([np.zeros((kk, 1)), sub[:, 1:]], axis=1))
    off += np.abs(np.concatenate([sup[:, :-1], np.zeros((kk, 1))], axis=1))
    dominant = np.all(np.abs(diag) + slack[:, None] >= off, axis=1)

    pivot_tol = np.maximum(scale * 1e-14, np.finfo(np.float64).tiny)

    gamma = np.zeros((kk, m))
    y = np.zeros((kk, m))
    ok = dominant & (scale > 0.0)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        beta = diag[:, 0].copy()
        ok &= np.abs(beta) > pivot_tol
        safe = np.where(beta == 0.0, 1.0, beta)
        gamma[:, 0] = sup[:, 0] / safe
        y[:, 0] = rhs[:, 0] / safe
        for i in range(1, m):
            beta = diag[:, i] - sub[:, i] * gamma[:, i - 1]
            ok &= np.abs(beta) > pivot_tol
            safe = np.where(beta == 0.0, 1.0, beta)
            if i < m - 1:
                gamma[:, i] = sup[:, i] / safe
            y[:, i] = (rhs[:, i] - sub[:, i] * y[:, i - 1]) / safe

        x = np.zeros((kk, m))
        x[:, m - 1] = y[:, m - 1]
        for i in range(m - 2, -1, -1):
            x[:, i] = y[:, i] - gamma[:, i] * x[:, i + 1]

    ok &= np.all(np.isfinite(x), axis=1)
    x[~ok] = 0.0
    return x, ok.astype(np.uint8)


# Small chunks keep the per-chunk temporaries inside the cache; an extra
# sentinel bin absorbs out-of-range taps so no boolean gather is needed.
_PULSE_CHUNK = 8192


def place_pulses(out, delays, amps, half_width):
    """Accumulate Hann-windowed sinc pulses at fractional sample delays.

    Same identity-based evaluation as the compiled backend: one sin/cos
    pair per pulse, kernel taps reconstructed from small tables.
    """
    delays = np.asarray(delays, dtype=np.float64)
    amps = np.asarray(amps, dtype=np.float64)
    length = out.shape[0]
    w = half_width
    taps = 2 * w + 1
    j = np.arange(taps)
    cj = np.cos(np.pi * j / w)
    sj = np.sin(np.pi * j / w)
    sign = np.where(j % 2 == 1, 1.0, -1.0)

    for lo in range(0, len(delays), _PULSE_CHUNK):
        d = delays[lo : lo + _PULSE_CHUNK]
        a = amps[lo : lo + _PULSE_CHUNK]
        base = np.ceil(d - w).astype(np.int64)
        eta = d - base
        s0 = np.sin(np.pi * eta)
        cg = np.cos(np.pi * eta / w)
        sg = np.sin(np.pi * eta / w)

        u = j[None, :] - eta[:, None]
        near_zero = np.abs(u) < 1e-9
        safe_u = np.where(near_zero, 1.0, u)
        sinc = (sign[None, :] * s0[:, None]) / (np.pi * safe_u)
        window = 0.5 * (1.0 + cj[None, :] * cg[:, None] + sj[None, :] * sg[:, None])
        val = a[:, None] * np.where(near_zero, 1.0, sinc * window)

        idx = base[:, None] + j[None, :]
        val *= (idx >= 0) & (idx < length) & (np.abs(u) <= w)
        np.clip(idx, 0, length, out=idx)
        acc = np.bincount(idx.ravel(), weights=val.ravel(), minlength=length + 1)
        out += acc[:length]
    return out
