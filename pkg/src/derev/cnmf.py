"""Convolutive NMF model with mixed penalties.

The model approximates an observed power spectrogram Y (K x N) by

    X[k, n] = sum_tau S[k, n-tau] * H[k, tau],

a per-band causal convolution of the clean power spectrogram S with a
short nonnegative kernel H (K x N_h). The objective adds an lp penalty
on S (sparsity) and a squared first-difference penalty on each row of H
(smoothness):

    J(S, H) = sum_k ( ||Y_k - X_k||^2
                      + lambda_s_k * ||S_k||_p^p
                      + lambda_h_k * ||diff(H_k)||^2 ).

``aux_gs`` and ``aux_gh`` evaluate the majorizing surrogates whose exact
minimization yields the solver's update rules; they are exposed mainly so
tests can check the majorization conditions directly.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import DimensionMismatchError


@dataclass(frozen=True)
class ReverbKernel:
    """Per-band squared-magnitude reverberation kernel (K x N_h)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValueError("kernel must be K x N_h with N_h >= 2")
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise ValueError("kernel entries must be finite and nonnegative")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class SolverConfig:
    """Optimization hyperparameters; defaults are the production settings."""

    lambda_h: float = 1.0
    lambda_s: float = 1e-4
    p: float = 1.0
    n_h: int = 15
    max_iter: int = 20
    delta_factor: float = 1e-3
    rescale: bool = True
    eps_floor: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.p < 2.0):
            raise ValueError("p must be in (0, 2)")
        if self.lambda_h < 0 or self.lambda_s < 0:
            raise ValueError("lambda_h and lambda_s must be nonnegative")
        if self.n_h < 2:
            raise ValueError("n_h must be at least 2")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.delta_factor < 0:
            raise ValueError("delta_factor must be nonnegative")
        if self.eps_floor <= 0:
            raise ValueError("eps_floor must be positive")


def as_matrix(x):
    """Accept a spectrogram/kernel wrapper or a bare array; return float64 2-D."""
    data = getattr(x, "data", x)
    mat = np.ascontiguousarray(data, dtype=np.float64)
    if mat.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {mat.shape}")
    return mat


def floor_value(y, config):
    """Absolute numerical floor used for previous-iterate denominators."""
    ym = as_matrix(y)
    top = float(ym.max()) if ym.size else 0.0
    return max(config.eps_floor * top, np.finfo(np.float64).tiny)


def forward_model(s, h):
    """X[k, n] = sum_tau S[k, n-tau] H[k, tau] (causal zero boundary).

    Returns a PowerSpectrogram when ``s`` is one, else a bare array.
    """
    sm = as_matrix(s)
    hm = as_matrix(h)
    if sm.shape[0] != hm.shape[0]:
        raise DimensionMismatchError(
            f"S has {sm.shape[0]} bands, H has {hm.shape[0]}"
        )
    x = kernels.conv_rows(sm, hm)
    if hasattr(s, "like"):
        return s.like(x)
    return x


def per_band_lambdas(y, config):
    """Per-band penalty weights: lambda_h scaled by row energy, lambda_s flat."""
    ym = as_matrix(y)
    lam_h = config.lambda_h * np.sum(ym * ym, axis=1)
    lam_s = np.full(ym.shape[0], config.lambda_s)
    return lam_h, lam_s


def first_differences(h):
    """Rows of V = diff(H) along the tap axis (the L operator)."""
    hm = as_matrix(h)
    return hm[:, 1:] - hm[:, :-1]


def _check_shapes(sm, hm, ym):
    if sm.shape != ym.shape or sm.shape[0] != hm.shape[0]:
        raise DimensionMismatchError(
            f"inconsistent shapes: S {sm.shape}, H {hm.shape}, Y {ym.shape}"
        )


def cost_terms(s, h, y, config):
    """(fidelity, sparsity, smoothness, total) of the objective."""
    sm, hm, ym = as_matrix(s), as_matrix(h), as_matrix(y)
    _check_shapes(sm, hm, ym)
    lam_h, lam_s = per_band_lambdas(ym, config)
    x = kernels.conv_rows(sm, hm)
    fidelity = float(np.sum((ym - x) ** 2))
    sparsity = float(np.dot(lam_s, np.sum(np.maximum(sm, 0.0) ** config.p, axis=1)))
    v = hm[:, 1:] - hm[:, :-1]
    smoothness = float(np.dot(lam_h, np.sum(v * v, axis=1)))
    return fidelity, sparsity, smoothness, fidelity + sparsity + smoothness


def cost(s, h, y, config):
    """Penalized objective J(S, H)."""
    return cost_terms(s, h, y, config)[3]


def aux_gs(s, s_prev, h_fixed, y, config):
    """Majorizer of J(., H') around S'; equals J at s == s_prev.

    ``s_prev`` is floored at the numerical floor before use, as in the
    solver's update step.
    """
    sm, spm = as_matrix(s), as_matrix(s_prev)
    hm, ym = as_matrix(h_fixed), as_matrix(y)
    _check_shapes(sm, hm, ym)
    if spm.shape != sm.shape:
        raise DimensionMismatchError("s and s_prev shapes differ")
    lam_h, lam_s = per_band_lambdas(ym, config)
    floor = floor_value(ym, config)

    sp = np.maximum(spm, floor)
    xp = np.maximum(kernels.conv_rows(sp, hm), floor)
    n = ym.shape[1]
    ratio = sm / sp

    quad = 0.0
    for d in range(min(hm.shape[1], n)):
        w = sp[:, : n - d] * hm[:, d : d + 1] / xp[:, d:]
        resid = ym[:, d:] - ratio[:, : n - d] * xp[:, d:]
        quad += float(np.sum(w * resid * resid))

    v = hm[:, 1:] - hm[:, :-1]
    smooth = float(np.dot(lam_h, np.sum(v * v, axis=1)))

    p = config.p
    sp_p = sp**p
    pen_rows = np.sum(
        0.5 * p * sp ** (p - 2.0) * sm * sm + sp_p - 0.5 * p * sp_p, axis=1
    )
    pen = float(np.dot(lam_s, pen_rows))
    return quad + smooth + pen


def aux_gh(h, h_prev, s_fixed, y, config):
    """Majorizer of J(S', .) around H'; equals J at h == h_prev."""
    hm, hpm = as_matrix(h), as_matrix(h_prev)
    sm, ym = as_matrix(s_fixed), as_matrix(y)
    _check_shapes(sm, hm, ym)
    if hpm.shape != hm.shape:
        raise DimensionMismatchError("h and h_prev shapes differ")
    lam_h, lam_s = per_band_lambdas(ym, config)
    floor = floor_value(ym, config)

    hp = np.maximum(hpm, floor)
    xp = np.maximum(kernels.conv_rows(sm, hp), floor)
    n = ym.shape[1]
    ratio = hm / hp

    quad = 0.0
    for tau in range(min(hm.shape[1], n)):
        w = sm[:, : n - tau] * hp[:, tau : tau + 1] / xp[:, tau:]
        resid = ym[:, tau:] - ratio[:, tau : tau + 1] * xp[:, tau:]
        quad += float(np.sum(w * resid * resid))

    sparse = float(np.dot(lam_s, np.sum(np.maximum(sm, 0.0) ** config.p, axis=1)))
    v = hm[:, 1:] - hm[:, :-1]
    smooth = float(np.dot(lam_h, np.sum(v * v, axis=1)))
    return quad + sparse + smooth
