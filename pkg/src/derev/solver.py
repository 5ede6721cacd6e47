"""Alternating minimization of the penalized convolutive-NMF objective.

One iteration updates S by an exact multiplicative rule (the closed-form
minimizer of the S-surrogate), optionally rescales each row of S to the
observation's peak, then updates each row of H by solving the tridiagonal
system

    (A_k + lambda_h_k * B_k * L^T L) H_k = B_k * zeta_k,

where A_k and zeta_k are lagged correlations of the current S row with
the model and the observation, and B_k holds the previous kernel row.
The loop stops when ||S - S_prev||_F falls below delta_factor * ||Y||_F.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .cnmf import as_matrix, cost_terms, floor_value, per_band_lambdas
from .errors import DimensionMismatchError, NumericalFailureError


@dataclass
class SolverState:
    """Mutable loop state; matrices are bare float64 arrays."""

    S: np.ndarray
    H: np.ndarray
    X: np.ndarray
    iteration: int = 0
    cost_history: list = field(default_factory=list)
    term_history: list = field(default_factory=list)
    converged: bool = False


def initialize(y, config):
    """S <- copy of Y; H rows get unit-peak exponential decay exp(-tau)."""
    ym = as_matrix(y)
    s = ym.copy()
    h = np.tile(np.exp(-np.arange(config.n_h, dtype=np.float64)), (ym.shape[0], 1))
    x = kernels.conv_rows(s, h)
    state = SolverState(S=s, H=h, X=x)
    terms = cost_terms(s, h, ym, config)
    state.term_history.append(terms)
    state.cost_history.append(terms[3])
    return state


def _check_state(state, ym):
    if state.S.shape != ym.shape or state.H.shape[0] != ym.shape[0]:
        raise DimensionMismatchError(
            f"state shapes S {state.S.shape} / H {state.H.shape} "
            f"do not match Y {ym.shape}"
        )


def update_s(state, y, config, lambdas=None, floor=None):
    """Multiplicative S step; recomputes the cached model afterward."""
    ym = as_matrix(y)
    _check_state(state, ym)
    lam_h, lam_s = lambdas if lambdas is not None else per_band_lambdas(ym, config)
    if floor is None:
        floor = floor_value(ym, config)

    h = state.H
    sp = np.maximum(state.S, floor)
    xp = np.maximum(kernels.conv_rows(sp, h), floor)

    num = kernels.corr_short(h, ym)
    den = kernels.corr_short(h, xp)
    p = config.p
    if p == 1.0:
        pen = np.broadcast_to(np.ones(1), sp.shape)
    else:
        pen = sp ** (p - 1.0)
    den = den + (0.5 * p) * lam_s[:, None] * pen
    den[den == 0.0] = np.finfo(np.float64).tiny

    s_new = sp * (num / den)
    if not np.all(np.isfinite(s_new)):
        raise NumericalFailureError("S update produced non-finite values")
    state.S = s_new
    state.X = kernels.conv_rows(s_new, h)
    return state


def rescale_s(state, y):
    """Scale each S row so its peak matches the corresponding Y row's peak."""
    ym = as_matrix(y)
    _check_state(state, ym)
    s_max = np.max(np.abs(state.S), axis=1)
    y_max = np.max(np.abs(ym), axis=1)
    scale = np.ones_like(s_max)
    positive = s_max > 0.0
    scale[positive] = y_max[positive] / s_max[positive]
    scale[y_max == 0.0] = 0.0
    state.S = state.S * scale[:, None]
    state.X = kernels.conv_rows(state.S, state.H)
    return state


def _dense_tridiag(sub_k, diag_k, sup_k):
    m = diag_k.shape[0]
    a = np.diag(diag_k)
    if m > 1:
        a[np.arange(1, m), np.arange(m - 1)] = sub_k[1:]
        a[np.arange(m - 1), np.arange(1, m)] = sup_k[:-1]
    return a


def update_h(state, y, config, lambdas=None, floor=None):
    """Per-band tridiagonal H solve, least-squares fallback, clamp at zero."""
    ym = as_matrix(y)
    _check_state(state, ym)
    lam_h, _ = lambdas if lambdas is not None else per_band_lambdas(ym, config)
    if floor is None:
        floor = floor_value(ym, config)

    nh = state.H.shape[1]
    a_diag = kernels.corr_long(state.S, state.X, nh)
    zeta = kernels.corr_long(state.S, ym, nh)
    b_diag = np.maximum(state.H, floor)

    # Row tau of B L^T L is the second-difference stencil scaled by B[tau].
    stencil = np.full(nh, 2.0)
    stencil[0] = stencil[-1] = 1.0
    lam_b = lam_h[:, None] * b_diag
    diag = a_diag + lam_b * stencil[None, :]
    sub = -lam_b.copy()
    sub[:, 0] = 0.0
    sup = -lam_b.copy()
    sup[:, -1] = 0.0
    rhs = b_diag * zeta

    h_new, ok = kernels.thomas_rows(sub, diag, sup, rhs)
    for k in np.flatnonzero(ok == 0):
        # Singular or non-dominant band: minimum-norm least squares.
        a = _dense_tridiag(sub[k], diag[k], sup[k])
        h_new[k] = np.linalg.lstsq(a, rhs[k], rcond=None)[0]

    if not np.all(np.isfinite(h_new)):
        raise NumericalFailureError("H update produced non-finite values")
    state.H = np.maximum(h_new, 0.0)
    state.X = kernels.conv_rows(state.S, state.H)
    return state


def run(y, config):
    """Full alternating loop; returns the final SolverState."""
    ym = as_matrix(y)
    if np.any(ym < 0):
        raise ValueError("Y must be nonnegative")
    if ym.shape[1] <= config.n_h:
        raise DimensionMismatchError(
            f"need more frames than kernel taps: N={ym.shape[1]}, N_h={config.n_h}"
        )

    state = initialize(ym, config)
    lambdas = per_band_lambdas(ym, config)
    floor = floor_value(ym, config)
    delta = config.delta_factor * np.linalg.norm(ym)

    for it in range(1, config.max_iter + 1):
        s_prev = state.S
        try:
            update_s(state, ym, config, lambdas=lambdas, floor=floor)
            if config.rescale:
                rescale_s(state, ym)
            update_h(state, ym, config, lambdas=lambdas, floor=floor)
        except NumericalFailureError as exc:
            raise NumericalFailureError(f"iteration {it}: {exc}") from exc
        state.iteration = it
        terms = cost_terms(state.S, state.H, ym, config)
        state.term_history.append(terms)
        state.cost_history.append(terms[3])
        if np.linalg.norm(state.S - s_prev) <= delta:
            state.converged = True
            break
    return state


def dump_cost_history(state, path):
    """Write the per-iteration objective terms as CSV."""
    with open(path, "w") as fh:
        fh.write("iteration,fidelity,sparsity_penalty,smoothness_penalty,total\n")
        for i, (fid, sp, sm, total) in enumerate(state.term_history):
            fh.write(f"{i},{fid:.17g},{sp:.17g},{sm:.17g},{total:.17g}\n")
