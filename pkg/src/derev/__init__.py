"""Blind single-channel dereverberation by penalized convolutive NMF.

The observed power spectrogram is modeled as a per-band causal convolution
of a clean power spectrogram with a short nonnegative kernel; an lp
penalty keeps the clean spectrogram sparse and a first-difference penalty
keeps the kernel smooth. Alternating surrogate minimization yields a
multiplicative update for the spectrogram and small tridiagonal solves
for the kernel rows.
"""

from ._kernels import BACKEND
from .audio import AudioSignal, apply_rir, read_wav, write_wav
from .cnmf import (
    ReverbKernel,
    SolverConfig,
    aux_gh,
    aux_gs,
    cost,
    cost_terms,
    forward_model,
    per_band_lambdas,
)
from .metrics import MetricsReport, cepstral_distance, evaluate_pair, fwssnr
from .reconstruct import reconstruct
from .rir import RoomSpec, exp_decay_rir, image_method_rir, schroeder_t60
from .solver import SolverState, initialize, rescale_s, run, update_h, update_s
from .stft import (
    ComplexSpectrogram,
    PowerSpectrogram,
    StftConfig,
    analyze,
    power,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AudioSignal",
    "ComplexSpectrogram",
    "MetricsReport",
    "PowerSpectrogram",
    "ReverbKernel",
    "RoomSpec",
    "SolverConfig",
    "SolverState",
    "StftConfig",
    "analyze",
    "apply_rir",
    "aux_gh",
    "aux_gs",
    "cepstral_distance",
    "cost",
    "cost_terms",
    "evaluate_pair",
    "exp_decay_rir",
    "forward_model",
    "fwssnr",
    "image_method_rir",
    "initialize",
    "per_band_lambdas",
    "power",
    "read_wav",
    "reconstruct",
    "rescale_s",
    "run",
    "schroeder_t60",
    "synthesize",
    "update_h",
    "update_s",
    "write_wav",
]
