"""Back to the time domain from an estimated clean power spectrogram."""

import numpy as np

from .cnmf import as_matrix
from .errors import DimensionMismatchError
from .stft import ComplexSpectrogram, synthesize

METHODS = ("magnitude_replace", "gain_mask")


def reconstruct(s, reverberant, method="magnitude_replace"):
    """Combine estimated magnitudes with the reverberant phase and resynthesize.

    magnitude_replace uses sqrt(S) with the observed phase; gain_mask scales
    the observed STFT by sqrt(S / observed power).
    """
    sm = as_matrix(s)
    z = reverberant.data
    if sm.shape != z.shape:
        raise DimensionMismatchError(
            f"S shape {sm.shape} does not match spectrogram {z.shape}"
        )
    mag = np.sqrt(np.maximum(sm, 0.0))
    if method == "magnitude_replace":
        out = mag * np.exp(1j * np.angle(z))
    elif method == "gain_mask":
        y = z.real**2 + z.imag**2
        eps = 1e-12 * float(y.max()) if y.size and y.max() > 0 else np.finfo(float).tiny
        out = z * np.sqrt(sm / (y + eps))
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    spec = ComplexSpectrogram(out, reverberant.config, reverberant.sample_rate)
    return synthesize(spec)
