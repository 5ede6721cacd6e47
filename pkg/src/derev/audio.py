"""Time-domain audio: WAV I/O and RIR convolution."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal import convolve

from .errors import (
    MalformedFileError,
    SampleRateMismatchError,
    UnsupportedFormatError,
)

log = logging.getLogger(__name__)

PIPELINE_RATE = 16000


@dataclass(frozen=True)
class AudioSignal:
    """Mono audio: float64 samples (nominal range [-1, 1]) plus sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate


def read_wav(path):
    """Read a mono PCM-16 or float-32 WAV file.

    PCM-16 samples are scaled by 1/32768 to the nominal [-1, 1] range.
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except (ValueError, EOFError) as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc
    if data.ndim != 1:
        raise UnsupportedFormatError(
            f"{path}: expected mono, got {data.shape[1]} channels"
        )
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    elif data.dtype == np.float64:
        samples = data.copy()
    else:
        raise UnsupportedFormatError(f"{path}: unsupported sample dtype {data.dtype}")
    try:
        return AudioSignal(samples, rate)
    except ValueError as exc:
        raise MalformedFileError(f"{path}: {exc}") from exc


def write_wav(signal, path, fmt="float32"):
    """Write ``signal`` as a WAV file; ``fmt`` is 'pcm16' or 'float32'.

    pcm16 clips samples outside [-1, 1]; returns the number of clipped
    samples (0 for float32).
    """
    clipped = 0
    if fmt == "pcm16":
        x = signal.samples
        clipped = int(np.count_nonzero((x < -1.0) | (x > 1.0)))
        if clipped:
            log.warning("write_wav(%s): clipped %d samples to [-1, 1]", path, clipped)
        q = np.rint(np.clip(x, -1.0, 1.0) * 32768.0)
        q = np.clip(q, -32768, 32767).astype(np.int16)
        wavfile.write(path, signal.sample_rate, q)
    elif fmt == "float32":
        wavfile.write(path, signal.sample_rate, signal.samples.astype(np.float32))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return clipped


def apply_rir(dry, rir):
    """Full linear convolution of a dry signal with an impulse response."""
    if dry.sample_rate != rir.sample_rate:
        raise SampleRateMismatchError(
            f"dry at {dry.sample_rate} Hz, rir at {rir.sample_rate} Hz"
        )
    out = convolve(dry.samples, rir.samples, mode="full", method="auto")
    return AudioSignal(out, dry.sample_rate)
