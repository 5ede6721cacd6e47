"""Short-time Fourier analysis and weighted overlap-add synthesis.

The analysis window is a periodic Hann scaled to unit l1 norm. Frame n
covers samples [n*hop, n*hop + window_len); the last frame is zero-padded
so the union of the window supports covers the whole signal. Synthesis
applies the same window again and divides by the accumulated squared
window envelope (floored at 1e-8), which reconstructs the interior of an
unmodified spectrogram exactly.
"""

from dataclasses import dataclass

import numpy as np

from .audio import AudioSignal
from .errors import DimensionMismatchError, SignalTooShortError

ENVELOPE_FLOOR = 1e-8


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 512
    hop: int = 256
    window_kind: str = "hann"

    def __post_init__(self):
        if self.window_len <= 0 or self.window_len % 2 != 0:
            raise ValueError("window_len must be a positive even integer")
        if not (0 < self.hop <= self.window_len):
            raise ValueError("hop must be in (0, window_len]")
        if self.window_kind != "hann":
            raise ValueError(f"unsupported window {self.window_kind!r}")

    @property
    def num_bins(self):
        return self.window_len // 2 + 1

    def window(self):
        """Periodic Hann window with unit l1 norm."""
        m = np.arange(self.window_len)
        w = 0.5 * (1.0 - np.cos(2.0 * np.pi * m / self.window_len))
        return w / np.sum(np.abs(w))

    def num_frames(self, n_samples):
        if n_samples < self.window_len:
            raise SignalTooShortError(
                f"need at least {self.window_len} samples, got {n_samples}"
            )
        return (n_samples - self.window_len + self.hop - 1) // self.hop + 1


@dataclass(frozen=True)
class ComplexSpectrogram:
    data: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != self.config.num_bins:
            raise DimensionMismatchError(
                f"expected {self.config.num_bins} bins, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("spectrogram entries must be finite")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class PowerSpectrogram:
    data: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != self.config.num_bins:
            raise DimensionMismatchError(
                f"expected {self.config.num_bins} bins, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise ValueError("power entries must be finite and nonnegative")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape

    def like(self, data):
        """A PowerSpectrogram with the same config/rate and new data."""
        return PowerSpectrogram(data, self.config, self.sample_rate)


def analyze(signal, config):
    """STFT of a signal; returns a (num_bins x num_frames) ComplexSpectrogram."""
    x = signal.samples
    n_frames = config.num_frames(len(x))
    w = config.window()
    span = (n_frames - 1) * config.hop + config.window_len
    if span > len(x):
        x = np.concatenate([x, np.zeros(span - len(x))])
    idx = np.arange(config.window_len)[None, :] + (
        config.hop * np.arange(n_frames)[:, None]
    )
    frames = x[idx] * w[None, :]
    data = np.fft.rfft(frames, n=config.window_len, axis=1).T
    return ComplexSpectrogram(data, config, signal.sample_rate)


def synthesize(spec):
    """Weighted overlap-add inverse of ``analyze``.

    Output length is (num_frames-1)*hop + window_len; callers trim to taste.
    """
    cfg = spec.config
    w = cfg.window()
    n_frames = spec.data.shape[1]
    frames = np.fft.irfft(spec.data.T, n=cfg.window_len, axis=1)
    out = np.zeros((n_frames - 1) * cfg.hop + cfg.window_len)
    env = np.zeros_like(out)
    w2 = w * w
    for n in range(n_frames):
        lo = n * cfg.hop
        out[lo : lo + cfg.window_len] += w * frames[n]
        env[lo : lo + cfg.window_len] += w2
    out /= np.maximum(env, ENVELOPE_FLOOR)
    return AudioSignal(out, spec.sample_rate)


def power(spec):
    """Element-wise squared magnitude of a complex spectrogram."""
    d = spec.data
    return PowerSpectrogram(d.real**2 + d.imag**2, spec.config, spec.sample_rate)


def dump_spectrogram(spec, path):
    """Write a power spectrogram as tab-separated text, one row per bin."""
    mat = spec.data
    k, n = mat.shape
    with open(path, "w") as fh:
        fh.write(
            f"# {k} {n} {spec.sample_rate} {spec.config.window_len} {spec.config.hop}\n"
        )
        for row in mat:
            fh.write("\t".join(format(v, ".17g") for v in row))
            fh.write("\n")


def load_spectrogram(path):
    """Inverse of ``dump_spectrogram``."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != "#":
            raise ValueError(f"{path}: bad spectrogram header")
        k, n, rate, window_len, hop = (int(v) for v in header[1:])
        mat = np.loadtxt(fh, delimiter="\t", ndmin=2)
    if mat.shape != (k, n):
        raise ValueError(f"{path}: expected {k}x{n}, got {mat.shape}")
    return PowerSpectrogram(mat, StftConfig(window_len=window_len, hop=hop), rate)
