"""Intrusive speech-quality metrics.

Both metrics frame the signals with a 25 ms Hann window at a 10 ms hop and
ignore frames more than 40 dB below the loudest frame. ``fwssnr`` weights
per-band clipped SNRs by spectral magnitude raised to 0.2, over 25
Gaussian critical-band filters Bark-spaced between 80 Hz and 8 kHz.
``cepstral_distance`` compares order-10 LP cepstra. Parameters are fixed
constants so results are reproducible across implementations.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SampleRateMismatchError, SignalTooShortError

FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010
NUM_BANDS = 25
BAND_LO_HZ = 80.0
BAND_HI_HZ = 8000.0
WEIGHT_EXPONENT = 0.2
SNR_RANGE_DB = (-10.0, 35.0)
CD_RANGE = (0.0, 10.0)
ENERGY_GATE_DB = 40.0
LPC_ORDER = 10


@dataclass(frozen=True)
class MetricsReport:
    fwssnr_db: float
    cepstral_distance: float
    frames_used: int

    def lines(self):
        return [
            f"fwssnr_db={self.fwssnr_db:.6f}",
            f"cepstral_distance={self.cepstral_distance:.6f}",
            f"frames_used={self.frames_used}",
        ]

    def csv_row(self, label):
        return (
            f"{label},{self.fwssnr_db:.6f},"
            f"{self.cepstral_distance:.6f},{self.frames_used}"
        )


def _check_pair(clean, test):
    if clean.sample_rate != test.sample_rate:
        raise SampleRateMismatchError(
            f"clean at {clean.sample_rate} Hz, test at {test.sample_rate} Hz"
        )
    x = clean.samples
    y = test.samples
    if len(y) < len(x):
        y = np.concatenate([y, np.zeros(len(x) - len(y))])
    else:
        y = y[: len(x)]
    return x, y, clean.sample_rate


def _frame(x, flen, hop):
    count = 1 + (len(x) - flen) // hop if len(x) >= flen else 0
    if count < 3:
        raise SignalTooShortError(f"need at least 3 frames, got {count}")
    idx = np.arange(flen)[None, :] + hop * np.arange(count)[:, None]
    return x[idx]


def _hann(n):
    m = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * m / n))


def _bark(f):
    return 26.81 * f / (1960.0 + f) - 0.53


def _band_filters(fs, nfft):
    """(NUM_BANDS x bins) Gaussian filters, unit row sums."""
    freqs = np.fft.rfftfreq(nfft, d=1.0 / fs)
    hi = min(BAND_HI_HZ, 0.5 * fs)
    centers = np.linspace(_bark(BAND_LO_HZ), _bark(hi), NUM_BANDS)
    sigma = 0.5 * (centers[1] - centers[0])
    z = _bark(freqs)
    g = np.exp(-0.5 * ((z[None, :] - centers[:, None]) / sigma) ** 2)
    return g / np.sum(g, axis=1, keepdims=True)


def _power_frames(x, fs):
    flen = round(FRAME_SECONDS * fs)
    hop = round(HOP_SECONDS * fs)
    frames = _frame(x, flen, hop) * _hann(flen)[None, :]
    nfft = 1 << int(np.ceil(np.log2(flen)))
    spec = np.fft.rfft(frames, n=nfft, axis=1)
    return (spec.real**2 + spec.imag**2), nfft


def _energy_gate(power):
    """Frames within ENERGY_GATE_DB of the loudest frame."""
    frame_energy = np.sum(power, axis=1)
    peak = frame_energy.max()
    if peak <= 0:
        return np.zeros(len(frame_energy), dtype=bool)
    return frame_energy > peak * 10.0 ** (-ENERGY_GATE_DB / 10.0)


def _fwssnr_impl(clean, test):
    x, y, fs = _check_pair(clean, test)
    p_clean, nfft = _power_frames(x, fs)
    p_test, _ = _power_frames(y, fs)
    bands = _band_filters(fs, nfft)
    e_clean = p_clean @ bands.T
    e_test = p_test @ bands.T

    with np.errstate(divide="ignore", invalid="ignore"):
        den = (np.sqrt(e_clean) - np.sqrt(e_test)) ** 2
        snr = 10.0 * np.log10(e_clean / den)
    snr = np.where(np.isnan(snr), SNR_RANGE_DB[1], snr)
    snr = np.clip(snr, *SNR_RANGE_DB)

    weights = e_clean ** (0.5 * WEIGHT_EXPONENT)
    keep = _energy_gate(p_clean) & (np.sum(weights, axis=1) > 0)
    if not np.any(keep):
        raise SignalTooShortError("no frames above the energy gate")
    with np.errstate(invalid="ignore"):
        per_frame = np.sum(weights * snr, axis=1) / np.sum(weights, axis=1)
    return float(np.mean(per_frame[keep])), int(np.count_nonzero(keep))


def fwssnr(clean, test):
    """Frequency-weighted segmental SNR in dB (clean is the reference)."""
    return _fwssnr_impl(clean, test)[0]


def _autocorr(frames, order):
    n = frames.shape[1]
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(frames, n=nfft, axis=1)
    r = np.fft.irfft(spec.real**2 + spec.imag**2, n=nfft, axis=1)
    return r[:, : order + 1]


def _levinson(r):
    """Prediction-error filter [1, a_1..a_p] or None if ill-conditioned."""
    order = len(r) - 1
    if not np.all(np.isfinite(r)) or r[0] <= 0:
        return None
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1 : 0 : -1])
        k = -acc / err
        a[1 : i + 1] = a[1 : i + 1] + k * a[i - 1 :: -1][: i]
        err *= 1.0 - k * k
        if err <= 0 or not np.isfinite(err):
            return None
    return a


def _lp_cepstrum(a, order):
    """Cepstra c_1..c_order of the all-pole model 1/A(z)."""
    c = np.zeros(order + 1)
    for n in range(1, order + 1):
        acc = -a[n]
        for m in range(1, n):
            acc -= (m / n) * c[m] * a[n - m]
        c[n] = acc
    return c[1:]


def _cepstral_impl(clean, test):
    x, y, fs = _check_pair(clean, test)
    flen = round(FRAME_SECONDS * fs)
    hop = round(HOP_SECONDS * fs)
    w = _hann(flen)
    fx = _frame(x, flen, hop) * w[None, :]
    fy = _frame(y, flen, hop) * w[None, :]

    # Symmetric gate keeps the distance symmetric in its arguments.
    px = np.sum(fx * fx, axis=1)
    py = np.sum(fy * fy, axis=1)
    gate = 10.0 ** (-ENERGY_GATE_DB / 10.0)
    keep = np.ones(len(fx), dtype=bool)
    if px.max() > 0:
        keep &= px > px.max() * gate
    if py.max() > 0:
        keep &= py > py.max() * gate

    rx = _autocorr(fx, LPC_ORDER)
    ry = _autocorr(fy, LPC_ORDER)
    dists = []
    skipped = 0
    for i in np.flatnonzero(keep):
        ax = _levinson(rx[i])
        ay = _levinson(ry[i])
        if ax is None or ay is None:
            skipped += 1
            continue
        cx = _lp_cepstrum(ax, LPC_ORDER)
        cy = _lp_cepstrum(ay, LPC_ORDER)
        d = (10.0 / np.log(10.0)) * np.sqrt(2.0 * np.sum((cx - cy) ** 2))
        dists.append(min(max(d, CD_RANGE[0]), CD_RANGE[1]))
    if not dists:
        raise SignalTooShortError("no usable frames for cepstral distance")
    return float(np.mean(dists)), len(dists), skipped


def cepstral_distance(clean, test):
    """Mean LP-cepstral distance over gated frames; symmetric in (clean, test)."""
    return _cepstral_impl(clean, test)[0]


def evaluate_pair(clean, test):
    """Both metrics in one report; frames_used counts fwssnr's gated frames."""
    snr_val, used = _fwssnr_impl(clean, test)
    cd_val, _, _ = _cepstral_impl(clean, test)
    return MetricsReport(fwssnr_db=snr_val, cepstral_distance=cd_val, frames_used=used)
