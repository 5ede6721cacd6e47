import numpy as np
import pytest

from _speechlike import make_speech_like
from derev import AudioSignal, cepstral_distance, evaluate_pair, fwssnr
from derev.errors import SampleRateMismatchError, SignalTooShortError
from derev.metrics import _levinson, _lp_cepstrum


def _noise(seed, n=16000, scale=0.3):
    return AudioSignal(np.random.default_rng(seed).standard_normal(n) * scale, 16000)


def test_identical_signals_hit_ceiling():
    x = make_speech_like(0, duration_s=1.0)
    assert fwssnr(x, x) == pytest.approx(35.0)
    assert cepstral_distance(x, x) == 0.0


def test_noise_at_zero_db_snr():
    x = make_speech_like(1, duration_s=2.0)
    rng = np.random.default_rng(2)
    noise = rng.standard_normal(len(x))
    noise *= np.sqrt(np.mean(x.samples**2) / np.mean(noise**2))
    noisy = AudioSignal(x.samples + noise, 16000)
    value = fwssnr(x, noisy)
    assert -10.0 <= value <= 10.0


def test_any_mismatch_below_ceiling():
    x = make_speech_like(3, duration_s=1.5)
    y = AudioSignal(x.samples + 0.01 * np.sin(np.arange(len(x))), 16000)
    assert fwssnr(x, y) < 35.0
    assert cepstral_distance(x, y) > 0.0


def test_ranges_clipped():
    a = _noise(4)
    b = _noise(5)
    assert -10.0 <= fwssnr(a, b) <= 35.0
    assert 0.0 <= cepstral_distance(a, b) <= 10.0


def test_common_gain_invariance():
    x = make_speech_like(6, duration_s=1.5)
    y = AudioSignal(
        x.samples + 0.05 * _noise(7, n=len(x)).samples, 16000
    )
    g = 3.7
    xg = AudioSignal(g * x.samples, 16000)
    yg = AudioSignal(g * y.samples, 16000)
    assert fwssnr(xg, yg) == pytest.approx(fwssnr(x, y), abs=1e-6)
    assert cepstral_distance(xg, yg) == pytest.approx(cepstral_distance(x, y), abs=1e-12)


def test_cepstral_distance_symmetric():
    a = make_speech_like(8, duration_s=1.2)
    b = AudioSignal(
        a.samples + 0.1 * _noise(9, n=len(a)).samples, 16000
    )
    assert cepstral_distance(a, b) == pytest.approx(cepstral_distance(b, a), abs=1e-12)


def test_length_padding():
    x = make_speech_like(10, duration_s=1.2)
    shorter = AudioSignal(x.samples[: len(x) - 800], 16000)
    assert fwssnr(x, shorter) < 35.0


def test_rate_mismatch():
    with pytest.raises(SampleRateMismatchError):
        fwssnr(_noise(11), AudioSignal(np.zeros(8000), 8000))
    with pytest.raises(SampleRateMismatchError):
        cepstral_distance(_noise(11), AudioSignal(np.zeros(8000), 8000))


def test_too_short():
    with pytest.raises(SignalTooShortError):
        fwssnr(_noise(12, n=500), _noise(13, n=500))


def test_report_formatting():
    x = make_speech_like(14, duration_s=1.0)
    report = evaluate_pair(x, x)
    assert report.fwssnr_db == pytest.approx(35.0)
    assert report.cepstral_distance == 0.0
    assert report.frames_used > 0
    lines = report.lines()
    assert lines[0].startswith("fwssnr_db=")
    row = report.csv_row("foo.wav")
    assert row.split(",")[0] == "foo.wav"
    assert len(row.split(",")) == 4


def test_levinson_recovers_ar_process():
    # AR(2) driven by white noise; LP of order >= 2 should find the poles
    rng = np.random.default_rng(15)
    a_true = [1.0, -1.2, 0.5]
    x = np.zeros(16000)
    e = rng.standard_normal(16000)
    for n in range(2, len(x)):
        x[n] = 1.2 * x[n - 1] - 0.5 * x[n - 2] + e[n]
    frame = x[4000:8000]
    nfft = 16384
    spec = np.fft.rfft(frame, n=nfft)
    r = np.fft.irfft(spec.real**2 + spec.imag**2, n=nfft)[:11]
    a = _levinson(r)
    assert a is not None
    assert a[1] == pytest.approx(a_true[1], abs=0.05)
    assert a[2] == pytest.approx(a_true[2], abs=0.05)
    assert np.max(np.abs(a[3:])) < 0.1


def test_levinson_rejects_silence():
    assert _levinson(np.zeros(11)) is None


def test_cepstrum_matches_log_spectrum_oracle():
    # c_n from the recursion must match the Fourier coefficients of
    # log(1/|A|) computed numerically
    a = np.array([1.0, -0.9, 0.4, -0.1, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    order = 10
    c = _lp_cepstrum(a, order)
    nfft = 1 << 14
    spectrum = np.fft.fft(a, n=nfft)
    log_inv = -np.log(np.abs(spectrum))
    oracle = np.fft.ifft(log_inv).real[1 : order + 1] * 2.0
    # recursion cepstra are one-sided (c_n doubles the symmetric part)
    assert np.allclose(c, oracle, atol=1e-6)
