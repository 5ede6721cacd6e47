"""Synthetic speech-like test material: harmonic syllables with gliding
formants, occasional noise bursts, pauses, and a low recording-style
noise floor."""

import numpy as np

from derev import AudioSignal


def make_speech_like(seed, duration_s=3.0, fs=16000, peak=0.5):
    rng = np.random.default_rng(seed)
    total = int(duration_s * fs)
    out = np.zeros(total)
    cursor = int(rng.uniform(0.0, 0.08) * fs)
    while cursor < total - int(0.1 * fs):
        seg_len = int(rng.uniform(0.12, 0.3) * fs)
        seg_len = min(seg_len, total - cursor)
        t = np.arange(seg_len) / fs
        frac = t / t[-1] if seg_len > 1 else t
        voiced = rng.random() > 0.15
        if voiced:
            f0 = rng.uniform(95.0, 220.0)
            glide = rng.uniform(-30.0, 30.0)
            phase = 2 * np.pi * (f0 * t + 0.5 * glide * t * t / max(t[-1], 1e-6))
            seg = np.zeros(seg_len)
            f_start = rng.uniform([300, 900, 1900], [800, 1800, 3000])
            f_end = f_start * rng.uniform(0.7, 1.4, size=3)
            bws = rng.uniform([80, 120, 180], [150, 250, 350])
            kmax = int(4000 / f0)
            for k in range(1, kmax + 1):
                fk = k * f0 + k * glide * frac
                gain = sum(
                    np.exp(-0.5 * ((fk - (fa + (fb - fa) * frac)) / bw) ** 2)
                    for fa, fb, bw in zip(f_start, f_end, bws)
                )
                gain += 0.05 / k
                seg += gain * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
            seg += 0.01 * rng.standard_normal(seg_len)
            level = rng.uniform(0.5, 1.2)
        else:
            noise = rng.standard_normal(seg_len)
            seg = np.diff(noise, prepend=0.0) * 0.4
            level = rng.uniform(0.2, 0.5)
        ramp = max(int(0.02 * fs), 1)
        env = np.ones(seg_len)
        env[:ramp] = 0.5 * (1 - np.cos(np.pi * np.arange(ramp) / ramp))
        env[-ramp:] = env[:ramp][::-1]
        env *= 0.6 + 0.4 * np.sin(2 * np.pi * rng.uniform(2, 5) * t + rng.uniform(0, 6))
        seg = seg * env
        rms = np.sqrt(np.mean(seg**2))
        if rms > 0:
            seg = seg / rms * level
        out[cursor : cursor + seg_len] += seg
        cursor += seg_len + int(rng.uniform(0.05, 0.18) * fs)
    out += 2e-3 * rng.standard_normal(total)
    return AudioSignal(out * (peak / np.max(np.abs(out))), fs)


def rms_match(reference, test):
    ref = np.sqrt(np.mean(reference.samples**2))
    cur = np.sqrt(np.mean(test.samples**2))
    if cur == 0:
        return test
    return AudioSignal(test.samples * (ref / cur), test.sample_rate)
