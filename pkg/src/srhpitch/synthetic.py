"""Synthetic test signals with a known pitch."""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .dsp import AudioSignal

# neutral vowel: resonances of a uniform 17.5 cm tube
DEFAULT_FORMANTS = ((500.0, 60.0), (1500.0, 90.0))


def formant_filter(formants=DEFAULT_FORMANTS, sample_rate: int = 16000) -> np.ndarray:
    """All-pole denominator with one resonant pole pair per (frequency, bandwidth)."""
    den = np.array([1.0])
    for freq, bw in formants:
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2 * np.pi * freq / sample_rate
        den = np.convolve(den, [1.0, -2 * r * np.cos(theta), r * r])
    return den


def pulse_train(f0: float, duration: float, sample_rate: int = 16000) -> np.ndarray:
    """Band-limited impulse train: equal-amplitude cosines at every harmonic below Nyquist."""
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    n_harm = int((sample_rate / 2 - 1) // f0)
    x = np.zeros_like(t)
    for k in range(1, n_harm + 1):
        x += np.cos(2 * np.pi * k * f0 * t)
    return x / n_harm


def glottal_source(f0: float, duration: float, sample_rate: int = 16000,
                   glottal_pole: float | None = 0.98) -> np.ndarray:
    """
    Pulse train shaped by a glottal low-pass ``1 / (1 - g z^-1)^2`` and lip
    radiation ``1 - z^-1``. ``glottal_pole=None`` returns the flat pulse train.
    """
    x = pulse_train(f0, duration, sample_rate)
    if glottal_pole is None:
        return x
    g = glottal_pole
    x = lfilter([1.0], [1.0, -2 * g, g * g], x)
    return lfilter([1.0, -1.0], [1.0], x)


def vowel(f0: float, duration: float = 3.0, sample_rate: int = 16000,
          formants=DEFAULT_FORMANTS, glottal_pole: float | None = 0.98) -> AudioSignal:
    """Glottal source at ``f0`` through a formant filter, peak-normalized to 0.5.

    With a flat source (``glottal_pole=None``) all harmonics enter the residual
    at equal strength, and the criterion scores odd multiples of ``f0`` the same
    as ``f0`` itself, so pitches below ``f0_max / 3`` become ambiguous.
    """
    src = glottal_source(f0, duration, sample_rate, glottal_pole)
    y = lfilter([1.0], formant_filter(formants, sample_rate), src)
    return AudioSignal(0.5 * y / np.max(np.abs(y)), sample_rate)


def ar_process(coefficients, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """White Gaussian noise through the all-pole filter ``1 / (1 - sum a_k z^-k)``."""
    den = np.concatenate([[1.0], -np.asarray(coefficients, dtype=np.float64)])
    return lfilter([1.0], den, rng.standard_normal(n_samples))


def stable_ar_coefficients(order: int, rng: np.random.Generator, max_radius: float = 0.9) -> np.ndarray:
    """Random predictor coefficients with all poles inside ``max_radius``."""
    poles = []
    for _ in range(order // 2):
        r = rng.uniform(0.5, max_radius)
        ang = rng.uniform(0.05 * np.pi, 0.95 * np.pi)
        poles += [r * np.exp(1j * ang), r * np.exp(-1j * ang)]
    if order % 2:
        poles.append(rng.uniform(-max_radius, max_radius))
    den = np.real(np.poly(poles))
    return -den[1:]
