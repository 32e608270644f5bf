"""
Pitch and voicing tracking by summation of residual harmonics.

For every frame the amplitude spectrum ``E`` of the LPC residual is
normalized to unit energy and scored at each candidate frequency ``f``::

    SRH(f) = E(f) + sum_{k=2}^{n_harm} [E(k f) - E((k - 1/2) f)]

The candidate with the highest score is the pitch estimate and the frame is
voiced when that score exceeds ``theta``. Tracking runs twice: the first pass
over the full range yields the speaker's mean pitch, the second pass is
restricted to one octave either side of it.

Example
-------

.. code-block:: python

    from srhpitch import AudioSignal, TrackerConfig, track

    result = track(AudioSignal(samples, 16000), TrackerConfig())
    f0 = result.f0_hz[result.voiced]
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .dsp import (
    AmplitudeSpectrum,
    AudioSignal,
    FrameSpec,
    amplitude_spectra,
    frame_signal,
    normalize_energy_rows,
    spectrum_at,
)
from .lpc import inverse_filter

logger = logging.getLogger(__name__)

# frames per FFT batch; bounds peak memory at ~chunk * n_fft complex values
_CHUNK = 128


class SpectrumSource(str, Enum):
    RESIDUAL = "residual"
    SPEECH = "speech"


DEFAULT_THETA = {SpectrumSource.RESIDUAL: 0.07, SpectrumSource.SPEECH: 0.18}


@dataclass(frozen=True)
class TrackerConfig:
    """Tracker parameters.

    ``theta`` defaults to 0.07 for the residual source and 0.18 when the
    criterion is applied to the speech spectrum directly.
    """

    f0_min: float = 50.0
    f0_max: float = 400.0
    n_harm: int = 5
    theta: float | None = None
    frame_length_ms: float = 100.0
    hop_ms: float = 10.0
    lpc_order: int = 12
    source: SpectrumSource = SpectrumSource.RESIDUAL
    grid_step_hz: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "source", SpectrumSource(self.source))
        if self.theta is None:
            object.__setattr__(self, "theta", DEFAULT_THETA[self.source])
        if not 0 < self.f0_min < self.f0_max:
            raise ValueError(f"need 0 < f0_min < f0_max, got [{self.f0_min}, {self.f0_max}]")
        if self.n_harm < 1:
            raise ValueError("n_harm must be >= 1")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.grid_step_hz <= 0:
            raise ValueError("grid_step_hz must be positive")
        if self.lpc_order < 1:
            raise ValueError("lpc_order must be >= 1")
        FrameSpec(self.frame_length_ms, self.hop_ms)

    @property
    def frame_spec(self) -> FrameSpec:
        return FrameSpec(self.frame_length_ms, self.hop_ms, "hanning")

    def check_sample_rate(self, sample_rate: int) -> None:
        if self.n_harm * self.f0_max > sample_rate / 2.0:
            raise ValueError(
                f"n_harm * f0_max = {self.n_harm * self.f0_max} Hz exceeds the Nyquist "
                f"frequency of {sample_rate / 2.0} Hz"
            )

    def replace(self, **changes) -> "TrackerConfig":
        if "source" in changes and "theta" not in changes:
            changes["theta"] = None
        return replace(self, **changes)


@dataclass(frozen=True)
class SrhCurve:
    frequencies: np.ndarray
    values: np.ndarray

    def argmax(self) -> tuple[float, float]:
        """(frequency, value) of the maximum; ties go to the lowest frequency."""
        i = int(np.argmax(self.values))
        return float(self.frequencies[i]), float(self.values[i])


@dataclass(frozen=True)
class PitchFrame:
    time_s: float
    f0_hz: float
    srh_score: float
    voiced: bool


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame output of :func:`track`, stored column-wise."""

    times: np.ndarray
    f0_hz: np.ndarray
    srh: np.ndarray
    voiced: np.ndarray
    config_used: TrackerConfig = field(default_factory=TrackerConfig)
    f0_mean_hz: float = float("nan")
    speech_detected: bool = True

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> PitchFrame:
        return PitchFrame(float(self.times[i]), float(self.f0_hz[i]), float(self.srh[i]), bool(self.voiced[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def frames(self) -> list[PitchFrame]:
        return list(self)


def frequency_grid(f_lo: float, f_hi: float, step: float) -> np.ndarray:
    """Inclusive uniform grid ``f_lo, f_lo + step, ...`` not exceeding ``f_hi``."""
    if not f_lo < f_hi:
        raise ValueError(f"need f_lo < f_hi, got [{f_lo}, {f_hi}]")
    n = int(np.floor((f_hi - f_lo) / step + 1e-9)) + 1
    return f_lo + step * np.arange(n)


def srh_value(spectrum: AmplitudeSpectrum, f, n_harm: int = 5):
    """SRH criterion at frequency ``f`` (scalar or array)."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f <= 0):
        raise ValueError("frequency must be positive")
    total = spectrum_at(spectrum, f)
    for k in range(2, n_harm + 1):
        total = total + spectrum_at(spectrum, k * f) - spectrum_at(spectrum, (k - 0.5) * f)
    return total


def srh_curve(spectrum: AmplitudeSpectrum, f_lo: float, f_hi: float, step: float = 1.0,
              n_harm: int = 5) -> SrhCurve:
    """Evaluate :func:`srh_value` on the inclusive grid ``[f_lo, f_hi]``.

    A 2-D ``spectrum.magnitudes`` yields one curve per row in ``values``.
    """
    freqs = frequency_grid(f_lo, f_hi, step)
    return SrhCurve(freqs, np.asarray(srh_value(spectrum, freqs, n_harm)))


def restrict_range(f0_mean: float, config: TrackerConfig) -> tuple[float, float]:
    """One octave either side of ``f0_mean``, clamped to the configured range."""
    if not f0_mean > 0:
        raise ValueError("f0_mean must be positive")
    return max(config.f0_min, 0.5 * f0_mean), min(config.f0_max, 2.0 * f0_mean)


def _analysis_signal(signal: AudioSignal, config: TrackerConfig) -> AudioSignal:
    if config.source is SpectrumSource.RESIDUAL:
        return inverse_filter(signal, config.lpc_order)
    return signal


def _scan(frames: np.ndarray, sample_rate: int, f_lo: float, f_hi: float,
          config: TrackerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame argmax frequency and score on ``[f_lo, f_hi]``."""
    f0 = np.empty(len(frames))
    score = np.empty(len(frames))
    for start in range(0, len(frames), _CHUNK):
        block = frames[start: start + _CHUNK]
        spec = amplitude_spectra(block, sample_rate, target_bin_hz=1.0)
        mags, _ = normalize_energy_rows(spec.magnitudes)
        curve = srh_curve(AmplitudeSpectrum(mags, spec.bin_hz, spec.nyquist_hz),
                          f_lo, f_hi, config.grid_step_hz, config.n_harm)
        best = np.argmax(curve.values, axis=1)
        f0[start: start + len(block)] = curve.frequencies[best]
        score[start: start + len(block)] = curve.values[np.arange(len(block)), best]
    return f0, score


def track(signal: AudioSignal, config: TrackerConfig | None = None) -> PitchTrack:
    """
    Estimate the pitch contour and voicing decisions of ``signal``.

    Args:
        signal: speech signal, at least one analysis frame long
        config: tracker parameters (defaults: 50-400 Hz, 5 harmonics,
            100 ms frames, 10 ms hop, LPC order 12)

    Returns:
        a :class:`PitchTrack` with one record per frame. If no frame exceeds
        the threshold in the first pass, the second pass keeps the full range,
        every frame comes out unvoiced and ``speech_detected`` is False.
    """
    config = config or TrackerConfig()
    config.check_sample_rate(signal.sample_rate)
    analysed = _analysis_signal(signal, config)
    frames, times = frame_signal(analysed, config.frame_spec)

    f0_1, score_1 = _scan(frames, signal.sample_rate, config.f0_min, config.f0_max, config)
    voiced_1 = score_1 > config.theta
    if not np.any(voiced_1):
        logger.warning("no speech detected: no frame exceeds theta=%g in the first pass", config.theta)
        return PitchTrack(times, f0_1, score_1, voiced_1, config, float("nan"), speech_detected=False)

    f0_mean = float(np.mean(f0_1[voiced_1]))
    f_lo, f_hi = restrict_range(f0_mean, config)
    f0_2, score_2 = _scan(frames, signal.sample_rate, f_lo, f_hi, config)
    return PitchTrack(times, f0_2, score_2, score_2 > config.theta, config, f0_mean)


def srh_surface(signal: AudioSignal, config: TrackerConfig | None = None) -> tuple[np.ndarray, SrhCurve]:
    """Full-range SRH curve of every frame, as a (times, curve) pair.

    ``curve.values`` has shape ``(n_frames, n_freqs)``. Useful for plotting
    the evolution of the criterion over time.
    """
    config = config or TrackerConfig()
    config.check_sample_rate(signal.sample_rate)
    frames, times = frame_signal(_analysis_signal(signal, config), config.frame_spec)
    rows = []
    for start in range(0, len(frames), _CHUNK):
        spec = amplitude_spectra(frames[start: start + _CHUNK], signal.sample_rate, 1.0)
        mags, _ = normalize_energy_rows(spec.magnitudes)
        curve = srh_curve(AmplitudeSpectrum(mags, spec.bin_hz, spec.nyquist_hz),
                          config.f0_min, config.f0_max, config.grid_step_hz, config.n_harm)
        rows.append(curve.values)
    return times, SrhCurve(curve.frequencies, np.vstack(rows))
