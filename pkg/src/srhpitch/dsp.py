"""
Elementary signal operations: framing, windowing, amplitude spectra and
spectrum interpolation.

All functions are pure and operate on numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

MIN_SAMPLE_RATE = 8000


class SignalError(ValueError):
    """Raised for signals or spectra that cannot be processed."""


class EmptyOutputError(SignalError):
    """The signal is shorter than a single analysis frame."""


class DegenerateFrameError(SignalError):
    """A frame (or its spectrum) carries no energy."""


@dataclass(frozen=True)
class AudioSignal:
    """A mono sample buffer and its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise SignalError(f"expected a mono 1-D buffer, got shape {samples.shape}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate < MIN_SAMPLE_RATE:
            raise SignalError(
                f"sample rate must be an integer >= {MIN_SAMPLE_RATE} Hz, got {self.sample_rate}"
            )
        if not np.all(np.isfinite(samples)):
            raise SignalError("samples contain NaN or Inf")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2.0

    def scaled(self, gain: float) -> "AudioSignal":
        return AudioSignal(self.samples * gain, self.sample_rate)


class WindowKind(str, Enum):
    HANNING = "hanning"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class FrameSpec:
    frame_length_ms: float
    hop_ms: float
    window_kind: WindowKind = WindowKind.HANNING

    def __post_init__(self):
        if self.frame_length_ms <= 0 or self.hop_ms <= 0:
            raise ValueError("frame length and hop must be positive")
        if self.hop_ms > self.frame_length_ms:
            raise ValueError("hop must not exceed the frame length")
        object.__setattr__(self, "window_kind", WindowKind(self.window_kind))

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_length_ms * sample_rate / 1000.0))

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.hop_ms * sample_rate / 1000.0)))


@dataclass(frozen=True)
class AmplitudeSpectrum:
    """Magnitudes on a uniform grid, ``magnitudes[i]`` sitting at ``i * bin_hz``."""

    magnitudes: np.ndarray
    bin_hz: float
    nyquist_hz: float

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(len(self.magnitudes)) * self.bin_hz


def window(kind: WindowKind | str, length: int) -> np.ndarray:
    """Window of ``length`` samples; the Hann window is the periodic form."""
    kind = WindowKind(kind)
    if kind is WindowKind.RECTANGULAR:
        return np.ones(length)
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    if n_samples < frame_len:
        return 0
    return (n_samples - frame_len) // hop + 1


def frame_signal(signal: AudioSignal, spec: FrameSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    Cut a signal into windowed frames.

    Args:
        signal: the input signal
        spec: frame length, hop and window kind

    Returns:
        a tuple ``(frames, times)`` where ``frames`` has shape
        ``(n_frames, frame_len)`` and ``times`` holds the center time of each
        frame in seconds
    """
    sr = signal.sample_rate
    frame_len = spec.frame_samples(sr)
    hop = spec.hop_samples(sr)
    n_frames = frame_count(len(signal), frame_len, hop)
    if n_frames == 0:
        raise EmptyOutputError(
            f"signal of {len(signal)} samples is shorter than one frame ({frame_len} samples)"
        )
    frames = np.lib.stride_tricks.sliding_window_view(signal.samples, frame_len)[::hop][:n_frames]
    frames = frames * window(spec.window_kind, frame_len)
    times = (np.arange(n_frames) * hop + frame_len / 2.0) / sr
    return frames, times


def fft_size(frame_len: int, sample_rate: float, target_bin_hz: float) -> int:
    """Smallest power of two >= ``frame_len`` whose bin spacing is <= ``target_bin_hz``."""
    if target_bin_hz <= 0:
        raise ValueError("target_bin_hz must be positive")
    n = max(frame_len, int(np.ceil(sample_rate / target_bin_hz)), 1)
    return 1 << (n - 1).bit_length()


def amplitude_spectrum(frame, sample_rate: float, target_bin_hz: float = 1.0) -> AmplitudeSpectrum:
    """Zero-padded DFT magnitude of ``frame`` for bins 0..Nyquist inclusive."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("frame is empty")
    n_fft = fft_size(len(frame), sample_rate, target_bin_hz)
    mags = np.abs(np.fft.rfft(frame, n=n_fft))
    return AmplitudeSpectrum(mags, sample_rate / n_fft, sample_rate / 2.0)


def amplitude_spectra(frames: np.ndarray, sample_rate: float, target_bin_hz: float = 1.0) -> AmplitudeSpectrum:
    """Batched :func:`amplitude_spectrum`; ``magnitudes`` has one row per frame."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    n_fft = fft_size(frames.shape[1], sample_rate, target_bin_hz)
    mags = np.abs(np.fft.rfft(frames, n=n_fft, axis=1))
    return AmplitudeSpectrum(mags, sample_rate / n_fft, sample_rate / 2.0)


def normalize_energy(spectrum: AmplitudeSpectrum) -> AmplitudeSpectrum:
    """Scale the magnitudes to unit L2 norm.

    Raises :class:`DegenerateFrameError` for an all-zero spectrum.
    """
    norm = np.sqrt(np.sum(np.square(spectrum.magnitudes)))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateFrameError("cannot normalize an all-zero spectrum")
    return AmplitudeSpectrum(spectrum.magnitudes / norm, spectrum.bin_hz, spectrum.nyquist_hz)


def normalize_energy_rows(magnitudes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise unit L2 normalization.

    All-zero rows are left at zero; the returned boolean mask flags them.
    """
    norms = np.sqrt(np.sum(np.square(magnitudes), axis=-1, keepdims=True))
    degenerate = (norms[..., 0] == 0.0)
    safe = np.where(norms == 0.0, 1.0, norms)
    return magnitudes / safe, degenerate


def spectrum_at(spectrum: AmplitudeSpectrum, f) -> np.ndarray | float:
    """
    Linearly interpolated magnitude at frequency ``f`` (scalar or array).

    Frequencies above the Nyquist frequency read as 0. ``spectrum.magnitudes``
    may be 2-D (one spectrum per row), in which case the last axis is indexed.
    """
    f_arr = np.asarray(f, dtype=np.float64)
    if np.any(f_arr < 0):
        raise ValueError("frequency must be non-negative")
    mags = np.asarray(spectrum.magnitudes)
    n_bins = mags.shape[-1]
    # trailing zero bin: frames above the last bin interpolate towards 0
    padded = np.concatenate([mags, np.zeros(mags.shape[:-1] + (1,))], axis=-1)
    pos = f_arr / spectrum.bin_hz
    idx = np.floor(pos).astype(np.int64)
    inband = (f_arr <= spectrum.nyquist_hz) & (idx < n_bins)
    idx = np.where(inband, idx, n_bins)
    frac = np.where(inband, pos - idx, 0.0)
    upper = np.minimum(idx + 1, n_bins)
    out = padded[..., idx] * (1.0 - frac) + padded[..., upper] * frac
    if np.ndim(out) == 0:
        return float(out)
    return out
