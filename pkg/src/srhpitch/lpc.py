"""
Linear prediction (autocorrelation method) and inverse filtering.

The residual produced by :func:`inverse_filter` is the whitened excitation
on which the harmonic criterion is evaluated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .dsp import AudioSignal, FrameSpec, frame_count, window

LPC_FRAME_MS = 32.0
LPC_HOP_MS = 10.0


class LpcError(ArithmeticError):
    """Base class for frames on which no predictor can be estimated."""


class SilentFrameError(LpcError):
    """Zero-lag autocorrelation is not positive."""


class UnstableRecursionError(LpcError):
    """A reflection coefficient reached magnitude 1 (or became non-finite)."""


@dataclass(frozen=True)
class LpcModel:
    """Predictor ``s[n] ~ sum_k a_k s[n-k]`` for one analysis frame."""

    coefficients: np.ndarray
    prediction_error_power: float
    reflection: np.ndarray

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def inverse_filter_taps(self) -> np.ndarray:
        """FIR taps of the whitening filter ``1 - sum_k a_k z^-k``."""
        return np.concatenate([[1.0], -self.coefficients])

    @classmethod
    def passthrough(cls, order: int) -> "LpcModel":
        return cls(np.zeros(order), 0.0, np.zeros(order))


def autocorrelation(frame, max_lag: int) -> np.ndarray:
    """Biased, unnormalized autocorrelation ``r[0..max_lag]``."""
    frame = np.asarray(frame, dtype=np.float64)
    n = len(frame)
    if max_lag < 0 or max_lag >= n:
        raise ValueError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    return np.array([np.dot(frame[: n - k], frame[k:]) for k in range(max_lag + 1)])


def levinson_durbin(r, order: int) -> LpcModel:
    """
    Solve the Toeplitz normal equations for an order-``order`` predictor.

    Raises:
        SilentFrameError: if ``r[0] <= 0``
        UnstableRecursionError: if any reflection coefficient has magnitude >= 1
    """
    r = np.asarray(r, dtype=np.float64)
    if len(r) < order + 1:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {len(r)}")
    if not r[0] > 0:
        raise SilentFrameError("zero-lag autocorrelation is not positive")

    a = np.zeros(order)
    k = np.zeros(order)
    err = r[0]
    for i in range(order):
        acc = r[i + 1] - np.dot(a[:i], r[i:0:-1])
        ki = acc / err
        if not np.isfinite(ki) or abs(ki) >= 1.0:
            raise UnstableRecursionError(f"reflection coefficient {ki} at stage {i + 1}")
        k[i] = ki
        a[:i] = a[:i] - ki * a[:i][::-1]
        a[i] = ki
        err = err * (1.0 - ki * ki)
    return LpcModel(a, float(err), k)


def frame_models(signal: AudioSignal, order: int, frame_ms: float = LPC_FRAME_MS,
                 hop_ms: float = LPC_HOP_MS) -> tuple[list[LpcModel], np.ndarray]:
    """Estimate one LPC model per Hann-windowed analysis frame.

    Returns the models and the frame centers in samples. Signals shorter than
    one analysis frame are analysed as a single frame.
    """
    spec = FrameSpec(frame_ms, hop_ms)
    sr = signal.sample_rate
    frame_len = spec.frame_samples(sr)
    hop = spec.hop_samples(sr)
    x = signal.samples
    if len(x) < frame_len:
        frame_len = len(x)
    n_frames = max(frame_count(len(x), frame_len, hop), 1)
    win = window("hanning", frame_len)

    models = []
    for i in range(n_frames):
        seg = x[i * hop: i * hop + frame_len] * win
        lag = min(order, len(seg) - 1)
        try:
            model = levinson_durbin(autocorrelation(seg, lag), lag) if lag >= 1 else None
        except LpcError:
            model = None
        if model is None or model.order < order:
            model = LpcModel.passthrough(order)
        models.append(model)
    centers = np.arange(n_frames) * hop + frame_len / 2.0
    return models, centers


def inverse_filter(signal: AudioSignal, lpc_order: int = 12, analysis_frame_ms: float = LPC_FRAME_MS,
                   analysis_hop_ms: float = LPC_HOP_MS) -> AudioSignal:
    """
    Whiten ``signal`` with a piecewise-constant LPC inverse filter.

    Each sample is filtered with the coefficients of the analysis frame whose
    center is nearest; the filter history always comes from the original
    signal, with zeros before the first sample.
    """
    if lpc_order < 1:
        raise ValueError("lpc_order must be >= 1")
    x = signal.samples
    n = len(x)
    if n == 0:
        return AudioSignal(x.copy(), signal.sample_rate)
    models, centers = frame_models(signal, lpc_order, analysis_frame_ms, analysis_hop_ms)

    # segment boundaries: midpoints between consecutive frame centers
    bounds = np.concatenate([[0], np.ceil((centers[:-1] + centers[1:]) / 2.0).astype(int), [n]])
    bounds = np.clip(bounds, 0, n)
    padded = np.concatenate([np.zeros(lpc_order), x])
    out = np.empty(n)
    for model, start, stop in zip(models, bounds[:-1], bounds[1:]):
        if stop <= start:
            continue
        if not np.any(model.coefficients):
            out[start:stop] = x[start:stop]
            continue
        seg = padded[start: stop + lpc_order]
        out[start:stop] = lfilter(model.inverse_filter_taps(), [1.0], seg)[lpc_order:]
    return AudioSignal(out, signal.sample_rate)
