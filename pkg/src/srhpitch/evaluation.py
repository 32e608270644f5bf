"""
Pitch tracking evaluation: frame alignment, the VDE / GPE / FPE / FFE error
measures and additive noise mixing at a prescribed SNR.

Error measures
--------------
VDE
    percentage of frames whose voicing decision disagrees with the reference
GPE
    percentage of jointly voiced frames whose relative F0 error exceeds 20 %
FPE
    population standard deviation (in %) of the relative F0 error over the
    jointly voiced frames that are not gross errors
FFE
    percentage of frames with either a voicing error or a gross pitch error
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dsp import AudioSignal
from .tracker import PitchTrack

logger = logging.getLogger(__name__)

GROSS_ERROR_THRESHOLD = 0.20


class AlignmentError(ValueError):
    pass


class UndefinedSnrError(ValueError):
    pass


class UncertainPolicy(str, Enum):
    """What to do with reference frames marked uncertain (negative F0)."""

    UNVOICED = "unvoiced"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class GroundTruthTrack:
    """Reference contour; ``f0_hz == 0`` encodes unvoiced frames."""

    times: np.ndarray
    f0_hz: np.ndarray
    uncertain: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        if times.shape != f0.shape or times.ndim != 1 or len(times) == 0:
            raise ValueError("times and f0_hz must be non-empty 1-D arrays of equal length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("reference times must be strictly increasing")
        if np.any(f0 < 0):
            raise ValueError("reference f0 must be >= 0; map uncertain frames before construction")
        uncertain = np.zeros(len(times), bool) if self.uncertain is None else np.asarray(self.uncertain, bool)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "uncertain", uncertain)

    @property
    def voiced(self) -> np.ndarray:
        return self.f0_hz > 0

    @property
    def hop_s(self) -> float:
        return float(np.median(np.diff(self.times))) if len(self.times) > 1 else float("nan")

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class FramePairs:
    """Estimate/reference values paired frame by frame."""

    est_f0: np.ndarray
    est_voiced: np.ndarray
    ref_f0: np.ndarray
    ref_voiced: np.ndarray
    n_dropped: int = 0

    def __post_init__(self):
        for name in ("est_f0", "ref_f0"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        for name in ("est_voiced", "ref_voiced"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=bool))

    def __len__(self) -> int:
        return len(self.ref_f0)

    @property
    def both_voiced(self) -> np.ndarray:
        return self.est_voiced & self.ref_voiced

    @property
    def voicing_errors(self) -> np.ndarray:
        return self.est_voiced != self.ref_voiced

    def relative_error(self) -> np.ndarray:
        """Signed relative F0 error on jointly voiced frames."""
        bv = self.both_voiced
        return (self.est_f0[bv] - self.ref_f0[bv]) / self.ref_f0[bv]

    @property
    def gross_errors(self) -> np.ndarray:
        """Boolean mask over all frames."""
        out = np.zeros(len(self), bool)
        out[self.both_voiced] = np.abs(self.relative_error()) > GROSS_ERROR_THRESHOLD
        return out


@dataclass(frozen=True)
class EvalReport:
    vde_pct: float
    gpe_pct: float
    fpe_pct: float | None
    ffe_pct: float
    n_frames: int
    n_voicing_errors: int
    n_both_voiced: int
    n_gross_errors: int
    n_dropped: int = 0

    def as_dict(self) -> dict:
        return {
            "vde": self.vde_pct, "gpe": self.gpe_pct, "fpe": self.fpe_pct, "ffe": self.ffe_pct,
            "n_frames": self.n_frames, "n_voicing_errors": self.n_voicing_errors,
            "n_both_voiced": self.n_both_voiced, "n_gross_errors": self.n_gross_errors,
            "n_dropped": self.n_dropped,
        }


def align(track: PitchTrack, truth: GroundTruthTrack,
          uncertain: UncertainPolicy | str = UncertainPolicy.UNVOICED) -> FramePairs:
    """
    Pair every reference frame with the nearest estimate frame in time.

    Reference frames farther than half an estimate hop from any estimate are
    dropped (and counted in ``n_dropped``), as are uncertain reference frames
    under the ``exclude`` policy.
    """
    uncertain = UncertainPolicy(uncertain)
    est_t = np.asarray(track.times, dtype=np.float64)
    if len(est_t) == 0:
        raise AlignmentError("estimate track is empty")
    hop = float(np.median(np.diff(est_t))) if len(est_t) > 1 else track.config_used.hop_ms / 1000.0
    tol = hop / 2.0 + 1e-9

    ref_t = truth.times
    right = np.clip(np.searchsorted(est_t, ref_t), 1, max(len(est_t) - 1, 1))
    left = right - 1
    if len(est_t) == 1:
        nearest = np.zeros(len(ref_t), int)
    else:
        # ties go to the earlier estimate frame
        nearest = np.where(np.abs(ref_t - est_t[left]) <= np.abs(est_t[right] - ref_t), left, right)
    keep = np.abs(est_t[nearest] - ref_t) <= tol
    if uncertain is UncertainPolicy.EXCLUDE:
        keep &= ~truth.uncertain
    if not np.any(keep):
        raise AlignmentError("estimate and reference tracks do not overlap in time")
    idx = nearest[keep]
    return FramePairs(
        est_f0=np.asarray(track.f0_hz)[idx],
        est_voiced=np.asarray(track.voiced)[idx],
        ref_f0=truth.f0_hz[keep],
        ref_voiced=truth.voiced[keep],
        n_dropped=int(len(ref_t) - np.sum(keep)),
    )


def vde(pairs: FramePairs) -> float:
    if len(pairs) == 0:
        raise ValueError("no frames to score")
    return 100.0 * np.count_nonzero(pairs.voicing_errors) / len(pairs)


def gpe(pairs: FramePairs) -> float:
    """Gross pitch error; 0 when there are no jointly voiced frames."""
    n_bv = np.count_nonzero(pairs.both_voiced)
    if n_bv == 0:
        return 0.0
    return 100.0 * np.count_nonzero(pairs.gross_errors) / n_bv


def fpe(pairs: FramePairs) -> float | None:
    """Fine pitch error, or None with fewer than two qualifying frames."""
    rel = pairs.relative_error()
    fine = rel[np.abs(rel) <= GROSS_ERROR_THRESHOLD]
    if len(fine) < 2:
        return None
    return float(np.std(100.0 * fine))


def ffe(pairs: FramePairs) -> float:
    if len(pairs) == 0:
        raise ValueError("no frames to score")
    n_err = np.count_nonzero(pairs.voicing_errors) + np.count_nonzero(pairs.gross_errors)
    return 100.0 * n_err / len(pairs)


def report(pairs: FramePairs) -> EvalReport:
    return EvalReport(
        vde_pct=vde(pairs),
        gpe_pct=gpe(pairs),
        fpe_pct=fpe(pairs),
        ffe_pct=ffe(pairs),
        n_frames=len(pairs),
        n_voicing_errors=int(np.count_nonzero(pairs.voicing_errors)),
        n_both_voiced=int(np.count_nonzero(pairs.both_voiced)),
        n_gross_errors=int(np.count_nonzero(pairs.gross_errors)),
        n_dropped=pairs.n_dropped,
    )


def evaluate(track: PitchTrack, truth: GroundTruthTrack,
             uncertain: UncertainPolicy | str = UncertainPolicy.UNVOICED) -> EvalReport:
    return report(align(track, truth, uncertain))


def pool(pair_sets) -> FramePairs:
    """Concatenate several pair sets, so that metrics weight every frame equally."""
    pair_sets = list(pair_sets)
    if not pair_sets:
        raise ValueError("nothing to pool")
    return FramePairs(
        est_f0=np.concatenate([p.est_f0 for p in pair_sets]),
        est_voiced=np.concatenate([p.est_voiced for p in pair_sets]),
        ref_f0=np.concatenate([p.ref_f0 for p in pair_sets]),
        ref_voiced=np.concatenate([p.ref_voiced for p in pair_sets]),
        n_dropped=sum(p.n_dropped for p in pair_sets),
    )


@dataclass(frozen=True)
class NoiseSpec:
    noise: AudioSignal
    snr_db: float
    offset: int = 0


def rms(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.mean(np.square(x)))) if x.size else 0.0


def snr_db(speech, noise) -> float:
    return 20.0 * np.log10(rms(speech) / rms(noise))


def _fit_noise(noise: np.ndarray, n: int, offset: int) -> np.ndarray:
    idx = (offset + np.arange(n)) % len(noise)
    return noise[idx]


def mix_noise(speech: AudioSignal, spec: NoiseSpec) -> AudioSignal:
    """
    Add noise to speech at ``spec.snr_db``, measured over the whole signals.

    The noise is read cyclically from ``spec.offset`` when it is shorter than
    the speech (or truncated when longer).
    """
    noise = spec.noise
    if noise.sample_rate != speech.sample_rate:
        raise ValueError(
            f"noise sample rate {noise.sample_rate} Hz differs from speech {speech.sample_rate} Hz"
        )
    if len(noise) == 0:
        raise UndefinedSnrError("noise is empty")
    segment = _fit_noise(noise.samples, len(speech), spec.offset)
    s_rms, n_rms = rms(speech.samples), rms(segment)
    if s_rms == 0.0 or n_rms == 0.0:
        raise UndefinedSnrError("SNR is undefined for silent speech or silent noise")
    gain = s_rms / n_rms * 10.0 ** (-spec.snr_db / 20.0)
    return AudioSignal(speech.samples + gain * segment, speech.sample_rate)
