"""Pitch tracking and voicing detection by summation of residual harmonics."""
from .dsp import (
    AmplitudeSpectrum,
    AudioSignal,
    FrameSpec,
    WindowKind,
    amplitude_spectrum,
    frame_signal,
    normalize_energy,
    spectrum_at,
)
from .evaluation import (
    EvalReport,
    GroundTruthTrack,
    NoiseSpec,
    align,
    evaluate,
    ffe,
    fpe,
    gpe,
    mix_noise,
    vde,
)
from .lpc import LpcModel, autocorrelation, inverse_filter, levinson_durbin
from .tracker import (
    PitchFrame,
    PitchTrack,
    SpectrumSource,
    SrhCurve,
    TrackerConfig,
    restrict_range,
    srh_curve,
    srh_value,
    track,
)

__version__ = "0.1.0"
