"""
Tracking a vowel in clean and 0 dB white noise
==============================================

Pitch and voicing come from the same score. Noise lowers the score of voiced
frames, but the residual harmonics still dominate at 0 dB SNR.
"""

import numpy as np

from srhpitch import AudioSignal, GroundTruthTrack, NoiseSpec, TrackerConfig, evaluate, mix_noise, track
from srhpitch.synthetic import vowel

f0 = 210.0
clean = vowel(f0, duration=2.0)
# half a second of silence on either side, so the voicing decision has work to do
pad = np.zeros(8000)
clean = AudioSignal(np.concatenate([pad, clean.samples, pad]), clean.sample_rate)
white = AudioSignal(np.random.default_rng(0).standard_normal(len(clean)), clean.sample_rate)
noisy = mix_noise(clean, NoiseSpec(white, snr_db=0.0))

for label, signal in (("clean", clean), ("0 dB", noisy)):
    for source in ("residual", "speech"):
        result = track(signal, TrackerConfig(source=source))
        truth_f0 = np.where((result.times > 0.55) & (result.times < 2.45), f0, 0.0)
        rep = evaluate(result, GroundTruthTrack(result.times, truth_f0))
        print(f"{label:>5} {source:>8}: mean F0 {result.f0_mean_hz:6.1f} Hz  "
              f"VDE {rep.vde_pct:5.1f}%  GPE {rep.gpe_pct:5.1f}%  FFE {rep.ffe_pct:5.1f}%  "
              f"median voiced score {np.median(result.srh[result.voiced]):.3f}")
