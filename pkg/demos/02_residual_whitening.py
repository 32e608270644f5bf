"""
Whitening speech with LPC inverse filtering
===========================================

The vowel spectrum is dominated by its formants; the residual has a flat
envelope with evenly sized harmonic peaks, which is what the criterion needs.
"""

import numpy as np

from srhpitch import FrameSpec, amplitude_spectrum, frame_signal, inverse_filter
from srhpitch.synthetic import vowel

speech = vowel(120.0, duration=1.0)
residual = inverse_filter(speech, lpc_order=12)

frames_s, _ = frame_signal(speech, FrameSpec(100, 10))
frames_e, _ = frame_signal(residual, FrameSpec(100, 10))
spec_s = amplitude_spectrum(frames_s[40], speech.sample_rate)
spec_e = amplitude_spectrum(frames_e[40], speech.sample_rate)


def harmonic_levels(spec, f0, count=12):
    bins = [int(round(k * f0 / spec.bin_hz)) for k in range(1, count + 1)]
    peaks = np.array([spec.magnitudes[b - 3:b + 4].max() for b in bins])
    return 20 * np.log10(peaks / peaks.max())


print("harmonic  speech(dB)  residual(dB)")
for k, (a, b) in enumerate(zip(harmonic_levels(spec_s, 120.0), harmonic_levels(spec_e, 120.0)), start=1):
    print(f"{k:8d}  {a:10.1f}  {b:12.1f}")

print(f"prediction gain: {10 * np.log10(np.mean(speech.samples ** 2) / np.mean(residual.samples ** 2)):.1f} dB")
