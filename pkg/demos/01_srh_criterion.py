"""
The harmonic criterion on a toy spectrum
========================================

A spectrum with unit peaks at 100, 200, ..., 500 Hz. Summing the harmonics
alone would score 50 Hz and 200 Hz highly too; subtracting the inter-harmonic
values pulls the even-harmonic candidate back down.
"""

import numpy as np

from srhpitch import AmplitudeSpectrum, srh_curve, srh_value

mags = np.zeros(8001)
mags[[100, 200, 300, 400, 500]] = 1.0
spectrum = AmplitudeSpectrum(mags, bin_hz=1.0, nyquist_hz=8000.0)

for f in (50, 100, 150, 200, 300):
    print(f"SRH({f:3d} Hz) = {srh_value(spectrum, f):+.1f}")

# scan the usual search range; the maximum falls on the true fundamental
curve = srh_curve(spectrum, 50, 400, step=1.0, n_harm=5)
f0, score = curve.argmax()
print(f"argmax over [50, 400] Hz: {f0:.0f} Hz (score {score:.1f})")

# with equal-amplitude harmonics everywhere, odd multiples tie with F0;
# which is why tracking restricts the range around the speaker's mean pitch
comb = np.zeros(8001)
comb[100::100] = 1.0
comb = AmplitudeSpectrum(comb, 1.0, 8000.0)
print(f"flat comb: SRH(100) = {srh_value(comb, 100):.1f}, SRH(300) = {srh_value(comb, 300):.1f}")
