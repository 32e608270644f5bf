"""
A batch experiment from a manifest
==================================

Writes a tiny synthetic "corpus" (WAV + reference pitch files) to a temporary
directory, then runs the same experiment as ``srhpitch batch run.manifest``:
noise mixing at 0 dB, tracking, scoring, per-file tracks, plot data and a
metrics table whose last row pools every frame.
"""

import tempfile
from pathlib import Path

import numpy as np

from srhpitch import AudioSignal, io
from srhpitch.batch import run_batch
from srhpitch.synthetic import vowel

root = Path(tempfile.mkdtemp(prefix="srhpitch-demo-"))
for name, f0 in (("female1", 230.0), ("female2", 190.0), ("male1", 120.0)):
    io.write_wav(root / f"{name}.wav", vowel(f0, 1.5))
    times = np.arange(0.05, 1.45, 0.01)
    (root / f"{name}.f0").write_text("".join(f"{t:.2f} {f0}\n" for t in times))
io.write_wav(root / "white.wav", AudioSignal(np.random.default_rng(1).uniform(-0.5, 0.5, 16000), 16000))

(root / "run.manifest").write_text(
    "output_dir = results\n"
    "noise = white.wav\n"
    "snr_db = 0\n"
    "plot_data = true\n"
    "file = female1.wav female1.f0\n"
    "file = female2.wav female2.f0\n"
    "file = male1.wav male1.f0\n"
)

result = run_batch(io.read_manifest(root / "run.manifest"))
print(result.metrics_path.read_text())
print("outputs:", ", ".join(sorted(p.name for p in (root / "results").iterdir())))
