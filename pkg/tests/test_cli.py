import subprocess
import sys

import numpy as np
import pytest

from srhpitch import io
from srhpitch.batch import run_batch
from srhpitch.cli import main
from srhpitch.dsp import AudioSignal
from srhpitch.synthetic import vowel


def write_truth(path, f0, duration=1.0, hop=0.01):
    times = np.arange(0.05, duration - 0.05 + 1e-9, hop)
    path.write_text("".join(f"{t:.3f} {f0:g}\n" for t in times))


@pytest.fixture
def corpus(tmp_path):
    for name, f0 in (("f1", 220.0), ("m1", 110.0)):
        io.write_wav(tmp_path / f"{name}.wav", vowel(f0, 1.0))
        write_truth(tmp_path / f"{name}.txt", f0)
    io.write_wav(tmp_path / "noise.wav", AudioSignal(np.random.default_rng(3).uniform(-0.5, 0.5, 8000), 16000))
    return tmp_path


def write_manifest(root, body):
    m = root / "run.manifest"
    m.write_text(body)
    return m


# ---------------------------------------------------------------- batch

def test_batch_clean_with_truth(corpus):
    m = write_manifest(corpus, "output_dir = out\nfile = f1.wav f1.txt\nfile = m1.wav m1.txt\n")
    result = run_batch(io.read_manifest(m))
    assert result.ok
    out = corpus / "out"
    assert (out / "f1.track.csv").is_file() and (out / "m1.track.csv").is_file()
    rows = io.read_metrics(out / "metrics.csv")
    assert [r["file"] for r in rows] == ["f1", "m1", "ALL"]
    assert all(r["condition"] == "clean" for r in rows)
    assert all(r["gpe"] == 0.0 for r in rows)
    assert rows[2]["vde"] == pytest.approx((rows[0]["vde"] + rows[1]["vde"]) / 2, abs=1e-3)


def test_batch_noise_condition_label(corpus):
    m = write_manifest(corpus, "output_dir = out\nnoise = noise.wav\nsnr_db = 10\nfile = f1.wav f1.txt\n")
    run_batch(io.read_manifest(m))
    rows = io.read_metrics(corpus / "out" / "metrics.csv")
    assert rows[0]["condition"] == "noise@10dB"


def test_batch_missing_truth_leaves_metrics_empty(corpus):
    m = write_manifest(corpus, "output_dir = out\nplot_data = true\nfile = f1.wav\n")
    run_batch(io.read_manifest(m))
    lines = (corpus / "out" / "metrics.csv").read_text().splitlines()
    assert lines[1] == "f1,clean,,,,"
    assert (corpus / "out" / "f1.track.csv").is_file()
    plot = (corpus / "out" / "f1.plot.csv").read_text().splitlines()
    assert plot[1].endswith(",,")


def test_batch_surface_export(corpus):
    m = write_manifest(corpus, "output_dir = out\nplot_surface = true\nf0_max = 300\nfile = f1.wav\n")
    run_batch(io.read_manifest(m))
    lines = (corpus / "out" / "f1.surface.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "time_s" and len(header) == 1 + 251
    assert len(lines) == 1 + 91


def test_batch_deterministic_across_runs_and_jobs(corpus):
    body = "output_dir = {}\nplot_data = true\nfile = f1.wav f1.txt\nfile = m1.wav m1.txt\n"
    run_batch(io.read_manifest(write_manifest(corpus, body.format("a"))))
    run_batch(io.read_manifest(write_manifest(corpus, body.format("b"))), jobs=2)
    for name in ("metrics.csv", "f1.track.csv", "m1.track.csv", "f1.plot.csv"):
        assert (corpus / "a" / name).read_bytes() == (corpus / "b" / name).read_bytes()


def test_batch_continues_after_failure(corpus):
    (corpus / "broken.wav").write_bytes(b"not a wav at all")
    m = write_manifest(corpus, "output_dir = out\nfile = broken.wav\nfile = f1.wav f1.txt\n")
    result = run_batch(io.read_manifest(m))
    assert result.n_failed == 1 and not result.ok
    rows = io.read_metrics(corpus / "out" / "metrics.csv")
    assert rows[1]["file"] == "f1" and rows[1]["gpe"] == 0.0
    assert main(["batch", str(m)]) == 1


def test_duplicate_stems_get_distinct_outputs(corpus):
    sub = corpus / "sub"
    sub.mkdir()
    io.write_wav(sub / "f1.wav", vowel(150.0, 0.5))
    m = write_manifest(corpus, "output_dir = out\nfile = f1.wav\nfile = sub/f1.wav\n")
    run_batch(io.read_manifest(m))
    assert (corpus / "out" / "f1.track.csv").is_file()
    assert (corpus / "out" / "f1_2.track.csv").is_file()


# ---------------------------------------------------------------- CLI verbs

def test_cli_track_and_eval(corpus, capsys):
    out = corpus / "f1.csv"
    assert main(["track", str(corpus / "f1.wav"), "--out", str(out), "--theta", "0.05"]) == 0
    assert out.read_text().startswith("time_s,f0_hz,srh,voiced\n")
    assert main(["eval", str(out), str(corpus / "f1.txt"), "--uncertain", "exclude"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("vde,gpe,fpe,ffe")
    vde, gpe = (float(x) for x in lines[1].split(",")[:2])
    assert gpe == 0.0 and vde <= 5.0


def test_cli_track_stdout(corpus, capsys):
    assert main(["track", str(corpus / "m1.wav"), "--source", "speech", "--f0-min", "60",
                 "--f0-max", "300", "--nharm", "4", "--lpc-order", "10", "--frame-ms", "80",
                 "--hop-ms", "20"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("time_s,f0_hz,srh,voiced\n")
    assert len(text.splitlines()) == 1 + (16000 - 1280) // 320 + 1


def test_cli_mix(corpus):
    out = corpus / "mixed.wav"
    assert main(["mix", str(corpus / "f1.wav"), str(corpus / "noise.wav"), "--snr-db", "5", "--out", str(out)]) == 0
    clean = io.read_wav(corpus / "f1.wav").samples
    mixed = io.read_wav(out).samples
    noise = mixed - clean
    assert 20 * np.log10(np.sqrt(np.mean(clean ** 2) / np.mean(noise ** 2))) == pytest.approx(5, abs=0.05)


def test_cli_errors_exit_nonzero(tmp_path, capsys):
    assert main(["track", str(tmp_path / "missing.wav")]) == 1
    assert "error" in capsys.readouterr().err


def test_module_entry_point(corpus):
    proc = subprocess.run([sys.executable, "-m", "srhpitch", "track", str(corpus / "f1.wav")],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "time_s,f0_hz,srh,voiced"
