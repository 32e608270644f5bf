import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srhpitch.dsp import AudioSignal
from srhpitch.evaluation import (
    AlignmentError,
    FramePairs,
    GroundTruthTrack,
    NoiseSpec,
    UndefinedSnrError,
    align,
    evaluate,
    ffe,
    fpe,
    gpe,
    mix_noise,
    pool,
    report,
    rms,
    snr_db,
    vde,
)
from srhpitch.tracker import PitchTrack


def make_track(times, f0, voiced):
    times = np.asarray(times, float)
    return PitchTrack(times, np.asarray(f0, float), np.zeros(len(times)), np.asarray(voiced, bool))


def pairs_of(est, ref):
    """est/ref are lists of f0 values with 0 meaning unvoiced."""
    est, ref = np.asarray(est, float), np.asarray(ref, float)
    return FramePairs(est, est > 0, ref, ref > 0)


def brute_force(est_f0, est_v, ref_f0, ref_v):
    n = len(ref_f0)
    v_err = bv = gross = 0
    fine = []
    for ef, ev, rf, rv in zip(est_f0, est_v, ref_f0, ref_v):
        if ev != rv:
            v_err += 1
        elif ev and rv:
            bv += 1
            rel = (ef - rf) / rf
            if abs(rel) > 0.2:
                gross += 1
            else:
                fine.append(100 * rel)
    mean = sum(fine) / len(fine) if fine else 0
    std = math.sqrt(sum((x - mean) ** 2 for x in fine) / len(fine)) if len(fine) >= 2 else None
    return dict(vde=100 * v_err / n, gpe=100 * gross / bv if bv else 0.0, fpe=std,
                ffe=100 * (v_err + gross) / n, v_err=v_err, bv=bv, gross=gross)


# ---------------------------------------------------------------- metrics

def test_vde_examples():
    assert vde(pairs_of([100] * 10, [100] * 10)) == 0.0
    assert vde(pairs_of([0, 0] + [100] * 8, [100] * 10)) == 20.0


@pytest.mark.parametrize("est, gross", [(125, True), (115, False), (120, False), (100, False)])
def test_gpe_threshold(est, gross):
    assert gpe(pairs_of([est], [100])) == (100.0 if gross else 0.0)


def test_gpe_octave_error():
    assert gpe(pairs_of([100], [200])) == 100.0


def test_gpe_without_jointly_voiced_frames():
    assert gpe(pairs_of([0, 100], [100, 0])) == 0.0


def test_fpe_examples():
    assert fpe(pairs_of([100, 200, 300], [100, 200, 300])) == 0.0
    assert fpe(pairs_of([102, 98], [100, 100])) == pytest.approx(2.0)
    assert fpe(pairs_of([100, 100, 150], [100, 100, 100])) == 0.0
    assert fpe(pairs_of([101], [100])) is None


def test_ffe_example():
    # 10 frames: 5 jointly voiced (one gross), one voicing error, 4 jointly unvoiced
    est = [100, 100, 100, 100, 150, 100, 0, 0, 0, 0]
    ref = [100, 100, 100, 100, 100, 0, 0, 0, 0, 0]
    p = pairs_of(est, ref)
    assert ffe(p) == 20.0
    assert ffe(pairs_of(ref, ref)) == 0.0


def test_metrics_match_counting_oracle(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        ref_v = rng.random(n) < 0.6
        est_v = rng.random(n) < 0.6
        ref_f0 = np.where(ref_v, rng.uniform(60, 400, n), 0.0)
        est_f0 = ref_f0 * rng.choice([0.5, 0.9, 1.0, 1.05, 1.3, 2.0], n)
        est_f0 = np.where(ref_v, est_f0, rng.uniform(60, 400, n))
        pairs = FramePairs(est_f0, est_v, ref_f0, ref_v)
        rep = report(pairs)
        bf = brute_force(est_f0, est_v, ref_f0, ref_v)
        assert rep.n_voicing_errors == bf["v_err"]
        assert rep.n_both_voiced == bf["bv"]
        assert rep.n_gross_errors == bf["gross"]
        assert rep.vde_pct == pytest.approx(bf["vde"], abs=1e-12)
        assert rep.gpe_pct == pytest.approx(bf["gpe"], abs=1e-12)
        assert rep.ffe_pct == pytest.approx(bf["ffe"], abs=1e-12)
        if bf["fpe"] is None:
            assert rep.fpe_pct is None
        else:
            assert rep.fpe_pct == pytest.approx(bf["fpe"], rel=1e-9, abs=1e-9)
        assert round(rep.ffe_pct * rep.n_frames / 100) == rep.n_voicing_errors + rep.n_gross_errors
        assert rep.ffe_pct * rep.n_frames / 100 == pytest.approx(rep.n_voicing_errors + rep.n_gross_errors)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([0.0, 80.0, 100.0, 119.0, 121.0, 250.0]),
                          st.sampled_from([0.0, 100.0])), min_size=1, max_size=40))
def test_metric_bounds(frames):
    est, ref = zip(*frames)
    p = pairs_of(est, ref)
    v, g, f = vde(p), gpe(p), ffe(p)
    assert 0 <= v <= 100 and 0 <= g <= 100 and 0 <= f <= 100
    assert f >= v - 1e-12
    assert f <= v + g + 1e-12


def test_fpe_ignores_added_gross_frames():
    base = pairs_of([101, 99, 100], [100, 100, 100])
    more = pairs_of([101, 99, 100, 300, 40], [100, 100, 100, 100, 100])
    assert fpe(base) == fpe(more)


def test_pool_weights_frames():
    a = pairs_of([0] * 1, [100] * 1)       # 1 frame, 100% VDE
    b = pairs_of([100] * 9, [100] * 9)     # 9 frames, 0% VDE
    assert vde(pool([a, b])) == pytest.approx(10.0)


# ---------------------------------------------------------------- alignment

def test_align_identity():
    t = np.arange(10) * 0.01 + 0.05
    est = make_track(t, np.arange(10) + 100, [1] * 10)
    truth = GroundTruthTrack(t, np.arange(10) + 100.0)
    p = align(est, truth)
    assert np.array_equal(p.est_f0, p.ref_f0)
    assert p.n_dropped == 0


def test_align_offset_nearest_neighbour():
    est_t = np.arange(20) * 0.01 + 0.05
    ref_t = est_t[:-1] + 0.003
    est = make_track(est_t, np.arange(20) + 100.0, [1] * 20)
    p = align(est, GroundTruthTrack(ref_t, np.full(19, 100.0)))
    expected = [100.0 + int(np.argmin(np.abs(est_t - t))) for t in ref_t]
    assert np.array_equal(p.est_f0, expected)
    assert p.n_dropped == 0
    # one estimate frame per truth frame
    assert len(set(p.est_f0)) == len(p)


def test_align_drops_out_of_range_frames():
    est = make_track([0.05, 0.06, 0.07], [100, 100, 100], [1, 1, 1])
    truth = GroundTruthTrack([0.0, 0.06, 0.5], [100.0, 100.0, 100.0])
    p = align(est, truth)
    assert len(p) == 1 and p.n_dropped == 2


def test_align_disjoint_raises():
    est = make_track([0.05, 0.06], [100, 100], [1, 1])
    with pytest.raises(AlignmentError):
        align(est, GroundTruthTrack([1.0, 1.01], [100.0, 100.0]))


def test_uncertain_policy():
    t = [0.05, 0.06, 0.07]
    est = make_track(t, [100, 100, 100], [1, 1, 1])
    truth = GroundTruthTrack(t, [100.0, 0.0, 100.0], uncertain=[False, True, False])
    assert evaluate(est, truth, "unvoiced").n_voicing_errors == 1
    rep = evaluate(est, truth, "exclude")
    assert rep.n_frames == 2 and rep.n_voicing_errors == 0 and rep.n_dropped == 1


def test_ground_truth_validation():
    with pytest.raises(ValueError):
        GroundTruthTrack([0.02, 0.01], [0.0, 0.0])
    with pytest.raises(ValueError):
        GroundTruthTrack([0.01], [-1.0])
    assert GroundTruthTrack([0.0, 0.01, 0.02], [0, 100, 0]).hop_s == pytest.approx(0.01)


# ---------------------------------------------------------------- noise mixing

def test_mix_equal_rms_unit_gain(rng):
    s = rng.standard_normal(1000)
    n = rng.standard_normal(1000)
    n *= rms(s) / rms(n)
    out = mix_noise(AudioSignal(s, 16000), NoiseSpec(AudioSignal(n, 16000), 0.0))
    assert np.allclose(out.samples, s + n)


def test_mix_twenty_db(rng):
    s = AudioSignal(rng.standard_normal(2000), 16000)
    n = AudioSignal(3 * rng.standard_normal(2000), 16000)
    out = mix_noise(s, NoiseSpec(n, 20.0))
    added = out.samples - s.samples
    assert rms(added) / rms(s.samples) == pytest.approx(0.1, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(-30, 40), st.integers(100, 3000), st.integers(10, 3000), st.integers(0, 5000))
def test_mix_snr_exact(target, n_speech, n_noise, offset):
    rng = np.random.default_rng(n_speech * 7 + n_noise)
    s = AudioSignal(rng.standard_normal(n_speech) * 0.3, 16000)
    noise = AudioSignal(rng.uniform(-1, 1, n_noise), 16000)
    out = mix_noise(s, NoiseSpec(noise, target, offset))
    assert len(out) == n_speech
    assert abs(snr_db(s.samples, out.samples - s.samples) - target) < 0.01


def test_mix_tiles_cyclically():
    s = AudioSignal(np.ones(5), 16000)
    n = AudioSignal(np.array([1.0, -1.0]), 16000)
    out = mix_noise(s, NoiseSpec(n, 0.0, offset=1))
    assert np.allclose(out.samples - 1.0, [-1, 1, -1, 1, -1])


def test_mix_errors(rng):
    s = AudioSignal(rng.standard_normal(100), 16000)
    with pytest.raises(UndefinedSnrError):
        mix_noise(s, NoiseSpec(AudioSignal(np.zeros(100), 16000), 0))
    with pytest.raises(UndefinedSnrError):
        mix_noise(AudioSignal(np.zeros(100), 16000), NoiseSpec(s, 0))
    with pytest.raises(ValueError, match="sample rate"):
        mix_noise(s, NoiseSpec(AudioSignal(rng.standard_normal(100), 8000), 0))
