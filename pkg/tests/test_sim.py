import numpy as np
import pytest

from mismatch_detect.detectors import DETECTOR_IDS
from mismatch_detect.sim import BLOCK_TRIALS, SweepConfig, run_sweep, run_trial


def _small_cfg(**overrides):
    base = dict(q=4, n=16, detector="kmeans-nominal", channel="per-level",
                sigma_b=0.1, snr_start=16, snr_stop=18, snr_step=1,
                trials=2000, seed=77, collect_decodes=True)
    base.update(overrides)
    return SweepConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        _small_cfg(detector="viterbi")
    with pytest.raises(ValueError):
        _small_cfg(channel="rayleigh")
    with pytest.raises(ValueError):
        _small_cfg(trials=0)
    with pytest.raises(ValueError):
        _small_cfg(offsets_per="block")
    with pytest.raises(ValueError):
        _small_cfg(snr_ref="gain")  # only valid for the linear channel
    with pytest.raises(ValueError):
        _small_cfg(n=1, constrained=True)  # empty codebook
    with pytest.raises(ValueError):
        _small_cfg(snr_start=20, snr_stop=10, snr_step=0)


def test_snr_grid_inclusive():
    cfg = _small_cfg(snr_start=14, snr_stop=25, snr_step=1)
    assert cfg.snr_grid() == [float(v) for v in range(14, 26)]
    cfg = _small_cfg(snr_start=20, snr_stop=20, snr_step=1)
    assert cfg.snr_grid() == [20.0]
    cfg = _small_cfg(snr_start=14, snr_stop=15, snr_step=0.5)
    assert cfg.snr_grid() == [14.0, 14.5, 15.0]


def test_sigma_for_respects_snr_ref():
    cfg = _small_cfg(channel="linear", sigma_b=0.0, a=1.5, snr_ref="gain")
    assert cfg.sigma_for(20.0) == pytest.approx(0.15, rel=1e-12)
    cfg = _small_cfg(channel="linear", sigma_b=0.0, a=1.5, snr_ref="unit")
    assert cfg.sigma_for(20.0) == pytest.approx(0.1, rel=1e-12)


def test_json_roundtrip():
    cfg = _small_cfg()
    assert SweepConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValueError):
        SweepConfig.from_json('{"q": 4, "n": 8, "detector": "ftd", "bogus": 1}')


def test_sweep_reproducible():
    cfg = _small_cfg()
    c1 = run_sweep(cfg)
    c2 = run_sweep(cfg)
    for p1, p2 in zip(c1.points, c2.points):
        assert p1.estimate == p2.estimate
        assert p1.iteration_hist == p2.iteration_hist
        np.testing.assert_array_equal(p1.decode_signatures, p2.decode_signatures)


def test_sweep_changes_with_seed():
    a = run_sweep(_small_cfg(seed=1))
    b = run_sweep(_small_cfg(seed=2))
    assert any(
        not np.array_equal(p1.decode_signatures, p2.decode_signatures)
        for p1, p2 in zip(a.points, b.points)
    )


def test_thread_count_does_not_change_results():
    cfg = _small_cfg(trials=3 * BLOCK_TRIALS + 17)
    seq = run_sweep(cfg, threads=1)
    par = run_sweep(cfg, threads=3)
    for p1, p2 in zip(seq.points, par.points):
        assert p1.estimate == p2.estimate
        assert p1.iteration_hist == p2.iteration_hist
        np.testing.assert_array_equal(p1.decode_signatures, p2.decode_signatures)


def test_histogram_mass_and_signature_length():
    cfg = _small_cfg()
    for pt in run_sweep(cfg).points:
        assert sum(pt.iteration_hist.values()) == pt.trials_run == cfg.trials
        assert pt.decode_signatures.shape == (pt.trials_run,)


def test_trial_outcomes_match_sweep_counts():
    cfg = _small_cfg(trials=300, snr_start=16, snr_stop=16)
    point = run_sweep(cfg).points[0]
    outcomes = [run_trial(cfg, 16.0, t) for t in range(cfg.trials)]
    assert sum(o.error for o in outcomes) == point.estimate.errors
    hist = {}
    for o in outcomes:
        hist[o.iterations] = hist.get(o.iterations, 0) + 1
    assert hist == dict(point.iteration_hist)


def test_trial_is_deterministic_and_budget_independent():
    cfg = _small_cfg(trials=300, snr_start=16, snr_stop=16)
    o1 = run_trial(cfg, 16.0, 123)
    o2 = run_trial(cfg, 16.0, 123)
    assert o1 == o2
    # the same trial index under a bigger budget sees identical data
    bigger = _small_cfg(trials=5000, snr_start=16, snr_stop=16)
    o3 = run_trial(bigger, 16.0, 123)
    assert (o1.sent, o1.decoded, o1.error) == (o3.sent, o3.decoded, o3.error)


def test_noiseless_high_snr_all_detectors():
    for det in DETECTOR_IDS:
        q, n = (3, 6) if det == "pearson" else (4, 16)
        cfg = SweepConfig(q=q, n=n, detector=det, channel="ideal", constrained=True,
                          snr_start=60, snr_stop=60, snr_step=1, trials=256, seed=5)
        pt = run_sweep(cfg).points[0]
        assert pt.estimate.errors == 0, det
        assert pt.iteration_hist == {1: 256}, det


def test_early_stop():
    cfg = _small_cfg(snr_start=10, snr_stop=10, trials=20_000, stop_on_error_count=50)
    pt = run_sweep(cfg).points[0]
    assert pt.estimate.errors >= 50
    assert pt.trials_run < 20_000
    assert pt.trials_run % BLOCK_TRIALS == 0
    assert sum(pt.iteration_hist.values()) == pt.trials_run
    # deterministic under threading too
    pt2 = run_sweep(cfg, threads=4).points[0]
    assert pt2.estimate == pt.estimate


def test_offsets_per_sweep_mode():
    word = run_sweep(_small_cfg(offsets_per="word"))
    sweep = run_sweep(_small_cfg(offsets_per="sweep"))
    assert any(
        p1.estimate.errors != p2.estimate.errors
        for p1, p2 in zip(word.points, sweep.points)
    )
    again = run_sweep(_small_cfg(offsets_per="sweep"))
    for p1, p2 in zip(sweep.points, again.points):
        assert p1.estimate == p2.estimate


def test_large_sigma_b_premise_safety_net():
    cfg = _small_cfg(sigma_b=0.5, trials=1000, snr_start=20, snr_stop=20)
    pt = run_sweep(cfg).points[0]
    assert pt.trials_run == 1000  # no aborts; premise enforced by redraws


def test_linear_channel_gain_invariance_of_minmax():
    base = dict(q=4, n=32, detector="kmeans-minmax", channel="linear",
                constrained=True, snr_ref="gain", snr_start=18, snr_stop=18,
                snr_step=1, trials=2048, seed=9, collect_decodes=True)
    r1 = run_sweep(SweepConfig(a=1.0, b=0.0, **base)).points[0]
    r2 = run_sweep(SweepConfig(a=2.5, b=-7.0, **base)).points[0]
    np.testing.assert_array_equal(r1.decode_signatures, r2.decode_signatures)
