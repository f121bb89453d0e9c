import numpy as np
import pytest

from mismatch_detect.metrics import WerEstimate, binomial_ci, q_function, wer_upper_bound

# Frozen from a 40-digit evaluation of erfc(5/sqrt(2))/2.
Q5 = 2.8665157187919391e-07


def test_q_function_values():
    assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)
    assert q_function(5.0) == pytest.approx(Q5, rel=1e-12)


def test_q_function_reflection_and_monotonicity():
    xs = np.linspace(-6, 6, 121)
    for x in xs:
        assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-12)
    vals = [q_function(x) for x in xs]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(0.0 < v < 1.0 for v in vals)


def test_wer_upper_bound_values():
    # 96 * Q(5), frozen from the same high-precision evaluation
    assert wer_upper_bound(4, 64, 0.1) == pytest.approx(2.7518550900402616e-05, rel=1e-12)
    assert wer_upper_bound(2, 1, 0.1) == pytest.approx(Q5, rel=1e-12)
    with pytest.raises(ValueError):
        wer_upper_bound(4, 64, 0.0)


def test_wer_upper_bound_monotone():
    for sig_lo, sig_hi in [(0.05, 0.1), (0.1, 0.2)]:
        assert wer_upper_bound(4, 64, sig_lo) < wer_upper_bound(4, 64, sig_hi)
    assert wer_upper_bound(4, 32, 0.1) < wer_upper_bound(4, 64, 0.1)


def test_binomial_ci():
    low, high = binomial_ci(0, 100)
    assert low == 0.0 and 0.0 < high < 0.05
    low, high = binomial_ci(50, 100)
    assert low < 0.5 < high
    assert (0.5 - low) == pytest.approx(high - 0.5, abs=1e-12)
    # Wilson values frozen from an independent evaluation of the formula
    low, high = binomial_ci(10, 1000)
    assert low == pytest.approx(0.00544075444553, rel=1e-9)
    assert high == pytest.approx(0.0183094688703, rel=1e-9)
    with pytest.raises(ValueError):
        binomial_ci(5, 4)


def test_wer_estimate():
    est = WerEstimate.from_counts(10, 1000)
    assert est.wer == pytest.approx(0.01)
    assert est.ci_low <= est.wer <= est.ci_high
    other = WerEstimate.from_counts(12, 1000)
    assert est.overlaps(other) and other.overlaps(est)
    far = WerEstimate.from_counts(500, 1000)
    assert not est.overlaps(far)
