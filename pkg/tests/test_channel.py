import math

import numpy as np
import pytest

from mismatch_detect.channel import (
    LinearChannel,
    NoiseSpec,
    PerLevelOffsetChannel,
    sample_offsets,
    snr_to_sigma,
    transmit_linear,
    transmit_per_level,
)


def test_snr_to_sigma():
    assert snr_to_sigma(20) == pytest.approx(0.1, rel=1e-12)
    # 10**(-0.85), frozen from a high-precision evaluation
    assert snr_to_sigma(17) == pytest.approx(0.14125375446227543, rel=1e-12)
    assert snr_to_sigma(20, gain=1.5) == pytest.approx(0.15, rel=1e-12)
    with pytest.raises(ValueError):
        snr_to_sigma(20, gain=0.0)


def test_channel_type_validation():
    with pytest.raises(ValueError):
        PerLevelOffsetChannel(offsets=(1.2, 0.1, 0.0), sigma=0.1)
    with pytest.raises(ValueError):
        LinearChannel(gain=-1.0, offset=0.0, sigma=0.1)
    with pytest.raises(ValueError):
        NoiseSpec(sigma=-0.1, seed=1)


def test_transmit_per_level_noiseless():
    rng = np.random.default_rng(0)
    ch = PerLevelOffsetChannel(offsets=(0.0, 0.0, 0.0), sigma=0.0)
    assert transmit_per_level((0, 2, 1), ch, rng).tolist() == [0.0, 2.0, 1.0]
    ch = PerLevelOffsetChannel(offsets=(0.1, -0.05, 0.0), sigma=0.0)
    np.testing.assert_allclose(
        transmit_per_level((0, 1, 1), ch, rng), [0.1, 0.95, 0.95]
    )
    with pytest.raises(ValueError):
        transmit_per_level((0, 3), ch, rng)


def test_transmit_linear_noiseless():
    rng = np.random.default_rng(0)
    ch = LinearChannel(gain=1.0, offset=0.0, sigma=0.0)
    np.testing.assert_array_equal(transmit_linear((0, 1, 3), ch, rng), [0.0, 1.0, 3.0])
    ch = LinearChannel(gain=1.5, offset=0.2, sigma=0.0)
    np.testing.assert_allclose(transmit_linear((0, 3), ch, rng), [0.2, 4.7])


def test_seeded_determinism():
    ch = LinearChannel(gain=0.95, offset=0.0, sigma=0.1)
    r1 = transmit_linear((0, 1, 2, 3), ch, np.random.default_rng(99))
    r2 = transmit_linear((0, 1, 2, 3), ch, np.random.default_rng(99))
    np.testing.assert_array_equal(r1, r2)


def test_sample_offsets_bounds_and_moments():
    rng = np.random.default_rng(7)
    assert sample_offsets(4, 0.0, rng).tolist() == [0.0] * 4
    draws = np.concatenate([sample_offsets(4, 0.1, rng) for _ in range(25_000)])
    half = math.sqrt(3.0) * 0.1
    assert np.all(np.abs(draws) <= half)
    assert draws.var() == pytest.approx(0.01, rel=0.02)
    assert abs(draws.mean()) < 5 * 0.1 / math.sqrt(draws.size)
    with pytest.raises(ValueError):
        sample_offsets(4, -0.1, rng)


def test_sample_offsets_premise_safety_net():
    # sigma_b above 1/(2*sqrt(3)): rejection must still deliver valid vectors
    rng = np.random.default_rng(11)
    for _ in range(200):
        b = sample_offsets(3, 0.5, rng)
        assert np.all(b[:-1] - b[1:] < 1.0)


def test_noise_moments():
    rng = np.random.default_rng(5)
    ch = LinearChannel(gain=1.0, offset=0.0, sigma=0.1)
    x = np.zeros(1_000_000, dtype=np.int64)
    nu = transmit_linear(x, ch, rng)
    assert abs(nu.mean()) < 5 * 0.1 / math.sqrt(nu.size)
    assert nu.var() == pytest.approx(0.01, rel=0.01)
