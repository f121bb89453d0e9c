"""Channel models: per-level offset drift and linear gain/offset mismatch.

Both models add i.i.d. zero-mean Gaussian noise. Offsets model slow drift of
the physical level written for each symbol; the linear model collapses the
drift into a single unknown gain ``a`` and offset ``b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import check_offset_premise, validate_codeword

__all__ = [
    "PerLevelOffsetChannel",
    "LinearChannel",
    "NoiseSpec",
    "sample_offsets",
    "transmit_per_level",
    "transmit_linear",
    "snr_to_sigma",
]

# A zero-mean uniform draw on [-sqrt(3)*s, sqrt(3)*s] has standard deviation s.
_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class PerLevelOffsetChannel:
    """Channel where symbol i is written at level i + offsets[i], then noised."""

    offsets: tuple[float, ...]
    sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "offsets", tuple(float(v) for v in self.offsets))
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not check_offset_premise(self.offsets):
            raise ValueError("offsets violate the level-ordering premise b[i-1]-b[i] < 1")

    @property
    def q(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class LinearChannel:
    """Channel r = a*x + b + noise with unknown positive gain a and offset b."""

    gain: float
    offset: float
    sigma: float

    def __post_init__(self) -> None:
        if self.gain <= 0:
            raise ValueError("gain must be > 0")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise level plus the seed that reproduces its draws."""

    sigma: float
    seed: int

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def sample_offsets(q: int, sigma_b: float, rng: np.random.Generator) -> np.ndarray:
    """Draw q per-level offsets, uniform on [-sqrt(3)*sigma_b, +sqrt(3)*sigma_b].

    The full vector is redrawn if it violates the level-ordering premise; that
    can only happen for sigma_b >= 1/(2*sqrt(3)), the uniform support keeps the
    premise automatically below that.
    """
    if sigma_b < 0:
        raise ValueError("sigma_b must be >= 0")
    if sigma_b == 0:
        return np.zeros(q)
    half = _SQRT3 * sigma_b
    while True:
        b = rng.uniform(-half, half, size=q)
        if check_offset_premise(b):
            return b


def transmit_per_level(x, ch: PerLevelOffsetChannel, rng: np.random.Generator) -> np.ndarray:
    """r_i = x_i + offsets[x_i] + noise_i."""
    xs = np.asarray(x, dtype=np.int64)
    if not validate_codeword(xs, ch.q):
        raise ValueError("codeword symbols out of range for this channel")
    b = np.asarray(ch.offsets)
    r = xs.astype(np.float64) + b[xs]
    if ch.sigma > 0:
        r = r + ch.sigma * rng.standard_normal(xs.shape)
    return r


def transmit_linear(x, ch: LinearChannel, rng: np.random.Generator) -> np.ndarray:
    """r_i = gain*x_i + offset + noise_i."""
    xs = np.asarray(x, dtype=np.int64)
    if np.any(xs < 0):
        raise ValueError("codeword symbols must be non-negative")
    r = ch.gain * xs.astype(np.float64) + ch.offset
    if ch.sigma > 0:
        r = r + ch.sigma * rng.standard_normal(xs.shape)
    return r


def snr_to_sigma(snr_db: float, gain: float = 1.0) -> float:
    """Noise level for a given SNR in dB: sigma = gain * 10**(-snr_db/20)."""
    if gain <= 0:
        raise ValueError("gain must be > 0")
    return gain * 10.0 ** (-snr_db / 20.0)
