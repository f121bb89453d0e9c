"""Closed-form error bounds and the statistics used to report simulated WER."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["WerEstimate", "q_function", "wer_upper_bound", "binomial_ci"]

# two-sided 95% normal quantile
_Z95 = 1.959963984540054


def q_function(x: float) -> float:
    """Standard Gaussian tail probability Q(x) = P(N(0,1) > x).

    Computed as erfc(x/sqrt(2))/2, which stays accurate deep into the tail.
    """
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def wer_upper_bound(q: int, n: int, sigma: float) -> float:
    """Union bound on the word error rate of fixed threshold detection.

    WER < (2*(q-1)/q) * n * Q(1/(2*sigma)) for the ideal channel; interior
    symbols can err on either side of a level, the two edge symbols on one.
    """
    if q < 2 or n < 1:
        raise ValueError("need q >= 2 and n >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    return (2.0 * (q - 1) / q) * n * q_function(1.0 / (2.0 * sigma))


def binomial_ci(errors: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for an error proportion.

    Wilson behaves sensibly for the tiny error counts that dominate low-WER
    simulation points, where the Wald interval collapses to a point.
    """
    if trials < 1 or errors < 0 or errors > trials:
        raise ValueError("need 0 <= errors <= trials and trials >= 1")
    z = _Z95
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if errors == 0 else max(0.0, center - half)
    high = 1.0 if errors == trials else min(1.0, center + half)
    return (low, high)


@dataclass(frozen=True)
class WerEstimate:
    """Word error rate estimate with its 95% confidence interval."""

    trials: int
    errors: int
    wer: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, errors: int, trials: int) -> "WerEstimate":
        low, high = binomial_ci(errors, trials)
        return cls(trials=trials, errors=errors, wer=errors / trials, ci_low=low, ci_high=high)

    def overlaps(self, other: "WerEstimate") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high
