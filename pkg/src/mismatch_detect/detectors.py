"""Detection algorithms: fixed/dynamic threshold, Pearson distance, k-means.

Every detector is a pure function. The heavy lifting is implemented once on
batches of received words (leading axis = independent words) and the per-word
API wraps the batch kernels with a batch of one, so simulation and unit-level
use exercise identical arithmetic.

Conventions shared by all detectors:
  - a sample exactly on a threshold (or cluster midpoint) is assigned UP, to
    the higher symbol;
  - k-means iteration counts start at 1: ``iterations == 1`` means the first
    assignment already survived one centroid update unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codebook import ENUMERATION_GUARD, PearsonCodebook
from .domain import Centroids, ThresholdVector

__all__ = [
    "DetectionResult",
    "KMeansConfig",
    "BatchDetection",
    "DETECTOR_IDS",
    "KMEANS_VARIANTS",
    "fixed_thresholds",
    "quantize",
    "detect_ftd",
    "ftd_tolerance_ok",
    "detect_minmax",
    "pearson_distance",
    "detect_pearson",
    "init_centroids_nominal",
    "init_centroids_minmax",
    "centroids_to_thresholds",
    "update_centroids_mean",
    "update_centroids_regression",
    "kmeans_detect",
    "within_cluster_ss",
    "batch_ftd",
    "batch_minmax",
    "batch_pearson",
    "batch_kmeans",
]

# Slope clamp for a non-positive regression fit; keeps centroids increasing.
GAIN_EPS = 1e-6

# Allowed slack when checking that the clustering objective never increases:
# pure float round-off, far below any real violation.
_WCSS_RTOL = 1e-9
_WCSS_ATOL = 1e-12

INITS = ("nominal", "minmax", "anchored")
UPDATES = ("cluster-mean", "regression", "regression-offset-only")

DETECTOR_IDS = (
    "ftd",
    "minmax",
    "pearson",
    "kmeans-nominal",
    "kmeans-minmax",
    "kmeans-regression",
    "kmeans-regression-offset",
)


@dataclass(frozen=True)
class KMeansConfig:
    """Choice of centroid initialization and update rule, plus the iteration cap."""

    init: str = "nominal"
    update: str = "cluster-mean"
    max_iter: int = 50

    def __post_init__(self) -> None:
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")
        if self.update not in UPDATES:
            raise ValueError(f"update must be one of {UPDATES}, got {self.update!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


# The offset-only variant keeps unit level spacing, so its initial ladder is
# anchored at the smallest sample rather than stretched between min and max;
# a stretched start would let the first slope-1 update raise the objective.
KMEANS_VARIANTS = {
    "kmeans-nominal": KMeansConfig(init="nominal", update="cluster-mean"),
    "kmeans-minmax": KMeansConfig(init="minmax", update="cluster-mean"),
    "kmeans-regression": KMeansConfig(init="minmax", update="regression"),
    "kmeans-regression-offset": KMeansConfig(init="anchored", update="regression-offset-only"),
}


@dataclass(frozen=True)
class DetectionResult:
    """Decoded word plus how the detector got there."""

    decoded: tuple[int, ...]
    iterations: int
    converged: bool
    final_centroids: Optional[Centroids] = None
    flags: frozenset = frozenset()

    @property
    def degenerate(self) -> bool:
        return "degenerate" in self.flags


@dataclass
class BatchDetection:
    """Per-word results for a batch of independent received words."""

    decoded: np.ndarray  # (B, n) int
    iterations: np.ndarray  # (B,) int
    converged: np.ndarray  # (B,) bool
    degenerate: np.ndarray  # (B,) bool
    gain_clamped: np.ndarray  # (B,) bool
    order_repaired: np.ndarray  # (B,) bool
    wcss_ok: np.ndarray  # (B,) bool; True where the objective never increased
    final_centroids: Optional[np.ndarray] = None  # (B, q)

    def result(self, row: int = 0) -> DetectionResult:
        flags = set()
        if self.degenerate[row]:
            flags.add("degenerate")
        if self.gain_clamped[row]:
            flags.add("gain-clamped")
        if self.order_repaired[row]:
            flags.add("order-repaired")
        if not self.wcss_ok[row]:
            flags.add("wcss-increase")
        centroids = None
        if self.final_centroids is not None and not self.degenerate[row]:
            centroids = Centroids(tuple(self.final_centroids[row]))
        return DetectionResult(
            decoded=tuple(int(s) for s in self.decoded[row]),
            iterations=int(self.iterations[row]),
            converged=bool(self.converged[row]),
            final_centroids=centroids,
            flags=frozenset(flags),
        )


# ---------------------------------------------------------------------------
# threshold machinery
# ---------------------------------------------------------------------------

def fixed_thresholds(q: int) -> ThresholdVector:
    """Equidistant decision levels 0.5, 1.5, ..., q-1.5 for nominal unit spacing."""
    if q < 2:
        raise ValueError("need q >= 2")
    return ThresholdVector(tuple(0.5 + i for i in range(q - 1)))


def quantize(u: float, th) -> int:
    """Map a real sample to the symbol whose decision cell contains it.

    Cells are half-open upward: a sample equal to a threshold takes the higher
    symbol.
    """
    t = np.asarray(th, dtype=np.float64)
    return int(np.searchsorted(t, u, side="right"))


def centroids_to_thresholds(mu) -> ThresholdVector:
    """Midpoints between adjacent centroids; nearest-centroid assignment in threshold form."""
    m = np.asarray(mu, dtype=np.float64)
    return ThresholdVector(tuple(0.5 * (m[1:] + m[:-1])))


def ftd_tolerance_ok(a: float, b: float, q: int) -> bool:
    """True iff fixed threshold detection is error-free at sigma=0 under gain a, offset b.

    Requires every written level a*i + b to fall strictly inside the decision
    cell of symbol i.
    """
    if q < 2:
        raise ValueError("need q >= 2")
    if not b < 0.5:
        return False
    for i in range(1, q - 1):
        if not (i - 0.5 < a * i + b < i + 0.5):
            return False
    return a * (q - 1) + b > q - 1.5


def _assign(R: np.ndarray, mu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid assignment via midpoint thresholds; ties go up."""
    th = 0.5 * (mu[:, 1:] + mu[:, :-1])
    x = (R[:, :, None] >= th[:, None, :]).sum(-1)
    return x, th


def within_cluster_ss(r, assignment, mu) -> float:
    """Sum over samples of squared distance to their assigned centroid."""
    rr = np.asarray(r, dtype=np.float64)
    xx = np.asarray(assignment, dtype=np.int64)
    mm = np.asarray(mu, dtype=np.float64)
    return float(((rr - mm[xx]) ** 2).sum())


def _batch_wcss(R: np.ndarray, mu: np.ndarray, x: np.ndarray) -> np.ndarray:
    return ((R - np.take_along_axis(mu, x, axis=1)) ** 2).sum(1)


# ---------------------------------------------------------------------------
# one-shot detectors
# ---------------------------------------------------------------------------

def batch_ftd(R, q: int) -> BatchDetection:
    """Fixed threshold detection of a batch of received words."""
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    B = R.shape[0]
    th = np.asarray(fixed_thresholds(q))
    decoded = (R[:, :, None] >= th[None, None, :]).sum(-1)
    ones = np.ones(B, dtype=np.int64)
    false = np.zeros(B, dtype=bool)
    return BatchDetection(
        decoded=decoded,
        iterations=ones,
        converged=np.ones(B, dtype=bool),
        degenerate=false.copy(),
        gain_clamped=false.copy(),
        order_repaired=false.copy(),
        wcss_ok=np.ones(B, dtype=bool),
    )


def detect_ftd(r, q: int) -> DetectionResult:
    """Symbol-by-symbol quantization against the fixed equidistant thresholds."""
    return batch_ftd(np.asarray(r, dtype=np.float64)[None, :], q).result()


def batch_minmax(R, q: int) -> BatchDetection:
    """Min-max dynamic threshold detection of a batch of received words.

    Gain and offset are estimated from the extreme samples, which is reliable
    when the codebook guarantees both symbol 0 and symbol q-1 are present.
    """
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    B = R.shape[0]
    lo = R.min(1)
    hi = R.max(1)
    degenerate = hi == lo
    a_hat = np.where(degenerate, 1.0, (hi - lo) / (q - 1))
    th0 = np.asarray(fixed_thresholds(q))
    th = a_hat[:, None] * th0[None, :] + lo[:, None]
    decoded = (R[:, :, None] >= th[:, None, :]).sum(-1)
    decoded[degenerate] = 0
    false = np.zeros(B, dtype=bool)
    return BatchDetection(
        decoded=decoded,
        iterations=np.ones(B, dtype=np.int64),
        converged=~degenerate,
        degenerate=degenerate,
        gain_clamped=false.copy(),
        order_repaired=false.copy(),
        wcss_ok=np.ones(B, dtype=bool),
    )


def detect_minmax(r, q: int) -> DetectionResult:
    """Dynamic threshold detection with gain/offset estimated from min and max samples."""
    r = np.asarray(r, dtype=np.float64)
    if r.size < 2:
        raise ValueError("min-max detection needs n >= 2 samples")
    return batch_minmax(r[None, :], q).result()


# ---------------------------------------------------------------------------
# Pearson distance detection
# ---------------------------------------------------------------------------

def pearson_distance(r, xhat) -> float:
    """1 minus the correlation coefficient between a received word and a candidate.

    Invariant to any positive affine transform of either argument, hence
    insensitive to unknown channel gain and offset. The normalizer is the
    square root of the unnormalized sum of squared deviations.
    """
    rr = np.asarray(r, dtype=np.float64)
    xx = np.asarray(xhat, dtype=np.float64)
    if rr.shape != xx.shape:
        raise ValueError("received word and candidate must have equal length")
    rc = rr - rr.mean()
    xc = xx - xx.mean()
    sr = np.sqrt((rc * rc).sum())
    sx = np.sqrt((xc * xc).sum())
    if sr == 0.0:
        raise ValueError("received word is constant; correlation undefined")
    if sx == 0.0:
        raise ValueError("candidate word is constant; correlation undefined")
    return float(1.0 - (rc * xc).sum() / (sr * sx))


def batch_pearson(R, book: PearsonCodebook) -> BatchDetection:
    """Exhaustive minimum-Pearson-distance decoding of a batch of received words."""
    if book.q**book.n > ENUMERATION_GUARD:
        raise ValueError(
            "codebook too large for exhaustive Pearson detection "
            f"(q**n = {book.q**book.n} > {ENUMERATION_GUARD})"
        )
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    B, n = R.shape
    if n != book.n:
        raise ValueError(f"received word length {n} != codebook n={book.n}")
    M = book.member_matrix().astype(np.float64)
    if M.shape[0] == 0:
        raise ValueError(f"Pearson code is empty for n={book.n}, q={book.q}")
    Mc = M - M.mean(1, keepdims=True)
    sx = np.sqrt((Mc * Mc).sum(1))  # > 0 for every member: no constant words
    Rc = R - R.mean(1, keepdims=True)
    sr = np.sqrt((Rc * Rc).sum(1))
    degenerate = sr == 0.0
    safe_sr = np.where(degenerate, 1.0, sr)
    rho = (Rc @ Mc.T) / (safe_sr[:, None] * sx[None, :])
    # argmin of 1 - rho; members are in lexicographic order so the first
    # minimum is the lexicographically smallest tie.
    idx = np.argmax(rho, axis=1)
    decoded = book.member_matrix()[idx].copy()
    decoded[degenerate] = 0
    false = np.zeros(B, dtype=bool)
    return BatchDetection(
        decoded=decoded,
        iterations=np.ones(B, dtype=np.int64),
        converged=~degenerate,
        degenerate=degenerate,
        gain_clamped=false.copy(),
        order_repaired=false.copy(),
        wcss_ok=np.ones(B, dtype=bool),
    )


def detect_pearson(r, book: PearsonCodebook) -> DetectionResult:
    """Exhaustive search for the codebook member at minimum Pearson distance.

    Desk-scale only: cost is linear in the codebook size. Exact ties are broken
    toward the lexicographically smallest member.
    """
    r = np.asarray(r, dtype=np.float64)
    res = batch_pearson(r[None, :], book)
    if res.degenerate[0]:
        raise ValueError("received word is constant; correlation undefined")
    return res.result()


# ---------------------------------------------------------------------------
# k-means clustering detection
# ---------------------------------------------------------------------------

def init_centroids_nominal(q: int) -> Centroids:
    """Centroids at the nominal levels 0, 1, ..., q-1."""
    if q < 2:
        raise ValueError("need q >= 2")
    return Centroids(tuple(float(i) for i in range(q)))


def init_centroids_minmax(r, q: int) -> Centroids:
    """q centroids equally spaced between the smallest and largest sample.

    The extreme samples anchor the level range, which works because the
    codebook guarantees both symbol 0 and symbol q-1 occur in every word.
    """
    rr = np.asarray(r, dtype=np.float64)
    lo = float(rr.min())
    hi = float(rr.max())
    if hi <= lo:
        raise ValueError("received word is constant; cannot anchor the level range")
    return Centroids(tuple(lo + (hi - lo) * i / (q - 1) for i in range(q)))


def _repair_order(mu_row: np.ndarray, empty_row: np.ndarray) -> None:
    """Restore strict centroid order in place after an update broke it.

    Only a retained empty-cluster centroid can be out of place; move it to the
    midpoint of its neighbours (or mirror past the edge). A final sweep forces
    strict order no matter what.
    """
    q = mu_row.shape[0]
    for j in range(q):
        if not empty_row[j]:
            continue
        left_bad = j > 0 and mu_row[j] <= mu_row[j - 1]
        right_bad = j < q - 1 and mu_row[j] >= mu_row[j + 1]
        if not (left_bad or right_bad):
            continue
        if 0 < j < q - 1:
            mu_row[j] = 0.5 * (mu_row[j - 1] + mu_row[j + 1])
        elif j == 0:
            gap = mu_row[2] - mu_row[1] if q > 2 else 1.0
            mu_row[0] = mu_row[1] - max(gap, 1e-9)
        else:
            gap = mu_row[q - 2] - mu_row[q - 3] if q > 2 else 1.0
            mu_row[q - 1] = mu_row[q - 2] + max(gap, 1e-9)
    for j in range(1, q):
        if mu_row[j] <= mu_row[j - 1]:
            mu_row[j] = mu_row[j - 1] + 1e-9


def _mean_update(
    R: np.ndarray, x: np.ndarray, mu_prev: np.ndarray, q: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster means; empty clusters retain their previous centroid.

    Returns (new centroids, rows needing an order repair).
    """
    mu = mu_prev.copy()
    empty = np.zeros_like(mu, dtype=bool)
    for j in range(q):
        members = x == j
        counts = members.sum(1)
        sums = (R * members).sum(1)
        nz = counts > 0
        mu[nz, j] = sums[nz] / counts[nz]
        empty[:, j] = ~nz
    broken = (np.diff(mu, axis=1) <= 0).any(1)
    for row in np.nonzero(broken)[0]:
        _repair_order(mu[row], empty[row])
    return mu, broken


def _regression_update(
    R: np.ndarray, x: np.ndarray, mu_prev: np.ndarray, q: int, offset_only: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Affine centroid update from a least-squares fit of samples on assigned symbols.

    Returns (new centroids, a_hat, clamped rows, degenerate rows).
    """
    levels = np.arange(q, dtype=np.float64)
    xf = x.astype(np.float64)
    xbar = xf.mean(1)
    rbar = R.mean(1)
    if offset_only:
        b_hat = rbar - xbar
        mu = levels[None, :] + b_hat[:, None]
        B = R.shape[0]
        return mu, np.ones(B), np.zeros(B, dtype=bool), np.zeros(B, dtype=bool)
    xc = xf - xbar[:, None]
    sxx = (xc * xc).sum(1)
    sxy = ((R - rbar[:, None]) * xc).sum(1)
    bad = sxx == 0.0  # all samples in one cluster; keep previous centroids
    a_hat = np.where(bad, 1.0, sxy / np.where(bad, 1.0, sxx))
    clamped = (a_hat <= 0.0) & ~bad
    a_hat = np.where(clamped, GAIN_EPS, a_hat)
    b_hat = rbar - a_hat * xbar
    mu = a_hat[:, None] * levels[None, :] + b_hat[:, None]
    mu[bad] = mu_prev[bad]
    return mu, a_hat, clamped, bad


def update_centroids_mean(r, assignment, prev) -> Centroids:
    """Replace each centroid by the mean of its assigned samples.

    Empty clusters keep their previous centroid; should the retained value be
    out of order relative to freshly computed neighbours, it is moved between
    them so the result is always strictly increasing.
    """
    rr = np.asarray(r, dtype=np.float64)[None, :]
    xx = np.asarray(assignment, dtype=np.int64)[None, :]
    pp = np.asarray(prev, dtype=np.float64)[None, :]
    q = pp.shape[1]
    if xx.min() < 0 or xx.max() > q - 1:
        raise ValueError("assignment indices out of range")
    mu, _ = _mean_update(rr, xx, pp, q)
    return Centroids(tuple(mu[0]))


def update_centroids_regression(
    r, xhat, q: int, offset_only: bool = False
) -> tuple[Centroids, float, float]:
    """Least-squares affine fit of the samples against the tentative symbols.

    Returns the updated centroids a_hat*i + b_hat together with the fitted
    coefficients. A non-positive slope is clamped to a small positive value so
    the centroid order survives; constant tentative words are rejected.
    """
    rr = np.asarray(r, dtype=np.float64)[None, :]
    xx = np.asarray(xhat, dtype=np.int64)[None, :]
    if xx.min() == xx.max():
        raise ValueError("tentative word is constant; regression undefined")
    prev = np.arange(q, dtype=np.float64)[None, :]
    mu, a_hat, _, _ = _regression_update(rr, xx, prev, q, offset_only)
    a = float(a_hat[0])
    b = float(rr.mean() - a * xx.astype(np.float64).mean())
    return Centroids(tuple(mu[0])), a, b


def batch_kmeans(
    R, q: int, cfg: KMeansConfig, history: Optional[list] = None
) -> BatchDetection:
    """k-means clustering detection of a batch of received words.

    Alternates nearest-centroid assignment (equivalently, threshold detection
    at the centroid midpoints) with the configured centroid update until the
    decoded word repeats, tracking per word the iteration tally and whether
    the clustering objective ever increased.
    """
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    B, n = R.shape
    levels = np.arange(q, dtype=np.float64)

    degenerate = np.zeros(B, dtype=bool)
    if cfg.init == "nominal":
        mu = np.tile(levels, (B, 1))
    elif cfg.init == "anchored":
        lo = R.min(1)
        degenerate = R.max(1) == lo
        mu = lo[:, None] + levels[None, :]
    else:
        lo = R.min(1)
        hi = R.max(1)
        degenerate = hi == lo
        span = np.where(degenerate, 1.0, hi - lo)
        mu = lo[:, None] + span[:, None] * (levels / (q - 1))[None, :]

    offset_only = cfg.update == "regression-offset-only"
    use_regression = cfg.update in ("regression", "regression-offset-only")

    x_prev, th = _assign(R, mu)
    w_prev = _batch_wcss(R, mu, x_prev)
    if history is not None:
        history.append(
            {"pass": 1, "centroids": mu[0].copy(), "thresholds": th[0].copy(),
             "assignment": x_prev[0].copy(), "wcss": float(w_prev[0])}
        )

    iterations = np.full(B, cfg.max_iter, dtype=np.int64)
    converged = np.zeros(B, dtype=bool)
    done = np.zeros(B, dtype=bool)
    wcss_ok = np.ones(B, dtype=bool)
    gain_clamped = np.zeros(B, dtype=bool)
    order_repaired = np.zeros(B, dtype=bool)

    x = x_prev
    for pass_no in range(2, cfg.max_iter + 2):
        if use_regression:
            mu, _, clamped, reg_bad = _regression_update(R, x_prev, mu, q, offset_only)
            gain_clamped |= clamped & ~done
            degenerate |= reg_bad & ~done
        else:
            mu, broken = _mean_update(R, x_prev, mu, q)
            order_repaired |= broken & ~done
        w_update = _batch_wcss(R, mu, x_prev)
        wcss_ok &= done | (w_update <= w_prev * (1 + _WCSS_RTOL) + _WCSS_ATOL)

        x, th = _assign(R, mu)
        w = _batch_wcss(R, mu, x)
        wcss_ok &= done | (w <= w_update * (1 + _WCSS_RTOL) + _WCSS_ATOL)
        if history is not None:
            history.append(
                {"pass": pass_no, "centroids": mu[0].copy(), "thresholds": th[0].copy(),
                 "assignment": x[0].copy(), "wcss": float(w[0])}
            )

        stable = (x == x_prev).all(1)
        newly = stable & ~done
        iterations[newly] = pass_no - 1
        converged |= newly
        done |= newly
        if done.all():
            break
        x_prev = x
        w_prev = w

    decoded = x.copy()
    if degenerate.any():
        decoded[degenerate] = 0
        iterations[degenerate] = 1
        converged[degenerate] = False
        wcss_ok[degenerate] = True
    return BatchDetection(
        decoded=decoded,
        iterations=iterations,
        converged=converged,
        degenerate=degenerate,
        gain_clamped=gain_clamped,
        order_repaired=order_repaired,
        wcss_ok=wcss_ok,
        final_centroids=mu,
    )


def kmeans_detect(
    r, q: int, cfg: KMeansConfig = KMeansConfig(), history: Optional[list] = None
) -> DetectionResult:
    """Detect a single received word by iterative k-means clustering.

    Pass a list as ``history`` to record centroids, thresholds and assignment
    after every pass (used by the CLI trace subcommand).
    """
    r = np.asarray(r, dtype=np.float64)
    return batch_kmeans(r[None, :], q, cfg, history=history).result()
