"""Seeded Monte Carlo engine: sweep SNR for a (channel, codebook, detector) combo.

Trials are generated and detected in fixed-size blocks. Block k of an SNR
point draws all its randomness from a child stream keyed by (master seed,
SNR value, k), and a trial's position inside its block is fixed, so the
outcome of trial t depends only on (seed, snr_db, t) — never on execution
order, thread count, or the total trial budget. Aggregation over blocks is
commutative counting, applied in block order.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .channel import sample_offsets, snr_to_sigma
from .codebook import PearsonCodebook, pearson_code_size
from .detectors import (
    DETECTOR_IDS,
    KMEANS_VARIANTS,
    BatchDetection,
    batch_ftd,
    batch_kmeans,
    batch_minmax,
    batch_pearson,
)
from .metrics import WerEstimate

__all__ = [
    "BLOCK_TRIALS",
    "SweepConfig",
    "TrialOutcome",
    "SweepPoint",
    "WerCurve",
    "run_trial",
    "run_sweep",
    "default_thread_count",
]

# Fixed block size. Part of the reproducibility contract: changing it would
# change which child stream feeds which trial.
BLOCK_TRIALS = 4096

_U64 = 1 << 64
# Reserved stream tag for the single per-sweep offsets draw; SNR keys are
# derived from millidB values and cannot collide with it in practice.
_OFFSETS_TAG = (1 << 63) + 0x4F464653

CHANNEL_KINDS = ("ideal", "per-level", "linear")
_SIG_BASE = np.uint64(1099511628211)

_env_threads = "MISMATCH_DETECT_THREADS"


def default_thread_count() -> int:
    """Thread count from the MISMATCH_DETECT_THREADS environment variable (default 1)."""
    raw = os.environ.get(_env_threads, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines a WER sweep, including its randomness."""

    q: int
    n: int
    detector: str
    channel: str = "ideal"
    sigma_b: float = 0.0
    a: float = 1.0
    b: float = 0.0
    constrained: bool = False
    snr_start: float = 14.0
    snr_stop: float = 24.0
    snr_step: float = 1.0
    trials: int = 10000
    seed: int = 1
    offsets_per: str = "word"
    stop_on_error_count: Optional[int] = None
    snr_ref: str = "unit"
    collect_decodes: bool = False
    max_iter: int = 50

    def __post_init__(self) -> None:
        if self.q < 2 or self.n < 1:
            raise ValueError("need q >= 2 and n >= 1")
        if self.detector not in DETECTOR_IDS:
            raise ValueError(f"unknown detector {self.detector!r}; choose from {DETECTOR_IDS}")
        if self.channel not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel {self.channel!r}; choose from {CHANNEL_KINDS}")
        if self.sigma_b < 0:
            raise ValueError("sigma_b must be >= 0")
        if self.a <= 0:
            raise ValueError("gain a must be > 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.offsets_per not in ("word", "sweep"):
            raise ValueError("offsets_per must be 'word' or 'sweep'")
        if self.snr_ref not in ("unit", "gain"):
            raise ValueError("snr_ref must be 'unit' or 'gain'")
        if self.snr_ref == "gain" and self.channel != "linear":
            raise ValueError("snr_ref='gain' only applies to the linear channel")
        if self.stop_on_error_count is not None and self.stop_on_error_count < 1:
            raise ValueError("stop_on_error_count must be >= 1 when set")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.snr_grid():
            raise ValueError("SNR grid is empty")
        if self.constrained and pearson_code_size(self.n, self.q) == 0:
            raise ValueError(f"Pearson code is empty for n={self.n}, q={self.q}")

    def snr_grid(self) -> list[float]:
        """SNR points from start to stop inclusive (when the step divides the range)."""
        if self.snr_step <= 0:
            if self.snr_stop != self.snr_start:
                raise ValueError("snr_step must be > 0 for a multi-point grid")
            return [float(self.snr_start)]
        count = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [float(self.snr_start + k * self.snr_step) for k in range(max(count, 0))]

    def sigma_for(self, snr_db: float) -> float:
        gain = self.a if self.snr_ref == "gain" else 1.0
        return snr_to_sigma(snr_db, gain=gain)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        data = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one transmitted word: what was sent, decoded, and how."""

    snr_db: float
    trial_index: int
    sent: tuple[int, ...]
    decoded: tuple[int, ...]
    error: bool
    iterations: int
    converged: bool
    flags: frozenset


@dataclass
class SweepPoint:
    """Aggregated outcomes for one SNR grid point."""

    snr_db: float
    sigma: float
    estimate: WerEstimate
    iteration_hist: Counter
    mean_iterations: float
    degenerate_count: int
    gain_clamped_count: int
    order_repaired_count: int
    wcss_violations: int
    decode_signatures: Optional[np.ndarray] = None

    @property
    def trials_run(self) -> int:
        return self.estimate.trials

    def hist_buckets(self) -> tuple[int, int, int, int]:
        """Counts of trials taking 1, 2, 3, and >= 4 iterations."""
        t1 = self.iteration_hist.get(1, 0)
        t2 = self.iteration_hist.get(2, 0)
        t3 = self.iteration_hist.get(3, 0)
        t4 = sum(c for t, c in self.iteration_hist.items() if t >= 4)
        return (t1, t2, t3, t4)


@dataclass
class WerCurve:
    """Per-SNR aggregation of a whole sweep, in grid order."""

    config: SweepConfig
    points: list[SweepPoint] = field(default_factory=list)


# ---------------------------------------------------------------------------
# trial generation
# ---------------------------------------------------------------------------

def _snr_key(snr_db: float) -> int:
    return int(round(snr_db * 1000.0)) % _U64


def _block_rng(seed: int, snr_db: float, block: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(seed % _U64, _snr_key(snr_db), block))
    )


def _sweep_offsets(cfg: SweepConfig) -> Optional[np.ndarray]:
    """The single offsets vector used by every trial when offsets_per='sweep'."""
    if cfg.channel != "per-level" or cfg.offsets_per != "sweep":
        return None
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(cfg.seed % _U64, _OFFSETS_TAG)))
    return sample_offsets(cfg.q, cfg.sigma_b, rng)


def _draw_codewords(rng: np.random.Generator, cfg: SweepConfig) -> np.ndarray:
    X = rng.integers(0, cfg.q, size=(BLOCK_TRIALS, cfg.n))
    if cfg.constrained:
        bad = ~((X.min(1) == 0) & (X.max(1) == cfg.q - 1))
        idx = np.nonzero(bad)[0]
        while idx.size:
            fresh = rng.integers(0, cfg.q, size=(idx.size, cfg.n))
            X[idx] = fresh
            ok = (fresh.min(1) == 0) & (fresh.max(1) == cfg.q - 1)
            idx = idx[~ok]
    return X


def _draw_offsets(rng: np.random.Generator, cfg: SweepConfig) -> np.ndarray:
    half = math.sqrt(3.0) * cfg.sigma_b
    offs = rng.uniform(-half, half, size=(BLOCK_TRIALS, cfg.q))
    # Redraw any vector violating the level-ordering premise; unreachable for
    # sigma_b < 1/(2*sqrt(3)) but kept as a hard invariant.
    bad = (offs[:, :-1] - offs[:, 1:] >= 1.0).any(1)
    idx = np.nonzero(bad)[0]
    while idx.size:
        fresh = rng.uniform(-half, half, size=(idx.size, cfg.q))
        offs[idx] = fresh
        ok = ~(fresh[:, :-1] - fresh[:, 1:] >= 1.0).any(1)
        idx = idx[~ok]
    return offs


def _generate_block(
    cfg: SweepConfig, snr_db: float, sigma: float, block: int,
    sweep_offsets: Optional[np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """Sent codewords and received words for one full block of trials.

    The draw order (codewords, then per-word offsets, then noise) is fixed;
    blocks are always generated at full size so a trial's data never depends
    on the configured trial budget.
    """
    rng = _block_rng(cfg.seed, snr_db, block)
    X = _draw_codewords(rng, cfg)
    Xf = X.astype(np.float64)
    if cfg.channel == "per-level":
        if cfg.offsets_per == "word":
            offs = _draw_offsets(rng, cfg)
            signal = Xf + np.take_along_axis(offs, X, axis=1)
        else:
            signal = Xf + sweep_offsets[X]
    elif cfg.channel == "linear":
        signal = cfg.a * Xf + cfg.b
    else:
        signal = Xf
    R = signal + sigma * rng.standard_normal(X.shape) if sigma > 0 else signal
    return X, R


def _detect_block(cfg: SweepConfig, R: np.ndarray, book: Optional[PearsonCodebook]) -> BatchDetection:
    if cfg.detector == "ftd":
        return batch_ftd(R, cfg.q)
    if cfg.detector == "minmax":
        return batch_minmax(R, cfg.q)
    if cfg.detector == "pearson":
        return batch_pearson(R, book)
    variant = replace(KMEANS_VARIANTS[cfg.detector], max_iter=cfg.max_iter)
    return batch_kmeans(R, cfg.q, variant)


def _signatures(decoded: np.ndarray) -> np.ndarray:
    """Stable 64-bit fingerprint of each decoded word (order-preserving hash)."""
    n = decoded.shape[1]
    with np.errstate(over="ignore"):
        powers = np.power(_SIG_BASE, np.arange(n, dtype=np.uint64))
        return ((decoded.astype(np.uint64) + np.uint64(1)) * powers[None, :]).sum(
            1, dtype=np.uint64
        )


@dataclass
class _BlockStats:
    used: int
    errors: int
    hist: Counter
    iter_sum: int
    degenerate: int
    gain_clamped: int
    order_repaired: int
    wcss_violations: int
    signatures: Optional[np.ndarray]


def _run_block(
    cfg: SweepConfig, snr_db: float, sigma: float, block: int,
    used: int, sweep_offsets: Optional[np.ndarray], book: Optional[PearsonCodebook],
) -> _BlockStats:
    X, R = _generate_block(cfg, snr_db, sigma, block, sweep_offsets)
    X, R = X[:used], R[:used]
    det = _detect_block(cfg, R, book)
    errors = (det.decoded != X).any(1) | det.degenerate
    values, counts = np.unique(det.iterations, return_counts=True)
    hist = Counter({int(t): int(c) for t, c in zip(values, counts)})
    return _BlockStats(
        used=used,
        errors=int(errors.sum()),
        hist=hist,
        iter_sum=int(det.iterations.sum()),
        degenerate=int(det.degenerate.sum()),
        gain_clamped=int(det.gain_clamped.sum()),
        order_repaired=int(det.order_repaired.sum()),
        wcss_violations=int((~det.wcss_ok).sum()),
        signatures=_signatures(det.decoded) if cfg.collect_decodes else None,
    )


def _make_book(cfg: SweepConfig) -> Optional[PearsonCodebook]:
    if cfg.detector != "pearson":
        return None
    book = PearsonCodebook(cfg.n, cfg.q)
    book.member_matrix()  # materialize once, shared across blocks
    return book


def run_trial(cfg: SweepConfig, snr_db: float, trial_index: int) -> TrialOutcome:
    """Replay a single trial; bit-identical to its counterpart inside run_sweep."""
    if trial_index < 0:
        raise ValueError("trial_index must be >= 0")
    sigma = cfg.sigma_for(snr_db)
    block, row = divmod(trial_index, BLOCK_TRIALS)
    X, R = _generate_block(cfg, snr_db, sigma, block, _sweep_offsets(cfg))
    det = _detect_block(cfg, R[row : row + 1], _make_book(cfg))
    res = det.result(0)
    sent = tuple(int(s) for s in X[row])
    return TrialOutcome(
        snr_db=snr_db,
        trial_index=trial_index,
        sent=sent,
        decoded=res.decoded,
        error=res.decoded != sent or res.degenerate,
        iterations=res.iterations,
        converged=res.converged,
        flags=res.flags,
    )


def _aggregate_point(cfg: SweepConfig, snr_db: float, sigma: float, stats: list[_BlockStats]) -> SweepPoint:
    trials_run = sum(s.used for s in stats)
    errors = sum(s.errors for s in stats)
    hist: Counter = Counter()
    for s in stats:
        hist.update(s.hist)
    signatures = None
    if cfg.collect_decodes:
        signatures = np.concatenate([s.signatures for s in stats]) if stats else np.empty(0, np.uint64)
    return SweepPoint(
        snr_db=snr_db,
        sigma=sigma,
        estimate=WerEstimate.from_counts(errors, trials_run),
        iteration_hist=hist,
        mean_iterations=sum(s.iter_sum for s in stats) / trials_run,
        degenerate_count=sum(s.degenerate for s in stats),
        gain_clamped_count=sum(s.gain_clamped for s in stats),
        order_repaired_count=sum(s.order_repaired for s in stats),
        wcss_violations=sum(s.wcss_violations for s in stats),
        decode_signatures=signatures,
    )


def _run_point(
    cfg: SweepConfig, snr_db: float, threads: int,
    sweep_offsets: Optional[np.ndarray], book: Optional[PearsonCodebook],
) -> SweepPoint:
    sigma = cfg.sigma_for(snr_db)
    n_blocks = (cfg.trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS
    sizes = [min(BLOCK_TRIALS, cfg.trials - k * BLOCK_TRIALS) for k in range(n_blocks)]
    stop = cfg.stop_on_error_count

    committed: list[_BlockStats] = []
    running_errors = 0

    def commit(stats: _BlockStats) -> bool:
        """Append one block's stats; True once the early-stop rule says halt."""
        nonlocal running_errors
        committed.append(stats)
        running_errors += stats.errors
        return stop is not None and running_errors >= stop

    if threads <= 1:
        for k in range(n_blocks):
            if commit(_run_block(cfg, snr_db, sigma, k, sizes[k], sweep_offsets, book)):
                break
    else:
        # Waves of parallel blocks; the early-stop decision is applied in block
        # order over each completed wave, so results match the sequential path.
        with ThreadPoolExecutor(max_workers=threads) as pool:
            k = 0
            stopped = False
            while k < n_blocks and not stopped:
                wave = range(k, min(k + 2 * threads, n_blocks))
                futures = [
                    pool.submit(_run_block, cfg, snr_db, sigma, j, sizes[j], sweep_offsets, book)
                    for j in wave
                ]
                for fut in futures:
                    if commit(fut.result()):
                        stopped = True
                        break
                k = wave.stop
    return _aggregate_point(cfg, snr_db, sigma, committed)


def run_sweep(cfg: SweepConfig, threads: Optional[int] = None) -> WerCurve:
    """Run the full SNR sweep; identical output for any thread count."""
    threads = default_thread_count() if threads is None else max(1, threads)
    sweep_offsets = _sweep_offsets(cfg)
    book = _make_book(cfg)
    curve = WerCurve(config=cfg)
    for snr_db in cfg.snr_grid():
        curve.points.append(_run_point(cfg, snr_db, threads, sweep_offsets, book))
    return curve
