"""Core value types shared by the channel, codebook, detector and sim modules.

Symbols are small unsigned integers from {0, ..., q-1}; channel outputs are
double-precision reals with a nominal spacing of 1.0 between adjacent levels.
All types here are immutable and safe to share between concurrent tasks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

__all__ = [
    "Alphabet",
    "Codeword",
    "ReceivedWord",
    "ThresholdVector",
    "Centroids",
    "validate_codeword",
    "check_offset_premise",
]


@dataclass(frozen=True)
class Alphabet:
    """The symbol set {0, ..., q-1}."""

    q: int

    def __post_init__(self) -> None:
        if self.q < 2:
            raise ValueError(f"alphabet needs q >= 2 levels, got q={self.q}")

    def symbols(self) -> range:
        return range(self.q)


@dataclass(frozen=True)
class Codeword:
    """An n-symbol word; symbol range is validated against an Alphabet separately."""

    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) == 0:
            raise ValueError("codeword must have length n >= 1")
        if any(int(s) != s or s < 0 for s in self.symbols):
            raise ValueError("codeword symbols must be non-negative integers")
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def __array__(self, dtype=None) -> np.ndarray:
        return np.asarray(self.symbols, dtype=dtype if dtype is not None else np.int64)


@dataclass(frozen=True)
class ReceivedWord:
    """n real-valued channel outputs, one per transmitted symbol."""

    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.samples) == 0:
            raise ValueError("received word must have length n >= 1")
        object.__setattr__(self, "samples", tuple(float(v) for v in self.samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[float]:
        return iter(self.samples)

    def __array__(self, dtype=None) -> np.ndarray:
        return np.asarray(self.samples, dtype=dtype if dtype is not None else np.float64)


def _require_strictly_increasing(values: tuple[float, ...], what: str) -> None:
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{what} must be strictly increasing, got {values}")


@dataclass(frozen=True)
class ThresholdVector:
    """q-1 strictly increasing decision levels for a threshold detector."""

    thresholds: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.thresholds) == 0:
            raise ValueError("threshold vector must be non-empty (q >= 2)")
        object.__setattr__(self, "thresholds", tuple(float(v) for v in self.thresholds))
        _require_strictly_increasing(self.thresholds, "thresholds")

    def __len__(self) -> int:
        return len(self.thresholds)

    def __array__(self, dtype=None) -> np.ndarray:
        return np.asarray(self.thresholds, dtype=dtype if dtype is not None else np.float64)


@dataclass(frozen=True)
class Centroids:
    """q strictly increasing cluster centres, one per symbol level."""

    means: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.means) < 2:
            raise ValueError("need at least two centroids (q >= 2)")
        object.__setattr__(self, "means", tuple(float(v) for v in self.means))
        _require_strictly_increasing(self.means, "centroids")

    def __len__(self) -> int:
        return len(self.means)

    def __array__(self, dtype=None) -> np.ndarray:
        return np.asarray(self.means, dtype=dtype if dtype is not None else np.float64)


def _as_q(alphabet: Union[Alphabet, int]) -> int:
    return alphabet.q if isinstance(alphabet, Alphabet) else int(alphabet)


def validate_codeword(word, alphabet: Union[Alphabet, int]) -> bool:
    """True iff ``word`` is a non-empty sequence of symbols from {0, ..., q-1}."""
    q = _as_q(alphabet)
    syms = np.asarray(word)
    if syms.ndim != 1 or syms.size == 0:
        return False
    if not np.issubdtype(syms.dtype, np.integer):
        if not np.all(syms == np.floor(syms)):
            return False
        syms = syms.astype(np.int64)
    return bool(np.all((syms >= 0) & (syms <= q - 1)))


def check_offset_premise(offsets: Sequence[float]) -> bool:
    """True iff consecutive per-level offsets satisfy b[i-1] - b[i] < 1.

    This keeps the physical level written for symbol i strictly below the one
    written for symbol i+1, which is what makes unambiguous detection possible.
    """
    b = np.asarray(offsets, dtype=np.float64)
    if b.ndim != 1 or b.size < 2:
        raise ValueError("offsets must be a sequence of q >= 2 values")
    return bool(np.all(b[:-1] - b[1:] < 1.0))
