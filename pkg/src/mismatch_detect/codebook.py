"""Pearson codes: construction, membership, counting and sampling.

A Pearson code used here keeps exactly those words that contain at least one
symbol 0 and at least one symbol q-1. No member is a positive affine image
c1 + c2*x (c2 > 0) of another member, and no member is constant, which is what
lets a detector shrug off unknown gain and offset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .domain import validate_codeword

__all__ = [
    "PearsonCodebook",
    "is_pearson_codeword",
    "pearson_code_size",
    "constant_composition_count",
    "sample_codeword",
    "enumerate_code",
    "check_properties_ab",
    "verify_properties_AB",
    "ENUMERATION_GUARD",
]

# Exhaustive enumeration is desk-scale tooling; refuse anything bigger.
ENUMERATION_GUARD = 10**7


def is_pearson_codeword(x, q: int) -> bool:
    """True iff the word contains both symbol 0 and symbol q-1."""
    xs = np.asarray(x, dtype=np.int64)
    if not validate_codeword(xs, q):
        raise ValueError(f"not a valid codeword for q={q}: {x!r}")
    return bool(xs.min() == 0 and xs.max() == q - 1)


def pearson_code_size(n: int, q: int) -> int:
    """Number of n-symbol q-ary words containing both symbol 0 and symbol q-1.

    Inclusion-exclusion over "missing 0" / "missing q-1":
    q**n - 2*(q-1)**n + (q-2)**n, exact.
    """
    if n < 1 or q < 2:
        raise ValueError("need n >= 1 and q >= 2")
    return q**n - 2 * (q - 1) ** n + (q - 2) ** n


def constant_composition_count(n: int, q: int) -> int:
    """Number of distinct symbol compositions among the allowed words: C(n+q-3, q-1)."""
    if n < 2 or q < 2:
        raise ValueError("need n >= 2 and q >= 2")
    import math

    return math.comb(n + q - 3, q - 1)


def sample_codeword(
    n: int, q: int, rng: np.random.Generator, constrained: bool = True
) -> np.ndarray:
    """Uniform random word: over the Pearson code if constrained, else over all q**n.

    Constrained sampling is by rejection; the acceptance rate is
    1 - 2*(1-1/q)**n + ((q-2)/q)**n, close to 1 for the word lengths used in
    simulation, so no fancier sampler is warranted.
    """
    if n < 1 or q < 2:
        raise ValueError("need n >= 1 and q >= 2")
    if not constrained:
        return rng.integers(0, q, size=n)
    if pearson_code_size(n, q) == 0:
        raise ValueError(f"Pearson code is empty for n={n}, q={q}")
    while True:
        x = rng.integers(0, q, size=n)
        if x.min() == 0 and x.max() == q - 1:
            return x


def _check_guard(n: int, q: int) -> None:
    if q**n > ENUMERATION_GUARD:
        raise ValueError(
            f"enumeration guard exceeded: q**n = {q**n} > {ENUMERATION_GUARD}"
        )


def enumerate_code(n: int, q: int) -> Iterator[tuple[int, ...]]:
    """Yield the Pearson-code members over q-ary words of length n, lexicographically."""
    if n < 1 or q < 2:
        raise ValueError("need n >= 1 and q >= 2")
    _check_guard(n, q)
    hi = q - 1
    for word in itertools.product(range(q), repeat=n):
        if min(word) == 0 and max(word) == hi:
            yield word


def _affine_image(x: Sequence[int], y: Sequence[int]) -> Optional[tuple[Fraction, Fraction]]:
    """If y == c1 + c2*x with c2 > 0, return (c1, c2) as exact rationals, else None."""
    xmin, xmax = min(x), max(x)
    ymin, ymax = min(y), max(y)
    if xmax == xmin:
        return None  # constant x has no positive-slope affine image besides constants
    if ymax == ymin:
        return None  # c2 > 0 cannot flatten a non-constant word
    # A positive-slope affine map sends min to min and max to max.
    c2 = Fraction(ymax - ymin, xmax - xmin)
    c1 = Fraction(ymin) - c2 * xmin
    if all(Fraction(yi) == c1 + c2 * xi for xi, yi in zip(x, y)):
        return (c1, c2)
    return None


def check_properties_ab(words: Iterable[Sequence[int]]) -> bool:
    """Exact check of the two codebook conditions on an explicit word set.

    Property A: no member is c1 + c2*(another member) with c2 > 0 and
    (c1, c2) != (0, 1). Property B: no member is constant. Arithmetic is done
    over exact rationals so integer words never suffer float round-off.
    """
    ws = [tuple(int(s) for s in w) for w in words]
    for w in ws:
        if min(w) == max(w):
            return False  # Property B
    for x, y in itertools.permutations(ws, 2):
        fit = _affine_image(x, y)
        if fit is not None and fit != (Fraction(0), Fraction(1)):
            return False  # Property A
    return True


def verify_properties_AB(n: int, q: int) -> bool:
    """Exhaustively verify Properties A and B for the min/max-constrained code."""
    _check_guard(n, q)
    return check_properties_ab(enumerate_code(n, q))


@dataclass(frozen=True)
class PearsonCodebook:
    """The codebook of n-symbol q-ary words containing both symbol 0 and q-1."""

    n: int
    q: int
    _members: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1 or self.q < 2:
            raise ValueError("need n >= 1 and q >= 2")

    def __contains__(self, x) -> bool:
        xs = np.asarray(x, dtype=np.int64)
        if xs.shape != (self.n,):
            return False
        return is_pearson_codeword(xs, self.q)

    def size(self) -> int:
        return pearson_code_size(self.n, self.q)

    def member_matrix(self) -> np.ndarray:
        """All members as an int array of shape (size, n), in lexicographic order."""
        if self._members is None:
            members = np.asarray(list(enumerate_code(self.n, self.q)), dtype=np.int64)
            if members.size == 0:
                members = members.reshape(0, self.n)
            object.__setattr__(self, "_members", members)
        return self._members
