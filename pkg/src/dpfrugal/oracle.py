"""Exact quantiles and ranks over a fully materialized stream.

Only for scoring; it stores every item, which is exactly what the streaming
estimator avoids.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

LOWER = "lower"
UPPER = "upper"


class RankedSample:
    """Immutable sorted copy of a multiset of stream items."""

    def __init__(self, values):
        values = np.array(values, dtype=np.int64).ravel()
        if values.size == 0:
            raise ValueError("sample must be non-empty")
        self.sorted = np.sort(values)
        self.sorted.flags.writeable = False

    def __len__(self) -> int:
        return self.sorted.shape[0]


def _as_sample(sample) -> RankedSample:
    return sample if isinstance(sample, RankedSample) else RankedSample(sample)


def target_rank(n: int, q: float, side: str = LOWER) -> int:
    """1-based rank of the q-quantile: floor (lower) or ceil (upper) of 1 + q(n-1)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile must lie in [0, 1], got {q}")
    # q is read as the decimal it prints as; in floats 1 + 0.7 * 90 floors to 63, not 64
    x = 1 + Fraction(repr(float(q))) * (n - 1)
    if side == LOWER:
        return math.floor(x)
    if side == UPPER:
        return math.ceil(x)
    raise ValueError(f"side must be {LOWER!r} or {UPPER!r}, got {side!r}")


def rank(sample, v) -> int:
    """Number of items <= v. ``v`` may be real (e.g. a noised release)."""
    sample = _as_sample(sample)
    return int(np.searchsorted(sample.sorted, v, side="right"))


def exact_quantile(sample, q: float, side: str = LOWER) -> int:
    sample = _as_sample(sample)
    return int(sample.sorted[target_rank(len(sample), q, side) - 1])


def rank_error(sample, v, q: float) -> int:
    sample = _as_sample(sample)
    return abs(rank(sample, v) - target_rank(len(sample), q))


def rank_accuracy(sample, v, q: float, eps_rank: float) -> bool:
    """True iff the rank of ``v`` sits within ``eps_rank * n`` of the lower q-quantile's rank."""
    if not eps_rank > 0:
        raise ValueError(f"eps_rank must be positive, got {eps_rank}")
    sample = _as_sample(sample)
    return rank_error(sample, v, q) <= eps_rank * len(sample)
