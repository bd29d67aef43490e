"""Frugal-1U: one unit of memory tracking a single quantile of an integer stream.

The estimate moves by at most one unit per item. An item above the estimate
pushes it up when the coin ``u`` exceeds ``1 - q``; an item below pushes it
down when ``u`` exceeds ``q``; ties never move it. Exactly one uniform draw is
consumed per item, whether or not the estimate moves, so two runs over
equal-length streams with equal seeds see identical coins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

import numpy as np
from numba import njit

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
# float64 bounds: 2**63 itself is not an int64, -2**63 is
_FLOAT_HI = 9.223372036854775807e18
_FLOAT_LO = -9.223372036854775808e18

COIN_CHUNK = 1 << 18


class InitPolicy(enum.Enum):
    ZERO = "zero"
    FIRST_ITEM = "first"


@dataclass(frozen=True)
class EstimatorState:
    q: float
    m_tilde: int = 0
    items_seen: int = 0
    init_policy: InitPolicy = InitPolicy.ZERO


def new_estimator(q: float, init_policy: InitPolicy = InitPolicy.ZERO) -> EstimatorState:
    if not 0.0 <= q <= 1.0 or math.isnan(q):
        raise ValueError(f"quantile must lie in [0, 1], got {q}")
    return EstimatorState(q=float(q), init_policy=InitPolicy(init_policy))


def update(state: EstimatorState, item: int, u: float) -> EstimatorState:
    """Apply one Frugal-1U step with the caller-supplied coin ``u``."""
    if state.items_seen == 0 and state.init_policy is InitPolicy.FIRST_ITEM:
        return replace(state, m_tilde=int(item), items_seen=1)
    m = state.m_tilde
    if item > m and u > 1.0 - state.q:
        m += 1
    elif item < m and u > state.q:
        m -= 1
    return replace(state, m_tilde=m, items_seen=state.items_seen + 1)


@njit(cache=True, nogil=True)
def fold(m, q, items, coins):
    """Fold the update rule over ``items`` starting from estimate ``m``.

    Branch-free so the per-item cost does not depend on q or on the data.
    """
    up = 1.0 - q
    for i in range(items.shape[0]):
        s = items[i]
        u = coins[i]
        m += np.int64((s > m) & (u > up)) - np.int64((s < m) & (u > q))
    return m


@njit(cache=True, nogil=True)
def coupled_fold(m, q, items, coins, pos, replacement):
    """Run two estimators sharing every coin over streams that differ only at ``pos``.

    Returns ``(immediate, persistent)``: the gap right after ``pos`` and the
    largest gap seen at any step from ``pos`` to the end.
    """
    up = 1.0 - q
    for i in range(pos):
        s = items[i]
        u = coins[i]
        m += np.int64((s > m) & (u > up)) - np.int64((s < m) & (u > q))
    a = m
    b = m
    u = coins[pos]
    s = items[pos]
    a += np.int64((s > a) & (u > up)) - np.int64((s < a) & (u > q))
    s = replacement
    b += np.int64((s > b) & (u > up)) - np.int64((s < b) & (u > q))
    immediate = abs(a - b)
    persistent = immediate
    for i in range(pos + 1, items.shape[0]):
        s = items[i]
        u = coins[i]
        a += np.int64((s > a) & (u > up)) - np.int64((s < a) & (u > q))
        b += np.int64((s > b) & (u > up)) - np.int64((s < b) & (u > q))
        d = abs(a - b)
        if d > persistent:
            persistent = d
    return immediate, persistent


def warm_up() -> None:
    """Load or compile the kernels so later timings exclude JIT cost."""
    items = np.zeros(2, dtype=np.int64)
    coins = np.full(2, 0.5)
    fold(np.int64(0), 0.5, items, coins)
    coupled_fold(np.int64(0), 0.5, items, coins, 0, np.int64(1))


def process_stream(state: EstimatorState, items, rng: np.random.Generator) -> EstimatorState:
    """Fold ``items`` into ``state``, drawing exactly ``len(items)`` coins from ``rng``."""
    items = np.ascontiguousarray(items, dtype=np.int64)
    n = items.shape[0]
    if n == 0:
        return state
    m = state.m_tilde
    seen = state.items_seen
    buf = np.empty(min(n, COIN_CHUNK))
    for lo in range(0, n, COIN_CHUNK):
        hi = min(lo + COIN_CHUNK, n)
        coins = buf[:hi - lo]
        rng.random(out=coins)
        start = 0
        if seen == 0 and state.init_policy is InitPolicy.FIRST_ITEM:
            # the first coin is consumed but unused
            m = int(items[0])
            start = 1
        m = int(fold(np.int64(m), state.q, items[lo + start:hi], coins[start:]))
        seen += hi - lo
    return replace(state, m_tilde=m, items_seen=seen)


@dataclass(frozen=True)
class QuantizationScheme:
    digits: int = 0

    def __post_init__(self):
        if self.digits < 0:
            raise ValueError(f"digits must be non-negative, got {self.digits}")

    @property
    def factor(self) -> float:
        return float(10**self.digits)


def _snap(x: np.ndarray) -> np.ndarray:
    # x = value * 10**digits can land a few ulps under an integer (3.141 * 1000
    # is 3140.9999999999995); treat that as the integer instead of flooring away.
    nearest = np.rint(x)
    close = np.abs(x - nearest) <= 4 * np.spacing(np.abs(x))
    return np.where(close, nearest, np.floor(x))


def quantize_array(values, scheme: QuantizationScheme) -> tuple[np.ndarray, int]:
    """Quantize reals to int64 by ``floor(value * 10**digits)``.

    Out-of-range values saturate to the int64 extremes. Returns the items and
    the number of saturated entries.
    """
    x = np.asarray(values, dtype=np.float64) * scheme.factor
    if np.isnan(x).any():
        raise ValueError("cannot quantize NaN")
    f = _snap(x)
    high = f >= _FLOAT_HI
    low = f < _FLOAT_LO
    out = np.empty(f.shape, dtype=np.int64)
    ok = ~(high | low)
    out[ok] = f[ok].astype(np.int64)
    out[high] = INT64_MAX
    out[low] = INT64_MIN
    return out, int(high.sum() + low.sum())


def quantize(value: float, scheme: QuantizationScheme) -> int:
    items, _ = quantize_array(np.array([value]), scheme)
    return int(items[0])


def dequantize(value, scheme: QuantizationScheme) -> float:
    return value / scheme.factor


def read_stream(path, scheme: QuantizationScheme) -> tuple[np.ndarray, QuantizationScheme, int]:
    """Read a newline-delimited stream file.

    Files written by ``generate`` carry a ``#`` header with ``digits=``; their
    values are already quantized and the header's scheme wins. Any other file
    holds decimal numbers, quantized here with ``scheme``. Returns the items,
    the scheme in effect and the saturation count.
    """
    header_digits = None
    values: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("digits="):
                    header_digits = int(tok.split("=", 1)[1])
            continue
        values.append(line)
    if header_digits is not None:
        return np.array([int(v) for v in values], dtype=np.int64), QuantizationScheme(header_digits), 0
    items, saturated = quantize_array(np.array([float(v) for v in values]), scheme)
    return items, scheme, saturated


def replay(state: EstimatorState, items: Iterable[int], coins: Iterable[float]) -> EstimatorState:
    """Reference fold through ``update`` one item at a time (slow; for checking)."""
    for s, u in zip(items, coins):
        state = update(state, int(s), float(u))
    return state
