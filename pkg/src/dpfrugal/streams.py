"""Seeded synthetic streams for the eight benchmark distributions (D1-D8).

Values are drawn in chunks and quantized on emission, so a long stream is
never held in memory unless the caller asks for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator

import numpy as np

from dpfrugal.estimator import QuantizationScheme, quantize_array
from dpfrugal.rng import DATA, open_uniform, substream

CHUNK = 1 << 16


def _check_positive(**kw):
    for k, v in kw.items():
        if not v > 0 or math.isinf(v):
            raise ValueError(f"{k} must be positive and finite, got {v}")


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1000.0
    name = "uniform"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    def sample(self, rng, size):
        return self.lo + (self.hi - self.lo) * rng.random(size)


@dataclass(frozen=True)
class ChiSquare:
    k: float = 5.0
    name = "chisquare"

    def __post_init__(self):
        _check_positive(k=self.k)

    def sample(self, rng, size):
        return rng.gamma(self.k / 2.0, 2.0, size)


@dataclass(frozen=True)
class Exponential:
    """``alpha`` is the rate by default; ``alpha_is="mean"`` reads it as the mean."""

    alpha: float = 0.5
    alpha_is: str = "rate"
    name = "exponential"

    def __post_init__(self):
        _check_positive(alpha=self.alpha)
        if self.alpha_is not in ("rate", "mean"):
            raise ValueError(f"alpha_is must be 'rate' or 'mean', got {self.alpha_is!r}")

    @property
    def rate(self) -> float:
        return self.alpha if self.alpha_is == "rate" else 1.0 / self.alpha

    def sample(self, rng, size):
        return -np.log1p(-rng.random(size)) / self.rate


@dataclass(frozen=True)
class Lognormal:
    mu: float = 1.0
    sigma: float = 1.5
    name = "lognormal"

    def __post_init__(self):
        _check_positive(sigma=self.sigma)

    def sample(self, rng, size):
        return np.exp(rng.normal(self.mu, self.sigma, size))


@dataclass(frozen=True)
class Normal:
    mu: float = 50.0
    sigma: float = 2.0
    name = "normal"

    def __post_init__(self):
        _check_positive(sigma=self.sigma)

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class Cauchy:
    location: float = 10000.0
    scale: float = 1250.0
    name = "cauchy"

    def __post_init__(self):
        _check_positive(scale=self.scale)

    def sample(self, rng, size):
        return self.location + self.scale * np.tan(np.pi * (open_uniform(rng, size) - 0.5))


@dataclass(frozen=True)
class ExtremeValue:
    """Gumbel; ``kind="max"`` (default) is the right-skewed form, ``"min"`` its mirror."""

    location: float = 20.0
    scale: float = 2.0
    kind: str = "max"
    name = "extremevalue"

    def __post_init__(self):
        _check_positive(scale=self.scale)
        if self.kind not in ("max", "min"):
            raise ValueError(f"kind must be 'max' or 'min', got {self.kind!r}")

    def sample(self, rng, size):
        g = -np.log(-np.log(open_uniform(rng, size)))
        return self.location + self.scale * (g if self.kind == "max" else -g)


@dataclass(frozen=True)
class Gamma:
    shape: float = 2.0
    scale: float = 4.0
    name = "gamma"

    def __post_init__(self):
        _check_positive(shape=self.shape, scale=self.scale)

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.scale, size)


DATASETS = {
    "d1": Uniform,
    "d2": ChiSquare,
    "d3": Exponential,
    "d4": Lognormal,
    "d5": Normal,
    "d6": Cauchy,
    "d7": ExtremeValue,
    "d8": Gamma,
}
BY_NAME = {cls.name: cls for cls in DATASETS.values()}

DistributionSpec = Uniform | ChiSquare | Exponential | Lognormal | Normal | Cauchy | ExtremeValue | Gamma


def dataset_label(spec) -> str:
    for label, cls in DATASETS.items():
        if isinstance(spec, cls):
            return label.upper()
    raise TypeError(f"not a distribution spec: {spec!r}")


def describe(spec) -> str:
    params = " ".join(f"{f.name}={getattr(spec, f.name)}" for f in fields(spec))
    return f"{spec.name} {params}"


def parse_distribution(text: str):
    """Parse ``d5``, ``normal`` or ``normal:mu=0,sigma=1`` into a spec."""
    head, _, rest = text.strip().partition(":")
    key = head.lower()
    cls = DATASETS.get(key) or BY_NAME.get(key)
    if cls is None:
        raise ValueError(f"unknown distribution {head!r}; use d1..d8 or one of {sorted(BY_NAME)}")
    kwargs = {}
    types = {f.name: f.type for f in fields(cls)}
    for part in filter(None, rest.split(",")):
        k, eq, v = part.partition("=")
        k = k.strip()
        if not eq or k not in types:
            raise ValueError(f"bad parameter {part!r} for {cls.name}; expected one of {sorted(types)}")
        kwargs[k] = v.strip() if types[k] == "str" else float(v)
    return cls(**kwargs)


@dataclass
class GeneratedStream:
    """Lazily generated, quantized i.i.d. stream.

    Iterating ``chunks()`` twice replays the same items; ``saturation_count``
    is filled in as chunks are produced.
    """

    spec: object
    n: int
    seed: int
    scheme: QuantizationScheme = QuantizationScheme()
    rep: int = 0
    saturation_count: int = field(default=0, init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"stream length must be >= 1, got {self.n}")

    def raw_chunks(self) -> Iterator[np.ndarray]:
        """Pre-quantization draws, in the same order as ``chunks``."""
        rng = substream(self.seed, self.rep, DATA)
        for lo in range(0, self.n, CHUNK):
            yield self.spec.sample(rng, min(CHUNK, self.n - lo))

    def chunks(self) -> Iterator[np.ndarray]:
        self.saturation_count = 0
        for raw in self.raw_chunks():
            items, saturated = quantize_array(raw, self.scheme)
            self.saturation_count += saturated
            yield items

    def items(self) -> np.ndarray:
        return np.concatenate(list(self.chunks()))


def generate(spec, n: int, seed: int, scheme: QuantizationScheme = QuantizationScheme(),
             rep: int = 0) -> GeneratedStream:
    return GeneratedStream(spec, n, seed, scheme, rep)


def write_stream(stream: GeneratedStream, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(f"# {describe(stream.spec)} seed={stream.seed} rep={stream.rep} "
                f"digits={stream.scheme.digits} n={stream.n}\n")
        for chunk in stream.chunks():
            f.write("\n".join(map(str, chunk.tolist())))
            f.write("\n")
