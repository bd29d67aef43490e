"""Noise mechanisms for releasing a terminal Frugal-1U estimate.

Changing one stream item moves the final estimate by at most 2, so every
release path calibrates its noise to sensitivity 2. The formula-level helpers
(``laplace_accuracy`` and friends) keep sensitivity as an argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FRUGAL_SENSITIVITY = 2.0

_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)


def _positive(name: str, value: float) -> None:
    if not value > 0 or math.isinf(value):
        raise ValueError(f"{name} must be a positive finite number, got {value}")


def _unit_open(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class Laplace:
    epsilon: float
    sensitivity: float = FRUGAL_SENSITIVITY

    label = "laplace"

    def __post_init__(self):
        _positive("epsilon", self.epsilon)
        _positive("sensitivity", self.sensitivity)

    @property
    def scale(self) -> float:
        return self.sensitivity / self.epsilon

    @property
    def variance(self) -> float:
        return 2.0 * self.scale**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return laplace_noise_array(self.scale, size, rng)

    def accuracy(self, beta: float) -> AccuracyBound:
        return laplace_accuracy(beta, self.epsilon, self.sensitivity)


@dataclass(frozen=True)
class Gaussian:
    epsilon: float
    delta: float
    sensitivity: float = FRUGAL_SENSITIVITY

    label = "gauss"

    def __post_init__(self):
        _positive("epsilon", self.epsilon)
        _unit_open("delta", self.delta)
        _positive("sensitivity", self.sensitivity)

    @property
    def variance(self) -> float:
        return 2.0 * self.sensitivity**2 * math.log(1.25 / self.delta) / self.epsilon**2

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return gaussian_noise_array(self.sigma, size, rng)

    def accuracy(self, beta: float) -> AccuracyBound:
        return gaussian_accuracy(beta, self.epsilon, self.delta, self.sensitivity)


@dataclass(frozen=True)
class Zcdp:
    rho: float
    sensitivity: float = FRUGAL_SENSITIVITY

    label = "zcdp"

    def __post_init__(self):
        _positive("rho", self.rho)
        _positive("sensitivity", self.sensitivity)

    @property
    def variance(self) -> float:
        return self.sensitivity**2 / (2.0 * self.rho)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return gaussian_noise_array(self.sigma, size, rng)

    def accuracy(self, beta: float) -> AccuracyBound:
        return zcdp_accuracy(beta, self.rho, self.sensitivity)


PrivacySpec = Laplace | Gaussian | Zcdp


@dataclass(frozen=True)
class AccuracyBound:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        _unit_open("beta", self.beta)


def _laplace_from_uniform(u, scale):
    # u on (-1/2, 1/2); u == 0 gives 0
    return -scale * np.sign(u) * np.log(1.0 - 2.0 * np.abs(u))


def _centered_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size) - 0.5
    edge = u == -0.5
    while edge.any():
        u[edge] = rng.random(int(edge.sum())) - 0.5
        edge = u == -0.5
    return u


def laplace_noise_array(scale: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws from Laplace(0, scale) by inverse CDF.

    With ``u`` uniform on (-1/2, 1/2) the draw is
    ``-scale * sign(u) * ln(1 - 2|u|)``; ``u`` comes from ``rng.random() - 0.5``
    and the single excluded point -1/2 is redrawn.
    """
    _positive("scale", scale)
    return _laplace_from_uniform(_centered_uniform(rng, size), scale)


def laplace_noise(scale: float, rng: np.random.Generator) -> float:
    return float(laplace_noise_array(scale, 1, rng)[0])


def gaussian_noise_array(sigma: float, size: int, rng: np.random.Generator) -> np.ndarray:
    _positive("sigma", sigma)
    return sigma * rng.standard_normal(size)


def gaussian_noise(sigma: float, rng: np.random.Generator) -> float:
    return float(gaussian_noise_array(sigma, 1, rng)[0])


def privatize(estimate: int, spec: PrivacySpec, rng: np.random.Generator) -> float:
    """Release a finished estimate with one draw of calibrated noise.

    Call once, after the whole stream has been consumed. The result is not
    rounded back to an integer.
    """
    if isinstance(spec, Laplace):
        noise = laplace_noise(spec.scale, rng)
    elif isinstance(spec, (Gaussian, Zcdp)):
        noise = gaussian_noise(spec.sigma, rng)
    else:
        raise TypeError(f"unknown privacy spec {spec!r}")
    return float(estimate) + noise


# Acklam's rational approximation to the standard normal quantile,
# relative error about 1.15e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _ndtri_approx(p: float) -> float:
    if p < _P_LOW:
        t = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5])
                / ((((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0))
    if p > 1.0 - _P_LOW:
        return -_ndtri_approx(1.0 - p)
    r = p - 0.5
    t = r * r
    return ((((((_A[0] * t + _A[1]) * t + _A[2]) * t + _A[3]) * t + _A[4]) * t + _A[5]) * r
            / (((((_B[0] * t + _B[1]) * t + _B[2]) * t + _B[3]) * t + _B[4]) * t + 1.0))


def erfcinv(y: float) -> float:
    """Inverse complementary error function on (0, 2).

    Starts from Acklam's normal-quantile approximation via
    ``erfcinv(y) = -ndtri(y / 2) / sqrt(2)`` and takes Newton steps on
    ``erfc(x) - y``. Inputs above 1 use ``erfcinv(y) = -erfcinv(2 - y)`` so the
    Newton residual is always taken where erfc is small and accurate.
    """
    if not 0.0 < y < 2.0:
        if y == 0.0:
            return math.inf
        if y == 2.0:
            return -math.inf
        raise ValueError(f"erfcinv is defined on [0, 2], got {y}")
    if y == 1.0:
        return 0.0
    if y > 1.0:
        return -erfcinv(2.0 - y)
    x = -_ndtri_approx(y / 2.0) / _SQRT2
    for _ in range(2):
        err = math.erfc(x) - y
        x += err / (2.0 / _SQRT_PI * math.exp(-x * x))
    return x


def _gauss_tail_multiplier(beta: float) -> float:
    # t such that Pr[Z > t] = beta for standard normal Z; negative for beta > 1/2
    return -_SQRT2 * erfcinv(2.0 * (1.0 - beta))


def laplace_accuracy(beta: float, epsilon: float, s: float = FRUGAL_SENSITIVITY) -> AccuracyBound:
    """alpha = ln(1/beta) * s / epsilon."""
    _unit_open("beta", beta)
    _positive("epsilon", epsilon)
    _positive("s", s)
    return AccuracyBound(math.log(1.0 / beta) * (s / epsilon), beta)


def gaussian_accuracy(beta: float, epsilon: float, delta: float,
                      s: float = FRUGAL_SENSITIVITY) -> AccuracyBound:
    """alpha = -sqrt(2) erfcinv(2(1 - beta)) * sqrt(2 s^2 ln(1.25/delta) / epsilon^2).

    Clamped at 0 for beta >= 1/2, where the formula turns negative.
    """
    _unit_open("beta", beta)
    _positive("epsilon", epsilon)
    _unit_open("delta", delta)
    _positive("s", s)
    sigma = math.sqrt(2.0 * s * s * math.log(1.25 / delta) / epsilon**2)
    return AccuracyBound(max(0.0, _gauss_tail_multiplier(beta) * sigma), beta)


def zcdp_accuracy(beta: float, rho: float, s: float = FRUGAL_SENSITIVITY) -> AccuracyBound:
    """alpha = -sqrt(2) erfcinv(2(1 - beta)) * sqrt(s^2 / (2 rho)), clamped at 0."""
    _unit_open("beta", beta)
    _positive("rho", rho)
    _positive("s", s)
    sigma = math.sqrt(s * s / (2.0 * rho))
    return AccuracyBound(max(0.0, _gauss_tail_multiplier(beta) * sigma), beta)


def zcdp_to_approx_dp(rho: float, delta: float) -> float:
    """epsilon such that rho-zCDP implies (epsilon, delta)-DP (natural log)."""
    _positive("rho", rho)
    _unit_open("delta", delta)
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))
