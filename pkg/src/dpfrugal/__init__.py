"""Frugal-1U streaming quantile estimation with differentially private release."""

from dpfrugal.estimator import (
    EstimatorState,
    InitPolicy,
    QuantizationScheme,
    dequantize,
    new_estimator,
    process_stream,
    quantize,
    update,
)
from dpfrugal.mechanisms import (
    AccuracyBound,
    Gaussian,
    Laplace,
    Zcdp,
    gaussian_accuracy,
    laplace_accuracy,
    privatize,
    zcdp_accuracy,
    zcdp_to_approx_dp,
)
from dpfrugal.oracle import RankedSample, exact_quantile, rank, rank_accuracy

__version__ = "0.1.0"

__all__ = [
    "AccuracyBound",
    "EstimatorState",
    "Gaussian",
    "InitPolicy",
    "Laplace",
    "QuantizationScheme",
    "RankedSample",
    "Zcdp",
    "dequantize",
    "exact_quantile",
    "gaussian_accuracy",
    "laplace_accuracy",
    "new_estimator",
    "privatize",
    "process_stream",
    "quantize",
    "rank",
    "rank_accuracy",
    "update",
    "zcdp_accuracy",
    "zcdp_to_approx_dp",
]
