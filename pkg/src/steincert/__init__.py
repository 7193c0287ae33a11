"""Numerical certificates for Lindeberg-index bounds on the limiting Kolmogorov
distance between triangular-array row sums and the standard normal law."""

from .certify import BoundCertificate, CertifyConfig, certify_bounds, optimality_scan
from .constants import ConstantsRecord, constants_pipeline, find_R, identity_checks, sigma_scan
from .distributions import DiscreteDistribution, convolve
from .errors import CertError
from .kolmogorov import CurvePolicy, MonteCarlo, k_curve, k_distance, row_sum_dist
from .stein import TestFunction, bound_suite, solve
from .triangular_array import ArraySpec, WeightFunction, lin_index, relaxed_index

__all__ = [
    "ArraySpec", "BoundCertificate", "CertError", "CertifyConfig", "ConstantsRecord", "CurvePolicy",
    "DiscreteDistribution", "MonteCarlo", "TestFunction", "WeightFunction", "bound_suite", "certify_bounds",
    "constants_pipeline", "convolve", "find_R", "identity_checks", "k_curve", "k_distance", "lin_index",
    "optimality_scan", "relaxed_index", "row_sum_dist", "sigma_scan", "solve",
]
