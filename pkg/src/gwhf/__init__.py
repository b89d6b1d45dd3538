"""Gaussian Weyl-Heisenberg functions: sampling, zeros, statistics and chaos."""
from .chaos import chaos_coefficients, hyperuniformity_verdict, integral_g, two_point_chaos_density
from .kernels import covariance_matrix, cross_covariance, kernel_from_spec, make_pure_kernel
from .polynomials import BiIndexedPoly, RationalPoly, exp_moment, laguerre
from .sampler import Grid, MeanSpec, evaluate_gwhf, sample_gef, sample_stft_field
from .statistics import count_in_disks, fit_growth_exponent, summarize
from .zeros import Disk, Rect, classify_critical_points, find_zeros, poincare_index

__version__ = "0.1.0"

__all__ = [
    "BiIndexedPoly", "RationalPoly", "exp_moment", "laguerre",
    "covariance_matrix", "cross_covariance", "kernel_from_spec", "make_pure_kernel",
    "Grid", "MeanSpec", "evaluate_gwhf", "sample_gef", "sample_stft_field",
    "Disk", "Rect", "find_zeros", "poincare_index", "classify_critical_points",
    "count_in_disks", "summarize", "fit_growth_exponent",
    "chaos_coefficients", "two_point_chaos_density", "integral_g", "hyperuniformity_verdict",
]
