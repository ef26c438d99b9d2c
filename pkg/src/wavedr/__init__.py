"""Wavelet-based estimation of effective dimension reduction (EDR) directions.

The compiled kernels in ``_kernels`` are used when built; otherwise a numpy
fallback with the same results is selected at import (see ``BACKEND``).
"""
from ._backend import BACKEND, available_backends
from .baselines import KernelConfig, SirConfig, kernel_lambda, quadratic_kernel, sir_lambda
from .edr import EdrEstimate, EdrFit, edr_directions, eig_sym, squared_cosine, subspace_r2
from .estimators import (
    EstimatorConfig,
    LambdaMatrix,
    Sample,
    density_estimate,
    g_estimate,
    lambda_hat,
    r_hat,
    read_sample_csv,
    truncated_density,
    write_sample_csv,
)
from .wavelets import FatherWavelet, build_wavelet, eval_phi, kernel_diagnostics, projection_kernel

__all__ = [
    "BACKEND", "available_backends",
    "FatherWavelet", "build_wavelet", "eval_phi", "projection_kernel", "kernel_diagnostics",
    "Sample", "EstimatorConfig", "LambdaMatrix", "density_estimate", "truncated_density",
    "g_estimate", "r_hat", "lambda_hat", "read_sample_csv", "write_sample_csv",
    "EdrEstimate", "EdrFit", "eig_sym", "edr_directions", "squared_cosine", "subspace_r2",
    "SirConfig", "KernelConfig", "sir_lambda", "kernel_lambda", "quadratic_kernel",
]
