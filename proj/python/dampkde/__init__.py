"""Kernel density estimation for stochastic damping Hamiltonian systems.

Errors raised by the library are ``DampkdeError`` with args
``(message, code, context)``.
"""

from ._dampkde import (
    DampkdeError,
    Prior,
    __version__,
    calibrate_prior,
    covariance_lag,
    derive_seed,
    estimate,
    inverse_beta,
    kernel,
    load_path,
    model_catalog_names,
    rate_sweep,
    select_bandwidths,
    simulate,
    variance_sweep,
    verify_perturbation_bounds,
)

__all__ = [
    "DampkdeError",
    "Prior",
    "__version__",
    "calibrate_prior",
    "covariance_lag",
    "derive_seed",
    "estimate",
    "inverse_beta",
    "kernel",
    "load_path",
    "model_catalog_names",
    "rate_sweep",
    "select_bandwidths",
    "simulate",
    "variance_sweep",
    "verify_perturbation_bounds",
]
