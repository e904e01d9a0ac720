"""Scoring, sampling and estimation for minimum information copulas."""

from ._core import (
    DEFAULT_SWEEPS,
    EstimationResult,
    __version__,
    all_pairs_ckl_score,
    ckl_score,
    derive_seed,
    empirical_ckl_gradient,
    empirical_ckl_hessian,
    empirical_ckl_score,
    estimate_ckl,
    estimate_mle_gaussian,
    gaussian_copula_log_density,
    gaussian_normalizing_function,
    h_vector,
    known_basis_tags,
    loglog_fit,
    pair_randomly,
    register_basis,
    rho_to_theta,
    sample_gaussian_copula,
    sample_minfo_approx,
    std_normal_cdf,
    std_normal_quantile,
    swap_probability,
    theta_to_rho,
)

__all__ = [
    "DEFAULT_SWEEPS",
    "EstimationResult",
    "__version__",
    "all_pairs_ckl_score",
    "ckl_score",
    "derive_seed",
    "empirical_ckl_gradient",
    "empirical_ckl_hessian",
    "empirical_ckl_score",
    "estimate_ckl",
    "estimate_mle_gaussian",
    "gaussian_copula_log_density",
    "gaussian_normalizing_function",
    "h_vector",
    "known_basis_tags",
    "loglog_fit",
    "pair_randomly",
    "register_basis",
    "rho_to_theta",
    "sample_gaussian_copula",
    "sample_minfo_approx",
    "std_normal_cdf",
    "std_normal_quantile",
    "swap_probability",
    "theta_to_rho",
]
