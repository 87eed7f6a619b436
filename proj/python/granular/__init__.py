"""Cooling of granular gases: restitution models, DSMC and Haff's-law diagnostics."""

from ._core import (
    ConfigError,
    DomainError,
    InvariantError,
    NumericError,
    RestitutionModel,
    check_inequalities,
    cli,
    constant_threshold,
    ell0_threshold,
    entropy_knn,
    fit_decay,
    hbar_bound,
    kappa,
    lambert_w,
    meanfield_energy,
    moment_lower_bound,
    nominal_gamma,
    phi,
    psi,
    simulate,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "InvariantError",
    "NumericError",
    "RestitutionModel",
    "check_inequalities",
    "cli",
    "constant_threshold",
    "ell0_threshold",
    "entropy_knn",
    "fit_decay",
    "hbar_bound",
    "kappa",
    "lambert_w",
    "meanfield_energy",
    "moment_lower_bound",
    "nominal_gamma",
    "phi",
    "psi",
    "simulate",
]
