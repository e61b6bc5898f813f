"""Degenerate double phase equation lab."""

from ._core import (
    Error,
    ExponentSet,
    Grid,
    caccioppoli_sides,
    compute_theta,
    compute_tilde_p,
    degiorgi_trace,
    embedding_sides,
    fast_convergence_check,
    fit_blowup_exponent,
    generate_field,
    run_experiment,
    solve,
    supbound_sides,
    validate_params,
)

__all__ = [
    "Error",
    "ExponentSet",
    "Grid",
    "caccioppoli_sides",
    "compute_theta",
    "compute_tilde_p",
    "degiorgi_trace",
    "embedding_sides",
    "fast_convergence_check",
    "fit_blowup_exponent",
    "generate_field",
    "run_experiment",
    "solve",
    "supbound_sides",
    "validate_params",
]
