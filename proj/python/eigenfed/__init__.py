"""Distributed eigenspace estimation with Procrustes fixing."""

from ._eigenfed import (
    ConfigError,
    EigenfedError,
    aggregate,
    bound_simplified,
    dist2,
    distF,
    intdim,
    local_covariance,
    model_m1,
    model_m2,
    procrustes_rotation,
    run_experiment,
    sample_gaussian,
    solve_local,
    top_eigenspace,
)

__all__ = [
    "ConfigError",
    "EigenfedError",
    "aggregate",
    "bound_simplified",
    "dist2",
    "distF",
    "intdim",
    "local_covariance",
    "model_m1",
    "model_m2",
    "procrustes_rotation",
    "run_experiment",
    "sample_gaussian",
    "solve_local",
    "top_eigenspace",
]
