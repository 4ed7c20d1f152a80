"""Numerical laboratory for strict solutions of stochastic linear parabolic
evolution equations: seeded solvers, structural constant scans, and
path-regularity estimators exposed from the C++ core."""

from ._core import (
    IoError,
    NumericError,
    ValidationError,
    __version__,
    matrix_exponential,
    philox_normal,
    run_experiment,
    sample_brownian,
    solve_preset,
    uniform_grid,
    weighted_holder_norm,
)

__all__ = [
    "IoError",
    "NumericError",
    "ValidationError",
    "__version__",
    "matrix_exponential",
    "philox_normal",
    "run_experiment",
    "sample_brownian",
    "solve_preset",
    "uniform_grid",
    "weighted_holder_norm",
]
