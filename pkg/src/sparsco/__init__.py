"""Sparsity-constrained optimization: gradient projection Newton pursuit and
classical hard-thresholding solvers, with compressive-sensing benchmarks."""

__version__ = "0.1.0"

from .core import (Objective, SolverConfig, SolverResult, Termination, X0Policy,
                   ProblemKind, config_default, halting_metric, population_std)
from .thresholding import (alpha_stationarity_residual, choose_gamma, hard_threshold,
                           sth_largest_magnitude)
from .objectives import (CsProblem, QcsProblem, compute_lambda_s,
                         restricted_least_squares)
from .gpnp import LineSearchStalled, solve

__all__ = [
    "Objective", "SolverConfig", "SolverResult", "Termination", "X0Policy", "ProblemKind",
    "config_default", "halting_metric", "population_std", "alpha_stationarity_residual",
    "choose_gamma", "hard_threshold", "sth_largest_magnitude", "CsProblem", "QcsProblem",
    "compute_lambda_s", "restricted_least_squares", "LineSearchStalled", "solve",
]
