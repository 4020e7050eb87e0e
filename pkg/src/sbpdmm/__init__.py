"""Stochastic Bregman parallel direction method of multipliers.

Solvers, proof-side diagnostics and an experiment runner for distributed
consensus optimization over undirected graphs.
"""

from sbpdmm.graph import Graph, GraphGenerationError, erdos_renyi, is_connected, neighbors
from sbpdmm.mirror import ENTROPY, EUCLIDEAN, MirrorDomainError, MirrorMap, get_mirror
from sbpdmm.mixing import lazy, metropolis_weights, mixing_matrix, second_eigenvalue, sigma, validate
from sbpdmm.problems import (
    Certificate,
    LinearSimplexProblem,
    approximate_certificate,
    random_linear_simplex,
    shared_argmin_linear_simplex,
    solve_exact,
)
from sbpdmm.solver import (
    SolverParams,
    SolverState,
    check_params,
    default_params,
    initial_state,
    iterate,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "ENTROPY",
    "EUCLIDEAN",
    "Graph",
    "GraphGenerationError",
    "LinearSimplexProblem",
    "MirrorDomainError",
    "MirrorMap",
    "SolverParams",
    "SolverState",
    "approximate_certificate",
    "check_params",
    "default_params",
    "erdos_renyi",
    "get_mirror",
    "initial_state",
    "is_connected",
    "iterate",
    "lazy",
    "metropolis_weights",
    "mixing_matrix",
    "neighbors",
    "random_linear_simplex",
    "run",
    "second_eigenvalue",
    "shared_argmin_linear_simplex",
    "sigma",
    "solve_exact",
    "validate",
]
