"""Linear objectives on the probability simplex, certificates and prox oracles."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sbpdmm.mirror import EUCLIDEAN, MirrorMap, get_mirror, simplex_euclidean_projection

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
EXACT_KKT_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """Iteration cap reached; `residual` holds the best KKT residual seen."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def local_prox_entropy_linear(c, y, dual_term, rho):
    """Closed-form entropic prox for a linear cost on the simplex.

    Minimizes ``<c + dual_term, x> + rho * KL(x, y)`` over the simplex, i.e.
    returns ``normalize(y * exp(-(c + dual_term) / rho))``. Works row-wise.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("entropic prox needs a strictly positive anchor y")
    if rho <= 0:
        raise ValueError("rho must be positive")
    z = np.log(y) - (np.asarray(c, dtype=float) + dual_term) / rho
    z = z - z.max(axis=-1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=-1, keepdims=True)


def local_prox_euclid_linear(c, y, dual_term, rho):
    """Minimizer of ``<c + dual_term, x> + rho/2 ||x - y||^2`` over the simplex."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    y = np.asarray(y, dtype=float)
    return simplex_euclidean_projection(y - (np.asarray(c, dtype=float) + dual_term) / rho)


@dataclass(frozen=True)
class LinearSimplexProblem:
    """``f_i(x_i) = <c_i, x_i>`` with every ``x_i`` on the probability simplex.

    `costs` has one row per node.
    """

    costs: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.costs, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "costs", c)

    @property
    def m(self) -> int:
        return self.costs.shape[0]

    @property
    def n(self) -> int:
        return self.costs.shape[1]

    def node_values(self, x):
        return np.einsum("ij,ij->i", self.costs, np.asarray(x, dtype=float))

    def objective(self, x) -> float:
        return float(np.sum(self.costs * np.asarray(x, dtype=float)))

    def infeasible_node(self, x, tol: float = FEASIBILITY_TOL):
        """Index of the first block off the simplex, or None."""
        x = np.asarray(x, dtype=float)
        bad = (x.min(axis=1) < -tol) | (np.abs(x.sum(axis=1) - 1.0) > tol)
        idx = np.flatnonzero(bad)
        return int(idx[0]) if idx.size else None

    def prox(self, mirror: MirrorMap, nodes, y, dual_term, rho):
        """Exact solution of the local step on `nodes` (rows of `y`, `dual_term`)."""
        c = self.costs[nodes]
        if mirror.kind == "entropy":
            return local_prox_entropy_linear(c, y, dual_term, rho)
        return local_prox_euclid_linear(c, y, dual_term, rho)

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "seed": self.seed, "c": self.costs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSimplexProblem":
        c = np.asarray(d["c"], dtype=float)
        if c.shape != (d["m"], d["n"]):
            raise ValueError(f"cost matrix shape {c.shape} does not match m={d['m']}, n={d['n']}")
        return cls(c, d.get("seed"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "LinearSimplexProblem":
        return cls.from_dict(json.loads(Path(path).read_text()))


def random_linear_simplex(m: int, n: int, seed=None) -> LinearSimplexProblem:
    """Costs drawn i.i.d. standard normal."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = np.random.default_rng(seed)
    return LinearSimplexProblem(rng.standard_normal((m, n)), seed if isinstance(seed, int) else None)


def shared_argmin_linear_simplex(m: int, n: int, seed=None, k: int | None = None) -> LinearSimplexProblem:
    """Gaussian costs rearranged so every node's minimum sits at index `k`.

    Each row's smallest entry is swapped into column `k` (drawn uniformly
    when not given), which makes ``mu* = 0`` an exact dual certificate.
    """
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((m, n))
    if k is None:
        k = int(rng.integers(n))
    rows = np.arange(m)
    j = np.argmin(c, axis=1)
    ck, cj = c[rows, k].copy(), c[rows, j].copy()
    c[rows, j] = ck
    c[rows, k] = cj
    return LinearSimplexProblem(c, seed if isinstance(seed, int) else None)


@dataclass(frozen=True)
class Certificate:
    """Saddle point ``(x*, mu*)`` with optimal value and KKT quality."""

    x_star: np.ndarray
    mu_star: np.ndarray
    f_star: float
    exact: bool
    kkt_residual: float = 0.0

    @property
    def exactness(self) -> str:
        return "exact" if self.exact else "approximate"

    def slack(self, base: float = 1e-9) -> float:
        """Tolerance for proof inequalities evaluated against this certificate."""
        return max(base, 10.0 * self.kkt_residual)


def kkt_residual(problem: LinearSimplexProblem, P, x_star, mu_star) -> float:
    """Worst violation of consensus and dual inclusion at ``(x*, mu*)``.

    The dual part is ``max_z <g_i, z - x_i*>`` over the simplex with
    ``g_i = -(Q mu*)_i - c_i``; it vanishes iff ``g_i`` lies in the normal
    cone at ``x_i*``.
    """
    P = np.asarray(P, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    mu_star = np.asarray(mu_star, dtype=float)
    primal = float(np.max(np.abs(x_star - P @ x_star)))
    g = -(mu_star - P @ mu_star) - problem.costs
    dual = np.max(g, axis=1) - np.einsum("ij,ij->i", g, x_star)
    return max(primal, float(np.max(dual)))


def _consensus_vertex(problem):
    total = problem.costs.sum(axis=0)
    k = int(np.argmin(total))
    x_star = np.zeros((problem.m, problem.n))
    x_star[:, k] = 1.0
    return k, x_star, float(total[k])


def solve_exact(problem: LinearSimplexProblem, P=None) -> Certificate:
    """Optimal consensus vertex with an exact dual certificate.

    The optimum is ``e_k`` with ``k = argmin_k sum_i c_i[k]`` (lowest index on
    ties). ``mu* = 0`` is used when every node shares that argmin. Otherwise,
    with `P` given, the dual solves ``Q mu* = mean(c) - c`` blockwise via the
    pseudo-inverse of ``Q = I - P``; this makes ``-(Q mu*)_i - c_i = -mean(c)``
    which lies in the normal cone at ``e_k``.
    """
    k, x_star, f_star = _consensus_vertex(problem)
    zero = np.zeros_like(x_star)
    c = problem.costs
    if np.all(c[:, k] <= c.min(axis=1)):
        return Certificate(x_star, zero, f_star, True, 0.0)
    if P is None:
        raise ValueError("mu* = 0 is not a certificate here; pass P to build one")
    P = np.asarray(P, dtype=float)
    Q = np.eye(problem.m) - P
    rhs = c.mean(axis=0, keepdims=True) - c
    mu = np.linalg.pinv(Q, hermitian=True) @ rhs
    res = kkt_residual(problem, P, x_star, mu)
    return Certificate(x_star, mu, f_star, res <= EXACT_KKT_TOL, res)


def approximate_certificate(
    problem: LinearSimplexProblem,
    P,
    tol: float = 1e-9,
    mirror: MirrorMap | str = EUCLIDEAN,
    rho: float = 1.0,
    max_iter: int = 100_000,
) -> Certificate:
    """Dual certificate read off a converged deterministic BPDMM run.

    Iterates full-network BPDMM until both the consensus residual of the
    iterates and the KKT residual of ``(x*, mu^t)`` drop below `tol`.

    Raises
    ------
    ConvergenceError
        When `max_iter` iterations do not reach `tol`.
    """
    from sbpdmm.solver import default_params, initial_state, iterate

    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    _, x_star, f_star = _consensus_vertex(problem)
    params = default_params(1.0, rho, mirror, problem.n, T=max_iter, mode="deterministic")
    state = initial_state(problem, P, params)
    best = np.inf
    for _ in range(max_iter):
        state = iterate(state, problem, P, mirror, params)
        cons = float(np.max(np.abs(state.x - P @ state.x)))
        res = max(cons, kkt_residual(problem, P, x_star, state.mu))
        best = min(best, res)
        if res <= tol:
            log.debug("approximate certificate after %d iterations, residual %.3e", state.t, res)
            return Certificate(x_star, state.mu.copy(), f_star, False, res)
    raise ConvergenceError(
        f"certificate residual {best:.3e} above tol {tol:.1e} after {max_iter} iterations", best
    )
