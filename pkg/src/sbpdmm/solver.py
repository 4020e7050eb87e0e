"""BPDMM and stochastic BPDMM.

One iteration, for a node subset ``S`` (all nodes in deterministic mode):

1. mirror average ``y_i = argmin_{y in X} sum_j P_ij B(y, x_j)`` for ``i in S``;
2. local prox ``x_i <- argmin f_i(x) + <x, mu_i - sum_j P_ij mu_j> + rho B(x, y_i)``
   for ``i in S``, every other block is kept;
3. dual sweep ``mu <- mu + tau (Q x)`` on all nodes, ``Q = I - P``.

Steps 1 and 2 read one snapshot of the state and are vectorized over the
subset; the commit happens before the dual sweep.

With the entropy mirror the iterates are carried in log space as well
(``SolverState.log_x``): coordinates away from the optimum shrink
geometrically and underflow to zero in a few hundred iterations, while
their logarithms stay finite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from sbpdmm.mirror import ENTROPY, MirrorDomainError, get_mirror
from sbpdmm.mixing import sigma

log = logging.getLogger(__name__)

MODES = ("stochastic", "deterministic")


class ParameterError(ValueError):
    """Algorithm parameters outside their admissible range."""


class IterationError(RuntimeError):
    """A node update failed; carries the node index and iteration."""

    def __init__(self, message, node=None, iteration=None):
        super().__init__(message)
        self.node = node
        self.iteration = iteration


@dataclass(frozen=True)
class SolverParams:
    rho: float
    tau: float
    gamma: float
    omega: float
    T: int = 1000
    seed: int | None = None
    mode: str = "stochastic"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 < self.omega <= 1.0:
            raise ParameterError(f"omega must lie in (0, 1], got {self.omega}")
        if self.rho <= 0 or self.tau <= 0 or self.gamma <= 0:
            raise ParameterError("rho, tau and gamma must be positive")
        if self.T < 0:
            raise ParameterError("T must be nonnegative")

    @property
    def effective_omega(self) -> float:
        """Fraction of nodes updated per iteration (1 in deterministic mode)."""
        return 1.0 if self.mode == "deterministic" else self.omega


@dataclass(frozen=True)
class SolverState:
    """Stacked ``(m, n)`` primal and dual blocks after `t` iterations.

    `mu_prev` is the dual of the previous iteration; at ``t = 0`` it is
    ``mu0 - tau * Q x0``. `sampled` lists the nodes updated to reach this
    state (None at ``t = 0``).
    """

    x: np.ndarray
    mu: np.ndarray
    mu_prev: np.ndarray
    t: int = 0
    log_x: np.ndarray | None = None
    sampled: tuple | None = None


def default_params(omega, rho, mirror, n, T=1000, seed=None, mode="stochastic") -> SolverParams:
    """Parameters saturating the admissible step-size bound.

    ``gamma = omega*alpha*sigma/2`` and
    ``tau = rho*(omega*alpha*sigma - gamma)/(2 - omega)``.
    """
    if not 0.0 < omega <= 1.0:
        raise ParameterError(f"omega must lie in (0, 1], got {omega}")
    if rho <= 0:
        raise ParameterError("rho must be positive")
    mirror = get_mirror(mirror)
    s = sigma(mirror.p, n)
    gamma = omega * mirror.alpha * s / 2
    tau = rho * (omega * mirror.alpha * s - gamma) / (2 - omega)
    return SolverParams(rho=rho, tau=tau, gamma=gamma, omega=omega, T=T, seed=seed, mode=mode)


def tau_bound(params: SolverParams, mirror, n) -> float:
    mirror = get_mirror(mirror)
    w = params.effective_omega
    return params.rho * (w * mirror.alpha * sigma(mirror.p, n) - params.gamma) / (2 - w)


@dataclass(frozen=True)
class ParamCheck:
    ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


def check_params(params: SolverParams, mirror, n) -> ParamCheck:
    """Check ``tau <= rho(w a s - gamma)/(2 - w)`` and ``0 < gamma < w a s``."""
    mirror = get_mirror(mirror)
    w = params.effective_omega
    was = w * mirror.alpha * sigma(mirror.p, n)
    if not 0 < params.gamma < was:
        return ParamCheck(False, f"gamma bound violated: need 0 < gamma={params.gamma:.6g} < omega*alpha*sigma={was:.6g}")
    bound = tau_bound(params, mirror, n)
    if not params.tau <= bound:
        return ParamCheck(False, f"tau bound violated: tau={params.tau:.6g} > rho(omega*alpha*sigma - gamma)/(2 - omega)={bound:.6g}")
    return ParamCheck(True, "ok")


def subset_size(m: int, omega: float) -> int:
    s = int(np.floor(omega * m + 0.5))
    if s < 1:
        raise ParameterError(f"omega={omega} selects no node out of m={m}")
    return min(s, m)


def sample_nodes(m: int, omega: float, rng) -> np.ndarray:
    """Uniform random subset of ``round(omega * m)`` nodes, sorted."""
    s = subset_size(m, omega)
    return np.sort(rng.choice(m, size=s, replace=False))


def _log_normalize(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _log_mirror_average(log_x, P, nodes):
    return _log_normalize(P[nodes] @ log_x)


def mirror_average(x, P, mirror, nodes=None):
    """Bregman barycenter of the neighbours' blocks, for each node in `nodes`.

    Entropy: normalized weighted geometric mean. Euclidean: weighted
    arithmetic mean, which already lies in the simplex.
    """
    mirror = get_mirror(mirror)
    x = np.asarray(x, dtype=float)
    P = np.asarray(P, dtype=float)
    if nodes is None:
        nodes = np.arange(x.shape[0])
    if mirror.kind == "entropy":
        if np.any(x <= 0):
            bad = int(np.flatnonzero(np.any(x <= 0, axis=1))[0])
            raise MirrorDomainError(f"node {bad} has a nonpositive component")
        return np.exp(_log_mirror_average(np.log(x), P, nodes))
    return P[nodes] @ x


def mirror_average_state(state: SolverState, P, mirror, nodes=None):
    """Mirror average from a solver state; returns ``(y, log_y)``.

    `log_y` is None for the Euclidean map.
    """
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    if nodes is None:
        nodes = np.arange(state.x.shape[0])
    if mirror.kind == "entropy":
        log_x = state.log_x if state.log_x is not None else np.log(state.x)
        log_y = _log_mirror_average(log_x, P, nodes)
        return np.exp(log_y), log_y
    return P[nodes] @ state.x, None


def dual_update(state: SolverState, P, tau) -> SolverState:
    """``mu_i <- mu_i + tau (x_i - sum_j P_ij x_j)`` on every node."""
    P = np.asarray(P, dtype=float)
    mu = state.mu + tau * (state.x - P @ state.x)
    return replace(state, mu=mu, mu_prev=state.mu)


def initial_state(problem, P, params: SolverParams, x0=None, mu0=None, mirror=ENTROPY) -> SolverState:
    """Uniform simplex point on every node and zero duals unless given."""
    m, n = problem.m, problem.n
    P = np.asarray(P, dtype=float)
    x = np.full((m, n), 1.0 / n) if x0 is None else np.array(x0, dtype=float)
    mu = np.zeros((m, n)) if mu0 is None else np.array(mu0, dtype=float)
    if x.shape != (m, n) or mu.shape != (m, n):
        raise ValueError(f"initial blocks must have shape {(m, n)}")
    mu_prev = mu - params.tau * (x - P @ x)
    log_x = None
    if get_mirror(mirror).kind == "entropy":
        if np.any(x <= 0):
            raise MirrorDomainError("initial point must be strictly positive for the entropy map")
        log_x = np.log(x)
    return SolverState(x=x, mu=mu, mu_prev=mu_prev, t=0, log_x=log_x)


def _entropy_prox_log(c, log_y, dual_term, rho):
    return _log_normalize(log_y - (c + dual_term) / rho)


def iterate(state: SolverState, problem, P, mirror, params: SolverParams, rng=None, nodes=None) -> SolverState:
    """One BPDMM iteration on a random subset (or on `nodes` if given)."""
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    m = state.x.shape[0]
    if nodes is None:
        if params.mode == "deterministic":
            nodes = np.arange(m)
        else:
            if rng is None:
                raise ValueError("stochastic mode needs an rng or explicit nodes")
            nodes = sample_nodes(m, params.omega, rng)
    nodes = np.asarray(nodes, dtype=int)

    # both steps read only the t-snapshot
    dual_term = (state.mu - P @ state.mu)[nodes]
    x = state.x.copy()
    log_x = None
    if mirror.kind == "entropy" and hasattr(problem, "costs"):
        src = state.log_x if state.log_x is not None else np.log(state.x)
        if not np.all(np.isfinite(src)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(src), axis=1))[0])
            raise IterationError(f"node {bad} left the entropy domain at iteration {state.t}", bad, state.t)
        log_y = _log_mirror_average(src, P, nodes)
        new_log = _entropy_prox_log(problem.costs[nodes], log_y, dual_term, params.rho)
        log_x = src.copy()
        log_x[nodes] = new_log
        x[nodes] = np.exp(new_log)
    else:
        try:
            y = mirror_average(state.x, P, mirror, nodes)
            x[nodes] = problem.prox(mirror, nodes, y, dual_term, params.rho)
        except (MirrorDomainError, ValueError) as exc:
            raise IterationError(f"{exc} (iteration {state.t})", None, state.t) from exc
        if mirror.kind == "entropy":
            log_x = np.log(x)

    nxt = SolverState(x=x, mu=state.mu, mu_prev=state.mu_prev, t=state.t + 1, log_x=log_x, sampled=tuple(nodes.tolist()))
    nxt = dual_update(nxt, P, params.tau)
    return nxt


def run(problem, P, mirror, params: SolverParams, sink=None, state=None) -> SolverState:
    """Run `params.T` iterations from the default (or given) initial state.

    `sink`, if given, is called with every new state in order; see
    `sbpdmm.diagnostics.Tracer` for one that records trace rows.
    """
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    if params.mode == "stochastic":
        chk = check_params(params, mirror, problem.n)
        if not chk:
            log.warning("parameters outside the convergence guarantee: %s", chk.message)
    if state is None:
        state = initial_state(problem, P, params, mirror=mirror)
    rng = np.random.default_rng(params.seed)
    if sink is not None and hasattr(sink, "start"):
        sink.start(state)
    for _ in range(params.T):
        state = iterate(state, problem, P, mirror, params, rng)
        if sink is not None:
            sink(state)
    return state
