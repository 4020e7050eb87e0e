"""Numerical checks of the convergence guarantees on small instances."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from sbpdmm.diagnostics import (
    corollary_bounds,
    consensus_residual,
    duality_gap,
    exact_expectation_check,
    lyapunov,
    lyapunov_lower_bound,
)
from sbpdmm.mirror import get_mirror
from sbpdmm.solver import SolverParams, check_params, default_params, initial_state, iterate, tau_bound


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_parameter_identity(params: SolverParams, mirror, n) -> CheckOutcome:
    """Default parameters saturate the step-size bound and `params` are admissible."""
    mirror = get_mirror(mirror)
    ref = default_params(params.omega, params.rho, mirror, n, mode=params.mode)
    saturated = ref.tau == tau_bound(ref, mirror, n)
    chk = check_params(params, mirror, n)
    detail = f"tau={params.tau:.6g}, gamma={params.gamma:.6g}; {chk.message}"
    return CheckOutcome("parameter identity", bool(saturated and chk.ok), detail)


def check_theorem_exact(problem, P, mirror, params: SolverParams, cert, iterations, seed=None):
    """One-step expectation inequality at every state of a seeded run.

    Also checks the Lyapunov lower bound along the same run. Returns two
    outcomes and the list of per-step reports.
    """
    rng = np.random.default_rng(params.seed if seed is None else seed)
    state = initial_state(problem, P, params, mirror=mirror)
    slack = cert.slack()
    reports = []
    worst_lemma = np.inf
    for _ in range(iterations):
        reports.append(exact_expectation_check(state, problem, P, mirror, params, cert, slack=slack))
        V = lyapunov(state, cert, params, P, mirror, problem)
        worst_lemma = min(worst_lemma, V - lyapunov_lower_bound(state, cert, params, mirror))
        state = iterate(state, problem, P, mirror, params, rng)
    worst = min((r.margin for r in reports), default=0.0)
    thm = CheckOutcome(
        "theorem one-step expectation",
        all(r.holds for r in reports),
        f"{len(reports)} steps x {reports[0].n_subsets if reports else 0} subsets, worst margin {worst:.3e}, slack {slack:.1e}",
    )
    lem = CheckOutcome(
        "lyapunov lower bound",
        worst_lemma >= -slack,
        f"worst V - bound {worst_lemma:.3e}",
    )
    return thm, lem, reports


def ergodic_samples(problem, P, mirror, params: SolverParams, cert, T, seeds):
    """Per-seed ergodic duality gap and half squared consensus residual."""
    gaps, cons = [], []
    for s in seeds:
        p = dataclasses.replace(params, seed=int(s), T=T)
        rng = np.random.default_rng(p.seed)
        state = initial_state(problem, P, p, mirror=mirror)
        xsum = np.zeros_like(state.x)
        for _ in range(T):
            xsum += state.x
            state = iterate(state, problem, P, mirror, p, rng)
        xbar = xsum / T
        gaps.append(duality_gap(xbar, P, problem, cert))
        cons.append(0.5 * consensus_residual(xbar, P) ** 2)
    return np.array(gaps), np.array(cons)


def check_corollary(problem, P, mirror, params: SolverParams, cert, T, seeds, n_se=2.0):
    """Seed-averaged ergodic bounds with `n_se` standard errors of slack."""
    state0 = initial_state(problem, P, params, mirror=mirror)
    V0 = lyapunov(state0, cert, params, P, mirror, problem)
    bounds = corollary_bounds(V0, params, T, problem.m)
    gaps, cons = ergodic_samples(problem, P, mirror, params, cert, T, seeds)
    k = len(gaps)
    se_g = gaps.std(ddof=1) / np.sqrt(k) if k > 1 else 0.0
    se_c = cons.std(ddof=1) / np.sqrt(k) if k > 1 else 0.0
    ok_g = gaps.mean() <= bounds["duality_gap_bound"] + n_se * se_g
    ok_c = cons.mean() <= bounds["consensus_bound"] + n_se * se_c
    return [
        CheckOutcome(
            "ergodic duality gap bound",
            bool(ok_g),
            f"mean {gaps.mean():.4e} (se {se_g:.1e}) <= V0/(wT) = {bounds['duality_gap_bound']:.4e}",
        ),
        CheckOutcome(
            "ergodic consensus bound",
            bool(ok_c),
            f"mean {cons.mean():.4e} (se {se_c:.1e}) <= V0/(gamma rho T) = {bounds['consensus_bound']:.4e}",
        ),
    ]
