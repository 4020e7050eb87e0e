"""Proof-side quantities along a run.

Everything here is evaluated against a certificate ``(x*, mu*)``:
Lagrangian and running duality gap, the Lyapunov function ``V(t)``, the
one-step residual ``R(t+1)``, ergodic averages, and an exact-expectation
check that enumerates every node subset of the sampling step.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from sbpdmm.mirror import get_mirror
from sbpdmm.mixing import sigma
from sbpdmm.solver import (
    SolverParams,
    SolverState,
    iterate,
    mirror_average_state,
    subset_size,
)

log = logging.getLogger(__name__)

TRACE_COLUMNS = (
    "t",
    "objective",
    "primal_gap",
    "consensus_residual",
    "duality_gap",
    "lyapunov",
    "ergodic_gap",
    "elapsed_ms",
)

MAX_SUBSETS = 10_000


def sampling_fraction(params: SolverParams, m: int) -> float:
    """Probability that a given node is updated in one iteration."""
    if params.mode == "deterministic":
        return 1.0
    return subset_size(m, params.omega) / m


def _Qx(x, P):
    return x - P @ x


def lagrangian(x, mu, P, problem) -> float:
    """``sum_i f_i(x_i) + <mu, (Q kron I) x>``; +inf if a block is off the simplex."""
    x = np.asarray(x, dtype=float)
    bad = problem.infeasible_node(x)
    if bad is not None:
        log.warning("lagrangian: node %d is infeasible", bad)
        return math.inf
    P = np.asarray(P, dtype=float)
    return problem.objective(x) + float(np.sum(np.asarray(mu) * _Qx(x, P)))


def consensus_residual(x, P) -> float:
    """l2 norm of the stacked disagreement ``x_i - sum_j P_ij x_j``."""
    return float(np.linalg.norm(_Qx(np.asarray(x, dtype=float), np.asarray(P, dtype=float))))


def duality_gap(x, P, problem, cert) -> float:
    """Running duality gap ``L(x, mu*) - L(x*, mu*)``."""
    return lagrangian(x, cert.mu_star, P, problem) - lagrangian(cert.x_star, cert.mu_star, P, problem)


def _bregman_to_state(mirror, u, state: SolverState):
    """Per-node ``B(u_i, x_i)`` using the log iterates when present."""
    if mirror.kind == "entropy" and state.log_x is not None:
        return mirror.bregman(u, state.x, log_v=state.log_x)
    return mirror.bregman(u, state.x)


def lyapunov(state: SolverState, cert, params: SolverParams, P, mirror, problem) -> float:
    """``V(t) = H(x, mu) + w/(2 tau) ||mu* - mu_prev||^2 + rho sum_i B(x*_i, x_i)``.

    ``H(x, mu) = L(x, mu) - L(x*, mu*) - tau ||Q x||^2``.
    """
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    w = sampling_fraction(params, state.x.shape[0])
    H = (
        lagrangian(state.x, state.mu, P, problem)
        - lagrangian(cert.x_star, cert.mu_star, P, problem)
        - params.tau * consensus_residual(state.x, P) ** 2
    )
    dual = w / (2 * params.tau) * float(np.sum((cert.mu_star - state.mu_prev) ** 2))
    breg = params.rho * float(np.sum(_bregman_to_state(mirror, cert.x_star, state)))
    return H + dual + breg


def lyapunov_lower_bound(state: SolverState, cert, params: SolverParams, mirror, n=None) -> float:
    """Positivity bound ``c * sum_i B(x*_i, x_i)`` on the Lyapunov function."""
    mirror = get_mirror(mirror)
    n = state.x.shape[1] if n is None else n
    w = sampling_fraction(params, state.x.shape[0])
    was = w * mirror.alpha * sigma(mirror.p, n)
    coef = ((1 - w) * was * params.rho + params.gamma * params.rho) / ((2 - w) * was)
    return coef * float(np.sum(_bregman_to_state(mirror, cert.x_star, state)))


def residual_R(state_t: SolverState, state_t1: SolverState, S, cert, params: SolverParams, P, mirror, problem) -> float:
    """``R(t+1) = w (L(x^t, mu*) - L*) + rho sum_{i in S} B(x_i^{t+1}, y_i^t) + gamma rho/2 ||Q x^t||^2``."""
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    S = np.asarray(S, dtype=int)
    w = sampling_fraction(params, state_t.x.shape[0])
    gap = duality_gap(state_t.x, P, problem, cert)
    y, log_y = mirror_average_state(state_t, P, mirror, S)
    x1 = state_t1.x[S]
    if mirror.kind == "entropy":
        b = mirror.bregman(x1, y, log_v=log_y)
    else:
        b = mirror.bregman(x1, y)
    cons = consensus_residual(state_t.x, P) ** 2
    return w * gap + params.rho * float(np.sum(b)) + params.gamma * params.rho / 2 * cons


@dataclass
class ExpectationReport:
    expected_R: float
    V_t: float
    expected_V_next: float
    n_subsets: int
    slack: float
    holds: bool

    @property
    def margin(self) -> float:
        """``V(t) - E[V(t+1)] - E[R(t+1)]``; nonnegative when the step is certified."""
        return self.V_t - self.expected_V_next - self.expected_R


def exact_expectation_check(state, problem, P, mirror, params: SolverParams, cert, slack=None, max_subsets=MAX_SUBSETS) -> ExpectationReport:
    """Check ``E_S[R(t+1)] <= V(t) - E_S[V(t+1)]`` by enumerating every subset.

    Subsets have size ``round(omega m)`` and are visited in lexicographic
    order, each with equal weight.
    """
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    m = state.x.shape[0]
    s = m if params.mode == "deterministic" else subset_size(m, params.omega)
    count = math.comb(m, s)
    if count > max_subsets:
        raise ValueError(f"{count} subsets of size {s} from {m} nodes exceeds the cap of {max_subsets}")
    if slack is None:
        slack = cert.slack()
    V_t = lyapunov(state, cert, params, P, mirror, problem)
    R_sum = V_sum = 0.0
    for S in itertools.combinations(range(m), s):
        nxt = iterate(state, problem, P, mirror, params, nodes=S)
        R_sum += residual_R(state, nxt, S, cert, params, P, mirror, problem)
        V_sum += lyapunov(nxt, cert, params, P, mirror, problem)
    ER, EV = R_sum / count, V_sum / count
    return ExpectationReport(ER, V_t, EV, count, slack, ER <= V_t - EV + slack)


def ergodic_average(xs, T=None):
    """Blockwise mean of the first `T` primal iterates."""
    xs = np.asarray(xs, dtype=float)
    T = xs.shape[0] if T is None else T
    if T < 1 or T > xs.shape[0]:
        raise ValueError(f"T must lie in [1, {xs.shape[0]}]")
    return xs[:T].mean(axis=0)


def corollary_bounds(V0: float, params: SolverParams, T: int, m: int) -> dict:
    """O(1/T) bounds on the ergodic duality gap and half squared consensus residual."""
    w = sampling_fraction(params, m)
    return {
        "duality_gap_bound": V0 / (w * T),
        "consensus_bound": V0 / (params.gamma * params.rho * T),
    }


def pythagorean_gap(state: SolverState, P, mirror, u) -> float:
    """``sum_i (B(u, x_i) - B(u, y_i)) - sum_ij P_ij B(y_i, x_j)`` with all-node mirror averages.

    Nonnegative for every ``u`` in the simplex.
    """
    mirror = get_mirror(mirror)
    P = np.asarray(P, dtype=float)
    m = state.x.shape[0]
    y, log_y = mirror_average_state(state, P, mirror)
    U = np.broadcast_to(np.asarray(u, dtype=float), state.x.shape)
    lhs = float(np.sum(_bregman_to_state(mirror, U, state)))
    if log_y is not None:
        lhs -= float(np.sum(mirror.bregman(U, y, log_v=log_y)))
    else:
        lhs -= float(np.sum(mirror.bregman(U, y)))
    # pairwise B(y_i, x_j)
    Yi = np.repeat(y[:, None, :], m, axis=1)
    Xj = np.broadcast_to(state.x[None, :, :], Yi.shape)
    if mirror.kind == "entropy" and state.log_x is not None:
        Lj = np.broadcast_to(state.log_x[None, :, :], Yi.shape)
        B = mirror.bregman(Yi, Xj, log_v=Lj)
    else:
        B = mirror.bregman(Yi, Xj)
    return lhs - float(np.sum(P * B))


def variance_bound_gap(u, v, P, p, n=None) -> float:
    """``sum_ij P_ij ||u_i - v_j||_p^2 - sigma ||(Q kron I) u||_2^2`` (nonnegative)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    P = np.asarray(P, dtype=float)
    n = u.shape[1] if n is None else n
    D = np.linalg.norm(u[:, None, :] - v[None, :, :], ord=p, axis=-1) ** 2
    return float(np.sum(P * D)) - sigma(p, n) * consensus_residual(u, P) ** 2


@dataclass
class TraceRecord:
    t: int
    objective: float
    primal_gap: float
    consensus_residual: float
    duality_gap: float | None = None
    lyapunov: float | None = None
    ergodic_gap: float | None = None
    elapsed_ms: float | None = None


class Tracer:
    """Run sink that records one `TraceRecord` per iteration.

    Pass as ``sink`` to `sbpdmm.solver.run`. Certificate-dependent columns
    stay None without a certificate. `keep_iterates` also stores every
    primal iterate, starting with ``x^0``.
    """

    def __init__(self, problem, P, mirror, params, certificate=None, f_star=None, keep_iterates=False, timing=True):
        self.problem = problem
        self.P = np.asarray(P, dtype=float)
        self.mirror = get_mirror(mirror)
        self.params = params
        self.cert = certificate
        if f_star is None and certificate is not None:
            f_star = certificate.f_star
        self.f_star = f_star
        self.keep_iterates = keep_iterates
        self.timing = timing
        self.records: list[TraceRecord] = []
        self.iterates: list[np.ndarray] = []
        self.V0 = None
        self._xsum = None
        self._t0 = None

    def start(self, state: SolverState):
        self._xsum = state.x.copy()
        self._t0 = time.perf_counter()
        if self.keep_iterates:
            self.iterates.append(state.x.copy())
        if self.cert is not None:
            self.V0 = lyapunov(state, self.cert, self.params, self.P, self.mirror, self.problem)

    def __call__(self, state: SolverState):
        if self._xsum is None:
            raise RuntimeError("Tracer.start was not called with the initial state")
        f = self.problem.objective(state.x)
        gap = f - self.f_star if self.f_star is not None else math.nan
        rec = TraceRecord(state.t, f, gap, consensus_residual(state.x, self.P))
        if self.cert is not None:
            rec.duality_gap = duality_gap(state.x, self.P, self.problem, self.cert)
            rec.lyapunov = lyapunov(state, self.cert, self.params, self.P, self.mirror, self.problem)
            xbar = self._xsum / state.t
            rec.ergodic_gap = duality_gap(xbar, self.P, self.problem, self.cert)
        if self.timing:
            rec.elapsed_ms = 1e3 * (time.perf_counter() - self._t0)
        self._xsum += state.x
        if self.keep_iterates:
            self.iterates.append(state.x.copy())
        self.records.append(rec)

    def column(self, name) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records])


def run_traced(problem, P, mirror, params, certificate=None, f_star=None, keep_iterates=False, timing=True):
    """Run the solver and return ``(final_state, tracer)``."""
    from sbpdmm.solver import run

    tracer = Tracer(problem, P, mirror, params, certificate, f_star, keep_iterates, timing)
    state = run(problem, P, mirror, params, sink=tracer)
    return state, tracer


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def write_trace_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in records:
            w.writerow([_fmt(getattr(r, c)) for c in TRACE_COLUMNS])


def read_trace_csv(path) -> list[TraceRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {c: (None if row[c] == "" else float(row[c])) for c in TRACE_COLUMNS}
            vals["t"] = int(vals["t"])
            out.append(TraceRecord(**vals))
    return out


def mean_trace(traces) -> list[TraceRecord]:
    """Pointwise mean of equally long traces; a column is empty if any trial lacks it."""
    traces = [list(t) for t in traces]
    if not traces:
        return []
    length = min(len(t) for t in traces)
    out = []
    for k in range(length):
        rows = [t[k] for t in traces]
        vals = {"t": rows[0].t}
        for c in TRACE_COLUMNS[1:]:
            col = [getattr(r, c) for r in rows]
            vals[c] = None if any(v is None for v in col) else float(np.mean(col))
        out.append(TraceRecord(**vals))
    return out


def write_summary_json(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, TraceRecord):
        return asdict(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")
