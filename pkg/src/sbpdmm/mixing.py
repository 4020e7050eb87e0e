"""Mixing matrices on a graph and their spectral diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sbpdmm.graph import Graph, is_connected

PSD_TOL = 1e-10
STOCHASTIC_TOL = 1e-12


def metropolis_weights(g: Graph) -> np.ndarray:
    """Metropolis-Hastings weights ``1 / (1 + max(deg i, deg j))`` on edges.

    The diagonal absorbs the remaining row mass, so the matrix is symmetric
    and stochastic. It need not be positive semi-definite; see `lazy`.
    """
    m = g.node_count
    deg = g.degrees()
    P = np.zeros((m, m))
    for i, j in g.edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        P[i, j] = P[j, i] = w
    P[np.diag_indices(m)] = 1.0 - P.sum(axis=1)
    return P


def lazy(P: np.ndarray) -> np.ndarray:
    """Return ``(I + P) / 2``; eigenvalues move from ``[-1, 1]`` into ``[0, 1]``."""
    P = np.asarray(P, dtype=float)
    L = 0.5 * P
    L[np.diag_indices_from(L)] += 0.5
    return L


def mixing_matrix(g: Graph) -> np.ndarray:
    """Default construction: lazy Metropolis weights."""
    return lazy(metropolis_weights(g))


def second_eigenvalue(P: np.ndarray) -> float:
    """Second-largest eigenvalue of a symmetric stochastic matrix."""
    P = np.asarray(P, dtype=float)
    if P.shape[0] < 2:
        raise ValueError("second eigenvalue needs at least 2 nodes")
    w = np.linalg.eigvalsh(0.5 * (P + P.T))
    return float(w[-2])


def min_eigenvalue(P: np.ndarray) -> float:
    P = np.asarray(P, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (P + P.T))[0])


def sigma(p: float, n: int) -> float:
    """Norm-equivalence constant ``min(1, n**(2/p - 1))``."""
    if p < 1 or n < 1:
        raise ValueError("sigma needs p >= 1 and n >= 1")
    return min(1.0, float(n) ** (2.0 / p - 1.0))


@dataclass
class Check:
    passed: bool
    violation: float = 0.0


@dataclass
class ValidationReport:
    """Per-check outcome of `validate`; `violation` is the worst magnitude."""

    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list:
        return [name for name, c in self.checks.items() if not c.passed]

    def __getitem__(self, name) -> Check:
        return self.checks[name]

    def __str__(self):
        rows = [
            f"{name:<16} {'ok' if c.passed else 'FAIL'}  violation={c.violation:.3e}"
            for name, c in self.checks.items()
        ]
        return "\n".join(rows)


def _support_connected(P: np.ndarray) -> bool:
    m = P.shape[0]
    edges = [(i, j) for i in range(m) for j in range(i + 1, m) if P[i, j] > 0 or P[j, i] > 0]
    return is_connected(Graph(m, edges))


def validate(P: np.ndarray, g: Graph) -> ValidationReport:
    """Check symmetry, stochasticity, graph support, irreducibility and PSD.

    Also checks that ``P - P @ P`` is positive semi-definite.
    """
    P = np.asarray(P, dtype=float)
    m = g.node_count
    if P.shape != (m, m):
        raise ValueError(f"P has shape {P.shape}, graph has {m} nodes")
    report = ValidationReport()

    asym = float(np.max(np.abs(P - P.T))) if m else 0.0
    report.checks["symmetric"] = Check(asym == 0.0, asym)

    neg = float(max(0.0, -P.min()))
    rows = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
    report.checks["stochastic"] = Check(rows <= STOCHASTIC_TOL and neg == 0.0, max(rows, neg))

    A = g.adjacency()
    off = ~np.eye(m, dtype=bool) & (A == 0)
    stray = float(np.max(np.abs(P[off]), initial=0.0))
    report.checks["graph_support"] = Check(stray == 0.0, stray)

    # irreducible iff the positive off-diagonal pattern connects all nodes
    conn = _support_connected(P)
    report.checks["irreducible"] = Check(conn, 0.0 if conn else 1.0)

    sym = 0.5 * (P + P.T)
    lam_min = float(np.linalg.eigvalsh(sym)[0])
    report.checks["psd"] = Check(lam_min >= -PSD_TOL, max(0.0, -lam_min))

    D = sym - sym @ sym
    d_min = float(np.linalg.eigvalsh(0.5 * (D + D.T))[0])
    report.checks["p_minus_p2_psd"] = Check(d_min >= -PSD_TOL, max(0.0, -d_min))
    return report


def write_csv(P: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(P), delimiter=",", fmt="%.17g")


def read_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))
