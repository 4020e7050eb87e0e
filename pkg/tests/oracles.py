"""Independent reference computations used as test oracles."""

import itertools

import numpy as np


def simplex_grid(n, steps):
    """All points of the simplex with coordinates in multiples of 1/steps."""
    pts = []
    for comp in itertools.product(range(steps + 1), repeat=n - 1):
        if sum(comp) <= steps:
            pts.append(list(comp) + [steps - sum(comp)])
    return np.array(pts, dtype=float) / steps


def grid_argmin(fun, n, steps):
    G = simplex_grid(n, steps)
    vals = np.array([fun(z) for z in G])
    return G[np.argmin(vals)], vals.min()


def entropic_mirror_descent(grad, x0, step, iters):
    """Plain exponentiated-gradient iterations on the simplex."""
    x = np.array(x0, dtype=float)
    for _ in range(iters):
        z = np.log(x) - step * grad(x)
        z -= z.max()
        x = np.exp(z)
        x /= x.sum()
    return x


def naive_mirror_average_entropy(x, P, i):
    """Weighted geometric mean written out node by node."""
    m, n = x.shape
    y = np.ones(n)
    for j in range(m):
        y = y * x[j] ** P[i, j]
    return y / y.sum()


def kl(u, v):
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    s = 0.0
    for a, b in zip(u, v):
        if a > 0:
            s += a * np.log(a / b)
        s += b - a
    return s
