"""Mirror maps, Bregman divergences and simplex projections.

All functions act on the last axis, so a stacked ``(m, n)`` array of node
blocks is handled row by row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import kl_div, xlogy

# entropy gradient is treated as undefined below this
_ENTROPY_FLOOR = 1e-300


class MirrorDomainError(ValueError):
    """A point lies outside the open domain of the mirror map."""


@dataclass(frozen=True)
class MirrorMap:
    """A mirror map ``phi`` with its strong-convexity constants.

    ``B(u, v) >= alpha / 2 * ||u - v||_p**2`` holds on the simplex.
    """

    kind: str
    alpha: float
    p: float

    def _check_domain(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "entropy" and np.any(u <= _ENTROPY_FLOOR):
            raise MirrorDomainError("negative entropy needs strictly positive inputs")
        return u

    def value(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "entropy":
            if np.any(u < 0):
                raise MirrorDomainError("negative entropy undefined for negative entries")
            return np.sum(xlogy(u, u), axis=-1)
        return 0.5 * np.sum(u * u, axis=-1)

    def grad(self, u):
        u = self._check_domain(u)
        if self.kind == "entropy":
            return np.log(u) + 1.0
        return u.copy()

    def grad_inv(self, g):
        g = np.asarray(g, dtype=float)
        if self.kind == "entropy":
            return np.exp(g - 1.0)
        return g.copy()

    def bregman(self, u, v, log_v=None):
        """``phi(u) - phi(v) - <grad phi(v), u - v>``.

        For entropy this is the generalized KL divergence with the
        ``0 ln 0 = 0`` convention in the first argument. Passing `log_v`
        (entropy only) evaluates it from logarithms, which stays finite when
        entries of `v` have underflowed.
        """
        u = np.asarray(u, dtype=float)
        if self.kind == "entropy":
            if np.any(u < 0):
                raise MirrorDomainError("negative entropy undefined for negative entries")
            if log_v is not None:
                log_v = np.asarray(log_v, dtype=float)
                v = np.asarray(v, dtype=float)
                return np.sum(xlogy(u, u) - u * log_v - u + v, axis=-1)
            v = self._check_domain(v)
            return np.sum(kl_div(u, v), axis=-1)
        v = np.asarray(v, dtype=float)
        d = u - v
        return 0.5 * np.sum(d * d, axis=-1)

    def norm(self, w):
        """The l_p norm in which the map is strongly convex."""
        return np.linalg.norm(np.asarray(w, dtype=float), ord=self.p, axis=-1)


ENTROPY = MirrorMap("entropy", alpha=1.0, p=1.0)
EUCLIDEAN = MirrorMap("euclidean", alpha=1.0, p=2.0)

_MIRRORS = {"entropy": ENTROPY, "euclidean": EUCLIDEAN}


def get_mirror(name) -> MirrorMap:
    if isinstance(name, MirrorMap):
        return name
    try:
        return _MIRRORS[str(name).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown mirror map {name!r}; expected one of {sorted(_MIRRORS)}") from None


def simplex_normalize(u):
    """Scale a nonnegative vector (or each row) to unit l1 norm."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("simplex_normalize needs nonnegative input")
    s = u.sum(axis=-1, keepdims=True)
    if np.any(s <= 0):
        raise ValueError("cannot normalize an all-zero vector")
    return u / s


def simplex_euclidean_projection(u):
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` by sort and threshold.

    Works row-wise on 2-d input.
    """
    u = np.asarray(u, dtype=float)
    flat = np.atleast_2d(u)
    n = flat.shape[-1]
    s = -np.sort(-flat, axis=-1)
    css = np.cumsum(s, axis=-1) - 1.0
    k = np.arange(1, n + 1)
    cond = s - css / k > 0
    r = n - 1 - np.argmax(cond[:, ::-1], axis=-1)
    theta = css[np.arange(flat.shape[0]), r] / (r + 1)
    x = np.maximum(flat - theta[:, None], 0.0)
    return x.reshape(u.shape)
