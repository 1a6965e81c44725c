"""Penalized localization objective, its C-gradient, and the entropy prox pieces.

The objective over a localization matrix ``C`` (n x n, nonnegative) and a
residual buffer ``Q`` (m x n) is::

    f(C, Q) = p . diag(C) + beta * ||X C - X - Q||_F^2 + lam * ||Q||_1

with ``||Q||_1`` the entrywise absolute sum.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError


@dataclass(frozen=True)
class ObjectiveParams:
    """Cost vector and weights of the objective.

    Attributes
    ----------
    p : ndarray, shape (n,)
        Strictly positive per-column price on the diagonal of ``C``.
    beta : float
        Weight on the squared Frobenius fit.
    lam : float
        Weight on the entrywise l1 norm of ``Q``.
    """

    p: np.ndarray
    beta: float = 1.0
    lam: float = 20.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64).reshape(-1)
        if p.size == 0 or not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ValueError("p must be a nonempty vector of positive finite entries")
        if not self.beta > 0 or not self.lam > 0:
            raise ValueError("beta and lam must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self):
        return self.p.size


def _check(X, C, Q, params):
    m, n = X.shape
    if C.shape != (n, n):
        raise DimensionMismatch(f"C must be {n}x{n}, got {C.shape}")
    if Q.shape != (m, n):
        raise DimensionMismatch(f"Q must be {m}x{n}, got {Q.shape}")
    if params.n != n:
        raise DimensionMismatch(f"p has length {params.n}, X has {n} columns")


def objective(X, C, Q, params):
    X, C, Q = (np.asarray(a, dtype=np.float64) for a in (X, C, Q))
    _check(X, C, Q, params)
    R = X @ C - X - Q
    return float(params.p @ np.diag(C) + params.beta * np.sum(R * R)
                 + params.lam * np.abs(Q).sum())


def grad_c(X, T, Q, params, gram=None):
    """Gradient of the objective in ``C`` at ``T`` with ``Q`` held fixed.

    ``gram`` may carry a precomputed ``X.T @ X`` to skip the n x n x m product.
    """
    X, T, Q = (np.asarray(a, dtype=np.float64) for a in (X, T, Q))
    _check(X, T, Q, params)
    if gram is None:
        gram = X.T @ X
    G = 2.0 * params.beta * (gram @ T - gram - X.T @ Q)
    G[np.diag_indices_from(G)] += params.p
    return G


def linear_model(X, C, T, Q, params):
    """First-order model of the objective around ``T``, evaluated at ``C``."""
    G = grad_c(X, T, Q, params)
    return objective(X, T, Q, params) + float(np.sum(G * (np.asarray(C) - T)))


def soft_threshold(R, tau):
    """Entrywise shrinkage ``sign(r) * max(|r| - tau, 0)``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    R = np.asarray(R, dtype=np.float64)
    return np.sign(R) * np.maximum(np.abs(R) - tau, 0.0)


def q_threshold(params, tau_mode="exact"):
    """Shrinkage level for the Q update.

    ``"exact"`` gives ``lam / (2 beta)``, the minimizer of the Q block for
    fixed C; ``"raw"`` uses ``lam`` unscaled.
    """
    if tau_mode == "exact":
        return params.lam / (2.0 * params.beta)
    if tau_mode == "raw":
        return params.lam
    raise ValueError(f"unknown tau_mode {tau_mode!r}")


def _xlogy_over(C, Z):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = C * np.log(C / Z)
    return np.where(C == 0, 0.0, out)


def entropy(C):
    """``sum(c log c - c)`` with ``0 log 0 = 0``."""
    C = np.asarray(C, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(C == 0, 0.0, C * np.log(C))
    return float(np.sum(t - C))


def entropy_bregman(C, Z):
    """Bregman distance of the entropy: ``sum(c log(c/z) - c + z)``.

    Raises
    ------
    DomainError
        If ``Z`` has a nonpositive entry or ``C`` a negative one.
    """
    C = np.asarray(C, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if C.shape != Z.shape:
        raise DimensionMismatch(f"shapes differ: {C.shape} vs {Z.shape}")
    if np.any(Z <= 0):
        raise DomainError("Z must be strictly positive")
    if np.any(C < 0):
        raise DomainError("C must be nonnegative")
    return float(np.sum(_xlogy_over(C, Z) - C + Z))
