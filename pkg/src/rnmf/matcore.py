"""Dense matrix helpers: norms, column normalization, AWGN and power iteration.

Matrices are plain ``float64`` :class:`numpy.ndarray` objects of shape
``(rows, cols)``. Randomness always flows through :func:`make_rng`, which
derives an independent PCG64 stream per named purpose from one integer seed.
"""

import math
import zlib

import numpy as np

from .errors import NoConvergence, ZeroColumn

NO_NOISE = math.inf
"""SNR sentinel meaning "do not add noise"."""

_ZERO_NORM = 1e-300


def make_rng(seed, purpose=None):
    """Return a PCG64 generator for ``seed``.

    Distinct ``purpose`` strings (``"init"``, ``"noise"``, ``"weights"``...)
    give statistically independent sub-streams of the same seed, so adding
    noise never perturbs the stream used for initialization.
    """
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    key = () if purpose is None else (zlib.crc32(purpose.encode("utf-8")),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def as_matrix(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def column_norms(X, norm_kind="l2"):
    if norm_kind == "l2":
        return np.sqrt(np.einsum("ij,ij->j", X, X))
    if norm_kind == "l1":
        return np.abs(X).sum(axis=0)
    raise ValueError(f"unknown norm kind {norm_kind!r}")


def column_normalize(X, norm_kind="l2"):
    """Scale every column of ``X`` to unit ``norm_kind`` norm.

    Parameters
    ----------
    X : array_like, shape (m, n)
    norm_kind : {"l2", "l1"}
        ``"l1"`` requires a nonnegative matrix.

    Raises
    ------
    ZeroColumn
        If a column norm is below 1e-300.
    """
    X = as_matrix(X)
    if norm_kind == "l1" and np.any(X < 0):
        raise ValueError("l1 column normalization requires a nonnegative matrix")
    norms = column_norms(X, norm_kind)
    bad = np.flatnonzero(norms < _ZERO_NORM)
    if bad.size:
        raise ZeroColumn(int(bad[0]))
    return X / norms


def fro_norm(X):
    return float(np.linalg.norm(np.asarray(X, dtype=np.float64)))


def l1_entrywise(X):
    return float(np.abs(np.asarray(X, dtype=np.float64)).sum())


def noise_sigma(X, snr_db):
    """Per-entry noise standard deviation giving ``snr_db`` relative to mean signal power."""
    X = np.asarray(X, dtype=np.float64)
    power = float(np.sum(X * X)) / X.size
    return math.sqrt(power * 10.0 ** (-snr_db / 10.0))


def add_awgn(X, snr_db, rng):
    """Add white Gaussian noise at ``snr_db`` decibels.

    The noise variance is ``||X||_F^2 / (m n) * 10**(-snr_db / 10)``.
    Negative entries are left in place. ``snr_db = inf`` returns a copy of
    ``X`` and draws nothing from ``rng``.
    """
    X = as_matrix(X)
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError("snr_db must be finite or +inf")
    if snr_db == math.inf:
        return X.copy()
    return X + rng.normal(0.0, noise_sigma(X, snr_db), size=X.shape)


def spectral_norm_sq(X, tol=1e-10, max_iter=10_000, rng=None):
    """Largest eigenvalue of ``X.T @ X`` by power iteration.

    Iterates until the Rayleigh quotient changes by at most ``tol`` relative.
    The start vector is drawn from ``rng`` (seed 0 if omitted).

    Raises
    ------
    NoConvergence
        If the quotient has not stabilized after ``max_iter`` iterations.
    """
    X = as_matrix(X)
    if not np.any(X):
        raise ValueError("spectral_norm_sq needs a nonzero matrix")
    if rng is None:
        rng = make_rng(0, "power")
    G = X.T @ X
    v = np.abs(rng.standard_normal(G.shape[0])) + 1.0
    v /= np.linalg.norm(v)
    prev = None
    for _ in range(max_iter):
        w = G @ v
        rq = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v landed in the null space; restart from a fresh direction
            v = rng.standard_normal(G.shape[0])
            v /= np.linalg.norm(v)
            prev = None
            continue
        v = w / nw
        if prev is not None and abs(rq - prev) <= tol * abs(rq):
            return max(rq, float(v @ G @ v))
        prev = rq
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")
