"""Independent reference computations used to check the solver.

Nothing here calls into the solver or objective modules.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import TooLarge

MAX_BRUTE_FORCE_COLS = 16


@dataclass(frozen=True)
class NnlsResult:
    weights: np.ndarray
    residual: float
    iterations: int
    converged: bool


def nnls(A, b, tol=1e-10, max_iter=None, method="active-set"):
    """Nonnegative least squares ``min ||A w - b||`` over ``w >= 0``.

    Parameters
    ----------
    A : array_like, shape (m, n)
    b : array_like, shape (m,)
    tol : float
        Dual tolerance: stop once no inactive coordinate has a descent
        direction larger than ``tol`` (active set), or once the projected
        gradient norm is at most ``tol`` (projected gradient).
    max_iter : int, optional
    method : {"active-set", "pg"}
        ``"active-set"`` is Lawson-Hanson. ``"pg"`` is projected gradient
        with step ``1 / sigma_max(A)^2``, Nesterov momentum and restart on
        objective increase; it is slow on ill-conditioned ``A``.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if A.ndim == 1:
        A = A[:, None]
    if not np.any(A):
        raise ValueError("A must be nonzero")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if method == "active-set":
        w, it, ok = _lawson_hanson(A, b, tol, 30 * A.shape[1] if max_iter is None else max_iter)
    elif method == "pg":
        w, it, ok = _projected_gradient(A, b, tol, 200_000 if max_iter is None else max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    return NnlsResult(weights=w, residual=float(np.linalg.norm(A @ w - b)),
                      iterations=it, converged=ok)


def _lawson_hanson(A, b, tol, max_iter):
    n = A.shape[1]
    passive = np.zeros(n, dtype=bool)
    x = np.zeros(n)
    dual = A.T @ b
    it = 0
    while (~passive).any() and dual[~passive].max() > tol:
        if it >= max_iter:
            return x, it, False
        j = np.flatnonzero(~passive)[np.argmax(dual[~passive])]
        passive[j] = True
        while True:
            it += 1
            s = np.zeros(n)
            s[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if s[passive].min() > 0:
                break
            # step back to the boundary and drop the coordinates that hit zero
            blocking = passive & (s <= 0)
            alpha = np.min(x[blocking] / (x[blocking] - s[blocking]))
            x = x + alpha * (s - x)
            passive &= x > 1e-15
            x[~passive] = 0.0
            if not passive.any() or it >= max_iter:
                break
        x = s if passive.any() and s[passive].min() > 0 else np.where(passive, x, 0.0)
        dual = A.T @ (b - A @ x)
        dual[passive] = -np.inf
    return x, it, True


def _projected_gradient(A, b, tol, max_iter):
    AtA = A.T @ A
    Atb = A.T @ b
    step = 1.0 / np.linalg.norm(A, 2) ** 2

    def half_sq(w):
        return 0.5 * float(w @ AtA @ w) - float(Atb @ w)

    w = np.zeros(A.shape[1])
    y = w.copy()
    t = 1.0
    f = half_sq(w)
    for it in range(1, max_iter + 1):
        g = AtA @ y - Atb
        w_new = np.maximum(y - step * g, 0.0)
        f_new = half_sq(w_new)
        if f_new > f:
            # momentum overshoot: restart from the last iterate
            y, t = w.copy(), 1.0
            continue
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = w_new + ((t - 1.0) / t_new) * (w_new - w)
        w, t, f = w_new, t_new, f_new
        gw = AtA @ w - Atb
        pg = np.where(w > 0, gw, np.minimum(gw, 0.0))
        if np.linalg.norm(pg) <= tol:
            return w, it, True
    return w, max_iter, False


def _representable(A, b, eps):
    return nnls(A, b, tol=1e-12).residual <= eps


def brute_force_rays(X, eps=1e-6, mode="loo"):
    """Extreme columns of ``X`` by cone-membership tests.

    ``mode="loo"`` declares column ``i`` extreme when its NNLS residual on all
    other columns exceeds ``eps``. ``mode="exhaustive"`` returns the smallest
    index set that represents every column within ``eps``, trying subsets in
    order of size.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    if mode == "loo":
        return {i for i in range(n)
                if not _representable(np.delete(X, i, axis=1), X[:, i], eps)}
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    if n > MAX_BRUTE_FORCE_COLS:
        raise TooLarge(f"{n} columns exceeds the enumeration limit of {MAX_BRUTE_FORCE_COLS}")
    cache = {}
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            A = X[:, subset]
            ok = True
            for j in range(n):
                if j in subset:
                    continue
                key = (subset, j)
                if key not in cache:
                    cache[key] = _representable(A, X[:, j], eps)
                if not cache[key]:
                    ok = False
                    break
            if ok:
                return set(subset)
    return set(range(n))


def finite_diff_grad(fn, C, h=1e-6):
    """Central-difference gradient of a scalar function of a matrix."""
    if not h > 0:
        raise ValueError("h must be positive")
    C = np.array(C, dtype=np.float64)
    G = np.empty_like(C)
    for idx in np.ndindex(C.shape):
        orig = C[idx]
        C[idx] = orig + h
        up = fn(C)
        C[idx] = orig - h
        down = fn(C)
        C[idx] = orig
        G[idx] = (up - down) / (2.0 * h)
    return G


def grid_min_1d(fn, lo, hi, steps):
    """Exhaustive minimum of ``fn`` on ``steps`` equispaced points of [lo, hi]."""
    if not lo < hi or steps < 2:
        raise ValueError("need lo < hi and steps >= 2")
    grid = np.linspace(lo, hi, int(steps))
    try:
        vals = np.asarray(fn(grid), dtype=np.float64)
    except (TypeError, ValueError):
        vals = None
    if vals is None or vals.shape != grid.shape:
        vals = np.array([fn(float(x)) for x in grid])
    i = int(np.argmin(vals))
    return float(grid[i]), float(vals[i])
