"""From a solved localization matrix to extreme-ray indices and factors."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionMismatch, EmptySelection, NonSquare
from .matcore import as_matrix
from .oracle import nnls


@dataclass(frozen=True)
class RaySelection:
    indices: tuple
    method: str
    threshold: float

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class Factors:
    F: np.ndarray
    W: np.ndarray
    selection: RaySelection
    clamp_mass: float = 0.0


def _square(C):
    C = as_matrix(C, "C")
    if C.shape[0] != C.shape[1]:
        raise NonSquare(f"C must be square, got {C.shape}")
    return C


def extract_diagonal(C, tol=0.05):
    """Indices whose diagonal entry is at least ``1 - tol``."""
    C = _square(C)
    if not 0.0 <= tol < 1.0:
        raise ValueError("tol must lie in [0, 1)")
    idx = np.flatnonzero(np.diag(C) >= 1.0 - tol)
    return RaySelection(tuple(idx), "diagonal", 1.0 - tol)


def extract_offdiag(C, threshold=0.5, linkage="generators"):
    """One representative per group of columns linked by large entries.

    Entries ``C[x, y] >= threshold`` (diagonal included) are the edges of a
    graph; each connected component contributes its smallest index.

    ``linkage`` picks the vertex set:

    ``"generators"``
        Only row indices ``x`` that carry a large entry, i.e. columns used
        heavily to rebuild some column. Mixed columns leaning on two rays are
        not vertices, so they cannot fuse two rays into one group.
    ``"touched"``
        Every row or column index of a large entry.
    """
    C = _square(C)
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    big = C >= threshold
    if linkage == "generators":
        verts = np.flatnonzero(big.any(axis=1))
    elif linkage == "touched":
        verts = np.flatnonzero(big.any(axis=1) | big.any(axis=0))
    else:
        raise ValueError(f"unknown linkage {linkage!r}")
    if verts.size == 0:
        return RaySelection((), "offdiag", threshold)
    rows, cols = np.nonzero(big[np.ix_(verts, verts)])
    k = verts.size
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(k, k))
    _, labels = connected_components(graph, directed=False)
    reps = {}
    for pos, v in enumerate(verts):  # ascending, so the first hit is the smallest index
        reps.setdefault(labels[pos], int(v))
    return RaySelection(tuple(reps.values()), "offdiag", threshold)


def recover_factors(X, C, sel, w_rule="rows"):
    """Factors ``F = X[:, I]`` and a nonnegative ``W`` for the selected ``I``.

    Parameters
    ----------
    w_rule : {"rows", "nnls"}
        ``"rows"`` takes ``W = max(C[I, :], 0)``. The objective does not
        charge off-diagonal mass, so a mixed column may be rebuilt partly
        from other mixed columns and the truncated rows then lose that part.
        ``"nnls"`` refits every column of ``W`` by nonnegative least squares
        on ``F``; ``C`` is used only for the selection.
    """
    if w_rule not in ("rows", "nnls"):
        raise ValueError(f"unknown w_rule {w_rule!r}")
    X = as_matrix(X)
    C = _square(C)
    if C.shape[0] != X.shape[1]:
        raise DimensionMismatch("C must be n x n with n = X.shape[1]")
    idx = np.asarray(getattr(sel, "indices", sel), dtype=int)
    if idx.size == 0:
        raise EmptySelection("no indices selected")
    if idx.min() < 0 or idx.max() >= X.shape[1]:
        raise IndexError("selection out of bounds")
    if not isinstance(sel, RaySelection):
        sel = RaySelection(tuple(idx), "given", float("nan"))
    F = X[:, idx].copy()
    if w_rule == "nnls":
        W = np.column_stack([nnls(F, X[:, j]).weights for j in range(X.shape[1])])
        return Factors(F=F, W=W, selection=sel, clamp_mass=0.0)
    W = C[idx, :]
    neg = W < 0
    mass = float(-W[neg].sum())
    return Factors(F=F, W=np.where(neg, 0.0, W), selection=sel, clamp_mass=mass)


def reconstruction_error(X, F, W):
    """Squared Frobenius error ``||X - F W||_F^2``."""
    X, F, W = (np.asarray(a, dtype=np.float64) for a in (X, F, W))
    if F.ndim != 2 or W.ndim != 2 or F.shape[0] != X.shape[0] or F.shape[1] != W.shape[0] \
            or W.shape[1] != X.shape[1]:
        raise DimensionMismatch(f"incompatible shapes X{X.shape}, F{F.shape}, W{W.shape}")
    R = X - F @ W
    return float(np.sum(R * R))


def dedup(X, gamma=0.1):
    """Greedy near-duplicate removal.

    Scans columns left to right and keeps a column only if its l2 distance
    to every column kept so far is at least ``gamma``.

    Returns
    -------
    reduced : ndarray, shape (m, k)
    kept : list of int
        Original indices of the kept columns.
    """
    X = as_matrix(X)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    m, n = X.shape
    kept = []
    K = np.empty((m, n))
    g2 = gamma * gamma
    for j in range(n):
        x = X[:, j]
        if kept:
            D = K[:, :len(kept)] - x[:, None]
            if np.min(np.einsum("ij,ij->j", D, D)) < g2:
                continue
        K[:, len(kept)] = x
        kept.append(j)
    return K[:, :len(kept)].copy(), kept


def recovery_score(found, truth):
    """``(hits, total)`` with hits the size of the intersection."""
    found = set(getattr(found, "indices", found))
    truth = set(truth)
    return len(found & truth), len(truth)


def false_positives(found, truth):
    return len(set(getattr(found, "indices", found)) - set(truth))
