"""Synthetic separable data with known extreme rays.

``generate`` draws ``r`` rays uniformly from the unit cube, then builds each of
the remaining ``n - r`` columns as a random nonnegative combination of
``r'`` distinct rays, with ``r'`` uniform on ``{2, ..., r}`` and weights
uniform on (0, 1]. Rays occupy columns ``0 .. r-1``.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import nnls as _scipy_nnls

from .errors import BadShape
from .matcore import NO_NOISE, add_awgn, column_norms, column_normalize, make_rng

RAY_MARGIN = 1e-3
_MAX_RAY_DRAWS = 100


@dataclass(frozen=True)
class SyntheticDataset:
    """Generated data and its ground truth.

    ``W_true`` is expressed against the normalized ray columns, so for a clean
    dataset ``X == X[:, truth] @ W_true`` up to rounding. Jittered duplicate
    columns get the unit weight of their source ray, which is approximate.
    """

    X: np.ndarray
    truth: tuple
    W_true: np.ndarray
    seed: int
    snr_db: float | None = None
    duplicate_groups: tuple | None = None
    clamp_fraction: float = 0.0
    norm_kind: str = "l2"

    @property
    def m(self):
        return self.X.shape[0]

    @property
    def n(self):
        return self.X.shape[1]

    @property
    def r(self):
        return len(self.truth)

    def metadata(self):
        return {
            "m": self.m, "n": self.n, "r": self.r, "seed": self.seed,
            "snr_db": self.snr_db, "norm_kind": self.norm_kind,
            "clamp_fraction": self.clamp_fraction,
            "duplicate_groups": None if self.duplicate_groups is None
            else [list(g) for g in self.duplicate_groups],
            "weights": "uniform(0,1]", "mixing_count": "uniform integer in [2, r]",
        }


def ray_margins(rays):
    """NNLS residual of each (normalized) ray against the other rays."""
    out = np.empty(rays.shape[1])
    for i in range(rays.shape[1]):
        others = np.delete(rays, i, axis=1)
        out[i] = _scipy_nnls(others, rays[:, i])[1]
    return out


def _draw_rays(m, r, seed, norm_kind):
    for attempt in range(_MAX_RAY_DRAWS):
        rng = make_rng(seed, "rays" if attempt == 0 else f"rays/{attempt}")
        raw = rng.random((m, r))
        if np.any(column_norms(raw, norm_kind) == 0):
            continue
        if np.all(ray_margins(column_normalize(raw, norm_kind)) > RAY_MARGIN):
            return raw
    raise BadShape(f"could not draw {r} well-separated rays in dimension {m}")


def generate(m, n, r, seed=0, norm_kind="l2"):
    """Draw a clean, column-normalized separable dataset.

    Raises
    ------
    BadShape
        Unless ``2 <= r <= min(m, n)`` and ``n > r``.
    """
    m, n, r = int(m), int(n), int(r)
    if not (2 <= r <= min(m, n) and n > r):
        raise BadShape(f"need 2 <= r <= min(m, n) and n > r; got m={m}, n={n}, r={r}")
    raw_rays = _draw_rays(m, r, seed, norm_kind)

    rng = make_rng(seed, "weights")
    W = np.zeros((r, n))
    W[:, :r] = np.eye(r)
    for j in range(r, n):
        k = int(rng.integers(2, r + 1))
        idx = rng.choice(r, size=k, replace=False)
        W[idx, j] = 1.0 - rng.random(k)
    raw = raw_rays @ W
    raw[:, :r] = raw_rays

    col = column_norms(raw, norm_kind)
    ray_norm = col[:r]
    X = raw / col
    # rescale weights to act on the normalized rays
    W_true = W * ray_norm[:, None] / col[None, :]
    W_true[:, :r] = np.eye(r)
    return SyntheticDataset(X=X, truth=tuple(range(r)), W_true=W_true, seed=int(seed),
                            norm_kind=norm_kind)


def with_noise(ds, snr_db, rng=None):
    """Add AWGN, clamp negatives to zero and renormalize the columns."""
    if snr_db is None or snr_db == NO_NOISE:
        return replace(ds, snr_db=NO_NOISE)
    if rng is None:
        rng = make_rng(ds.seed, "noise")
    Y = add_awgn(ds.X, snr_db, rng)
    neg = Y < 0
    Y[neg] = 0.0
    return replace(ds, X=column_normalize(Y, ds.norm_kind), snr_db=float(snr_db),
                   clamp_fraction=float(neg.mean()))


def with_duplicates(ds, copies_per_ray, jitter, rng=None):
    """Append ``copies_per_ray`` jittered copies of every ray.

    Each copy is the ray plus a perturbation with uniformly random direction
    in the cube ``[-1, 1]^m`` and l2 length uniform on (0, jitter], clamped at
    zero and renormalized. Copies of ray ``i`` are contiguous and follow the
    original columns; ``duplicate_groups[i]`` lists ray ``i`` then its copies.
    """
    if copies_per_ray < 1:
        raise ValueError("copies_per_ray must be >= 1")
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    if rng is None:
        rng = make_rng(ds.seed, "duplicates")
    m, n = ds.X.shape
    extra, groups = [], []
    for i in ds.truth:
        group = [i]
        for _ in range(copies_per_ray):
            e = rng.uniform(-1.0, 1.0, m)
            length = jitter * (1.0 - rng.random())
            norm = np.linalg.norm(e)
            y = ds.X[:, i] + (e * (length / norm) if norm > 0 else 0.0)
            extra.append(np.maximum(y, 0.0))
            group.append(n + len(extra) - 1)
        groups.append(tuple(group))
    copies = column_normalize(np.column_stack(extra), ds.norm_kind)
    W_copies = np.repeat(np.eye(ds.r), copies_per_ray, axis=1)
    return replace(ds, X=np.hstack([ds.X, copies]), W_true=np.hstack([ds.W_true, W_copies]),
                   duplicate_groups=tuple(groups))
