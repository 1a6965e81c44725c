"""Accelerated entropic mirror descent for the localization objective.

One iteration, with ``theta_k = 2 / (k + 2)``::

    T     = (1 - theta) C + theta Z
    Z'    = Z * exp(-grad_C f(T, Q) / (lip * theta))      (entrywise)
    C'    = (1 - theta) C + theta Z'
    Q'    = soft_threshold(X C' - X, tau)

iterated until ``||C' - C||_F <= delta``.
"""

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import NumericFailure
from .matcore import as_matrix, make_rng, spectral_norm_sq
from .objective import ObjectiveParams, grad_c, objective, q_threshold, soft_threshold

DEFAULT_BETA = 1.0e4
DEFAULT_LAMBDA = 20.0
DEFAULT_DELTA = 1.0e-5
DEFAULT_MAX_ITER = 50_000

EXP_CLIP = 700.0
# smallest normal double; keeps Z strictly positive once exp() underflows
Z_FLOOR = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``p=None`` draws the diagonal price i.i.d. uniform(0, 1] from ``seed``.
    ``init_scale=None`` uses ``1/n`` so that ``X @ C0`` stays O(1).
    ``lip=None`` estimates the Lipschitz constant according to ``lip_mode``.
    """

    beta: float = DEFAULT_BETA
    lam: float = DEFAULT_LAMBDA
    p: tuple | None = None
    delta: float = DEFAULT_DELTA
    max_iter: int = DEFAULT_MAX_ITER
    lip: float | None = None
    lip_mode: str = "entrywise"
    tau_mode: str = "exact"
    theta0: float = 1.0
    init_scale: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0 or not self.lam > 0:
            raise ValueError("beta and lam must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")
        if self.lip is not None and not self.lip > 0:
            raise ValueError("lip must be positive")
        if self.lip_mode not in ("spectral", "entrywise"):
            raise ValueError(f"unknown lip_mode {self.lip_mode!r}")
        if self.tau_mode not in ("exact", "raw"):
            raise ValueError(f"unknown tau_mode {self.tau_mode!r}")
        # theta = 0 would divide by zero in the mirror step
        if not 0.0 < self.theta0 <= 1.0:
            raise ValueError("theta0 must lie in (0, 1]")
        if self.init_scale is not None and not self.init_scale > 0:
            raise ValueError("init_scale must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.p is not None:
            object.__setattr__(self, "p", tuple(float(v) for v in np.ravel(self.p)))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        object.__setattr__(self, "seed", int(self.seed))

    def objective_params(self, n):
        if self.p is None:
            p = 1.0 - make_rng(self.seed, "cost").random(n)
        else:
            p = np.asarray(self.p)
            if p.size != n:
                raise ValueError(f"p has length {p.size}, expected {n}")
        return ObjectiveParams(p=p, beta=self.beta, lam=self.lam)

    def to_dict(self):
        return asdict(self)


@dataclass
class SolverState:
    k: int
    C: np.ndarray
    Z: np.ndarray
    T: np.ndarray
    Q: np.ndarray
    theta: float
    clipped: bool = False


@dataclass
class SolveReport:
    C: np.ndarray
    Q: np.ndarray
    iterations: int
    converged: bool
    objective_trace: np.ndarray
    step_deltas: np.ndarray
    lip_used: float
    tau_used: float
    config_echo: SolverConfig
    p: np.ndarray
    initial_objective: float
    min_z_trace: np.ndarray = field(repr=False)
    min_c_trace: np.ndarray = field(repr=False)
    clipped_steps: int = 0

    def summary(self):
        """Scalar fields for manifests."""
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_step_delta": float(self.step_deltas[-1]) if len(self.step_deltas) else None,
            "final_objective": float(self.objective_trace[-1]) if len(self.objective_trace) else None,
            "initial_objective": self.initial_objective,
            "lip_used": self.lip_used,
            "tau_used": self.tau_used,
            "clipped_steps": self.clipped_steps,
            "min_z": float(np.min(self.min_z_trace)) if len(self.min_z_trace) else None,
            "min_c": float(np.min(self.min_c_trace)) if len(self.min_c_trace) else None,
        }


def theta(k):
    if k < 0:
        raise ValueError("k must be nonnegative")
    return 2.0 / (k + 2.0)


def estimate_lipschitz(X, params, mode="entrywise", rng=None):
    """Lipschitz constant of the C-gradient.

    ``"spectral"`` is ``2 beta sigma_max(X)^2`` (l2 geometry); ``"entrywise"``
    is ``2 beta max |X^T X|_ij``, the l1 -> l-inf norm of the Hessian.
    """
    X = as_matrix(X)
    if not np.any(X):
        raise ValueError("X must be nonzero")
    beta = params.beta if isinstance(params, ObjectiveParams) else float(params)
    if mode == "spectral":
        return 2.0 * beta * spectral_norm_sq(X, tol=1e-12, max_iter=100_000, rng=rng)
    if mode == "entrywise":
        return 2.0 * beta * float(np.abs(X.T @ X).max())
    raise ValueError(f"unknown Lipschitz mode {mode!r}")


def init_state(X, config, rng=None):
    """Random strictly positive starting point, ``T0 = C0`` and ``Q0 = 0``."""
    X = as_matrix(X)
    m, n = X.shape
    if rng is None:
        rng = make_rng(config.seed, "init")
    scale = 1.0 / n if config.init_scale is None else config.init_scale
    # 1 - U[0,1) lies in (0, 1], so entries are never zero
    C = scale * (1.0 - rng.random((n, n)))
    Z = scale * (1.0 - rng.random((n, n)))
    return SolverState(k=0, C=C, Z=Z, T=C.copy(), Q=np.zeros((m, n)), theta=float(config.theta0))


def mirror_step(Z, G, lip, theta, full_output=False):
    """Entropic prox step ``Z * exp(-G / (lip * theta))``.

    This is the minimizer over C >= 0 of ``<G, C> + theta lip D(C; Z)``
    with D the entropy Bregman distance. Exponents are clipped to
    [-700, 700] and results floored at the smallest normal double. With
    ``full_output`` the clip flag is returned as well.
    """
    if not lip > 0 or not 0 < theta <= 1:
        raise ValueError("need lip > 0 and theta in (0, 1]")
    arg = -np.asarray(G, dtype=np.float64) / (lip * theta)
    clipped = bool(np.any(np.abs(arg) > EXP_CLIP))
    if clipped:
        arg = np.clip(arg, -EXP_CLIP, EXP_CLIP)
    out = np.maximum(np.asarray(Z, dtype=np.float64) * np.exp(arg), Z_FLOOR)
    if full_output:
        return out, clipped
    return out


@dataclass(frozen=True)
class SolverContext:
    """Per-problem quantities that stay fixed across iterations."""

    X: np.ndarray
    gram: np.ndarray
    params: ObjectiveParams
    lip: float
    tau: float

    @classmethod
    def build(cls, X, config):
        X = as_matrix(X)
        params = config.objective_params(X.shape[1])
        if config.lip is not None:
            lip = float(config.lip)
        else:
            lip = estimate_lipschitz(X, params, config.lip_mode, make_rng(config.seed, "power"))
        return cls(X=X, gram=X.T @ X, params=params, lip=lip,
                   tau=q_threshold(params, config.tau_mode))


def _advance(state, ctx):
    th = state.theta
    T = (1.0 - th) * state.C + th * state.Z
    G = grad_c(ctx.X, T, state.Q, ctx.params, gram=ctx.gram)
    Z, clipped = mirror_step(state.Z, G, ctx.lip, th, full_output=True)
    C = (1.0 - th) * state.C + th * Z
    R = ctx.X @ C - ctx.X
    Q = soft_threshold(R, ctx.tau)
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(Z))):
        raise NumericFailure(f"non-finite iterate at k={state.k}")
    new = SolverState(k=state.k + 1, C=C, Z=Z, T=T, Q=Q, theta=theta(state.k + 1), clipped=clipped)
    return new, R


def step(state, X, config, ctx=None):
    """One full iteration: C/Z/T update followed by the Q shrinkage."""
    if ctx is None:
        ctx = SolverContext.build(X, config)
    return _advance(state, ctx)[0]


def solve(X, config=None):
    """Run the accelerated iteration to the step-size stopping rule.

    Parameters
    ----------
    X : array_like, shape (m, n)
        Nonnegative, column-normalized data.
    config : SolverConfig, optional

    Returns
    -------
    SolveReport

    Raises
    ------
    NumericFailure
        On a non-finite iterate; ``err.report`` holds the trace so far.
    """
    if config is None:
        config = SolverConfig()
    X = as_matrix(X)
    if np.any(X < 0):
        raise ValueError("X must be nonnegative")
    ctx = SolverContext.build(X, config)
    state = init_state(X, config)
    f0 = objective(X, state.C, state.Q, ctx.params)

    objs, deltas, minz, minc = [], [], [], []
    clipped = 0

    def report(st, converged):
        return SolveReport(
            C=st.C, Q=st.Q, iterations=st.k, converged=converged,
            objective_trace=np.asarray(objs), step_deltas=np.asarray(deltas),
            lip_used=ctx.lip, tau_used=ctx.tau, config_echo=config, p=ctx.params.p,
            initial_objective=f0, min_z_trace=np.asarray(minz), min_c_trace=np.asarray(minc),
            clipped_steps=clipped,
        )

    converged = False
    while state.k < config.max_iter:
        try:
            new, R = _advance(state, ctx)
        except NumericFailure as exc:
            exc.report = report(state, False)
            raise
        d = float(np.linalg.norm(new.C - state.C))
        RQ = R - new.Q
        objs.append(float(ctx.params.p @ np.diag(new.C) + ctx.params.beta * np.sum(RQ * RQ)
                          + ctx.params.lam * np.abs(new.Q).sum()))
        deltas.append(d)
        minz.append(float(new.Z.min()))
        minc.append(float(new.C.min()))
        clipped += new.clipped
        state = new
        if d <= config.delta:
            converged = True
            break
    return report(state, converged)


def with_overrides(config, **kw):
    """Copy of ``config`` with fields replaced (``None`` values are ignored)."""
    return replace(config, **{k: v for k, v in kw.items() if v is not None})


__all__ = [
    "DEFAULT_BETA", "DEFAULT_DELTA", "DEFAULT_LAMBDA", "DEFAULT_MAX_ITER",
    "SolveReport", "SolverConfig", "SolverContext", "SolverState",
    "estimate_lipschitz", "init_state", "mirror_step", "solve", "step", "theta",
    "with_overrides",
]
