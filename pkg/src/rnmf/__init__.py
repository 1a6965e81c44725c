"""Separable nonnegative matrix factorization via an entropic accelerated LP solver.

Typical use::

    from rnmf import generate, with_noise, solve, SolverConfig, extract_diagonal

    ds = with_noise(generate(25, 100, 25, seed=0), snr_db=20)
    report = solve(ds.X, SolverConfig(seed=0))
    rays = extract_diagonal(report.C, tol=0.05)
"""

from .datagen import SyntheticDataset, generate, with_duplicates, with_noise
from .errors import (BadShape, DimensionMismatch, DomainError, EmptySelection, NoConvergence,
                     NonSquare, NumericFailure, RnmfError, TooLarge, ZeroColumn)
from .extraction import (Factors, RaySelection, dedup, extract_diagonal, extract_offdiag,
                         false_positives, reconstruction_error, recover_factors, recovery_score)
from .matcore import (NO_NOISE, add_awgn, column_normalize, fro_norm, l1_entrywise, make_rng,
                      spectral_norm_sq)
from .objective import ObjectiveParams, entropy_bregman, grad_c, objective, soft_threshold
from .solver import (SolveReport, SolverConfig, SolverState, estimate_lipschitz, init_state,
                     mirror_step, solve, step, theta)

__version__ = "0.1.0"
