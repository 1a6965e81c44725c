"""
Checking the solver against exact answers
=========================================

On tiny problems the extreme rays can be found by brute force with
nonnegative least squares. Compare that with the solver, then check the
gradient by finite differences.
"""

import numpy as np

from rnmf import ObjectiveParams, SolverConfig, datagen, extract_diagonal, grad_c, objective, solve
from rnmf.oracle import brute_force_rays, finite_diff_grad, nnls

for seed in range(6):
    ds = datagen.generate(6, 10, 3, seed)
    rep = solve(ds.X, SolverConfig(seed=seed))
    found = set(extract_diagonal(rep.C).indices)
    exact = brute_force_rays(ds.X)
    # distance of each ray to the cone of all other columns
    gaps = [nnls(np.delete(ds.X, i, axis=1), ds.X[:, i]).residual for i in ds.truth]
    print(f"seed {seed}: solver {sorted(found)} brute force {sorted(exact)} "
          f"smallest ray gap {min(gaps):.3f}")

# A ray that sits very close to the other columns' cone keeps a diagonal
# noticeably below 1, which is where the two answers can disagree.

g = np.random.default_rng(0)
X, C, Q = g.random((4, 5)), g.random((5, 5)), g.standard_normal((4, 5))
params = ObjectiveParams(p=g.random(5), beta=2.0, lam=0.5)
G = grad_c(X, C, Q, params)
fd = finite_diff_grad(lambda M: objective(X, M, Q, params), C)
print("relative gradient error", np.linalg.norm(G - fd) / np.linalg.norm(G))
