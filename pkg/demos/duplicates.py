"""
Near-duplicate rays
===================

When each ray has a few jittered copies no column is strictly extreme, so the
diagonal rule breaks down. Pruning near-duplicates first and then grouping
large entries of C recovers one representative per ray.
"""

import numpy as np

from rnmf import SolverConfig, datagen, dedup, extract_diagonal, extract_offdiag, solve

base = datagen.generate(25, 40, 6, seed=2)
dup = datagen.with_duplicates(base, copies_per_ray=3, jitter=0.02)
print("groups:", dup.duplicate_groups)

# Straight on the duplicated data the copies share the weight of their ray.
rep = solve(dup.X, SolverConfig(seed=2))
print("diagonal rule, no pruning:", extract_diagonal(rep.C).indices)

Xd, kept = dedup(dup.X, gamma=0.1)
print(f"dedup kept {len(kept)} of {dup.n} columns")
rep = solve(Xd, SolverConfig(seed=2))
reps = [kept[i] for i in extract_offdiag(rep.C, 0.5).indices]
print("offdiag rule after pruning:", reps)
print("one per group:", sorted({g for g, grp in enumerate(dup.duplicate_groups) for j in reps if j in grp}))

# Jitter 0.02 is well below gamma 0.1, so only the originals survive pruning.
print("max copy distance:", max(np.linalg.norm(dup.X[:, c] - dup.X[:, g[0]])
                                for g in dup.duplicate_groups for c in g[1:]))
