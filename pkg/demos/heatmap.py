"""
Looking at the localization matrix
==================================

Solve a small clean instance and write C as a grayscale PGM image. Rays show
up as bright diagonal pixels; their rows hold the mixing weights.
"""

from pathlib import Path

import numpy as np

from rnmf import SolverConfig, datagen, solve
from rnmf.cli import decode_heatmap, render_pgm

ds = datagen.generate(8, 24, 4, seed=1)
rep = solve(ds.X, SolverConfig(seed=1))
print("converged", rep.converged, "after", rep.iterations, "iterations")

np.set_printoptions(precision=2, suppress=True)
print("diag(C):", np.diag(rep.C))

out = Path("heatmap.pgm")
blob, lo, hi = render_pgm(rep.C)
out.write_bytes(blob)
out.with_suffix(".map.txt").write_text(f"min = {lo!r}\nmax = {hi!r}\nlevels = 255\n")
back = decode_heatmap(out, out.with_suffix(".map.txt"))
print("wrote", out, "max decode error", np.abs(back - rep.C).max())
