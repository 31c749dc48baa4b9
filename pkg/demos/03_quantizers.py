"""The four interval quantizers: collapse to degrade, spread to upgrade.

Each operator partitions [0, 1/2] into grid cells and replaces the channel
mass inside every cell.  Collapsing a cell to one matched point can only
make the channel worse; spreading a cell's mass to its endpoints can only
make it better.  One pair matches the error probability per cell, the other
the chi-square information, and the matched functional is preserved
exactly while the capacity brackets the original from both sides.
"""

import numpy as np

from treebp import DeltaMeasure, functionals, q_bec, q_bec_chi2, q_bsc, q_bsc_chi2, uniform_grid

rng = np.random.default_rng(1)
w = DeltaMeasure(rng.uniform(0, 0.5, 2000), rng.uniform(0, 1, 2000))
f0 = functionals(w)
print(f"random channel with {w.support_size} atoms:")
print(f"  error={f0.p_e:.9f}  capacity={f0.capacity:.9f}  chi2={f0.chi2:.9f}")

grid = uniform_grid(16)
print(f"\nquantizing on a {grid.n_cells}-cell uniform grid:")
for name, op, matched in [
    ("collapse/error ", q_bsc, "p_e"),
    ("spread/error   ", q_bec, "p_e"),
    ("collapse/chi2  ", q_bsc_chi2, "chi2"),
    ("spread/chi2    ", q_bec_chi2, "chi2"),
]:
    out = op(w, grid)
    f = functionals(out)
    print(f"  {name}: atoms {w.support_size} -> {out.support_size:3d}, "
          f"{matched} drift = {abs(getattr(f, matched) - getattr(f0, matched)):.1e}, "
          f"capacity {f0.capacity:.6f} -> {f.capacity:.6f}")

print("\ncapacity ordering (collapse <= original <= spread):")
print(f"  {functionals(q_bsc(w, grid)).capacity:.6f} <= {f0.capacity:.6f} "
      f"<= {functionals(q_bec(w, grid)).capacity:.6f}   [error-matched]")
print(f"  {functionals(q_bsc_chi2(w, grid)).capacity:.6f} <= {f0.capacity:.6f} "
      f"<= {functionals(q_bec_chi2(w, grid)).capacity:.6f}   [chi2-matched]")

print("\nfiner grids hug the original capacity more tightly:")
for cells in (4, 16, 64, 256):
    g = uniform_grid(cells)
    lo = functionals(q_bsc_chi2(w, g)).capacity
    hi = functionals(q_bec_chi2(w, g)).capacity
    print(f"  {cells:4d} cells: bracket width = {hi - lo:.3e}")
