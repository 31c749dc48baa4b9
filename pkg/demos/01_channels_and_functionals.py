"""Channels as crossover mixtures, and their three functionals.

Every binary-input symmetric channel in this library is a finite mixture of
symmetric channels indexed by a crossover probability in [0, 1/2].  The two
classical families sit at the extremes of that representation: a BSC is a
single atom, a BEC splits its mass between the perfect crossover 0 and the
useless crossover 1/2.
"""

import numpy as np

from treebp import DeltaMeasure, bec, bsc, functionals, merge_atoms

print("A BSC with crossover 0.1 :", bsc(0.1))
print("A BEC with erasure 0.3   :", bec(0.3))

print("\nFunctionals are mixture averages of the single-atom values:")
for name, w in [("BSC(0.25)", bsc(0.25)), ("BEC(0.3)", bec(0.3))]:
    f = functionals(w)
    print(f"  {name}: error={f.p_e:.6f}  capacity={f.capacity:.6f}  "
          f"chi2={f.chi2:.6f}")

print("\nA mixed channel (three atoms):")
w = DeltaMeasure(np.array([0.05, 0.2, 0.5]), np.array([0.3, 0.5, 0.2]))
print(" ", w)
f = functionals(w)
print(f"  error={f.p_e:.6f}  capacity={f.capacity:.6f}  chi2={f.chi2:.6f}")

print("\nMerging nearby atoms preserves the error probability exactly:")
merged = merge_atoms(w, tol=0.2)
print(" ", merged, "->", f"error={functionals(merged).p_e:.6f}")

print("\nConstruction normalizes weights and sorts/merges duplicates:")
messy = DeltaMeasure(np.array([0.3, 0.1, 0.3]), np.array([1.0, 2.0, 1.0]))
print(" ", messy)
