"""One layer of belief propagation, exactly and in closed form.

A layer of the broadcast tree is a channel from a vertex to the evidence one
level below it: each of the d children is reached through an edge that flips
the bit with probability delta, and each child is observed through a leaf
channel.  The library computes the layer exactly on the mixture
representation, and also in O(d^2) closed form when the leaf channel is a
BSC or a BEC; the two routes agree to machine precision.
"""

import numpy as np

from treebp import (
    LayerSpec,
    TreeParams,
    bec,
    bsc,
    chi2_entropy_bsc,
    erasure_function_bec,
    error_function_bsc,
    f_percolation,
    functionals,
    layer_bp,
    serial_compose,
    star_combine,
)
from treebp.bp import chi2_layer_info_bec

params = TreeParams(d=2, delta=0.1)

print("Edge composition: BSC(0.1) edge in front of BSC(0.2) leaf")
print(" ", serial_compose(0.1, bsc(0.2)))

print("\nFusing two independent looks at the same bit:")
print(" ", star_combine(bsc(0.1), bsc(0.2)))

print("\nOne layer with perfect leaf observations (d=2, delta=0.1):")
layer = layer_bp(LayerSpec(params, bsc(0.0)))
print(" ", layer)
print("  agreement outcome is confident, disagreement is a coin toss")

print("\nClosed forms vs the measure pipeline:")
q = 0.2
exact = functionals(layer_bp(LayerSpec(params, bsc(q))))
print(f"  layer error with BSC({q}) leaves: closed form "
      f"{error_function_bsc(params, q):.12f} vs measure {exact.p_e:.12f}")
qe = 0.35
exact_e = functionals(layer_bp(LayerSpec(params, bec(qe))))
print(f"  layer error with BEC({qe}) leaves: closed form "
      f"{erasure_function_bec(params, qe):.12f} vs measure {exact_e.p_e:.12f}")

print("\nThe chi-square layer map and its percolation majorant:")
for eps in (0.2, 0.5, 0.9):
    g = chi2_layer_info_bec(params, eps)
    f = f_percolation(params, eps)
    print(f"  input info {eps:.1f}: exact map {g:.6f} <= percolation {f:.6f}")

print("\nInformation retention of one layer as leaf noise grows:")
for q in np.linspace(0.0, 0.5, 6):
    print(f"  q = {q:.1f}: chi2 entropy = {chi2_entropy_bsc(params, q):.6f}")
