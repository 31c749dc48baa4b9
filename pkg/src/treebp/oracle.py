"""Ground truth for small trees by exhaustive leaf enumeration.

``exact_tree`` marginalizes the broadcast process bottom-up and evaluates
the error probability, mutual information, and chi-square information of
the root given every possible leaf vector.  ``exact_de`` computes the same
channel through the unquantized layer pipeline; the two routes must agree,
which pins down the layer operations against an independent computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .bp import LayerSpec, layer_bp
from .channels import DeltaMeasure, TreeParams, bsc, merge_atoms

__all__ = ["ExactResult", "ResourceLimitError", "exact_tree", "exact_de"]

_LN2 = float(np.log(2.0))

# Enumerating 2**(d**h) leaf vectors stays instantaneous up to 16 leaves.
MAX_LEAVES = 16


class ResourceLimitError(RuntimeError):
    """An exact computation would exceed its configured size limit."""


@dataclass(frozen=True)
class ExactResult:
    """Exact functionals of the root-to-leaves channel at a finite depth."""

    p_e: float
    mutual_info: float
    chi2_info: float
    leaf_count: int


def _leaf_distribution(d: int, delta: float, depth: int) -> np.ndarray:
    """P(leaf vector | root = 0) for all 2**(d**depth) leaf vectors.

    Leaf vectors are indexed by their bits, most significant bit first; the
    conditional law given root = 1 is the same array reversed (flip all
    bits).  Identical subtrees share one distribution per level.
    """
    dist0 = np.array([1.0, 0.0])
    for _ in range(depth):
        dist1 = dist0[::-1]
        child0 = (1.0 - delta) * dist0 + delta * dist1
        block = child0
        for _ in range(d - 1):
            block = np.outer(block, child0).ravel()
        dist0 = block
    return dist0


def exact_tree(params: TreeParams, depth: int) -> ExactResult:
    """Exact error probability and information of a depth-``depth`` tree."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    leaves = params.d**depth
    if leaves > MAX_LEAVES:
        raise ResourceLimitError(
            f"{leaves} leaves need {2**leaves} leaf vectors; limit is "
            f"{MAX_LEAVES} leaves"
        )
    p0 = _leaf_distribution(params.d, params.delta, depth)
    p1 = p0[::-1]

    p_e = 0.5 * float(np.sum(np.minimum(p0, p1)))

    mix = 0.5 * (p0 + p1)
    mutual = 0.5 * float(
        np.sum(xlogy(p0, p0) + xlogy(p1, p1) - 2.0 * xlogy(mix, mix))
    ) / _LN2

    tot = p0 + p1
    mask = tot > 0.0
    chi2 = float(np.sum((p0[mask] ** 2 + p1[mask] ** 2) / tot[mask])) - 1.0

    return ExactResult(
        p_e=p_e, mutual_info=mutual, chi2_info=chi2, leaf_count=int(leaves)
    )


def exact_de(params: TreeParams, depth: int, atom_cap: int = 10**6) -> DeltaMeasure:
    """Unquantized density evolution: the exact channel as an atom measure.

    Iterates the BP layer from a perfect observation; raises
    ResourceLimitError if the support would exceed ``atom_cap`` atoms.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    w = bsc(0.0)
    for _ in range(depth):
        if w.support_size**params.d * 2 > atom_cap:
            raise ResourceLimitError(
                f"layer would exceed the atom cap of {atom_cap}"
            )
        w = merge_atoms(layer_bp(LayerSpec(params, w)), 1e-12)
        if w.support_size > atom_cap:
            raise ResourceLimitError(
                f"support grew past the atom cap of {atom_cap}"
            )
    return w
