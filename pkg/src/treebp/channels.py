"""Binary memoryless symmetric (BMS) channels as atomic crossover mixtures.

Every BMS channel is represented by a finite probability measure over a
crossover parameter in [0, 1/2]: with probability ``weights[i]`` the channel
behaves like a binary symmetric channel with crossover ``deltas[i]``.  The
two extremal families are the BSC (a single atom) and the BEC (atoms at 0
and 1/2 only).  All channel functionals (error probability, capacity,
chi-square capacity) are mixture averages of the single-atom values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

__all__ = [
    "DeltaMeasure",
    "TreeParams",
    "ChannelFunctionals",
    "binary_entropy",
    "delta_c",
    "bsc",
    "bec",
    "functionals",
    "merge_atoms",
]

_LN2 = math.log(2.0)

# Construction-time dedup tolerance: star combinations create near-duplicate
# atoms that would otherwise blow up the support size.
ATOM_MERGE_TOL = 1e-12

# Slack for results of float arithmetic that land an ulp outside [0, 1/2].
_BOUNDARY_SLOP = 1e-12


def binary_entropy(p):
    """Base-2 binary entropy h(p) = -p log2 p - (1-p) log2 (1-p).

    Accepts scalars or arrays; 0 log 0 is taken as 0.  Raises ValueError for
    arguments outside [0, 1].
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < -_BOUNDARY_SLOP) or np.any(arr > 1.0 + _BOUNDARY_SLOP):
        raise ValueError(f"binary_entropy argument outside [0, 1]: {p!r}")
    arr = np.clip(arr, 0.0, 1.0)
    h = -(xlogy(arr, arr) + xlogy(1.0 - arr, 1.0 - arr)) / _LN2
    if np.ndim(p) == 0:
        return float(h)
    return h


def delta_c(d) -> float:
    """Critical edge-flip probability (1 - 1/sqrt(d)) / 2 for a d-ary tree."""
    if int(d) != d or d < 2:
        raise ValueError(f"arity must be an integer >= 2, got {d!r}")
    return 0.5 * (1.0 - 1.0 / math.sqrt(d))


def _canonical(deltas, weights, merge_tol=ATOM_MERGE_TOL):
    """Sort atoms, merge near-duplicates, drop zero weights, normalize."""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=np.float64)).copy()
    weights = np.atleast_1d(np.asarray(weights, dtype=np.float64)).copy()
    if deltas.shape != weights.shape or deltas.ndim != 1:
        raise ValueError("deltas and weights must be 1-D arrays of equal length")
    if deltas.size == 0:
        raise ValueError("a channel measure needs at least one atom")
    if np.any(~np.isfinite(deltas)) or np.any(~np.isfinite(weights)):
        raise ValueError("atoms must be finite")
    if np.any(weights < -_BOUNDARY_SLOP):
        raise ValueError("negative atom weight")
    if np.any(deltas < -_BOUNDARY_SLOP) or np.any(deltas > 0.5 + _BOUNDARY_SLOP):
        raise ValueError(f"crossover values must lie in [0, 1/2], got {deltas}")
    np.clip(deltas, 0.0, 0.5, out=deltas)

    keep = weights > 0.0
    if not np.any(keep):
        raise ValueError("all atom weights are zero")
    deltas, weights = deltas[keep], weights[keep]

    order = np.argsort(deltas, kind="stable")
    deltas, weights = deltas[order], weights[order]

    if deltas.size > 1 and np.any(np.diff(deltas) <= merge_tol):
        # Greedy left-to-right clustering of consecutive atoms within tol.
        out_d = np.empty_like(deltas)
        out_w = np.empty_like(weights)
        m = 0
        acc_w = weights[0]
        acc_dw = deltas[0] * weights[0]
        last = deltas[0]
        for i in range(1, deltas.size):
            if deltas[i] - last <= merge_tol:
                acc_w += weights[i]
                acc_dw += deltas[i] * weights[i]
            else:
                out_d[m] = acc_dw / acc_w
                out_w[m] = acc_w
                m += 1
                acc_w = weights[i]
                acc_dw = deltas[i] * weights[i]
            last = deltas[i]
        out_d[m] = acc_dw / acc_w
        out_w[m] = acc_w
        deltas, weights = out_d[: m + 1].copy(), out_w[: m + 1].copy()

    total = weights.sum()
    if not math.isfinite(total) or total <= 0.0:
        raise ValueError("atom weights must have positive finite total")
    weights /= total
    np.clip(deltas, 0.0, 0.5, out=deltas)
    return deltas, weights


@dataclass(frozen=True, eq=False)
class DeltaMeasure:
    """A BMS channel as a finite mixture of symmetric-crossover atoms.

    Atoms are kept sorted with strictly increasing crossover values and
    weights normalized to sum to one; near-duplicates (within 1e-12) are
    merged on construction.
    """

    deltas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        d, w = _canonical(self.deltas, self.weights)
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "weights", w)
        self.deltas.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def support_size(self) -> int:
        return int(self.deltas.size)

    @property
    def atoms(self):
        """Atoms as a list of (crossover, weight) pairs."""
        return list(zip(self.deltas.tolist(), self.weights.tolist()))

    def __repr__(self):
        if self.support_size <= 6:
            body = ", ".join(f"({d:.6g}, {w:.6g})" for d, w in self.atoms)
        else:
            body = f"{self.support_size} atoms"
        return f"DeltaMeasure({body})"


def bsc(delta: float) -> DeltaMeasure:
    """The binary symmetric channel with crossover ``delta`` (one atom)."""
    if not 0.0 <= delta <= 0.5:
        raise ValueError(f"BSC crossover must lie in [0, 1/2], got {delta}")
    return DeltaMeasure(np.array([delta]), np.array([1.0]))


def bec(q: float) -> DeltaMeasure:
    """The binary erasure channel with erasure probability ``q``.

    Represented as the two-atom mixture {0 w.p. 1-q, 1/2 w.p. q}; degenerate
    weights are dropped.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {q}")
    return DeltaMeasure(np.array([0.0, 0.5]), np.array([1.0 - q, q]))


@dataclass(frozen=True)
class ChannelFunctionals:
    """Error probability, capacity (bits) and chi-square capacity."""

    p_e: float
    capacity: float
    chi2: float


def functionals(w: DeltaMeasure) -> ChannelFunctionals:
    """Mixture-average channel functionals of a BMS channel."""
    d = w.deltas
    wt = w.weights
    p_e = float(np.dot(wt, d))
    capacity = float(np.dot(wt, 1.0 - binary_entropy(d)))
    chi2 = float(np.dot(wt, (1.0 - 2.0 * d) ** 2))
    return ChannelFunctionals(p_e=p_e, capacity=capacity, chi2=chi2)


def merge_atoms(w: DeltaMeasure, tol: float) -> DeltaMeasure:
    """Merge atoms whose crossovers differ by at most ``tol``.

    Merged weight is the sum, merged crossover the weight average, so the
    error probability and total weight are preserved exactly.
    """
    if tol < 0:
        raise ValueError("merge tolerance must be nonnegative")
    d, wt = _canonical(w.deltas, w.weights, merge_tol=tol)
    out = DeltaMeasure.__new__(DeltaMeasure)
    object.__setattr__(out, "deltas", d)
    object.__setattr__(out, "weights", wt)
    out.deltas.setflags(write=False)
    out.weights.setflags(write=False)
    return out


@dataclass(frozen=True)
class TreeParams:
    """Arity and edge-flip probability of the broadcast tree.

    ``d`` is the number of children per vertex and ``delta`` the probability
    that an edge flips the transmitted bit.  ``d = 1`` (a path) is accepted
    for the layer functions, but the critical point is defined for d >= 2.
    """

    d: int
    delta: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"arity must be an integer >= 1, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError(f"edge noise must lie in [0, 1/2], got {self.delta}")
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def delta_c(self) -> float:
        """Critical edge noise for this arity."""
        return delta_c(self.d)

    @property
    def tau(self) -> float:
        """Distance below the critical point (negative when supercritical)."""
        return self.delta_c - self.delta
