"""One layer of belief propagation on a d-ary tree, plus closed-form scalar maps.

A layer takes the channel from a child vertex to the evidence below it,
prepends the edge noise, and fuses the d independent looks at the parent bit
(Bayes combination under a uniform prior).  The scalar functions are the
binomial closed forms of the layer's error probability and chi-square
entropy when the per-child channel is a BSC or a BEC; they drive the scalar
bound recursions and are cross-checked against the measure pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import DeltaMeasure, TreeParams, bec, bsc

__all__ = [
    "LayerSpec",
    "serial_compose",
    "star_combine",
    "layer_bp",
    "error_function_bsc",
    "erasure_function_bec",
    "error_function_bsc_avg_posterior",
    "erasure_function_bec_avg_posterior",
    "chi2_entropy_bsc",
    "chi2_entropy_bec",
    "f_percolation",
]


@dataclass(frozen=True)
class LayerSpec:
    """One tree layer: arity, edge noise, and the channel at each child."""

    params: TreeParams
    leaf_channel: DeltaMeasure


def serial_compose(delta: float, w: DeltaMeasure) -> DeltaMeasure:
    """Prepend a BSC(delta) edge to every atom of ``w``.

    Each crossover x maps to delta + x - 2*delta*x (the crossover of two
    BSCs in series); weights are unchanged.
    """
    if not 0.0 <= delta <= 0.5:
        raise ValueError(f"edge noise must lie in [0, 1/2], got {delta}")
    new = delta + w.deltas * (1.0 - 2.0 * delta)
    # A useless atom must stay exactly useless despite rounding.
    new[w.deltas == 0.5] = 0.5
    np.clip(new, 0.0, 0.5, out=new)
    return DeltaMeasure(new, w.weights)


def star_combine(a: DeltaMeasure, b: DeltaMeasure) -> DeltaMeasure:
    """Bayes-optimal fusion of two independent BMS looks at the same bit.

    For each atom pair the two observations either agree or disagree; each
    event becomes an output atom carrying the event probability and the
    posterior error of the less likely hypothesis.  Commutative, and
    associative up to atom merging.
    """
    pa = a.deltas[:, None]
    wa = a.weights[:, None]
    pb = b.deltas[None, :]
    wb = b.weights[None, :]

    agree = pa * pb + (1.0 - pa) * (1.0 - pb)
    post_agree = (pa * pb) / agree

    d_ab = pa * (1.0 - pb)
    d_ba = (1.0 - pa) * pb
    disagree = d_ab + d_ba
    safe = np.where(disagree > 0.0, disagree, 1.0)
    post_disagree = np.where(disagree > 0.0, np.minimum(d_ab, d_ba) / safe, 0.5)

    weights = np.concatenate([(wa * wb * agree).ravel(), (wa * wb * disagree).ravel()])
    posts = np.concatenate([post_agree.ravel(), post_disagree.ravel()])
    keep = weights > 0.0
    return DeltaMeasure(posts[keep], weights[keep])


def layer_bp(spec: LayerSpec) -> DeltaMeasure:
    """Exact BMS channel from a vertex to the evidence one layer below it.

    Equals the d-fold star combination of the edge-composed leaf channel.
    """
    v = serial_compose(spec.params.delta, spec.leaf_channel)
    out = v
    for _ in range(spec.params.d - 1):
        out = star_combine(out, v)
    return out


def _serial(delta: float, q: float) -> float:
    return delta + q - 2.0 * delta * q


def error_function_bsc(params: TreeParams, q: float) -> float:
    """MAP error probability of one layer with BSC(q) observations per child.

    Closed form: half the sum over agreement counts of the smaller of the two
    likelihoods, with the series crossover kappa = delta * q.
    """
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"BSC leaf noise must lie in [0, 1/2], got {q}")
    d = params.d
    kappa = _serial(params.delta, q)
    total = 0.0
    for i in range(d + 1):
        p0 = kappa**i * (1.0 - kappa) ** (d - i)
        p1 = kappa ** (d - i) * (1.0 - kappa) ** i
        total += math.comb(d, i) * min(p0, p1)
    return 0.5 * total


def erasure_function_bec(params: TreeParams, q: float) -> float:
    """MAP error probability of one layer with BEC(q) observations per child.

    Sum over the number of unerased children and, among those, the number of
    disagreements with the parent bit.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {q}")
    d = params.d
    delta = params.delta
    total = 0.0
    for i in range(d + 1):
        seen = math.comb(d, i) * (1.0 - q) ** i * q ** (d - i)
        if seen == 0.0:
            continue
        inner = 0.0
        for j in range(i + 1):
            p0 = delta**j * (1.0 - delta) ** (i - j)
            p1 = delta ** (i - j) * (1.0 - delta) ** j
            inner += math.comb(i, j) * min(p0, p1)
        total += seen * inner
    return 0.5 * total


def error_function_bsc_avg_posterior(params: TreeParams, q: float) -> float:
    """Mean posterior probability of the wrong bit, BSC(q) observations.

    The conditional-expectation reading of the layer error; always at least
    the MAP error ``error_function_bsc``.
    """
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"BSC leaf noise must lie in [0, 1/2], got {q}")
    d = params.d
    kappa = _serial(params.delta, q)
    total = 0.0
    for i in range(d + 1):
        p0 = kappa**i * (1.0 - kappa) ** (d - i)
        p1 = kappa ** (d - i) * (1.0 - kappa) ** i
        if p0 + p1 > 0.0:
            total += math.comb(d, i) * p0 * p1 / (p0 + p1)
    return total


def erasure_function_bec_avg_posterior(params: TreeParams, q: float) -> float:
    """Mean posterior probability of the wrong bit, BEC(q) observations."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {q}")
    d = params.d
    delta = params.delta
    total = 0.0
    for i in range(d + 1):
        seen = math.comb(d, i) * (1.0 - q) ** i * q ** (d - i)
        if seen == 0.0:
            continue
        inner = 0.0
        for j in range(i + 1):
            p0 = delta**j * (1.0 - delta) ** (i - j)
            p1 = delta ** (i - j) * (1.0 - delta) ** j
            if p0 + p1 > 0.0:
                inner += math.comb(i, j) * p0 * p1 / (p0 + p1)
        total += seen * inner
    return total


def chi2_layer_info_bsc(params: TreeParams, q: float) -> float:
    """Chi-square information retained by one layer with BSC(q) observations."""
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"BSC leaf noise must lie in [0, 1/2], got {q}")
    d = params.d
    kappa = _serial(params.delta, q)
    acc = 0.0
    for i in range(d + 1):
        den = kappa**i * (1.0 - kappa) ** (d - i) + kappa ** (d - i) * (1.0 - kappa) ** i
        if den == 0.0:
            continue
        num = kappa ** (2 * i) * (1.0 - kappa) ** (2 * (d - i))
        acc += math.comb(d, i) * num / den
    return 2.0 * acc - 1.0


def chi2_layer_info_bec(params: TreeParams, eps: float) -> float:
    """Chi-square information of one layer whose children are seen with
    probability ``eps`` through the edge noise (erased otherwise)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"observation probability must lie in [0, 1], got {eps}")
    d = params.d
    delta = params.delta
    acc = 0.0
    for i in range(d + 1):
        seen = math.comb(d, i) * eps**i * (1.0 - eps) ** (d - i)
        if seen == 0.0:
            continue
        inner = 0.0
        for j in range(i + 1):
            den = (1.0 - delta) ** j * delta ** (i - j) + (1.0 - delta) ** (i - j) * delta**j
            if den == 0.0:
                continue
            num = (1.0 - delta) ** (2 * j) * delta ** (2 * (i - j))
            inner += math.comb(i, j) * num / den
        acc += seen * inner
    return 2.0 * acc - 1.0


def chi2_entropy_bsc(params: TreeParams, q: float) -> float:
    """One minus the chi-square information of a layer with BSC(q) leaves."""
    return 1.0 - chi2_layer_info_bsc(params, q)


def chi2_entropy_bec(params: TreeParams, q: float) -> float:
    """One minus the chi-square information of a layer with BEC(q) leaves."""
    return 1.0 - chi2_layer_info_bec(params, 1.0 - q)


def f_percolation(params: TreeParams, eps: float) -> float:
    """Percolation-style upper map 1 - (1 - (1-2*delta)^2 * eps)^d.

    Dominates the exact chi-square layer map ``chi2_layer_info_bec`` on
    [0, 1]; its nontrivial fixed point upper-bounds the limiting information.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"information argument must lie in [0, 1], got {eps}")
    k = (1.0 - 2.0 * params.delta) ** 2
    return 1.0 - (1.0 - k * eps) ** params.d


def layer_with_bsc_leaves(params: TreeParams, q: float) -> DeltaMeasure:
    """Measure-pipeline layer output with BSC(q) leaf observations."""
    return layer_bp(LayerSpec(params, bsc(q)))


def layer_with_bec_leaves(params: TreeParams, q: float) -> DeltaMeasure:
    """Measure-pipeline layer output with BEC(q) leaf observations."""
    return layer_bp(LayerSpec(params, bec(q)))
