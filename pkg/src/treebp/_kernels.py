"""Fused numba kernel for one quantized density-evolution level at d = 2.

The per-level map (edge composition, pairwise Bayes fusion of the two child
looks, binning of every outcome atom into a uniform grid cell) is fused into
a single pass over atom pairs so that sweeps over tens of thousands of
levels stay fast.  Only the per-cell mass and the per-cell accumulated
statistic (mean crossover, or mean chi-square information) leave the kernel;
the quantizer rebuild happens outside in numpy.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, fastmath=True)
def accumulate_level_d2(locs, weights, edge_delta, n_cells, chi2_stat):
    """Accumulate one BP layer of a 2-ary tree into uniform grid cells.

    locs, weights: atoms of the child channel (weights sum to 1).
    edge_delta: edge-flip probability composed in front of every atom.
    chi2_stat: accumulate (1-2x)^2 instead of x for the per-cell statistic.

    Returns (mass, stat) arrays of length n_cells; atoms exactly on an
    interior cell boundary are assigned to the left cell.
    """
    m = locs.shape[0]
    mass = np.zeros(n_cells)
    stat = np.zeros(n_cells)
    two_n = 2.0 * n_cells

    lam = np.empty(m)
    for i in range(m):
        x = locs[i]
        if x >= 0.5:
            lam[i] = 0.5
        else:
            v = edge_delta + x * (1.0 - 2.0 * edge_delta)
            lam[i] = 0.5 if v > 0.5 else v

    for i in range(m):
        pi = lam[i]
        qi = 1.0 - pi
        wi = weights[i]
        for j in range(i, m):
            pj = lam[j]
            qj = 1.0 - pj
            wf = wi * weights[j]
            if i != j:
                wf *= 2.0
            if wf == 0.0:
                continue

            agree = pi * pj + qi * qj
            post = (pi * pj) / agree
            wa = wf * agree
            c = int(np.ceil(post * two_n)) - 1
            if c < 0:
                c = 0
            elif c >= n_cells:
                c = n_cells - 1
            mass[c] += wa
            if chi2_stat:
                t = 1.0 - 2.0 * post
                stat[c] += wa * t * t
            else:
                stat[c] += wa * post

            d01 = pi * qj
            d10 = qi * pj
            dis = d01 + d10
            if dis > 0.0:
                lo = d01 if d01 < d10 else d10
                post2 = lo / dis
                wd = wf * dis
                c2 = int(np.ceil(post2 * two_n)) - 1
                if c2 < 0:
                    c2 = 0
                elif c2 >= n_cells:
                    c2 = n_cells - 1
                mass[c2] += wd
                if chi2_stat:
                    t2 = 1.0 - 2.0 * post2
                    stat[c2] += wd * t2 * t2
                else:
                    stat[c2] += wd * post2

    return mass, stat
