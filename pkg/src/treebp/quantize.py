"""Interval quantizers that degrade or upgrade a channel measure.

A quantization grid partitions [0, 1/2] into cells.  Within each cell the
collapse operators (``q_bsc``, ``q_bsc_chi2``) concentrate the mass on a
single matched point, producing a more degraded / more noisy channel, while
the spread operators (``q_bec``, ``q_bec_chi2``) push the mass to the cell
endpoints, producing a less degraded / less noisy channel.  The first pair
matches the error probability per cell, the second pair the chi-square
information; in both cases the matched functional is preserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DeltaMeasure

__all__ = [
    "QuantGrid",
    "uniform_grid",
    "cell_indices",
    "q_bsc",
    "q_bec",
    "q_bsc_chi2",
    "q_bec_chi2",
]


@dataclass(frozen=True, eq=False)
class QuantGrid:
    """Strictly increasing cell boundaries from 0 to 1/2."""

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.float64).copy()
        if b.ndim != 1 or b.size < 2:
            raise ValueError("a grid needs at least two boundaries")
        if abs(b[0]) > 1e-15 or abs(b[-1] - 0.5) > 1e-15:
            raise ValueError("grid must span [0, 1/2] exactly")
        b[0], b[-1] = 0.0, 0.5
        if np.any(np.diff(b) <= 0.0):
            raise ValueError("grid boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", b)
        self.boundaries.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return int(self.boundaries.size - 1)

    @property
    def is_uniform(self) -> bool:
        n = self.n_cells
        ref = np.arange(n + 1, dtype=np.float64) / (2.0 * n)
        return bool(np.max(np.abs(self.boundaries - ref)) < 1e-15)

    def __repr__(self):
        return f"QuantGrid({self.n_cells} cells)"


def uniform_grid(n_cells: int) -> QuantGrid:
    """Uniform partition of [0, 1/2] into ``n_cells`` cells."""
    if int(n_cells) != n_cells or n_cells < 1:
        raise ValueError(f"cell count must be a positive integer, got {n_cells!r}")
    n_cells = int(n_cells)
    return QuantGrid(np.arange(n_cells + 1, dtype=np.float64) / (2.0 * n_cells))


def cell_indices(grid: QuantGrid, deltas: np.ndarray) -> np.ndarray:
    """Cell index of each crossover; atoms on an interior boundary go left."""
    idx = np.searchsorted(grid.boundaries, deltas, side="left") - 1
    return np.clip(idx, 0, grid.n_cells - 1)


def _cell_stats(w: DeltaMeasure, grid: QuantGrid, stat: np.ndarray):
    """Total mass and mass-weighted mean of ``stat`` per nonempty cell."""
    idx = cell_indices(grid, w.deltas)
    n = grid.n_cells
    mass = np.bincount(idx, weights=w.weights, minlength=n)
    num = np.bincount(idx, weights=w.weights * stat, minlength=n)
    nz = np.nonzero(mass > 0.0)[0]
    return nz, mass[nz], num[nz] / mass[nz]


def q_bsc(w: DeltaMeasure, grid: QuantGrid) -> DeltaMeasure:
    """Collapse each cell's mass to its conditional mean crossover.

    Preserves the error probability exactly; the result is a degradation of
    the input.
    """
    nz, mass, mean = _cell_stats(w, grid, w.deltas)
    return DeltaMeasure(mean, mass)


def q_bec(w: DeltaMeasure, grid: QuantGrid) -> DeltaMeasure:
    """Spread each cell's mass to the cell endpoints, preserving the mean.

    Preserves the error probability exactly; the input is a degradation of
    the result.
    """
    b = grid.boundaries
    nz, mass, mean = _cell_stats(w, grid, w.deltas)
    lo, hi = b[nz], b[nz + 1]
    alpha = np.clip((hi - mean) / (hi - lo), 0.0, 1.0)
    bw = np.zeros(grid.n_cells + 1)
    np.add.at(bw, nz, alpha * mass)
    np.add.at(bw, nz + 1, (1.0 - alpha) * mass)
    keep = bw > 0.0
    return DeltaMeasure(b[keep], bw[keep])


def q_bsc_chi2(w: DeltaMeasure, grid: QuantGrid) -> DeltaMeasure:
    """Collapse each cell's mass to the crossover matching its mean
    chi-square information (1 - 2x)^2.

    Preserves the chi-square capacity exactly; the result is more noisy than
    the input.
    """
    nz, mass, mean = _cell_stats(w, grid, (1.0 - 2.0 * w.deltas) ** 2)
    locs = 0.5 * (1.0 - np.sqrt(mean))
    return DeltaMeasure(locs, mass)


def q_bec_chi2(w: DeltaMeasure, grid: QuantGrid) -> DeltaMeasure:
    """Spread each cell's mass to the cell endpoints, preserving the mean
    chi-square information.

    Preserves the chi-square capacity exactly; the result is less noisy than
    the input.
    """
    b = grid.boundaries
    nz, mass, mean = _cell_stats(w, grid, (1.0 - 2.0 * w.deltas) ** 2)
    c_lo = (1.0 - 2.0 * b[nz]) ** 2
    c_hi = (1.0 - 2.0 * b[nz + 1]) ** 2
    if np.any(c_lo <= c_hi):
        # (1 - 2x)^2 is strictly decreasing on [0, 1/2], so equal endpoint
        # values cannot occur on a valid grid.
        raise RuntimeError("degenerate quantization cell in chi-square spread")
    alpha = np.clip((mean - c_hi) / (c_lo - c_hi), 0.0, 1.0)
    bw = np.zeros(grid.n_cells + 1)
    np.add.at(bw, nz, alpha * mass)
    np.add.at(bw, nz + 1, (1.0 - alpha) * mass)
    keep = bw > 0.0
    return DeltaMeasure(b[keep], bw[keep])
