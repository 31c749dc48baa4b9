"""Bound dynamics: scalar recursions, quantized density evolution, fixed points.

Four bound pipelines run level by level on the broadcast tree.  The BEC-side
pipelines start from a perfect observation and stay less degraded / less
noisy than the true root-to-leaves channel, so every level yields a valid
lower bound on the limiting error probability and upper bound on the
limiting information.  The BSC-side pipelines stay more degraded / more
noisy than the true channel at the same depth, so their converged values
bound the limits from the other side; with a starting crossover that already
upper-bounds the limiting error probability, the error pipeline is valid at
every level as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from . import _kernels
from .bp import (
    LayerSpec,
    chi2_entropy_bec,
    chi2_entropy_bsc,
    erasure_function_bec,
    error_function_bsc,
    layer_bp,
)
from .channels import (
    ChannelFunctionals,
    DeltaMeasure,
    TreeParams,
    bec,
    binary_entropy,
    bsc,
    functionals,
    merge_atoms,
)
from .quantize import QuantGrid, q_bec, q_bec_chi2, q_bsc, q_bsc_chi2

__all__ = [
    "FixedPointConfig",
    "DynamicsTrace",
    "TwoAtomResult",
    "fixed_point",
    "scalar_pe_dynamics",
    "scalar_info_dynamics",
    "local_comparison",
    "default_bsc_error_start",
    "two_atom_upper",
]

Side = Literal["BEC", "BSC"]
Target = Literal["error", "info"]

# A run counts as converged once the tracked functional moves by less than
# the tolerance this many levels in a row.
_CONSECUTIVE_HITS = 3

# Stall detection for orbits that settle into a small limit cycle instead of
# a fixed point (coarse quantizers can hop atoms across cell boundaries
# forever).  A run stops as stalled when the short-window range of the
# tracked functional has not improved for a long stretch and the net drift
# over that stretch is within the cycle band.
_STALL_RANGE_WINDOW = 64
_STALL_PATIENCE = 4000
_STALL_CHECK_EVERY = 16
_STALL_IMPROVEMENT = 0.9
_STALL_DRIFT_FACTOR = 2.0


@dataclass(frozen=True)
class FixedPointConfig:
    """Stopping rule for iterated maps: tolerance, level cap, damping."""

    tol: float = 1e-12
    max_iters: int = 100_000
    damping: float = 0.0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("need at least one iteration")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")


@dataclass
class DynamicsTrace:
    """Per-level record of a bound recursion.

    ``states`` holds the per-level state (a scalar for the scalar dynamics;
    channel measures only when requested, to keep long runs cheap),
    ``functional_track`` the channel functionals after each level.
    ``stalled`` marks runs that settled into a small limit cycle; their last
    value is still a valid bound up to the (reported-scale) cycle band.
    """

    states: Optional[list]
    functional_track: list[ChannelFunctionals]
    converged: bool
    iterations: int
    final_state: object = None
    stalled: bool = False

    def track(self, attr: str) -> np.ndarray:
        """The per-level values of one functional, as an array."""
        return np.array([getattr(f, attr) for f in self.functional_track])


def fixed_point(
    f: Callable[[float], float],
    init: float,
    cfg: FixedPointConfig | None = None,
) -> tuple[float, bool]:
    """Iterate a scalar self-map until successive values settle.

    Returns the last iterate and a convergence flag; with damping s the
    update is (1-s)*f(x) + s*x.
    """
    cfg = cfg or FixedPointConfig()
    x = float(init)
    for _ in range(cfg.max_iters):
        x_new = (1.0 - cfg.damping) * f(x) + cfg.damping * x
        if abs(x_new - x) < cfg.tol:
            return x_new, True
        x = x_new
    return x, False


def _run_tracked(
    step: Callable[[object], object],
    functional_of: Callable[[object], ChannelFunctionals],
    init_state: object,
    watch: str,
    depth: Optional[int],
    cfg: FixedPointConfig,
    record_states: bool,
) -> DynamicsTrace:
    """Shared level loop: run ``step`` with convergence on one functional."""
    max_iters = depth if depth is not None else cfg.max_iters
    state = init_state
    prev = getattr(functional_of(state), watch)
    track: list[ChannelFunctionals] = []
    watch_vals: list[float] = []
    states: list = [] if record_states else None
    hits = 0
    converged = False
    stalled = False
    best_range = math.inf
    last_improvement = 0
    it = 0
    while it < max_iters:
        state = step(state)
        f = functional_of(state)
        track.append(f)
        if record_states:
            states.append(state)
        it += 1
        cur = getattr(f, watch)
        watch_vals.append(cur)
        if abs(cur - prev) < cfg.tol:
            hits += 1
            if hits >= _CONSECUTIVE_HITS:
                converged = True
                if depth is None:
                    break
        else:
            hits = 0
        prev = cur
        if (
            depth is None
            and it % _STALL_CHECK_EVERY == 0
            and it > _STALL_RANGE_WINDOW
        ):
            window = watch_vals[-_STALL_RANGE_WINDOW:]
            rng = max(window) - min(window)
            if rng < _STALL_IMPROVEMENT * best_range:
                best_range = rng
                last_improvement = it
            elif it - last_improvement >= _STALL_PATIENCE:
                drift = abs(cur - watch_vals[-_STALL_PATIENCE])
                if drift < _STALL_DRIFT_FACTOR * max(best_range, cfg.tol):
                    stalled = True
                    break
    return DynamicsTrace(
        states=states,
        functional_track=track,
        converged=converged,
        iterations=it,
        final_state=state,
        stalled=stalled,
    )


def scalar_pe_dynamics(
    params: TreeParams,
    side: Side,
    depth: Optional[int] = None,
    cfg: FixedPointConfig | None = None,
) -> DynamicsTrace:
    """Error-probability recursions with whole-channel extremal replacement.

    BEC side: q <- 2 * (layer MAP error with BEC(q) leaves), from q = 0; the
    replacement channel BEC(q) has error probability q/2, a lower bound on
    the true error at the same depth.  BSC side: q <- layer MAP error with
    BSC(q) leaves, from q = 0; BSC(q) has error probability q, an upper
    bound at the same depth.  The tracked ``p_e`` is the bound itself.
    """
    cfg = cfg or FixedPointConfig()
    if side == "BEC":
        step = lambda q: 2.0 * erasure_function_bec(params, q)
        func = lambda q: functionals(bec(q))
    elif side == "BSC":
        step = lambda q: error_function_bsc(params, q)
        func = lambda q: functionals(bsc(q))
    else:
        raise ValueError(f"side must be 'BEC' or 'BSC', got {side!r}")
    return _run_tracked(step, func, 0.0, "p_e", depth, cfg, record_states=True)


def scalar_info_dynamics(
    params: TreeParams,
    side: Side,
    depth: Optional[int] = None,
    cfg: FixedPointConfig | None = None,
) -> DynamicsTrace:
    """Information recursions with chi-square-matched extremal replacement.

    BEC side: the erasure probability follows q <- 1 - (chi-square info of a
    layer with BEC(q) leaves); capacity 1 - q upper-bounds the limiting
    information at every level.  BSC side: the crossover follows
    q <- 1/2 - sqrt(chi-square layer info)/2; the converged capacity
    1 - h(q) lower-bounds the limiting information.  Both start from a
    perfect observation (q = 0); the tracked ``capacity`` is the bound.
    """
    cfg = cfg or FixedPointConfig()
    if side == "BEC":
        step = lambda q: chi2_entropy_bec(params, q)
        func = lambda q: functionals(bec(q))
    elif side == "BSC":

        def step(q):
            info = 1.0 - chi2_entropy_bsc(params, q)
            return 0.5 - 0.5 * math.sqrt(max(info, 0.0))

        func = lambda q: functionals(bsc(q))
    else:
        raise ValueError(f"side must be 'BEC' or 'BSC', got {side!r}")
    return _run_tracked(step, func, 0.0, "capacity", depth, cfg, record_states=True)


def default_bsc_error_start(
    params: TreeParams, cfg: FixedPointConfig | None = None
) -> float:
    """A crossover guaranteed to upper-bound the limiting error probability.

    Takes the smaller of two valid starts: the fixed point of the scalar
    BSC error recursion, and (1 - eta)/2 where eta is the converged
    chi-square information of the scalar BSC information recursion.  The
    latter works because a mixture of symmetric atoms has total variation at
    least its chi-square capacity, so p_e = (1 - TV)/2 <= (1 - eta)/2.
    """
    cfg = cfg or FixedPointConfig()
    err = scalar_pe_dynamics(params, "BSC", cfg=cfg)
    pe_route = err.functional_track[-1].p_e
    info = scalar_info_dynamics(params, "BSC", cfg=cfg)
    chi_route = 0.5 * (1.0 - info.functional_track[-1].chi2)
    return min(max(pe_route, 0.0), max(chi_route, 0.0), 0.5)


def _quantizer_for(side: Side, target: Target):
    if target == "error":
        return q_bsc if side == "BSC" else q_bec
    if target == "info":
        return q_bsc_chi2 if side == "BSC" else q_bec_chi2
    raise ValueError(f"target must be 'error' or 'info', got {target!r}")


def _measure_step(params: TreeParams, grid: QuantGrid, side: Side, target: Target):
    quantizer = _quantizer_for(side, target)

    def step(w: DeltaMeasure) -> DeltaMeasure:
        out = layer_bp(LayerSpec(params, w))
        return merge_atoms(quantizer(out, grid), 0.0)

    return step


def _fused_step(
    params: TreeParams,
    grid: QuantGrid,
    side: Side,
    target: Target,
    prune_below: float = 0.0,
):
    """Kernel-backed level map for d = 2 on a uniform grid.

    Atoms lighter than ``prune_below`` are folded into the extreme point
    that can only loosen the tracked bound (the useless crossover 1/2 on the
    degraded BSC side, the perfect crossover 0 on the upgraded BEC side), so
    pruning never invalidates a bound.
    """
    n = grid.n_cells
    b = grid.boundaries
    chi2_stat = target == "info"
    delta = params.delta

    def step(w: DeltaMeasure) -> DeltaMeasure:
        mass, stat = _kernels.accumulate_level_d2(
            w.deltas, w.weights, delta, n, chi2_stat
        )
        nz = np.nonzero(mass > 0.0)[0]
        m = stat[nz] / mass[nz]
        if side == "BSC":
            locs = 0.5 * (1.0 - np.sqrt(m)) if chi2_stat else m
            wt = mass[nz]
            if prune_below > 0.0:
                tiny = wt < prune_below
                if np.any(tiny):
                    spill = wt[tiny].sum()
                    locs, wt = locs[~tiny].copy(), wt[~tiny].copy()
                    if locs.size and locs[-1] == 0.5:
                        wt[-1] += spill
                    else:
                        locs = np.append(locs, 0.5)
                        wt = np.append(wt, spill)
            return DeltaMeasure(locs, wt)
        lo, hi = b[nz], b[nz + 1]
        if chi2_stat:
            c_lo = (1.0 - 2.0 * lo) ** 2
            c_hi = (1.0 - 2.0 * hi) ** 2
            alpha = np.clip((m - c_hi) / (c_lo - c_hi), 0.0, 1.0)
        else:
            alpha = np.clip((hi - m) / (hi - lo), 0.0, 1.0)
        bw = np.zeros(n + 1)
        np.add.at(bw, nz, alpha * mass[nz])
        np.add.at(bw, nz + 1, (1.0 - alpha) * mass[nz])
        if prune_below > 0.0:
            tiny = (bw > 0.0) & (bw < prune_below)
            tiny[0] = False
            if np.any(tiny):
                bw[0] += bw[tiny].sum()
                bw[tiny] = 0.0
        keep = bw > 0.0
        return DeltaMeasure(b[keep], bw[keep])

    return step


def local_comparison(
    params: TreeParams,
    side: Side,
    target: Target,
    grid: QuantGrid,
    init: DeltaMeasure | None = None,
    depth: Optional[int] = None,
    cfg: FixedPointConfig | None = None,
    engine: Literal["auto", "fused", "measure"] = "auto",
    record_states: bool = False,
    prune_below: float = 1e-16,
) -> DynamicsTrace:
    """Quantized density evolution: one BP layer then one quantizer per level.

    The quantizer is matched to the requested bound: collapse operators for
    the BSC side, spread operators for the BEC side, matching the error
    probability (target='error') or the chi-square information
    (target='info').  Track ``p_e`` for error bounds and ``capacity`` for
    information bounds.  In the fused engine, atoms lighter than
    ``prune_below`` are folded into the bound-loosening extreme point, which
    keeps long near-critical runs fast without invalidating any bound; pass
    0 to disable.

    Every pipeline starts from a perfect observation by default, mirroring
    the scalar recursions: at every level the BEC-side values bound the
    same-depth tree from below and the BSC-side values from above, and the
    converged values bound the depth limits.  The BSC error pipeline also
    accepts a single-crossover start; with a crossover at or above the
    limiting error probability (see ``default_bsc_error_start``) its tracked
    error upper-bounds the limiting error at every level, not just in the
    limit.
    """
    cfg = cfg or FixedPointConfig()
    if side not in ("BEC", "BSC"):
        raise ValueError(f"side must be 'BEC' or 'BSC', got {side!r}")
    if target not in ("error", "info"):
        raise ValueError(f"target must be 'error' or 'info', got {target!r}")

    if init is None:
        init = bsc(0.0)
    elif side == "BSC" and target == "error" and init.support_size != 1:
        raise ValueError(
            "the BSC error pipeline starts from a single-crossover channel"
        )

    if engine == "auto":
        engine = "fused" if (params.d == 2 and grid.is_uniform) else "measure"
    if engine == "fused":
        if params.d != 2 or not grid.is_uniform:
            raise ValueError("fused engine requires d = 2 and a uniform grid")
        step = _fused_step(params, grid, side, target, prune_below)
    elif engine == "measure":
        step = _measure_step(params, grid, side, target)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    watch = "p_e" if target == "error" else "capacity"
    return _run_tracked(step, functionals, init, watch, depth, cfg, record_states)


@dataclass(frozen=True)
class TwoAtomResult:
    """Stationary two-atom family: informative crossover offset, useless
    weight, and the resulting information upper bound."""

    alpha: float
    eps_weight: float
    info_bound: float
    converged: bool
    iterations: int


def two_atom_upper(
    params: TreeParams,
    depth: Optional[int] = None,
    cfg: FixedPointConfig | None = None,
) -> TwoAtomResult:
    """Information upper bound from a two-atom channel family on binary trees.

    The channel is kept inside the family {BSC(1/2 - alpha) w.p. 1 - eps,
    useless w.p. eps}.  Each level fuses two independent looks; the
    middle-quality outcome (one useless look) is then spread onto the family
    support, preserving its chi-square information, which converts a unit of
    its weight into s^2 units at the informative atom (s the agreement
    probability of two informative looks) and the rest into useless weight.
    The stationary family gives the bound (1 - eps*)(1 - h(1/2 - alpha*)).
    """
    cfg = cfg or FixedPointConfig()
    if params.d != 2:
        raise ValueError("the two-atom family recursion is defined for d = 2")
    delta = params.delta
    if delta >= 0.25:
        raise ValueError("the informative atom degenerates for delta >= 1/4")

    max_iters = depth if depth is not None else cfg.max_iters
    alpha = 0.5
    eps = 0.0
    one_minus_2d = 1.0 - 2.0 * delta

    def bound(a: float, e: float) -> float:
        return (1.0 - e) * (1.0 - binary_entropy(0.5 - a))

    prev = bound(alpha, eps)
    hits = 0
    converged = False
    it = 0
    while it < max_iters:
        dbar = 0.5 - alpha * one_minus_2d
        s = dbar * dbar + (1.0 - dbar) * (1.0 - dbar)
        agree_post = dbar * dbar / s
        # chi-square ratio of the one-useless-look outcome to the
        # two-look outcome; equals s^2.
        r = s * s
        good = 1.0 - eps
        new_good = good * good * s + 2.0 * eps * good * r
        alpha_new = 0.5 - agree_post
        eps_new = 1.0 - new_good
        alpha, eps = alpha_new, eps_new
        it += 1
        cur = bound(alpha, eps)
        if abs(cur - prev) < cfg.tol:
            hits += 1
            if hits >= _CONSECUTIVE_HITS:
                converged = True
                if depth is None:
                    break
        else:
            hits = 0
        prev = cur
    return TwoAtomResult(
        alpha=alpha,
        eps_weight=eps,
        info_bound=bound(alpha, eps),
        converged=converged,
        iterations=it,
    )
