"""Bound dynamics: fixed points, scalar recursions, quantized evolution."""

import math

import numpy as np
import pytest

from treebp.bp import chi2_layer_info_bsc, f_percolation
from treebp.channels import (
    DeltaMeasure,
    TreeParams,
    bec,
    binary_entropy,
    bsc,
    delta_c,
    functionals,
)
from treebp.dynamics import (
    DynamicsTrace,
    FixedPointConfig,
    default_bsc_error_start,
    fixed_point,
    local_comparison,
    scalar_info_dynamics,
    scalar_pe_dynamics,
    two_atom_upper,
)
from treebp.quantize import uniform_grid


def _bisect_fixed_point(fn, lo, hi, tol=1e-13):
    """Independent root find of fn(x) = x on [lo, hi] by bisection."""
    g = lambda x: fn(x) - x
    assert g(lo) * g(hi) <= 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestFixedPoint:
    def test_identity_map(self):
        value, ok = fixed_point(lambda x: x, 0.3)
        assert ok and value == 0.3

    def test_noiseless_percolation(self):
        p = TreeParams(2, 0.0)
        value, ok = fixed_point(lambda e: f_percolation(p, e), 0.5)
        assert ok
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_against_bisection_oracle(self):
        p = TreeParams(2, 0.14)
        value, ok = fixed_point(
            lambda e: f_percolation(p, e), 1.0, FixedPointConfig(tol=1e-14)
        )
        # The nontrivial fixed point, located independently by bisection on
        # f(e) - e away from the repelling root at 0.
        expected = _bisect_fixed_point(lambda e: f_percolation(p, e), 0.01, 1.0)
        assert ok
        assert value == pytest.approx(expected, abs=1e-10)

    def test_damping_still_converges(self):
        p = TreeParams(2, 0.1)
        v0, _ = fixed_point(lambda e: f_percolation(p, e), 1.0)
        v1, ok = fixed_point(
            lambda e: f_percolation(p, e), 1.0, FixedPointConfig(damping=0.5)
        )
        assert ok and v1 == pytest.approx(v0, abs=1e-9)

    def test_nonconvergence_reported(self):
        value, ok = fixed_point(
            lambda x: 1.0 - x, 0.2, FixedPointConfig(max_iters=50)
        )
        assert not ok

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FixedPointConfig(tol=0.0)
        with pytest.raises(ValueError):
            FixedPointConfig(damping=1.0)


class TestScalarErrorDynamics:
    def test_noiseless_tree_stays_at_zero(self):
        tr = scalar_pe_dynamics(TreeParams(2, 0.0), "BSC", depth=3)
        assert tr.track("p_e").tolist() == [0.0, 0.0, 0.0]

    def test_first_level_matches_layer_error(self):
        tr = scalar_pe_dynamics(TreeParams(2, 0.1), "BSC", depth=1)
        assert tr.functional_track[-1].p_e == pytest.approx(0.10, abs=1e-14)

    def test_bec_side_tracked_bound_is_half_erasure(self):
        tr = scalar_pe_dynamics(TreeParams(2, 0.1), "BEC", depth=1)
        # One layer with perfect leaves has error 0.1; the spread doubles the
        # erasure so the replacement BEC(0.2) carries error 0.1.
        assert tr.states[-1] == pytest.approx(0.2, abs=1e-14)
        assert tr.functional_track[-1].p_e == pytest.approx(0.1, abs=1e-14)

    def test_binary_tree_upper_bound_is_trivial(self):
        # For two children the one-layer error with BSC leaves equals the
        # series crossover, so the whole-channel replacement recursion walks
        # to the useless fixed point for any positive noise.
        tr = scalar_pe_dynamics(TreeParams(2, 0.05), "BSC")
        assert tr.converged
        assert tr.functional_track[-1].p_e == pytest.approx(0.5, abs=1e-9)

    def test_sandwich_between_sides(self):
        for d, delta in [(2, 0.1), (3, 0.2)]:
            p = TreeParams(d, delta)
            lo = scalar_pe_dynamics(p, "BEC", depth=12).track("p_e")
            hi = scalar_pe_dynamics(p, "BSC", depth=12).track("p_e")
            assert np.all(lo <= hi + 1e-14)

    def test_bad_side_rejected(self):
        with pytest.raises(ValueError):
            scalar_pe_dynamics(TreeParams(2, 0.1), "BAD")


class TestScalarInfoDynamics:
    def test_useless_noise_kills_information(self):
        p = TreeParams(2, 0.5)
        lo = scalar_info_dynamics(p, "BSC", depth=5)
        hi = scalar_info_dynamics(p, "BEC", depth=5)
        assert lo.states[-1] == pytest.approx(0.5, abs=1e-12)
        assert hi.states[-1] == pytest.approx(1.0, abs=1e-12)
        assert lo.functional_track[-1].capacity == pytest.approx(0.0, abs=1e-12)
        assert hi.functional_track[-1].capacity == pytest.approx(0.0, abs=1e-12)

    def test_first_level_crossover_value(self):
        # One level from a perfect start: the replacement crossover matches
        # the chi-square information of one layer, via enumeration.
        p = TreeParams(2, 0.1)
        tr = scalar_info_dynamics(p, "BSC", depth=1)
        chi = chi2_layer_info_bsc(p, 0.0)
        assert tr.states[-1] == pytest.approx(
            0.5 - 0.5 * math.sqrt(chi), abs=1e-14
        )
        assert tr.states[-1] == pytest.approx(0.0582739, abs=1e-6)

    def test_supercritical_bounds_vanish(self):
        # Strictly above the critical noise the upper bound dies geometrically.
        for d, delta in [(2, 0.15), (3, 0.25), (4, 0.3)]:
            assert d * (1 - 2 * delta) ** 2 < 1.0
            p = TreeParams(d, delta)
            hi = scalar_info_dynamics(p, "BEC")
            assert hi.functional_track[-1].capacity <= 1e-6

    def test_exactly_critical_decays_polynomially(self):
        # At the critical point itself the contraction is only quadratic, so
        # the bound shrinks like 1/level; it must still be heading to zero.
        p = TreeParams(2, delta_c(2))
        hi = scalar_info_dynamics(p, "BEC")
        assert hi.functional_track[-1].capacity <= 1e-4

    def test_subcritical_lower_bound_positive(self):
        for d, delta in [(2, 0.1), (3, 0.15), (4, 0.2)]:
            assert d * (1 - 2 * delta) ** 2 > 1.0
            p = TreeParams(d, delta)
            lo = scalar_info_dynamics(p, "BSC")
            assert lo.converged
            assert lo.functional_track[-1].capacity >= 1e-6


class TestTraceContract:
    def test_track_length_equals_iterations(self):
        tr = scalar_info_dynamics(TreeParams(2, 0.1), "BEC", depth=7)
        assert tr.iterations == 7
        assert len(tr.functional_track) == 7
        assert len(tr.states) == 7

    def test_converged_means_settled(self):
        tr = scalar_info_dynamics(TreeParams(2, 0.1), "BEC")
        assert tr.converged
        t = tr.track("capacity")
        assert abs(t[-1] - t[-2]) < 1e-12


class TestLocalComparison:
    @pytest.mark.parametrize("d", [2, 3])
    def test_one_cell_grid_reduces_to_scalar(self, d):
        grid = uniform_grid(1)
        for delta in (0.05, 0.1, delta_c(d) - 0.01):
            p = TreeParams(d, delta)
            depth = 30
            cases = [
                ("BEC", "error", scalar_pe_dynamics(p, "BEC", depth=depth)),
                ("BSC", "error", scalar_pe_dynamics(p, "BSC", depth=depth)),
                ("BEC", "info", scalar_info_dynamics(p, "BEC", depth=depth)),
                ("BSC", "info", scalar_info_dynamics(p, "BSC", depth=depth)),
            ]
            for side, target, scalar_trace in cases:
                loc = local_comparison(
                    p, side, target, grid, init=bsc(0.0), depth=depth
                )
                for attr in ("p_e", "capacity", "chi2"):
                    np.testing.assert_allclose(
                        loc.track(attr),
                        scalar_trace.track(attr),
                        atol=1e-10,
                        err_msg=f"{side}/{target}/{attr}",
                    )

    def test_fused_and_measure_engines_agree(self):
        p = TreeParams(2, 0.12)
        grid = uniform_grid(16)
        for side in ("BEC", "BSC"):
            for target in ("error", "info"):
                a = local_comparison(
                    p, side, target, grid, init=bsc(0.0), depth=12,
                    engine="fused", prune_below=0.0,
                )
                b = local_comparison(
                    p, side, target, grid, init=bsc(0.0), depth=12,
                    engine="measure",
                )
                for attr in ("p_e", "capacity", "chi2"):
                    np.testing.assert_allclose(
                        a.track(attr), b.track(attr), atol=1e-12
                    )

    def test_sandwich_at_every_level(self):
        rng = np.random.default_rng(123)
        grid_sizes = (1, 2, 8, 32)
        for _ in range(40):
            d = int(rng.integers(2, 4))
            delta = rng.uniform(0.01, 0.49)
            p = TreeParams(d, delta)
            grid = uniform_grid(int(rng.choice(grid_sizes)))
            depth = int(rng.integers(2, 7))
            lo_pe = local_comparison(p, "BEC", "error", grid, depth=depth)
            hi_pe = local_comparison(p, "BSC", "error", grid, depth=depth)
            lo_i = local_comparison(p, "BSC", "info", grid, depth=depth)
            hi_i = local_comparison(p, "BEC", "info", grid, depth=depth)
            assert np.all(lo_pe.track("p_e") <= hi_pe.track("p_e") + 1e-12)
            assert np.all(
                lo_i.track("capacity") <= hi_i.track("capacity") + 1e-12
            )

    def test_monotone_convergence_from_perfect_start(self):
        # From a perfect start each level adds noise, so the tracked error
        # rises and the capacity falls, up to the terminal oscillation band
        # of the quantizer (coarse collapse grids end in a small limit cycle
        # around the fixed point rather than exactly on it).
        for cells in (4, 64):
            grid = uniform_grid(cells)
            for delta in (0.05, 0.12):
                p = TreeParams(2, delta)
                for side, target in (
                    ("BEC", "error"),
                    ("BSC", "error"),
                    ("BEC", "info"),
                    ("BSC", "info"),
                ):
                    tr = local_comparison(
                        p, side, target, grid, init=bsc(0.0), depth=50
                    )
                    pe = tr.track("p_e")
                    cap = tr.track("capacity")
                    # Cell hopping adds sub-1e-6 wiggle on top of the
                    # monotone drift; compare against the terminal band too.
                    slack = max(np.ptp(pe[-10:]), np.ptp(cap[-10:]), 1e-6)
                    assert np.all(np.maximum.accumulate(pe) - pe <= slack)
                    assert np.all(cap - np.minimum.accumulate(cap) <= slack)
                    assert pe[-1] >= pe[0] - 1e-12
                    assert cap[-1] <= cap[0] + 1e-12

    def test_grid_refinement_tightens_info_gap(self):
        p = TreeParams(2, 0.12)
        depth = 60
        gaps = []
        for cells in (8, 64, 1024):
            grid = uniform_grid(cells)
            lo = local_comparison(p, "BSC", "info", grid, depth=depth)
            hi = local_comparison(p, "BEC", "info", grid, depth=depth)
            gaps.append(
                hi.functional_track[-1].capacity
                - lo.functional_track[-1].capacity
            )
        assert gaps[2] <= gaps[1] <= gaps[0]

    def test_bsc_error_explicit_start_must_be_single_atom(self):
        p = TreeParams(2, 0.1)
        with pytest.raises(ValueError):
            local_comparison(p, "BSC", "error", uniform_grid(4), init=bec(0.3))

    def test_valid_degraded_start_bounds_at_every_level(self):
        # A start at or above the limiting error keeps the upper bound valid
        # per level; check it stays above the exact tree error at small depth.
        from treebp.oracle import exact_tree

        p = TreeParams(2, 0.08)
        start = default_bsc_error_start(p)
        tr = local_comparison(
            p, "BSC", "error", uniform_grid(256), init=bsc(start), depth=4
        )
        for h in (1, 2, 3, 4):
            exact = exact_tree(p, h).p_e
            assert tr.track("p_e")[h - 1] >= exact - 1e-12

    def test_supercritical_info_collapse(self):
        p = TreeParams(2, 0.2)
        tr = local_comparison(p, "BEC", "info", uniform_grid(64))
        assert tr.functional_track[-1].capacity <= 1e-8

    def test_engine_validation(self):
        p = TreeParams(3, 0.1)
        with pytest.raises(ValueError):
            local_comparison(
                p, "BEC", "info", uniform_grid(4), engine="fused"
            )


class TestTwoAtomUpper:
    def test_requires_binary_tree(self):
        with pytest.raises(ValueError):
            two_atom_upper(TreeParams(3, 0.1))

    def test_requires_real_informative_atom(self):
        with pytest.raises(ValueError):
            two_atom_upper(TreeParams(2, 0.3))

    def test_stationary_offset_closed_form(self):
        res = two_atom_upper(TreeParams(2, 0.1))
        expected = math.sqrt(1.0 - 0.4) / (2.0 * (1.0 - 0.2))
        assert res.converged
        assert res.alpha == pytest.approx(expected, abs=1e-10)
        assert res.alpha == pytest.approx(0.484123, abs=1e-6)

    def test_stationarity_equation_holds(self):
        # The printed balance at the stationary family:
        # 1 - e = (1-e)^2 (b^2 + (1-b)^2) + 2 e (1-e) (1-2 delta)^2.
        for delta in (0.05, 0.1, 0.13):
            res = two_atom_upper(TreeParams(2, delta))
            b = 0.5 - res.alpha * (1.0 - 2.0 * delta)
            e = res.eps_weight
            lhs = 1.0 - e
            rhs = (1.0 - e) ** 2 * (b * b + (1 - b) * (1 - b)) + 2.0 * e * (
                1.0 - e
            ) * (1.0 - 2.0 * delta) ** 2
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_noiseless_tree(self):
        res = two_atom_upper(TreeParams(2, 0.0))
        assert res.alpha == pytest.approx(0.5, abs=1e-12)
        assert res.eps_weight == pytest.approx(0.0, abs=1e-12)
        assert res.info_bound == pytest.approx(1.0, abs=1e-12)

    def test_near_critical_constant(self):
        tau = 1e-3
        p = TreeParams(2, delta_c(2) - tau)
        res = two_atom_upper(p, cfg=FixedPointConfig(tol=1e-13, max_iters=10**6))
        assert res.converged
        assert res.info_bound / tau == pytest.approx(14.208, rel=0.02)

    def test_bound_dominates_scalar_lower_bound(self):
        for tau in (1e-3, 5e-3):
            p = TreeParams(2, delta_c(2) - tau)
            res = two_atom_upper(p)
            lo = scalar_info_dynamics(p, "BSC")
            assert res.info_bound >= lo.functional_track[-1].capacity


class TestDefaultErrorStart:
    def test_upper_bounds_exact_small_trees(self):
        for d, delta in [(2, 0.05), (2, 0.1), (3, 0.15)]:
            from treebp.oracle import exact_tree

            p = TreeParams(d, delta)
            start = default_bsc_error_start(p)
            # The limiting error dominates every finite-depth error.
            for h in range(1, 3):
                assert start >= exact_tree(p, h).p_e - 1e-12

    def test_nontrivial_below_threshold(self):
        p = TreeParams(2, delta_c(2) - 5e-3)
        assert default_bsc_error_start(p) < 0.5
