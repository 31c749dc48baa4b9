"""Exact enumeration oracle tests, including an independent recomputation."""

import itertools

import numpy as np
import pytest

from treebp.channels import TreeParams, functionals
from treebp.oracle import ResourceLimitError, exact_de, exact_tree


def _slow_leaf_distribution(d, delta, depth):
    """P(leaf vector | root) by summing over every internal configuration.

    Deliberately naive (exponential in the whole vertex set) and structured
    differently from the production bottom-up recursion.
    """
    # Vertices level by level; vertex v at level l has parent (l-1, v // d).
    levels = [[0] * (d**l) for l in range(depth + 1)]
    n_leaves = d**depth
    out = {0: np.zeros(2**n_leaves), 1: np.zeros(2**n_leaves)}
    internal_counts = [d**l for l in range(1, depth)]
    for root in (0, 1):
        for assignment in itertools.product(
            *[range(2) for _ in range(sum(internal_counts))]
        ):
            # Unpack internal levels.
            vals = [[root]]
            pos = 0
            for l, count in enumerate(internal_counts, start=1):
                vals.append(list(assignment[pos : pos + count]))
                pos += count
            prob_internal = 1.0
            for l in range(1, len(vals)):
                for v, x in enumerate(vals[l]):
                    parent = vals[l - 1][v // d]
                    prob_internal *= (1.0 - delta) if x == parent else delta
            if prob_internal == 0.0:
                continue
            parents = vals[-1]
            for leaves in itertools.product(range(2), repeat=n_leaves):
                prob = prob_internal
                for v, y in enumerate(leaves):
                    parent = parents[v // d] if depth > 1 else root
                    prob *= (1.0 - delta) if y == parent else delta
                idx = int("".join(map(str, leaves)), 2)
                out[root][idx] += prob
    return out[0], out[1]


class TestExactTree:
    def test_depth_zero_observes_root(self):
        res = exact_tree(TreeParams(2, 0.1), 0)
        assert res.p_e == 0.0
        assert res.mutual_info == pytest.approx(1.0, abs=1e-12)
        assert res.chi2_info == pytest.approx(1.0, abs=1e-12)
        assert res.leaf_count == 1

    def test_one_layer_matches_known_error(self):
        res = exact_tree(TreeParams(2, 0.1), 1)
        assert res.p_e == pytest.approx(0.10, abs=1e-14)

    def test_against_independent_enumeration(self):
        for d, depth, delta in [(2, 2, 0.1), (2, 2, 0.3), (3, 2, 0.2)]:
            p0, p1 = _slow_leaf_distribution(d, delta, depth)
            res = exact_tree(TreeParams(d, delta), depth)
            assert res.p_e == pytest.approx(
                0.5 * np.minimum(p0, p1).sum(), abs=1e-12
            )
            tot = p0 + p1
            mask = tot > 0
            chi2 = ((p0[mask] ** 2 + p1[mask] ** 2) / tot[mask]).sum() - 1.0
            assert res.chi2_info == pytest.approx(chi2, abs=1e-12)

    def test_symmetry_under_bit_relabeling(self):
        from treebp.oracle import _leaf_distribution

        p0 = _leaf_distribution(3, 0.2, 1)
        np.testing.assert_allclose(p0, p0[::-1][::-1])
        # The conditional law given root 1 is the bit-flipped law given 0.
        p0_again = _leaf_distribution(2, 0.35, 2)
        assert p0_again.sum() == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_depth(self):
        p = TreeParams(2, 0.1)
        res = [exact_tree(p, h) for h in range(5)]
        pe = [r.p_e for r in res]
        mi = [r.mutual_info for r in res]
        assert all(a <= b + 1e-14 for a, b in zip(pe, pe[1:]))
        assert all(a >= b - 1e-14 for a, b in zip(mi, mi[1:]))

    def test_resource_guard(self):
        with pytest.raises(ResourceLimitError):
            exact_tree(TreeParams(2, 0.1), 5)
        with pytest.raises(ResourceLimitError):
            exact_tree(TreeParams(3, 0.1), 3)


class TestExactDensityEvolution:
    def test_depth_zero_is_perfect(self):
        w = exact_de(TreeParams(2, 0.1), 0)
        assert w.atoms == [(0.0, 1.0)]

    def test_one_layer_atoms(self):
        w = exact_de(TreeParams(2, 0.1), 1)
        np.testing.assert_allclose(w.deltas, [0.01 / 0.82, 0.5])
        np.testing.assert_allclose(w.weights, [0.82, 0.18])

    @pytest.mark.parametrize(
        "d,max_depth", [(2, 4), (3, 2)], ids=["binary", "ternary"]
    )
    def test_matches_enumeration(self, d, max_depth):
        for delta in (0.0, 0.05, 0.1, 0.25, 0.4, 0.5):
            p = TreeParams(d, delta)
            for depth in range(max_depth + 1):
                t = exact_tree(p, depth)
                f = functionals(exact_de(p, depth))
                assert f.p_e == pytest.approx(t.p_e, abs=1e-12)
                assert f.capacity == pytest.approx(t.mutual_info, abs=1e-12)
                assert f.chi2 == pytest.approx(t.chi2_info, abs=1e-12)

    def test_atom_cap_enforced(self):
        with pytest.raises(ResourceLimitError):
            exact_de(TreeParams(2, 0.1), 4, atom_cap=10)
