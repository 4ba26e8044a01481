"""Extraction of a single planted instance from multi-copy trees."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from pdtlab import boolfun, dist, extract, f2core, pdt
from pdtlab.dist import PartialFixing, ProductDistribution
from pdtlab.f2core import BlockLayout
from pdtlab.pdt import Leaf, Node, ParityTree


def test_critical_pure_query():
    lay = BlockLayout((2, 2))
    assert extract.critical_indices(lay, [], 0b0001) == {0}
    assert extract.critical_indices(lay, [], 0b1100) == {1}


def test_mixed_query_critical_for_neither():
    lay = BlockLayout((1, 1))
    assert extract.critical_indices(lay, [], 0b11) == set()
    # once the pure part becomes extractable both copies turn critical
    assert extract.critical_indices(lay, [0b11], 0b10) == {0, 1}


def test_relative_depth_sum_bounded():
    rng = np.random.default_rng(0)
    for _ in range(25):
        lay = BlockLayout((2, 2))
        t = pdt.random_tree(4, rng, max_depth=4, out_bits=2)
        assert extract.sum_relative_depths_bounded(extract.MultiCopyTree(t, lay))


def test_ext_run_pure_tree_reproduces_original():
    # tree querying only the planted copy: no coins, same answers
    lay = BlockLayout((2, 2))
    inner = Node(0b0010, Leaf(0b00), Leaf(0b01))
    t = ParityTree(4, Node(0b0001, inner, Leaf(0b11)), out_bits=2)
    mct = extract.MultiCopyTree(t, lay)
    rng = np.random.default_rng(1)
    for y in range(4):
        label, tr = extract.ext_run(mct, 0, y, rng)
        assert tr.coins == []
        assert label == (t.evaluate(y) >> 0) & 1


def test_ext_run_other_copy_tree_uses_no_real_queries():
    lay = BlockLayout((2, 2))
    t = ParityTree(4, Node(0b0100, Leaf(0b00), Leaf(0b10)), out_bits=2)
    mct = extract.MultiCopyTree(t, lay)
    rng = np.random.default_rng(2)
    for y in range(4):
        label, tr = extract.ext_run(mct, 0, y, rng)
        assert tr.n_real == 0 and len(tr.coins) == 1
        assert label == 0


def test_run_transcript_real_count_matches_pure_rank():
    rng = np.random.default_rng(3)
    lay = BlockLayout((2, 2))
    for _ in range(30):
        t = pdt.random_tree(4, rng, max_depth=4, out_bits=2)
        mct = extract.MultiCopyTree(t, lay)
        y = int(rng.integers(0, 4))
        label, tr = extract.ext_run(mct, 0, y, rng)  # internal assertion checks the count
        assert label in (0, 1)


@pytest.mark.parametrize("sizes", [(1, 1), (2, 2), (3, 2), (2, 3)])
def test_visit_measures_agree_exactly(sizes):
    rng = np.random.default_rng(sum(sizes))
    lay = BlockLayout(sizes)
    for _ in range(8):
        t = pdt.random_tree(lay.width, rng, max_depth=lay.width, out_bits=2)
        mct = extract.MultiCopyTree(t, lay)
        for i in range(2):
            for y in range(1 << sizes[i]):
                got = extract.ext_visit_probabilities(mct, i, y)
                want = extract.planted_visit_probabilities(mct, i, y)
                keys = set(got) | set(want)
                assert all(
                    got.get(k, Fraction(0)) == want.get(k, Fraction(0)) for k in keys
                )


def test_materialized_extraction_is_a_randomized_tree():
    rng = np.random.default_rng(4)
    lay = BlockLayout((2, 2))
    uni = ProductDistribution((Fraction(1, 2), Fraction(1, 2)))
    for _ in range(10):
        t = pdt.random_tree(4, rng, max_depth=3, out_bits=2)
        mct = extract.MultiCopyTree(t, lay)
        rt = extract.ext_materialize(mct, 0)
        for _, member in rt.members:
            member.assert_path_independent()
        # label law at each y equals the planted run law
        for y in range(4):
            want = Fraction(0)
            visits = extract.planted_visit_probabilities(mct, 0, y)
            nodes = t.nodes()
            for nid, p in visits.items():
                node = nodes[nid]
                if isinstance(node, Leaf) and (node.label >> 0) & 1:
                    want += p
            got = sum(p for p, member in rt.members if member.evaluate(y) == 1)
            assert got == want


def test_prune_and_extract_commute_pointwise():
    rng = np.random.default_rng(5)
    lay = BlockLayout((2, 2))
    for _ in range(10):
        t = pdt.random_tree(4, rng, max_depth=4, out_bits=2)
        stars_rest = int(rng.integers(0, 4)) << 2
        rho_tilde = PartialFixing.rho(4, 0b0011 | stars_rest)
        stars_i = int(rng.integers(0, 4))
        rho_i = PartialFixing.rho(2, stars_i)
        rho_full = PartialFixing.rho(4, stars_i | stars_rest)

        pruned_tilde = extract.MultiCopyTree(pdt.prune(t, rho_tilde), lay)
        left = extract.ext_materialize(pruned_tilde, 0)
        left_members = tuple((p, pdt.prune(m, rho_i)) for p, m in left.members)

        pruned_full = extract.MultiCopyTree(pdt.prune(t, rho_full), lay)
        right = extract.ext_materialize(pruned_full, 0)

        for y in range(4):
            if not rho_i.consistent_with(y):
                continue
            lhs = sum(p for p, m in left_members if m.evaluate(y) == 1)
            rhs = sum(p for p, m in right.members if m.evaluate(y) == 1)
            assert lhs == rhs


def test_single_copy_error_and_cost_bounds():
    rng = np.random.default_rng(6)
    lay = BlockLayout((2, 2))
    mu = ProductDistribution((Fraction(1, 4), Fraction(1, 8)))
    for _ in range(10):
        t = pdt.random_tree(4, rng, max_depth=4, out_bits=2)
        mct = extract.MultiCopyTree(t, lay)
        f = boolfun.random_function(2, 0.5, rng)
        err_multi = extract.multi_error_exact(mct, f, mu)
        sq_multi = pdt.skew_cost(t, ProductDistribution(mu.p * 2))
        total = Fraction(0)
        costs = []
        for i in (0, 1):
            proc = extract.build_single_copy(mct, i, mu)
            assert proc.error_exact(f) <= err_multi
            c = proc.skew_cost_exact()
            costs.append(c)
            total += c
        assert total <= sq_multi
        # averaging: some copy is at most half the multi cost
        assert min(costs) <= sq_multi / 2


def test_exact_multi_tree_extracts_exactly():
    # an error-free two-copy tree yields error-free extracted procedures
    lay = BlockLayout((2, 2))
    f = boolfun.xor_n(2)
    inner0 = Node(0b1100, Leaf(0b00), Leaf(0b10))
    inner1 = Node(0b1100, Leaf(0b01), Leaf(0b11))
    t = ParityTree(4, Node(0b0011, inner0, inner1), out_bits=2)
    mu = ProductDistribution((Fraction(1, 4), Fraction(1, 2)))
    mct = extract.MultiCopyTree(t, lay)
    assert extract.multi_error_exact(mct, f, mu) == 0
    for i in (0, 1):
        proc = extract.build_single_copy(mct, i, mu)
        assert proc.error_exact(f) == 0


def test_single_copy_run_samples():
    rng = np.random.default_rng(7)
    lay = BlockLayout((2, 2))
    mu = ProductDistribution((Fraction(1, 4), Fraction(1, 4)))
    t = pdt.random_tree(4, rng, max_depth=4, out_bits=2)
    proc = extract.build_single_copy(extract.MultiCopyTree(t, lay), 0, mu)
    label, tr = proc.run(2, rng)
    assert label in (0, 1)
    assert tr.n_real <= 2


def test_single_block_layout_is_identity_extraction():
    # with one copy every query is critical, so the run replays the tree
    rng = np.random.default_rng(8)
    lay = BlockLayout((3,))
    t = pdt.random_tree(3, rng, max_depth=3, out_bits=1)
    mct = extract.MultiCopyTree(t, lay)
    for y in range(8):
        label, tr = extract.ext_run(mct, 0, y, rng)
        assert label == t.evaluate(y)
        assert tr.coins == []
