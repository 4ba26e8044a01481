"""GF(2) kernel tests, with exhaustive span enumeration as the oracle."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdtlab import f2core
from pdtlab.f2core import BlockLayout


def span_elements(cols):
    """Oracle: every XOR-combination of the columns."""
    out = {0}
    for c in cols:
        out |= {v ^ c for v in out}
    return out


def test_rank_identity():
    assert f2core.rank([0b001, 0b010, 0b100]) == 3


def test_rank_all_zero():
    assert f2core.rank([0, 0, 0]) == 0
    assert f2core.rank([]) == 0


def test_rank_dependent_triple():
    cols = [0b110, 0b011, 0b101]
    assert len(span_elements(cols)) == 4  # oracle: span has dimension 2
    assert f2core.rank(cols) == 2


def test_in_span_witness():
    ok, combo = f2core.in_span([0b001, 0b010], 0b011)
    assert ok and combo == {0, 1}


def test_in_span_empty_matrix_zero_vector():
    ok, combo = f2core.in_span([], 0)
    assert ok and combo == frozenset()


def test_in_span_negative():
    ok, combo = f2core.in_span([0b110, 0b011], 0b001)
    assert not ok and combo is None
    assert span_elements([0b110, 0b011]) == {0b000, 0b110, 0b011, 0b101}


def test_in_span_witness_sums_correctly():
    rng = np.random.default_rng(0)
    for _ in range(200):
        width = int(rng.integers(1, 10))
        cols = [int(rng.integers(0, 1 << width)) for _ in range(int(rng.integers(0, 6)))]
        w = int(rng.integers(0, 1 << width))
        ok, combo = f2core.in_span(cols, w)
        assert ok == (w in span_elements(cols))
        if ok:
            acc = 0
            for i in combo:
                acc ^= cols[i]
            assert acc == w


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2**16 - 1), max_size=8), st.integers(0, 2**16 - 1))
def test_in_span_iff_rank_stable(cols, w):
    ok, _ = f2core.in_span(cols, w)
    assert ok == (f2core.rank(list(cols) + [w]) == f2core.rank(cols))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2**12 - 1), max_size=9))
def test_rank_monotone_under_columns(cols):
    prev = 0
    for i in range(len(cols) + 1):
        r = f2core.rank(cols[:i])
        assert prev <= r <= prev + 1
        prev = r


def test_row_restricted_rank_examples():
    identity = [0b001, 0b010, 0b100]
    assert f2core.row_restricted_rank(identity, [0], 3) == 1
    assert f2core.row_restricted_rank(identity, [], 3) == 0
    assert f2core.row_restricted_rank([0b11, 0b01], [0], 2) == 1


def test_row_restricted_rank_bad_index():
    with pytest.raises(ValueError):
        f2core.row_restricted_rank([0b1], [3], 2)


def pure_rank_oracle(cols, layout, i):
    block = layout.block_mask(i)
    members = [v for v in span_elements(cols) if v and v & ~block == 0]
    return f2core.rank(members)


def test_pure_rank_worked_examples():
    lay = BlockLayout((1, 1))
    assert f2core.pure_rank([0b11, 0b10], lay, 0) == 1
    assert f2core.pure_rank([0b11, 0b10], lay, 1) == 1
    lay2 = BlockLayout((1, 2))
    assert f2core.pure_rank([0b011, 0b110], lay2, 0) == 0
    assert f2core.pure_rank([], lay2, 0) == 0


def test_pure_rank_against_span_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(150):
        k = int(rng.integers(1, 4))
        sizes = tuple(int(rng.integers(1, 4)) for _ in range(k))
        lay = BlockLayout(sizes)
        cols = [int(rng.integers(0, 1 << lay.width)) for _ in range(int(rng.integers(0, 7)))]
        for i in range(k):
            assert f2core.pure_rank(cols, lay, i) == pure_rank_oracle(cols, lay, i)


def test_pure_rank_sum_bounded_by_rank():
    rng = np.random.default_rng(2)
    for _ in range(150):
        k = int(rng.integers(2, 4))
        lay = BlockLayout(tuple(int(rng.integers(1, 4)) for _ in range(k)))
        cols = [int(rng.integers(0, 1 << lay.width)) for _ in range(int(rng.integers(0, 8)))]
        total = sum(f2core.pure_rank(cols, lay, i) for i in range(k))
        assert total <= f2core.rank(cols)


def test_pure_witness_worked_examples():
    lay = BlockLayout((1, 1))
    # adding the second constraint lets the pure part be extracted
    assert f2core.pure_witness([0b11], [0b11, 0b10], lay, 0) == 0b01
    assert f2core.pure_witness([], [0b01], lay, 0) == 0b01
    lay2 = BlockLayout((2, 2))
    w = f2core.pure_witness([0b1001], [0b1001, 0b1010], lay2, 0)
    assert w == 0b0011


def test_pure_witness_properties():
    rng = np.random.default_rng(3)
    found = 0
    while found < 60:
        lay = BlockLayout((2, 2))
        cols = [int(rng.integers(1, 16)) for _ in range(int(rng.integers(0, 4)))]
        new = int(rng.integers(1, 16))
        for i in range(2):
            before = f2core.pure_rank(cols, lay, i)
            after = f2core.pure_rank(cols + [new], lay, i)
            if after != before + 1:
                continue
            w = f2core.pure_witness(cols, cols + [new], lay, i)
            found += 1
            assert w & lay.outside_mask(i) == 0 and w != 0
            assert w in span_elements(cols + [new])
            assert w not in span_elements(cols)


def test_pure_witness_requires_critical_extension():
    lay = BlockLayout((1, 1))
    with pytest.raises(ValueError):
        f2core.pure_witness([0b01], [0b01, 0b10], lay, 0)  # pure rank for 0 unchanged


def test_rref_system_canonical_and_members():
    rng = np.random.default_rng(4)
    for _ in range(100):
        width = int(rng.integers(1, 7))
        rows = [
            (int(rng.integers(0, 1 << width)), int(rng.integers(0, 2)))
            for _ in range(int(rng.integers(0, 4)))
        ]
        try:
            canon = f2core.rref_system(rows)
        except ValueError:
            continue  # inconsistent randomly generated system
        members = f2core.solve_affine(rows, width)
        # membership matches the raw constraints
        for x in range(1 << width):
            sat = all(f2core.dot(v, x) == b for v, b in rows)
            assert (x in members) == sat
        # shuffling the rows yields the same canonical form
        perm = list(rows)
        rng.shuffle(perm)
        extra = list(perm)
        if len(rows) >= 2:
            v = rows[0][0] ^ rows[1][0]
            extra.append((v, rows[0][1] ^ rows[1][1]))
        assert f2core.rref_system(extra) == canon


def test_rref_system_inconsistent():
    with pytest.raises(ValueError):
        f2core.rref_system([(0b1, 0), (0b1, 1)])


def test_orthogonal_complement():
    rng = np.random.default_rng(5)
    for _ in range(100):
        width = int(rng.integers(1, 9))
        vecs = [int(rng.integers(0, 1 << width)) for _ in range(int(rng.integers(0, 5)))]
        comp = f2core.orthogonal_complement(vecs, width)
        assert f2core.rank(comp) == width - f2core.rank(vecs)
        for u in comp:
            assert all(f2core.dot(u, v) == 0 for v in vecs)


def test_eliminator_copy_is_independent():
    e = f2core.Eliminator()
    e.insert(0b01)
    snap = e.copy()
    e.insert(0b10)
    assert e.rank == 2 and snap.rank == 1
