"""Bit-parallel linear algebra over GF(2).

Vectors are plain Python ints used as bitsets (bit i = coordinate i) with the
width carried separately; matrices are sequences of column masks.  Everything
is pure and immutable, so callers may share values across workers freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

BitVec = int
QueryMatrix = Sequence[int]


def dot(a: int, x: int) -> int:
    """Mod-2 inner product of two bit vectors."""
    return (a & x).bit_count() & 1


def mask_of(rows: Iterable[int], width: int) -> int:
    m = 0
    for r in rows:
        if not 0 <= r < width:
            raise ValueError(f"row index {r} out of range for width {width}")
        m |= 1 << r
    return m


class Eliminator:
    """Incremental Gaussian elimination with combination tracking.

    Stored vectors are kept fully reduced (each pivot bit occurs in exactly
    one stored vector), so reducing an incoming vector needs a single pass.
    The combination mask records which inserted vectors sum to each stored
    one, which is what lets span-membership queries return a witness.
    """

    __slots__ = ("pivots", "n_inserted")

    def __init__(self) -> None:
        self.pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (vector, combo)
        self.n_inserted = 0

    def copy(self) -> "Eliminator":
        e = Eliminator()
        e.pivots = dict(self.pivots)
        e.n_inserted = self.n_inserted
        return e

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v: int) -> tuple[int, int]:
        """Return (residue, combo): v + sum of combo's inserted vectors = residue."""
        combo = 0
        r = v
        bits = r
        while bits:
            q = bits.bit_length() - 1
            hit = self.pivots.get(q)
            if hit is not None:
                r ^= hit[0]
                combo ^= hit[1]
            # stored vectors only touch bits <= their pivot, so one downward
            # sweep over the live value fully reduces
            bits = r & ((1 << q) - 1)
        return r, combo

    def insert(self, v: int) -> bool:
        """Insert v; returns True iff the rank grew."""
        idx = self.n_inserted
        self.n_inserted += 1
        r, combo = self.reduce(v)
        combo ^= 1 << idx
        if r == 0:
            return False
        p = r.bit_length() - 1
        for q, (w, cw) in list(self.pivots.items()):
            if (w >> p) & 1:
                self.pivots[q] = (w ^ r, cw ^ combo)
        self.pivots[p] = (r, combo)
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0


def rank(cols: QueryMatrix) -> int:
    """GF(2) rank of a collection of column vectors."""
    e = Eliminator()
    for c in cols:
        e.insert(c)
    return e.rank


def in_span(cols: QueryMatrix, w: int) -> tuple[bool, frozenset[int] | None]:
    """Span membership with a witness.

    Returns (True, S) with S a set of column indices whose sum is w, or
    (False, None).
    """
    e = Eliminator()
    for c in cols:
        e.insert(c)
    r, combo = e.reduce(w)
    if r != 0:
        return False, None
    return True, frozenset(i for i in range(len(cols)) if (combo >> i) & 1)


def row_restricted_rank(cols: QueryMatrix, rows: Iterable[int], width: int) -> int:
    """Rank of the sub-matrix keeping only the given row indices."""
    m = mask_of(rows, width)
    return rank([c & m for c in cols])


@dataclass(frozen=True)
class BlockLayout:
    """Partition of [width] into consecutive blocks of the given sizes."""

    block_sizes: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False)
    width: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.block_sizes or any(s <= 0 for s in self.block_sizes):
            raise ValueError("block sizes must be positive")
        offs, total = [], 0
        for s in self.block_sizes:
            offs.append(total)
            total += s
        object.__setattr__(self, "offsets", tuple(offs))
        object.__setattr__(self, "width", total)

    @property
    def k(self) -> int:
        return len(self.block_sizes)

    def block_mask(self, i: int) -> int:
        if not 0 <= i < self.k:
            raise ValueError(f"bad block index {i}")
        return ((1 << self.block_sizes[i]) - 1) << self.offsets[i]

    def outside_mask(self, i: int) -> int:
        return ((1 << self.width) - 1) ^ self.block_mask(i)

    def project(self, v: int, i: int) -> int:
        """Block-i coordinates of v, shifted down to width block_sizes[i]."""
        return (v & self.block_mask(i)) >> self.offsets[i]

    def embed(self, v: int, i: int) -> int:
        """Inverse of project: place a block-local vector at block i."""
        return (v & ((1 << self.block_sizes[i]) - 1)) << self.offsets[i]


def pure_rank(cols: QueryMatrix, layout: BlockLayout, i: int) -> int:
    """Dimension of span(cols) intersected with the block-i coordinate subspace.

    Uses the rank-difference identity dim(col(M) cap W_i) =
    rank(M) - rank(M restricted to rows outside block i); the exhaustive
    span-enumeration oracle lives in the tests.
    """
    out = layout.outside_mask(i)
    return rank(cols) - rank([c & out for c in cols])


def intersection_basis(cols: QueryMatrix, layout: BlockLayout, i: int) -> list[int]:
    """Basis of span(cols) cap W_i (vectors supported on block i only)."""
    out = layout.outside_mask(i)
    stored: dict[int, tuple[int, int]] = {}  # pivot of outside part -> (outside, full)
    inner = Eliminator()
    basis: list[int] = []
    for c in cols:
        r_out, r_full = c & out, c
        bits = r_out
        while bits:
            q = bits.bit_length() - 1
            hit = stored.get(q)
            if hit is not None:
                r_out ^= hit[0]
                r_full ^= hit[1]
            bits = r_out & ((1 << q) - 1)
        if r_out:
            p = r_out.bit_length() - 1
            for q, (w_out, w_full) in list(stored.items()):
                if (w_out >> p) & 1:
                    stored[q] = (w_out ^ r_out, w_full ^ r_full)
            stored[p] = (r_out, r_full)
        elif r_full and inner.insert(r_full):
            basis.append(r_full)
    return basis


def pure_witness(
    cols_before: QueryMatrix, cols_after: QueryMatrix, layout: BlockLayout, i: int
) -> int:
    """A vector in (span(after) \\ span(before)) that is pure for block i.

    Requires that `cols_after` extends `cols_before` by one column and that
    the pure rank for block i grew by exactly one.  Among all witnesses the
    smallest one as an integer is returned, so the choice is reproducible.
    """
    if len(cols_after) != len(cols_before) + 1 or list(cols_after[:-1]) != list(cols_before):
        raise ValueError("cols_after must extend cols_before by one column")
    if pure_rank(cols_after, layout, i) != pure_rank(cols_before, layout, i) + 1:
        raise ValueError("node is not critical for this block")
    before = Eliminator()
    for c in cols_before:
        before.insert(c)
    basis = intersection_basis(cols_after, layout, i)
    best = None
    for sel in range(1, 1 << len(basis)):
        w = 0
        for j in range(len(basis)):
            if (sel >> j) & 1:
                w ^= basis[j]
        if w and not before.contains(w) and (best is None or w < best):
            best = w
    if best is None:  # unreachable given the precondition check
        raise ValueError("no pure witness found")
    return best


def rref_system(rows: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Canonical reduced form of an affine system given as (vector, rhs) pairs.

    Result rows are fully reduced and sorted, so equal solution sets map to
    equal tuples.  Raises ValueError on an inconsistent system.
    """
    pivots: dict[int, tuple[int, int]] = {}
    for v, b in rows:
        b &= 1
        bits = v
        while bits:
            q = bits.bit_length() - 1
            hit = pivots.get(q)
            if hit is not None:
                v ^= hit[0]
                b ^= hit[1]
            bits = v & ((1 << q) - 1)
        if v == 0:
            if b:
                raise ValueError("inconsistent affine system")
            continue
        p = v.bit_length() - 1
        for q, (w, c) in list(pivots.items()):
            if (w >> p) & 1:
                pivots[q] = (w ^ v, c ^ b)
        pivots[p] = (v, b)
    return tuple(sorted(pivots.values()))


def solve_affine(rows: Sequence[tuple[int, int]], width: int) -> list[int]:
    """All x in {0,1}^width satisfying dot(v, x) = b for every row."""
    reduced = rref_system(rows)
    pivot_bits = [v.bit_length() - 1 for v, _ in reduced]
    pivot_set = set(pivot_bits)
    free_bits = [j for j in range(width) if j not in pivot_set]
    out = []
    for g in range(1 << len(free_bits)):
        x = 0
        for j, fb in enumerate(free_bits):
            if (g >> j) & 1:
                x |= 1 << fb
        for (v, b), p in zip(reduced, pivot_bits):
            if (dot(v & ~(1 << p), x) ^ b) & 1:
                x |= 1 << p
        out.append(x)
    return out


def orthogonal_complement(vecs: QueryMatrix, width: int) -> list[int]:
    """Basis of {u : dot(u, v) = 0 for every v in vecs}."""
    reduced = [v for v, _ in rref_system((v, 0) for v in vecs)]
    pivot_bits = {v.bit_length() - 1 for v in reduced}
    out = []
    for j in range(width):
        if j in pivot_bits:
            continue
        u = 1 << j
        for v in reduced:
            p = v.bit_length() - 1
            if (v >> j) & 1:
                u |= 1 << p
        out.append(u)
    return out
