"""Simulating a multi-copy tree on one planted instance.

A k-copy tree queries parities of the concatenated input.  Only queries that
raise the pure rank of the planted copy force a real query; everything else
is answered by a fair coin, and the resulting run distribution matches a run
of the original tree on the planted input with uniform co-inputs.  The exact
verifiers here enumerate coin strings with dyadic rationals, because the
statements they check are equalities rather than bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import f2core
from .dist import PartialFixing, ProductDistribution, random_fixing, uniform_given
from .f2core import BlockLayout
from .pdt import Leaf, Node, ParityTree, prune


@dataclass(frozen=True)
class MultiCopyTree:
    """Parity tree over a concatenation of copies, labels one bit per copy."""

    tree: ParityTree
    layout: BlockLayout

    def __post_init__(self) -> None:
        if self.tree.width != self.layout.width:
            raise ValueError("layout width must match the tree width")
        self.tree.assert_path_independent()

    @property
    def k(self) -> int:
        return self.layout.k


def critical_indices(layout: BlockLayout, ancestors: list[int], query: int) -> set[int]:
    """Copies whose pure rank grows when `query` joins the ancestor span."""
    extended = ancestors + [query]
    out = set()
    for i in range(layout.k):
        if f2core.pure_rank(extended, layout, i) > f2core.pure_rank(ancestors, layout, i):
            out.add(i)
    return out


def is_critical(mct: MultiCopyTree, ancestors: list[int], query: int, i: int) -> bool:
    return i in critical_indices(mct.layout, ancestors, query)


def sum_relative_depths_bounded(mct: MultiCopyTree) -> bool:
    """Across all leaves, the per-copy pure ranks sum to at most the depth."""

    def go(v, ancestors: list[int]) -> bool:
        if isinstance(v, Leaf):
            total = sum(
                f2core.pure_rank(ancestors, mct.layout, i) for i in range(mct.k)
            )
            return total <= len(ancestors)
        nxt = ancestors + [v.query]
        return go(v.child0, nxt) and go(v.child1, nxt)

    return go(mct.tree.root, [])


@dataclass
class ExtractionTranscript:
    visited: list[int] = field(default_factory=list)  # preorder node ids
    real_queries: list[int] = field(default_factory=list)  # witness vectors used
    coins: list[int] = field(default_factory=list)
    label: int = 0

    @property
    def n_real(self) -> int:
        return len(self.real_queries)


def _node_ids(tree: ParityTree) -> dict[int, int]:
    return {id(v): i for i, v in enumerate(tree.nodes())}


def ext_run(
    mct: MultiCopyTree, i: int, y: int, rng: np.random.Generator
) -> tuple[int, ExtractionTranscript]:
    """One extraction run on the planted input y for copy i.

    Critical nodes query a pure witness against y and reconstruct the original
    answer from the ancestor answers; non-critical nodes move by a fair coin.
    """
    ids = _node_ids(mct.tree)
    t = ExtractionTranscript()
    v = mct.tree.root
    ancestors: list[int] = []
    answers: list[int] = []
    while isinstance(v, Node):
        t.visited.append(ids[id(v)])
        if i in critical_indices(mct.layout, ancestors, v.query):
            w = f2core.pure_witness(ancestors, ancestors + [v.query], mct.layout, i)
            bit = f2core.dot(mct.layout.project(w, i), y)
            t.real_queries.append(w)
            ok, combo = f2core.in_span(ancestors + [w], v.query)
            if not ok or len(ancestors) not in combo:
                raise RuntimeError("reconstruction failed; path independence broken upstream")
            b = bit
            for j in combo:
                if j < len(answers):
                    b ^= answers[j]
        else:
            b = int(rng.integers(0, 2))
            t.coins.append(b)
        ancestors.append(v.query)
        answers.append(b)
        v = v.child(b)
    t.visited.append(ids[id(v)])
    expected = f2core.pure_rank(ancestors, mct.layout, i)
    if t.n_real != expected:
        raise RuntimeError("real query count disagrees with the pure rank of the leaf")
    t.label = (v.label >> i) & 1
    return t.label, t


def ext_visit_probabilities(mct: MultiCopyTree, i: int, y: int) -> dict[int, Fraction]:
    """Exact coin-measure of visiting each node during extraction on y."""
    ids = _node_ids(mct.tree)
    out: dict[int, Fraction] = {}

    def go(v, ancestors, answers, w: Fraction):
        out[ids[id(v)]] = out.get(ids[id(v)], Fraction(0)) + w
        if isinstance(v, Leaf):
            return
        if i in critical_indices(mct.layout, ancestors, v.query):
            wvec = f2core.pure_witness(ancestors, ancestors + [v.query], mct.layout, i)
            bit = f2core.dot(mct.layout.project(wvec, i), y)
            _, combo = f2core.in_span(ancestors + [wvec], v.query)
            b = bit
            for j in combo:
                if j < len(answers):
                    b ^= answers[j]
            go(v.child(b), ancestors + [v.query], answers + [b], w)
        else:
            for b in (0, 1):
                go(v.child(b), ancestors + [v.query], answers + [b], w / 2)

    go(mct.tree.root, [], [], Fraction(1))
    return out


def planted_visit_probabilities(mct: MultiCopyTree, i: int, y: int) -> dict[int, Fraction]:
    """Exact visit law of the original tree on (y planted at copy i, uniform rest)."""
    ids = _node_ids(mct.tree)
    layout = mct.layout
    co_blocks = [j for j in range(layout.k) if j != i]
    co_bits = sum(layout.block_sizes[j] for j in co_blocks)
    out: dict[int, Fraction] = {}
    total = Fraction(1, 1 << co_bits)
    for sel in range(1 << co_bits):
        x = layout.embed(y, i)
        pos = 0
        for j in co_blocks:
            size = layout.block_sizes[j]
            x |= layout.embed((sel >> pos) & ((1 << size) - 1), j)
            pos += size
        v = mct.tree.root
        while True:
            out[ids[id(v)]] = out.get(ids[id(v)], Fraction(0)) + total
            if isinstance(v, Leaf):
                break
            v = v.child(f2core.dot(v.query, x))
    return out


@dataclass(frozen=True)
class SingleCopyProcedure:
    """The randomised single-copy tree built from a multi-copy one.

    Sampling draws restrictions for the other copies, prunes, and extracts;
    the procedure is lazy because materialising it is exponential.  The
    exact functionals enumerate restrictions and coins with rationals.
    """

    mct: MultiCopyTree
    i: int
    mu: ProductDistribution  # per-copy distribution, must be 0-biased

    def __post_init__(self) -> None:
        if self.mu.n != self.mct.layout.block_sizes[self.i]:
            raise ValueError("per-copy distribution width mismatch")
        if not self.mu.is_zero_biased:
            raise ValueError("distribution must be 0-biased")

    def _tilde_fixings(self) -> Iterable[tuple[PartialFixing, Fraction]]:
        """Joint restriction over all copies: stars at copy i, sampled elsewhere."""
        layout = self.mct.layout
        fix = random_fixing(self.mu)
        co_blocks = [j for j in range(layout.k) if j != self.i]

        def go(idx: int, stars: int, w):
            if idx == len(co_blocks):
                yield PartialFixing.rho(layout.width, stars | layout.block_mask(self.i)), w
                return
            j = co_blocks[idx]
            for rho_j, wj in fix.enumerate():
                yield from go(idx + 1, stars | layout.embed(rho_j.star_mask, j), w * wj)

        yield from go(0, 0, self.mu.one())

    def run(self, y: int, rng: np.random.Generator) -> tuple[int, ExtractionTranscript]:
        layout = self.mct.layout
        stars = layout.block_mask(self.i)
        for j in range(layout.k):
            if j == self.i:
                continue
            rho_j = random_fixing(self.mu).sample(rng)
            stars |= layout.embed(rho_j.star_mask, j)
        rho = PartialFixing.rho(layout.width, stars)
        pruned = MultiCopyTree(prune(self.mct.tree, rho), layout)
        return ext_run(pruned, self.i, y, rng)

    def error_exact(self, f) -> Fraction:
        """Pr[label != f(y)] with y ~ mu, restrictions and coins enumerated."""
        total = Fraction(0)
        for rho, w in self._tilde_fixings():
            pruned = MultiCopyTree(prune(self.mct.tree, rho), self.mct.layout)
            leaves = pruned.tree.nodes()
            for y in range(1 << self.mu.n):
                py = self.mu.pmf(y)
                if py == 0:
                    continue
                visits = ext_visit_probabilities(pruned, self.i, y)
                for nid, pv in visits.items():
                    node = leaves[nid]
                    if isinstance(node, Leaf) and ((node.label >> self.i) & 1) != f.table[y]:
                        total += w * py * pv
        return total

    def skew_cost_exact(self) -> Fraction:
        """Expected real-query count after also restricting the planted copy.

        Extraction and restriction commute, so this enumerates the joint
        restriction over all copies and averages the extraction cost under
        the uniform completion of the planted copy.
        """
        layout = self.mct.layout
        fix = random_fixing(self.mu)
        total = Fraction(0)
        for rho_i, wi in fix.enumerate():
            for rho_rest, w in self._tilde_fixings():
                stars = (rho_rest.star_mask & ~layout.block_mask(self.i)) | layout.embed(
                    rho_i.star_mask, self.i
                )
                rho = PartialFixing.rho(layout.width, stars)
                pruned = MultiCopyTree(prune(self.mct.tree, rho), layout)
                nodes = pruned.tree.nodes()
                s = rho_i.star_mask.bit_count()
                for sel in range(1 << s):
                    y = 0
                    rem = rho_i.star_mask
                    jj = 0
                    while rem:
                        bit = rem & -rem
                        if (sel >> jj) & 1:
                            y |= bit
                        rem ^= bit
                        jj += 1
                    visits = ext_visit_probabilities(pruned, self.i, y)
                    cost = Fraction(0)
                    for nid, pv in visits.items():
                        node = nodes[nid]
                        if isinstance(node, Node):
                            anc = _ancestors_of(pruned.tree, nid)
                            if self.i in critical_indices(layout, anc, node.query):
                                cost += pv
                    total += wi * w * Fraction(1, 1 << s) * cost
        return total


def _ancestors_of(tree: ParityTree, nid: int) -> list[int]:
    """Query vectors on the root-to-node path, by preorder node id."""
    target = tree.nodes()[nid]

    def go(v, acc):
        if v is target:
            return acc
        if isinstance(v, Leaf):
            return None
        found = go(v.child0, acc + [v.query])
        if found is None:
            found = go(v.child1, acc + [v.query])
        return found

    return go(tree.root, [])


def ext_materialize(mct: MultiCopyTree, i: int) -> "RandomizedParityTree":
    """Materialise the extraction procedure as a weighted set of single-copy
    trees; exponential in the number of non-critical nodes, so tiny sizes only.
    """
    from .pdt import RandomizedParityTree

    layout = mct.layout

    def go(v, ancestors, answers) -> list[tuple[Fraction, object]]:
        if isinstance(v, Leaf):
            return [(Fraction(1), Leaf((v.label >> i) & 1))]
        if i in critical_indices(layout, ancestors, v.query):
            w = f2core.pure_witness(ancestors, ancestors + [v.query], layout, i)
            _, combo = f2core.in_span(ancestors + [w], v.query)
            base = 0
            for j in combo:
                if j < len(answers):
                    base ^= answers[j]
            q = layout.project(w, i)
            sub0 = go(v.child(base), ancestors + [v.query], answers + [base])
            sub1 = go(v.child(base ^ 1), ancestors + [v.query], answers + [base ^ 1])
            return [(p0 * p1, Node(q, t0, t1)) for p0, t0 in sub0 for p1, t1 in sub1]
        out = []
        for b in (0, 1):
            for p, t in go(v.child(b), ancestors + [v.query], answers + [b]):
                out.append((p / 2, t))
        return out

    m = layout.block_sizes[i]
    members = tuple(
        (p, ParityTree(m, root)) for p, root in go(mct.tree.root, [], [])
    )
    return RandomizedParityTree(members)


def build_single_copy(
    mct: MultiCopyTree, i: int, mu: ProductDistribution
) -> SingleCopyProcedure:
    return SingleCopyProcedure(mct, i, mu)


def multi_error_exact(mct: MultiCopyTree, f, mu: ProductDistribution) -> Fraction:
    """Exact error of the k-copy tree against the product of per-copy draws."""
    layout = mct.layout
    k = layout.k
    total = Fraction(0)
    for x in range(1 << layout.width):
        w = Fraction(1)
        label = 0
        for j in range(k):
            xj = layout.project(x, j)
            w *= mu.pmf(xj)
            label |= f.table[xj] << j
        if w and mct.tree.evaluate(x) != label:
            total += w
    return total
