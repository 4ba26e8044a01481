"""Conversions from skew-cost trees to ordinary query trees.

The runners here simulate a deterministic tree while maintaining a partial
view of a random restriction: '?' coordinates are undecided, '0' were
pre-emptively fixed, '*' are known free.  A query is paid for only when its
star-restricted part is independent of the ancestors'; everything else is
inferred from earlier answers.  The general-distribution conversion defers
even those queries by optimistically assuming zeros and repairing with a
noisy first-one search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import f2core
from .dist import (
    PartialFixing,
    ProductDistribution,
    random_fixing_given_x,
)
from .pdt import Leaf, Node, ParityTree


class InvariantViolation(AssertionError):
    """The bookkeeping rank invariant failed; indicates a broken tree upstream."""


def _masked_rank(queries: Sequence[int], mask: int) -> int:
    return f2core.rank([q & mask for q in queries])


def _d_set(queries: Sequence[int], star_mask: int, unknown_mask: int) -> int:
    """Mask of '?' coordinates whose row would grow the star-restricted rank.

    A coordinate j qualifies iff some combination of the queries vanishes on
    the star rows but not at j; those combinations are spanned by the
    elimination residues, so OR-ing the residues suffices.
    """
    stored: dict[int, tuple[int, int]] = {}
    residue_or = 0
    for c in queries:
        r, full = c & star_mask, c
        bits = r
        while bits:
            q = bits.bit_length() - 1
            hit = stored.get(q)
            if hit is not None:
                r ^= hit[0]
                full ^= hit[1]
            bits = r & ((1 << q) - 1)
        if r:
            p = r.bit_length() - 1
            for q, (w_r, w_full) in list(stored.items()):
                if (w_r >> p) & 1:
                    stored[q] = (w_r ^ r, w_full ^ full)
            stored[p] = (r, full)
        else:
            residue_or |= full
    return residue_or & unknown_mask


def _bits_ascending(mask: int):
    while mask:
        bit = mask & -mask
        yield bit.bit_length() - 1
        mask ^= bit


def _check_rank_invariant(path: Sequence[int], star: int, zero: int, width: int) -> None:
    ne0 = ((1 << width) - 1) ^ zero
    r_ne0 = _masked_rank(path, ne0)
    r_star = _masked_rank(path, star)
    if not (r_ne0 == r_star == star.bit_count()):
        raise InvariantViolation(
            f"rank invariant broken: {r_ne0} vs {r_star} vs {star.bit_count()}"
        )


def _infer_answer(path: Sequence[int], answers: Sequence[int], query: int, zero: int, width: int) -> int:
    """Answer of `query` from earlier answers, given zeros at the fixed rows."""
    ne0 = ((1 << width) - 1) ^ zero
    ok, combo = f2core.in_span([q & ne0 for q in path], query & ne0)
    if not ok:
        raise InvariantViolation("inference attempted on an independent query")
    b = 0
    for j in combo:
        b ^= answers[j]
    return b


@dataclass
class ConversionRun:
    label: int
    queries: int
    coordinate_queries: int = 0
    parity_queries: int = 0
    outer_iterations: int = 0
    ffo_queries: int = 0
    ffo_failures: int = 0
    star_mask: int = 0
    zero_mask: int = 0
    states: list = field(default_factory=list)


def convert_bounded(
    tree: ParityTree,
    mu: ProductDistribution,
    x: int,
    rng: np.random.Generator | None = None,
    eta: Callable[[int], int] | None = None,
    record_states: bool = False,
    check_inference: bool = True,
) -> ConversionRun:
    """One run of the bounded-bias conversion on input x.

    Coordinate probes and parity queries are both counted.  `eta` overrides
    the per-coordinate coin (for coupling against the pre-sampled variant);
    the rank invariant is asserted at every iteration.
    """
    if not mu.is_zero_biased:
        raise ValueError("distribution must be 0-biased")
    n = tree.width
    ids = {id(v): i for i, v in enumerate(tree.nodes())}
    deltas = [mu.delta(i) for i in range(n)]
    v = tree.root
    star = zero = 0
    path: list[int] = []
    answers: list[int] = []
    run = ConversionRun(label=0, queries=0)
    while isinstance(v, Node):
        _check_rank_invariant(path, star, zero, n)
        if record_states:
            run.states.append((ids[id(v)], star, zero))
        unknown = ((1 << n) - 1) ^ star ^ zero
        cand = _d_set(path + [v.query], star, unknown)
        if cand == 0:
            b = _infer_answer(path, answers, v.query, zero, n)
            if check_inference and b != f2core.dot(v.query, x):
                raise InvariantViolation("inferred answer disagrees with the input")
        else:
            for j in _bits_ascending(cand):
                run.coordinate_queries += 1
                xj = (x >> j) & 1
                if eta is not None:
                    coin = eta(j)
                else:
                    d = float(deltas[j])
                    coin = 1 if d >= 2 - 1e-15 or rng.random() < d / (2 - d) else 0
                if xj or coin:
                    star |= 1 << j
                    break
                zero |= 1 << j
            run.parity_queries += 1
            b = f2core.dot(v.query, x)
        path.append(v.query)
        answers.append(b)
        v = v.child(b)
    run.label = v.label
    run.queries = run.coordinate_queries + run.parity_queries
    run.star_mask, run.zero_mask = star, zero
    if record_states:
        run.states.append((ids[id(v)], star, zero))
    return run


def convert_bounded_prefixed(
    tree: ParityTree,
    x: int,
    rho: PartialFixing,
    record_states: bool = False,
) -> ConversionRun:
    """The same conversion with the restriction drawn up front.

    Processing coordinate j reveals rho_j instead of flipping a coin; with
    coins matched (coin = 1 iff rho_j is a star) the two runs visit the same
    (node, view) states.
    """
    if rho.n != tree.width or not rho.is_rho:
        raise ValueError("need a full restriction of the tree's width")
    if x & rho.zero_mask:
        raise ValueError("restriction is inconsistent with the input")
    eta = lambda j: (rho.star_mask >> j) & 1
    mu_dummy = ProductDistribution((0,) * tree.width)  # deltas unused with eta
    return convert_bounded(tree, mu_dummy, x, eta=eta, record_states=record_states)


def skew_view_run(tree: ParityTree, x: int, rho: PartialFixing) -> tuple[int, int]:
    """Replay the tree on x, counting queries whose star-restricted part is
    fresh; returns (label, real query count).  The expectation of the count
    over (x, restriction) pairs is the skew cost."""
    if rho.n != tree.width or not rho.is_rho:
        raise ValueError("need a full restriction of the tree's width")
    if x & rho.zero_mask:
        raise ValueError("restriction is inconsistent with the input")
    star = rho.star_mask
    elim = f2core.Eliminator()
    count = 0
    v = tree.root
    while isinstance(v, Node):
        if elim.insert(v.query & star):
            count += 1
        v = v.child(f2core.dot(v.query, x))
    return v.label, count


def skew_cost_by_counting(tree: ParityTree, mu: ProductDistribution):
    """Exact expectation of the replay count; equals the pruning-based skew
    cost and the two are cross-checked in the tests."""
    total = 0 * mu.one()
    for x in range(1 << tree.width):
        wx = mu.pmf(x)
        if wx == 0:
            continue
        for rho, wr in random_fixing_given_x(mu, x).enumerate():
            if wr == 0:
                continue
            _, count = skew_view_run(tree, x, rho)
            total += wx * wr * count
    return total


# ---------------------------------------------------------------------------
# General product distributions


@dataclass
class ReplayResult:
    candidates: list[tuple[int, int]]  # (coordinate, trail position of origin)
    trail: list  # (node, path snapshot, answers snapshot) per replayed node
    leaf: Leaf
    zero_mask: int  # zeros accumulated during the replay (assumed, not known)


def build_list(
    tree: ParityTree,
    v,
    path: Sequence[int],
    answers: Sequence[int],
    star: int,
    zero: int,
) -> ReplayResult:
    """Replay from (v, view) assuming every undecided queried bit is zero.

    Collects the candidate coordinates in encounter order together with the
    node that spawned them, and the leaf the optimistic replay reaches.
    """
    n = tree.width
    cur_path = list(path)
    cur_answers = list(answers)
    p_zero = zero
    out: list[tuple[int, int]] = []
    trail = []
    u = v
    while isinstance(u, Node):
        unknown = ((1 << n) - 1) ^ star ^ p_zero
        cand = _d_set(cur_path + [u.query], star, unknown)
        trail.append((u, list(cur_path), list(cur_answers)))
        for j in _bits_ascending(cand):
            p_zero |= 1 << j
            out.append((j, len(trail) - 1))
        b = _infer_answer(cur_path, cur_answers, u.query, p_zero, n)
        cur_path.append(u.query)
        cur_answers.append(b)
        u = u.child(b)
    return ReplayResult(out, trail, u, p_zero & ~zero)


def zero_query(tree: ParityTree) -> int:
    """Label reached by the optimistic replay from the root; a constant
    prediction whose disagreement probability is at most the skew cost."""
    res = build_list(tree, tree.root, [], [], 0, 0)
    return res.leaf.label


def ffo_sumcheck(
    x: int, indices: Sequence[int], alpha: float, rng: np.random.Generator
) -> tuple[int | None, int]:
    """First index in `indices` where x is 1, via noisy parity tests.

    Binary search over prefixes; each prefix is tested for nonzeroness by
    repeated random-subset parities (never wrong on the zero vector, misses a
    nonzero one with probability 2^-t per test).  Returns (coordinate or
    None, parity queries spent); total failure probability at most alpha.
    """
    ell = len(indices)
    if ell == 0:
        return None, 0
    n_checks = 1 + max(0, math.ceil(math.log2(ell))) if ell > 1 else 1
    # one extra doubling keeps the realised failure rate at alpha/2, so
    # empirical rates sit clearly inside the budget
    t = max(1, math.ceil(math.log2(2 * n_checks / alpha)))
    used = 0

    def nonzero(limit: int) -> bool:
        nonlocal used
        segment = indices[:limit]
        for _ in range(t):
            mask = 0
            draws = rng.integers(0, 2, size=len(segment))
            for j, bit in zip(segment, draws):
                if bit:
                    mask |= 1 << j
            used += 1
            if f2core.dot(mask, x):
                return True
        return False

    if not nonzero(ell):
        return None, used
    lo, hi = 0, ell - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if nonzero(mid + 1):
            hi = mid
        else:
            lo = mid + 1
    return indices[lo], used


def ffo_exact(x: int, indices: Sequence[int], alpha: float, rng) -> tuple[int | None, int]:
    """Test hook: an error-free first-one oracle that costs nothing."""
    for j in indices:
        if (x >> j) & 1:
            return j, 0
    return None, 0


def true_first_one(x: int, indices: Sequence[int]) -> int | None:
    for j in indices:
        if (x >> j) & 1:
            return j
    return None


def convert_general(
    tree: ParityTree,
    mu: ProductDistribution,
    gamma: float,
    x: int,
    rng: np.random.Generator | None = None,
    ffo: Callable = None,
    rho: PartialFixing | None = None,
    record_states: bool = False,
) -> ConversionRun:
    """One run of the general-distribution conversion on input x.

    Each outer iteration optimistically replays to a leaf, then repairs: a
    noisy first-one search (error budget gamma/n per call) locates the first
    assumed-zero coordinate that is actually 1, coins decide which candidate
    turns into a star, and on a hit the real parity query at the candidate's
    origin is paid.  With an exact oracle the output always equals the
    tree's; oracle failures are tracked for the total-variation accounting.
    """
    if not mu.is_zero_biased:
        raise ValueError("distribution must be 0-biased")
    n = tree.width
    if not 0 < gamma:
        raise ValueError("gamma must be positive")
    alpha = gamma / n
    if ffo is None:
        ffo = ffo_sumcheck
    ids = {id(v): i for i, v in enumerate(tree.nodes())}
    deltas = [mu.delta(i) for i in range(n)]
    v = tree.root
    star = zero = 0
    path: list[int] = []
    answers: list[int] = []
    run = ConversionRun(label=0, queries=0)
    while isinstance(v, Node):
        _check_rank_invariant(path, star, zero, n)
        if record_states:
            run.states.append((ids[id(v)], star, zero))
        run.outer_iterations += 1
        res = build_list(tree, v, path, answers, star, zero)
        order = [j for j, _ in res.candidates]
        i_star, q_ffo = ffo(x, order, alpha, rng)
        run.ffo_queries += q_ffo
        run.queries += q_ffo
        if i_star != true_first_one(x, order):
            run.ffo_failures += 1
        found = None
        for j, origin in res.candidates:
            if rho is not None:
                coin = (rho.star_mask >> j) & 1
            else:
                d = float(deltas[j])
                coin = 1 if d >= 2 - 1e-15 or rng.random() < d / (2 - d) else 0
            if j == i_star or coin:
                star |= 1 << j
                found = (j, origin)
                break
            zero |= 1 << j
        if found is not None:
            _, origin = found
            u, upath, uanswers = res.trail[origin]
            b = f2core.dot(u.query, x)
            run.parity_queries += 1
            run.queries += 1
            path = upath + [u.query]
            answers = uanswers + [b]
            v = u.child(b)
        else:
            v = res.leaf
    run.label = v.label
    run.star_mask, run.zero_mask = star, zero
    if record_states:
        run.states.append((ids[id(v)], star, zero))
    return run


# ---------------------------------------------------------------------------
# Exact output law of the general conversion under a parameterised oracle


def general_output_law(
    tree: ParityTree,
    mu: ProductDistribution,
    x: int,
    error_prob: Fraction = Fraction(0),
    wrong_mode: str = "none",
) -> dict[int, Fraction]:
    """Exact label distribution of the general conversion on x.

    The first-one oracle is modelled as correct with probability
    1 - error_prob and adversarially wrong otherwise ("none": reports no hit;
    "last": reports the final candidate).  Coins are enumerated exactly, so
    mu must carry rational probabilities.
    """
    n = tree.width
    out: dict[int, Fraction] = {}
    deltas = [Fraction(mu.delta(i)) for i in range(n)]

    def wrong_answer(order: list[int], truth):
        if wrong_mode == "none":
            return None if truth is not None else (order[-1] if order else None)
        if wrong_mode == "last":
            cand = order[-1] if order else None
            return cand if cand != truth else None
        raise ValueError(f"unknown wrong_mode {wrong_mode!r}")

    def add(label: int, w: Fraction):
        out[label] = out.get(label, Fraction(0)) + w

    def loop(v, star, zero, path, answers, w: Fraction):
        if w == 0:
            return
        if isinstance(v, Leaf):
            add(v.label, w)
            return
        _check_rank_invariant(path, star, zero, n)
        res = build_list(tree, v, path, answers, star, zero)
        order = [j for j, _ in res.candidates]
        truth = true_first_one(x, order)
        if error_prob > 0:
            wrong = wrong_answer(order, truth)
            if wrong == truth:
                branches = [(truth, w)]
            else:
                branches = [(truth, w * (1 - error_prob)), (wrong, w * error_prob)]
        else:
            branches = [(truth, w)]

        def process(k: int, star2, zero2, i_star, w2: Fraction):
            if w2 == 0:
                return
            if k == len(res.candidates):
                add(res.leaf.label, w2)
                return
            j, origin = res.candidates[k]
            p_star = deltas[j] / (2 - deltas[j])
            for coin, wc in ((1, p_star), (0, 1 - p_star)):
                w3 = w2 * wc
                if w3 == 0:
                    continue
                if j == i_star or coin:
                    u, upath, uanswers = res.trail[origin]
                    b = f2core.dot(u.query, x)
                    loop(
                        u.child(b),
                        star2 | (1 << j),
                        zero2,
                        upath + [u.query],
                        uanswers + [b],
                        w3,
                    )
                else:
                    process(k + 1, star2, zero2 | (1 << j), i_star, w3)

        for i_star, wb in branches:
            process(0, star, zero, i_star, wb)

    loop(tree.root, 0, 0, [], [], Fraction(1))
    return out


# ---------------------------------------------------------------------------
# Closed-form conditional state laws


def state_input_law(
    tree_width: int,
    mu: ProductDistribution,
    path: Sequence[int],
    answers: Sequence[int],
    star: int,
    zero: int,
) -> dict[int, Fraction]:
    """Conditional law of the input given a reachable (node, view) state.

    Zero-fixed coordinates are 0, undecided ones stay at their prior, and the
    star coordinates are the unique solution of the star-restricted path
    system given the rest.
    """
    n = tree_width
    unknown = ((1 << n) - 1) ^ star ^ zero
    free = list(_bits_ascending(unknown))
    out: dict[int, Fraction] = {}
    for sel in range(1 << len(free)):
        base = 0
        w = Fraction(1)
        for k, j in enumerate(free):
            pj = Fraction(mu.p[j])
            if (sel >> k) & 1:
                base |= 1 << j
                w *= pj
            else:
                w *= 1 - pj
        rows = [(q & star, b ^ f2core.dot(q & ~star, base)) for q, b in zip(path, answers)]
        try:
            sols = f2core.solve_affine(rows, n)
        except ValueError:
            continue
        stars_solved = [s for s in sols if s & ~star == 0]
        if len(stars_solved) != 1:
            raise AssertionError("star coordinates are not uniquely determined")
        x = base | stars_solved[0]
        out[x] = out.get(x, Fraction(0)) + w
    total = sum(out.values())
    return {x: w / total for x, w in out.items() if w > 0}


def state_fixing_law(
    mu: ProductDistribution, x: int, star: int, zero: int, width: int
) -> dict[tuple[int, int], Fraction]:
    """Conditional law of the restriction given the state and the input.

    Decided coordinates are pinned to the view; undecided ones are stars with
    probability delta/(2-delta) when x_j = 0 and surely when x_j = 1.
    """
    unknown = ((1 << width) - 1) ^ star ^ zero
    free = [j for j in _bits_ascending(unknown) if not (x >> j) & 1]
    forced = star | (unknown & x)
    out: dict[tuple[int, int], Fraction] = {}
    for sel in range(1 << len(free)):
        stars = forced
        w = Fraction(1)
        for k, j in enumerate(free):
            d = Fraction(mu.delta(j))
            q = d / (2 - d)
            if (sel >> k) & 1:
                stars |= 1 << j
                w *= q
            else:
                w *= 1 - q
        if w > 0:
            full = (1 << width) - 1
            out[(stars, full ^ stars)] = out.get((stars, full ^ stars), Fraction(0)) + w
    return out
