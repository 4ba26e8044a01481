"""Parity decision trees: evaluation, pruning, cost/error functionals and
exact brute-force oracles for the distributional complexity measures.

Trees are immutable node graphs.  Queries along every root-to-leaf path are
kept linearly independent; `normalize` re-establishes that by contracting
inferable queries, and the constructors of randomly generated trees never
produce dependent paths in the first place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import f2core
from .boolfun import BooleanFunction
from .dist import PartialFixing, ProductDistribution, random_fixing, uniform_given

ORACLE_D_CAP = 5
ORACLE_AVGD_CAP = 4
ORACLE_S_CAP = 3
FRONTIER_CAP = 10_000


class FrontierCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Node:
    query: int
    child0: "Node | Leaf"
    child1: "Node | Leaf"

    def child(self, b: int) -> "Node | Leaf":
        return self.child1 if b else self.child0


@dataclass(frozen=True)
class ParityTree:
    width: int
    root: Node | Leaf
    out_bits: int = 1

    def evaluate(self, x: int) -> int:
        v = self.root
        while isinstance(v, Node):
            v = v.child(f2core.dot(v.query, x))
        return v.label

    def path(self, x: int) -> tuple[list[tuple[int, int]], int]:
        """(list of (query, outcome) pairs along the walk, leaf label)."""
        v = self.root
        steps = []
        while isinstance(v, Node):
            b = f2core.dot(v.query, x)
            steps.append((v.query, b))
            v = v.child(b)
        return steps, v.label

    def queries(self, x: int) -> int:
        return len(self.path(x)[0])

    def depth(self) -> int:
        def go(v) -> int:
            if isinstance(v, Leaf):
                return 0
            return 1 + max(go(v.child0), go(v.child1))

        return go(self.root)

    def nodes(self) -> list[Node | Leaf]:
        """Preorder traversal; index 0 is the root."""
        out = []

        def go(v):
            out.append(v)
            if isinstance(v, Node):
                go(v.child0)
                go(v.child1)

        go(self.root)
        return out

    def is_path_independent(self) -> bool:
        def go(v, elim: f2core.Eliminator) -> bool:
            if isinstance(v, Leaf):
                return True
            if elim.contains(v.query) or v.query == 0:
                return False
            e2 = elim.copy()
            e2.insert(v.query)
            return go(v.child0, e2) and go(v.child1, e2.copy())

        return go(self.root, f2core.Eliminator())

    def assert_path_independent(self) -> None:
        if not self.is_path_independent():
            raise ValueError("dependent query along a root-to-leaf path")

    def to_json(self) -> str:
        nodes: list[dict] = []

        def go(v) -> int:
            idx = len(nodes)
            if isinstance(v, Leaf):
                nodes.append({"leaf_label": v.label})
                return idx
            nodes.append({})
            c0 = go(v.child0)
            c1 = go(v.child1)
            nodes[idx] = {"query_hex": format(v.query, "x"), "child0": c0, "child1": c1}
            return idx

        go(self.root)
        return json.dumps({"width": self.width, "out_bits": self.out_bits, "nodes": nodes})

    @classmethod
    def from_json(cls, payload: str) -> "ParityTree":
        data = json.loads(payload)
        nodes = data["nodes"]

        def build(i: int):
            spec = nodes[i]
            if "leaf_label" in spec:
                return Leaf(int(spec["leaf_label"]))
            return Node(int(spec["query_hex"], 16), build(spec["child0"]), build(spec["child1"]))

        tree = cls(int(data["width"]), build(0), int(data.get("out_bits", 1)))
        tree.assert_path_independent()
        return tree


def leaf_tree(width: int, label: int, out_bits: int = 1) -> ParityTree:
    return ParityTree(width, Leaf(label), out_bits)


def normalize(tree: ParityTree) -> ParityTree:
    """Contract inferable queries so every path is linearly independent."""

    def go(v, elim: f2core.Eliminator, answers: list[int]):
        if isinstance(v, Leaf):
            return v
        residue, combo = elim.reduce(v.query)
        if residue == 0:
            b = 0
            for i in range(len(answers)):
                if (combo >> i) & 1:
                    b ^= answers[i]
            return go(v.child(b), elim, answers)
        e2 = elim.copy()
        e2.insert(v.query)
        return Node(
            v.query,
            go(v.child0, e2, answers + [0]),
            go(v.child1, e2.copy(), answers + [1]),
        )

    return ParityTree(tree.width, go(tree.root, f2core.Eliminator(), []), tree.out_bits)


def random_tree(
    width: int,
    rng: np.random.Generator,
    max_depth: int | None = None,
    leaf_prob: float = 0.25,
    out_bits: int = 1,
) -> ParityTree:
    """Random path-independent tree; labels uniform."""
    if max_depth is None:
        max_depth = width

    def go(elim: f2core.Eliminator, depth: int):
        if depth >= max_depth or elim.rank >= width or rng.random() < leaf_prob:
            return Leaf(int(rng.integers(0, 1 << out_bits)))
        while True:
            q = int(rng.integers(1, 1 << width))
            if not elim.contains(q):
                break
        e2 = elim.copy()
        e2.insert(q)
        return Node(q, go(e2, depth + 1), go(e2.copy(), depth + 1))

    return ParityTree(width, go(f2core.Eliminator(), 0), out_bits)


@dataclass(frozen=True)
class RandomizedParityTree:
    """Finitely supported distribution over deterministic trees."""

    members: tuple[tuple[object, ParityTree], ...]

    def __post_init__(self) -> None:
        total = sum(p for p, _ in self.members)
        if abs(float(total) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        if any(float(p) <= 0 for p, _ in self.members):
            raise ValueError("probabilities must be positive")
        widths = {t.width for _, t in self.members}
        if len(widths) != 1:
            raise ValueError("members must share a width")

    @property
    def width(self) -> int:
        return self.members[0][1].width

    def worst_depth(self) -> int:
        return max(t.depth() for _, t in self.members)

    def sample(self, rng: np.random.Generator) -> ParityTree:
        u = rng.random()
        acc = 0.0
        for p, t in self.members:
            acc += float(p)
            if u < acc:
                return t
        return self.members[-1][1]


TreeLike = ParityTree | RandomizedParityTree


def _as_members(tree: TreeLike):
    if isinstance(tree, ParityTree):
        return ((1, tree),)
    return tree.members


def error(tree: TreeLike, f: BooleanFunction, mu: ProductDistribution):
    """Exact error probability by full enumeration."""
    total = 0 * mu.one()
    for p, t in _as_members(tree):
        if t.width != f.n:
            raise ValueError("width mismatch")
        bad = 0 * mu.one()
        for x in range(1 << f.n):
            if t.evaluate(x) != f.table[x]:
                bad += mu.pmf(x)
        total += p * bad
    return total


def avg_queries(tree: TreeLike, mu: ProductDistribution):
    """Expected number of queries by full enumeration."""
    total = 0 * mu.one()
    for p, t in _as_members(tree):
        q = 0 * mu.one()
        for x in range(1 << t.width):
            q += mu.pmf(x) * t.queries(x)
        total += p * q
    return total


def error_mc(
    tree: TreeLike, f: BooleanFunction, mu: ProductDistribution, samples: int, rng
) -> tuple[float, float]:
    """(estimate, standard error) of the error probability."""
    members = _as_members(tree)
    probs = np.array([float(p) for p, _ in members])
    bad = 0
    for _ in range(samples):
        t = members[rng.choice(len(members), p=probs / probs.sum())][1] if len(members) > 1 else members[0][1]
        x = mu.sample(rng)
        bad += t.evaluate(x) != f.table[x]
    est = bad / samples
    return est, math.sqrt(max(est * (1 - est), 1e-12) / samples)


def prune(tree: ParityTree, rho: PartialFixing) -> ParityTree:
    """Restrict queries to the free coordinates of rho and contract the ones
    whose answers become inferable; agrees with the original tree on every
    consistent input."""
    if rho.n != tree.width or not rho.is_rho:
        raise ValueError("need a full restriction of the tree's width")
    stars = rho.star_mask

    def go(v, elim: f2core.Eliminator, answers: list[int]):
        if isinstance(v, Leaf):
            return v
        q = v.query & stars
        residue, combo = elim.reduce(q)
        if residue == 0:
            b = 0
            for i in range(len(answers)):
                if (combo >> i) & 1:
                    b ^= answers[i]
            return go(v.child(b), elim, answers)
        e2 = elim.copy()
        e2.insert(q)
        return Node(q, go(v.child0, e2, answers + [0]), go(v.child1, e2.copy(), answers + [1]))

    return ParityTree(tree.width, go(tree.root, f2core.Eliminator(), []), tree.out_bits)


def skew_cost(tree: TreeLike, mu: ProductDistribution):
    """Expected query count after a random partial fixing, exactly.

    Enumerates every restriction, prunes, and averages the pruned tree's
    query count under the uniform completion.  The replay-counting form of
    the same quantity lives in `compress` and the two are cross-checked.
    """
    if not mu.is_zero_biased:
        raise ValueError("distribution must be 0-biased")
    fixing = random_fixing(mu)
    total = 0 * mu.one()
    for p, t in _as_members(tree):
        acc = 0 * mu.one()
        for rho, w in fixing.enumerate():
            if w == 0:
                continue
            tr = prune(t, rho)
            stars = rho.star_mask
            s = stars.bit_count()
            count = 0
            for sel in range(1 << s):
                x = 0
                rem = stars
                j = 0
                while rem:
                    bit = rem & -rem
                    if (sel >> j) & 1:
                        x |= bit
                    rem ^= bit
                    j += 1
                count += tr.queries(x)
            q = Fraction(count, 1 << s) if mu.exact else count / (1 << s)
            acc += w * q
        total += p * acc
    return total


def skew_cost_mc(tree: ParityTree, mu: ProductDistribution, samples: int, rng) -> tuple[float, float]:
    """Monte Carlo version of skew_cost with a standard error."""
    fixing = random_fixing(mu)
    vals = np.empty(samples)
    for i in range(samples):
        rho = fixing.sample(rng)
        tr = prune(tree, rho)
        x = uniform_given(rho).sample(rng)
        vals[i] = tr.queries(x)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0


class CostErrorReport(NamedTuple):
    err: float
    avg_queries: float
    worst_depth: int
    skew_cost: float | None = None


def report(tree: TreeLike, f: BooleanFunction, mu: ProductDistribution, with_skew=False) -> CostErrorReport:
    worst = tree.depth() if isinstance(tree, ParityTree) else tree.worst_depth()
    sk = float(skew_cost(tree, mu)) if with_skew else None
    return CostErrorReport(float(error(tree, f, mu)), float(avg_queries(tree, mu)), worst, sk)


# ---------------------------------------------------------------------------
# Exact oracles over canonicalised affine-subspace states


class _StateSpace:
    """Memoised affine-subspace lattice for one (f, mu) instance."""

    def __init__(self, f: BooleanFunction, weights: Sequence[float]):
        self.f = f
        self.n = f.n
        self.w = [float(v) for v in weights]
        self.info: dict = {}

    def state_key(self, rows):
        return f2core.rref_system(rows)

    def get(self, key):
        hit = self.info.get(key)
        if hit is None:
            members = f2core.solve_affine(list(key), self.n)
            mass = sum(self.w[x] for x in members)
            by_label: dict[int, float] = {}
            for x in members:
                by_label[self.f.table[x]] = by_label.get(self.f.table[x], 0.0) + self.w[x]
            stop_err = mass - max(by_label.values()) if by_label else 0.0
            hit = {"members": members, "mass": mass, "stop_err": stop_err}
            self.info[key] = hit
        return hit

    def query_reps(self, key) -> list[int]:
        """One representative per coset of the constraint span, span excluded."""
        elim = f2core.Eliminator()
        for v, _ in key:
            elim.insert(v)
        seen = set()
        reps = []
        for a in range(1, 1 << self.n):
            r, _ = elim.reduce(a)
            if r and r not in seen:
                seen.add(r)
                reps.append(r)
        return reps


def oracle_depth(f: BooleanFunction, mu, eps: float, cap: int = ORACLE_D_CAP) -> int:
    """Least worst-case depth of a deterministic tree with error at most eps.

    Exact optimum by memoised recursion over canonical subspace states; a
    query that lies in the span of the current constraints never helps, so
    only coset representatives are tried.
    """
    if f.n > cap:
        raise ValueError(f"oracle capped at width {cap}")
    weights = _weights_of(mu, f.n)
    space = _StateSpace(f, weights)
    memo: dict = {}

    def value(key, d: int) -> float:
        info = space.get(key)
        if info["mass"] <= 0:
            return 0.0
        if d == 0:
            return info["stop_err"]
        hit = memo.get((key, d))
        if hit is not None:
            return hit
        best = info["stop_err"]
        if best > 1e-15:
            for a in space.query_reps(key):
                v = 0.0
                for b in (0, 1):
                    v += value(space.state_key(list(key) + [(a, b)]), d - 1)
                    if v >= best:
                        break
                if v < best:
                    best = v
                if best <= 1e-15:
                    break
        memo[(key, d)] = best
        return best

    root = space.state_key([])
    for d in range(f.n + 1):
        if value(root, d) <= eps + 1e-12:
            return d
    raise AssertionError("full-depth tree separates all inputs")


def _weights_of(mu, n: int) -> list[float]:
    if isinstance(mu, ProductDistribution):
        if mu.n != n:
            raise ValueError("arity mismatch")
        return [float(v) for v in mu.pmf_table()]
    w = [float(v) for v in mu]
    if len(w) != 1 << n:
        raise ValueError("weight table must have length 2^n")
    return w


def _pareto(points: Iterable[tuple[float, float]], tol: float = 1e-12) -> list[tuple[float, float]]:
    """Non-dominated (cost, err) pairs, cost ascending / err descending."""
    out: list[tuple[float, float]] = []
    best_err = math.inf
    for c, e in sorted(points):
        if e < best_err - tol:
            out.append((c, e))
            best_err = e
    if len(out) > FRONTIER_CAP:
        raise FrontierCapExceeded(f"frontier grew past {FRONTIER_CAP} points")
    return out


def _lower_envelope(points: Sequence[tuple[float, float]], eps: float) -> float:
    """Least cost achievable at error <= eps by mixing the given points.

    Mixing realises the convex hull, so this evaluates the lower convex
    boundary of the point set in the (err, cost) plane, extended flat past
    its endpoints.
    """
    pareto = _pareto(points)
    pts = sorted((e, c) for c, e in pareto)  # err ascending, cost descending
    chain: list[tuple[float, float]] = []
    for p in pts:
        while len(chain) >= 2:
            (e1, c1), (e2, c2) = chain[-2], chain[-1]
            # drop the middle point when it lies on or above segment p1..p
            if (c2 - c1) * (p[0] - e1) >= (p[1] - c1) * (e2 - e1):
                chain.pop()
            else:
                break
        chain.append(p)
    if eps < chain[0][0] - 1e-12:
        raise ValueError("error target below the minimum achievable")
    prev = chain[0]
    for e, c in chain[1:]:
        if eps <= e:
            t = 0.0 if e == prev[0] else (eps - prev[0]) / (e - prev[0])
            return prev[1] + t * (c - prev[1])
        prev = (e, c)
    return chain[-1][1]


def avgd_frontier(f: BooleanFunction, mu, cap: int = ORACLE_AVGD_CAP) -> list[tuple[float, float]]:
    """Pareto frontier of (expected queries, error) over deterministic trees."""
    if f.n > cap:
        raise ValueError(f"oracle capped at width {cap}")
    space = _StateSpace(f, _weights_of(mu, f.n))
    memo: dict = {}

    def frontier(key) -> list[tuple[float, float]]:
        hit = memo.get(key)
        if hit is not None:
            return hit
        info = space.get(key)
        pts = [(0.0, info["stop_err"])]
        if info["mass"] > 0 and info["stop_err"] > 1e-15:
            for a in space.query_reps(key):
                f0 = frontier(space.state_key(list(key) + [(a, 0)]))
                f1 = frontier(space.state_key(list(key) + [(a, 1)]))
                pts.extend(
                    (info["mass"] + c0 + c1, e0 + e1) for c0, e0 in f0 for c1, e1 in f1
                )
        out = _pareto(pts)
        memo[key] = out
        return out

    return frontier(space.state_key([]))


def oracle_avg_queries(f: BooleanFunction, mu, eps: float, cap: int = ORACLE_AVGD_CAP) -> float:
    """Least expected query count of a randomised tree with error <= eps.

    Mixtures of deterministic trees realise exactly the convex hull of the
    deterministic frontier, so the value is its lower envelope at eps.
    """
    return _lower_envelope(avgd_frontier(f, mu, cap=cap), eps)


def _tree_structures(width: int, depth_bound: int):
    """Every query-labelled tree shape with independent paths, as nested tuples.

    Distinct query vectors matter here even when they induce the same split,
    because the skew cost of a tree depends on the vectors themselves.
    """

    def go(elim: f2core.Eliminator, depth: int):
        yield None  # leaf
        if depth >= depth_bound or elim.rank >= width:
            return
        for q in range(1, 1 << width):
            if elim.contains(q):
                continue
            e2 = elim.copy()
            e2.insert(q)
            for left in go(e2, depth + 1):
                for right in go(e2.copy(), depth + 1):
                    yield (q, left, right)

    yield from go(f2core.Eliminator(), 0)


def oracle_skew(
    f: BooleanFunction,
    mu: ProductDistribution,
    eps: float,
    depth_bound: int | None = None,
    cap: int = ORACLE_S_CAP,
) -> float:
    """Least skew cost of a randomised tree with error <= eps.

    Skew cost is not decomposable over subspace states (pruning couples the
    whole path), so this enumerates every deterministic tree shape up to the
    depth bound and takes the lower envelope of (skew cost, error) points.
    Labels are chosen per leaf to minimise the error, which is optimal for
    the envelope; expected replay counts are memoised per (path, input).
    """
    if f.n > cap:
        raise ValueError(f"oracle capped at width {cap}")
    if not mu.is_zero_biased:
        raise ValueError("distribution must be 0-biased")
    if depth_bound is None:
        depth_bound = f.n
    n = f.n
    weights = _weights_of(mu, n)
    star_given_bit = []
    for j in range(n):
        d = float(mu.delta(j))
        star_given_bit.append((d / (2 - d) if d < 2 else 1.0, 1.0))

    count_cache: dict = {}

    def expected_count(path: tuple[int, ...], x: int) -> float:
        """E over the conditional restriction of the fresh-query count."""
        key = (path, x)
        hit = count_cache.get(key)
        if hit is not None:
            return hit
        support = 0
        for q in path:
            support |= q
        bits = [j for j in range(n) if (support >> j) & 1]
        total = 0.0
        for sel in range(1 << len(bits)):
            stars = 0
            prob = 1.0
            for idx, j in enumerate(bits):
                p_star = star_given_bit[j][(x >> j) & 1]
                if (sel >> idx) & 1:
                    stars |= 1 << j
                    prob *= p_star
                else:
                    prob *= 1 - p_star
            if prob == 0.0:
                continue
            basis: list[int] = []
            cnt = 0
            for q in path:
                r = q & stars
                for b in basis:
                    if r ^ b < r:
                        r ^= b
                if r:
                    basis.append(r)
                    basis.sort(reverse=True)
                    cnt += 1
            total += prob * cnt
        count_cache[key] = total
        return total

    pts = []
    size = 1 << n
    for shape in _tree_structures(n, depth_bound):
        err = 0.0
        cost = 0.0
        by_leaf: dict[tuple, dict[int, float]] = {}
        for x in range(size):
            w = weights[x]
            node = shape
            path = []
            branch = []
            while node is not None:
                q, l, r = node
                b = f2core.dot(q, x)
                path.append(q)
                branch.append(b)
                node = r if b else l
            if w:
                cost += w * expected_count(tuple(path), x)
                leaf = by_leaf.setdefault(tuple(branch), {})
                lab = f.table[x]
                leaf[lab] = leaf.get(lab, 0.0) + w
        for masses in by_leaf.values():
            err += sum(masses.values()) - max(masses.values())
        pts.append((cost, err))
    return _lower_envelope(_pareto(pts), eps)


def dprod_lower_bound(
    f: BooleanFunction, resolution: int = 4, eps: float = 1 / 3, cap: int = ORACLE_D_CAP
) -> tuple[int, ProductDistribution]:
    """Certified lower bound on the best product-distribution depth bound.

    Grid search over per-coordinate probabilities i/resolution; every grid
    point is a valid witness, so the maximum over the grid is a lower bound.
    """
    if f.n > cap:
        raise ValueError(f"oracle capped at width {cap}")
    grid = [i / resolution for i in range(resolution + 1)]
    best, best_mu = -1, None

    def sweep(prefix):
        nonlocal best, best_mu
        if len(prefix) == f.n:
            mu = ProductDistribution(tuple(prefix))
            d = oracle_depth(f, mu, eps, cap=cap)
            if d > best:
                best, best_mu = d, mu
            return
        for p in grid:
            sweep(prefix + [p])

    sweep([])
    return best, best_mu


def derandomize(
    tree: RandomizedParityTree,
    f: BooleanFunction,
    mu: ProductDistribution,
    eps: float,
    delta: float,
) -> ParityTree:
    """Markov pruning at depth qbar/delta, then the best support member.

    The measured error of the input must be at most eps; the result is a
    deterministic tree of depth at most qbar/delta with error at most
    eps + delta, and both postconditions are asserted.
    """
    base_err = float(error(tree, f, mu))
    if base_err > eps + 1e-12:
        raise ValueError("input tree errs more than eps")
    qbar = float(avg_queries(tree, mu))
    limit = math.floor(qbar / delta + 1e-12)

    def cut(v, d):
        if isinstance(v, Leaf):
            return v
        if d >= limit:
            return Leaf(0)
        return Node(v.query, cut(v.child0, d + 1), cut(v.child1, d + 1))

    best, best_err = None, math.inf
    for _, t in tree.members:
        cand = ParityTree(t.width, cut(t.root, 0), t.out_bits)
        e = float(error(cand, f, mu))
        if e < best_err:
            best, best_err = cand, e
    assert best is not None and best.depth() <= qbar / delta + 1e-9
    assert best_err <= eps + delta + 1e-9
    return best
