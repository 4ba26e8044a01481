"""Boolean functions as explicit truth tables, with weighted Fourier analysis.

Inputs are integers whose bit i is coordinate i.  Real-valued tables are
numpy float arrays of length 2^n.  Subspace enumeration is exact and cached
per width, which keeps the bias maximisations and the certificate sweep fast
enough for the widths the caps allow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import f2core
from .dist import ProductDistribution

TRANSFORM_CAP = 20
ALL_SUBSPACE_CAP = 6
CODIM1_CAP = 16
LP_CAP = 10

_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class BooleanFunction:
    """Total function on {0,1}^n given by its table; labels may be k-bit."""

    n: int
    table: tuple
    out_bits: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if len(self.table) != 1 << self.n:
            raise ValueError("table length must be 2^n")
        if any(not 0 <= v < 1 << self.out_bits for v in self.table):
            raise ValueError("label outside the output range")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def signs(self) -> np.ndarray:
        """(-1)^f as a float table; single-output only."""
        if self.out_bits != 1:
            raise ValueError("signs need a single-output function")
        t = np.asarray(self.table, dtype=np.int64)
        return 1.0 - 2.0 * t

    def xor_shift(self, mask: int) -> "BooleanFunction":
        """x -> f(x xor mask)."""
        idx = np.arange(1 << self.n) ^ mask
        return BooleanFunction(self.n, tuple(np.asarray(self.table)[idx]), self.out_bits)

    def is_constant(self) -> bool:
        return len(set(self.table)) == 1

    def to_spec(self) -> dict:
        bits = 0
        for x, v in enumerate(self.table):
            bits |= v << x
        if self.out_bits != 1:
            raise ValueError("hex corpus format is single-output")
        return {"n": self.n, "table_hex": format(bits, "x")}


def from_table_hex(n: int, table_hex: str) -> BooleanFunction:
    bits = int(table_hex, 16)
    return BooleanFunction(n, tuple((bits >> x) & 1 for x in range(1 << n)))


def xor_n(n: int) -> BooleanFunction:
    return BooleanFunction(n, tuple(x.bit_count() & 1 for x in range(1 << n)))


def and_n(n: int) -> BooleanFunction:
    full = (1 << n) - 1
    return BooleanFunction(n, tuple(1 if x == full else 0 for x in range(1 << n)))


def nor_n(n: int) -> BooleanFunction:
    return BooleanFunction(n, tuple(1 if x == 0 else 0 for x in range(1 << n)))


def maj_n(n: int) -> BooleanFunction:
    return BooleanFunction(n, tuple(1 if 2 * x.bit_count() > n else 0 for x in range(1 << n)))


def first_one(x: int) -> int:
    """Index of the lowest set bit, 0 for the zero vector."""
    return (x & -x).bit_length() - 1 if x else 0


def fpe(m: int) -> BooleanFunction:
    """Pointer evaluation on 2m bits: the low half selects a bit of the high half.

    The selector is the position of the first 1 in the low half (position 0
    when the low half is all-zero).
    """
    table = []
    for z in range(1 << (2 * m)):
        x = z & ((1 << m) - 1)
        y = z >> m
        table.append((y >> first_one(x)) & 1)
    return BooleanFunction(2 * m, tuple(table))


def random_function(n: int, p: float, rng: np.random.Generator) -> BooleanFunction:
    return BooleanFunction(n, tuple(int(v) for v in rng.random(1 << n) < p))


def direct_sum(f: BooleanFunction, k: int) -> BooleanFunction:
    """k independent copies, one output bit per copy (copy i in bit block i)."""
    n, kn = f.n, f.n * k
    if kn > TRANSFORM_CAP:
        raise ValueError("combined arity exceeds the cap")
    mask = (1 << n) - 1
    table = []
    for x in range(1 << kn):
        label = 0
        for i in range(k):
            label |= f.table[(x >> (i * n)) & mask] << i
        table.append(label)
    return BooleanFunction(kn, tuple(table), out_bits=max(k, 1))


def xor_power(f: BooleanFunction, k: int) -> BooleanFunction:
    """Parity of k independent copies of f."""
    g = direct_sum(f, k)
    return BooleanFunction(g.n, tuple(v.bit_count() & 1 for v in g.table))


def function_from_spec(spec: dict, rng: np.random.Generator | None = None) -> BooleanFunction:
    """Parse the JSON function-corpus format."""
    if "table_hex" in spec:
        return from_table_hex(int(spec["n"]), spec["table_hex"])
    family = spec["family"].upper()
    n = int(spec["n"])
    if family == "XOR":
        return xor_n(n)
    if family == "AND":
        return and_n(n)
    if family == "MAJ":
        return maj_n(n)
    if family == "NOR":
        return nor_n(n)
    if family == "FPE":
        return fpe(n)
    if family == "RANDOM":
        seeded = np.random.default_rng(int(spec["seed"])) if rng is None else rng
        return random_function(n, float(spec.get("p", 0.5)), seeded)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Fourier transform


def walsh_hadamard(values: Sequence[float]) -> np.ndarray:
    """Coefficient table hat F(z) = 2^-n * sum_x F(x) (-1)^<x,z>."""
    v = np.asarray(values, dtype=np.float64).copy()
    size = len(v)
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("table length must be a power of two")
    h = 1
    while h < size:
        for start in range(0, size, 2 * h):
            a = v[start : start + h].copy()
            b = v[start + h : start + 2 * h]
            v[start : start + h] = a + b
            v[start + h : start + 2 * h] = a - b
        h *= 2
    return v / size


def inverse_walsh(coeffs: Sequence[float]) -> np.ndarray:
    """Inverse of walsh_hadamard (no normalisation)."""
    return walsh_hadamard(coeffs) * len(coeffs)


def as_weight_table(mu, n: int) -> np.ndarray:
    """Coerce a distribution argument to a validated 2^n weight table."""
    if isinstance(mu, ProductDistribution):
        if mu.n != n:
            raise ValueError("arity mismatch between function and distribution")
        w = mu.pmf_table()
    else:
        w = np.asarray(mu, dtype=np.float64)
        if w.shape != (1 << n,):
            raise ValueError("weight table must have length 2^n")
    if w.min() < -_ZERO_TOL:
        raise ValueError("negative weight")
    if abs(w.sum() - 1.0) > _ZERO_TOL:
        raise ValueError("weights must sum to 1")
    return w


def f_mu(f: BooleanFunction, mu) -> np.ndarray:
    """Associated real table (-1)^f(x) * mu(x) * 2^n."""
    w = as_weight_table(mu, f.n)
    return f.signs() * w * (1 << f.n)


def signed_measure(f: BooleanFunction, mu) -> np.ndarray:
    """(-1)^f(x) * mu(x); bias of a subspace is |sum over its members|."""
    return f.signs() * as_weight_table(mu, f.n)


# ---------------------------------------------------------------------------
# Affine subspaces


@dataclass(frozen=True)
class AffineSubspace:
    """Solution set of independent parity constraints <a_j, x> = b_j."""

    width: int
    constraints: tuple[int, ...]
    rhs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "rhs", tuple(b & 1 for b in self.rhs))
        if len(self.constraints) != len(self.rhs):
            raise ValueError("constraints and rhs lengths differ")
        if any(a <= 0 or a >> self.width for a in self.constraints):
            raise ValueError("constraint vector out of range")
        if f2core.rank(self.constraints) != len(self.constraints):
            raise ValueError("constraints must be linearly independent")

    @classmethod
    def full_space(cls, width: int) -> "AffineSubspace":
        return cls(width, (), ())

    @classmethod
    def codim1(cls, width: int, a: int, b: int) -> "AffineSubspace":
        return cls(width, (a,), (b,))

    @property
    def codim(self) -> int:
        return len(self.constraints)

    def contains(self, x: int) -> bool:
        return all(f2core.dot(a, x) == b for a, b in zip(self.constraints, self.rhs))

    def members(self) -> list[int]:
        return f2core.solve_affine(list(zip(self.constraints, self.rhs)), self.width)

    def indicator(self) -> np.ndarray:
        out = np.zeros(1 << self.width, dtype=bool)
        out[self.members()] = True
        return out


def bias(f: BooleanFunction, mu, space: AffineSubspace) -> float:
    """Absolute signed mu-mass of f over the given subspace."""
    if space.width != f.n:
        raise ValueError("width mismatch")
    sm = signed_measure(f, mu)
    return float(abs(sm[space.members()].sum()))


# Per-width cache of every linear subspace, stored as coset index matrices
# grouped by dimension: idx[u] has one row per coset of each dimension-u
# subspace, listing its members.  Affine spaces are exactly these cosets.
@lru_cache(maxsize=8)
def _coset_cache(width: int):
    if width > ALL_SUBSPACE_CAP:
        raise ValueError(f"all-subspace enumeration capped at width {ALL_SUBSPACE_CAP}")
    per_dim = []
    for u in range(width + 1):
        bases = list(_rref_bases(width, u))
        rows = []
        meta = []
        for b_idx, basis in enumerate(bases):
            members = np.array(_span(basis), dtype=np.int64)
            seen = np.zeros(1 << width, dtype=bool)
            for rep in range(1 << width):
                if seen[rep]:
                    continue
                coset = members ^ rep
                seen[coset] = True
                rows.append(coset)
                meta.append((b_idx, rep))
        idx = np.array(rows, dtype=np.int64) if rows else np.zeros((0, 1 << u), np.int64)
        per_dim.append((bases, idx, meta))
    return per_dim


def _span(basis: Sequence[int]) -> list[int]:
    out = [0]
    for v in basis:
        out += [w ^ v for w in out]
    return out


def _rref_bases(width: int, dim: int) -> Iterable[tuple[int, ...]]:
    """All dimension-dim subspaces of GF(2)^width, one canonical basis each."""
    if dim == 0:
        yield ()
        return
    from itertools import combinations

    for pivots in combinations(range(width), dim):
        free_positions = []
        for r, p in enumerate(pivots):
            cols = [c for c in range(p + 1, width) if c not in pivots]
            free_positions.append(cols)
        counts = [len(c) for c in free_positions]

        def fill(r: int, rows: list[int]):
            if r == dim:
                yield tuple(rows)
                return
            for bitsel in range(1 << counts[r]):
                row = 1 << pivots[r]
                for j, c in enumerate(free_positions[r]):
                    if (bitsel >> j) & 1:
                        row |= 1 << c
                yield from fill(r + 1, rows + [row])

        yield from fill(0, [])


class DiscResult(NamedTuple):
    lo: float
    hi: float
    exact: bool
    witness: AffineSubspace | None

    @property
    def value(self) -> float:
        if not self.exact:
            raise ValueError("only an interval is available at this width")
        return self.lo


def _witness_from_coset(width: int, basis: tuple[int, ...], rep: int) -> AffineSubspace:
    constraints = f2core.orthogonal_complement(basis, width)
    rhs = tuple(f2core.dot(a, rep) for a in constraints)
    return AffineSubspace(width, tuple(constraints), rhs)


def max_bias(
    f: BooleanFunction,
    mu,
    family: str = "codim1",
    include_full: bool = True,
    batch: int = 512,
    method: str = "auto",
) -> tuple[float, AffineSubspace]:
    """Maximum bias over a family of affine subspaces, with a witness.

    family "codim1" enumerates the 2^(n+1)-2 single-constraint spaces (plus
    the full space unless include_full is false); "all" enumerates every
    affine subspace, which is capped at small widths.  For codim1 the
    "direct" method sums the signed measure per space while "fourier" gets
    the same sums from one butterfly pass; the two are interchangeable and
    cross-checked in the tests.
    """
    n = f.n
    sm = signed_measure(f, mu)
    if family == "codim1":
        if n > CODIM1_CAP:
            raise ValueError(f"codim-1 enumeration capped at width {CODIM1_CAP}")
        if method == "auto":
            method = "direct" if n <= 12 else "fourier"
        best, best_space = -1.0, None
        if include_full:
            best = float(abs(sm.sum()))
            best_space = AffineSubspace.full_space(n)
        total = sm.sum()
        if method == "fourier":
            g = walsh_hadamard(sm) * (1 << n)  # g[a] = sum_x sm[x] (-1)^<a,x>
            for b in (0, 1):
                vals = np.abs((total + (1 - 2 * b) * g) / 2.0)
                vals[0] = -1.0  # a = 0 is the full/empty pair, not codim 1
                j = int(vals.argmax())
                if float(vals[j]) > best + 1e-15:
                    best, best_space = float(vals[j]), AffineSubspace.codim1(n, j, b)
            return best, best_space
        if method != "direct":
            raise ValueError(f"unknown method {method!r}")
        xs = np.arange(1 << n, dtype=np.int64)
        batch = max(1, min(batch, (1 << 22) >> n))  # keep temporaries small
        for start in range(1, 1 << n, batch):
            a_vals = np.arange(start, min(start + batch, 1 << n), dtype=np.int64)
            ands = a_vals[:, None] & xs[None, :]
            par = _parity_table(n)[ands]
            sums1 = (sm[None, :] * par).sum(axis=1)  # mass on <a,x>=1 per a
            for j, a in enumerate(a_vals):
                for b, val in ((1, sums1[j]), (0, total - sums1[j])):
                    v = float(abs(val))
                    if v > best + 1e-15:
                        best, best_space = v, AffineSubspace.codim1(n, int(a), b)
        return best, best_space
    if family == "all":
        per_dim = _coset_cache(n)
        best, best_loc = -1.0, None
        for u in range(n + 1):
            if not include_full and u == n:
                continue
            bases, idx, meta = per_dim[u]
            if idx.shape[0] == 0:
                continue
            vals = np.abs(sm[idx].sum(axis=1))
            j = int(vals.argmax())
            if float(vals[j]) > best + 1e-15:
                best = float(vals[j])
                best_loc = (u, j)
        u, j = best_loc
        bases, idx, meta = per_dim[u]
        b_idx, rep = meta[j]
        return best, _witness_from_coset(n, bases[b_idx], rep)
    raise ValueError(f"unknown family {family!r}")


@lru_cache(maxsize=4)
def _parity_table(n: int) -> np.ndarray:
    xs = np.arange(1 << n, dtype=np.int64)
    par = np.zeros(1 << n, dtype=np.int64)
    v = xs.copy()
    while v.any():
        par ^= v & 1
        v >>= 1
    return par


def sup_fourier(f: BooleanFunction, mu) -> float:
    """L-infinity norm of the coefficient table of the associated function."""
    return float(np.abs(walsh_hadamard(f_mu(f, mu))).max())


def disc_mu(f: BooleanFunction, mu) -> DiscResult:
    """Distributional discrepancy -log2 max bias.

    Exact (with witness) when the width allows full subspace enumeration;
    otherwise the coefficient-norm sandwich is reported as an interval.
    Zero maximum bias yields an infinite sentinel.
    """
    if f.n <= ALL_SUBSPACE_CAP:
        b, wit = max_bias(f, mu, family="all")
        v = math.inf if b <= 0 else -math.log2(b)
        return DiscResult(v, v, True, wit)
    s = sup_fourier(f, mu)
    if s <= 0:
        return DiscResult(math.inf, math.inf, False, None)
    return DiscResult(-math.log2(s), -math.log2(s / 2), False, None)


def tensor_sup_check(fvals: Sequence[float], gvals: Sequence[float]) -> tuple[float, float]:
    """Sup coefficient of the outer product vs. product of sup coefficients.

    The outer product packs the first factor into the low bits.
    """
    fv = np.asarray(fvals, dtype=np.float64)
    gv = np.asarray(gvals, dtype=np.float64)
    prod = np.outer(gv, fv).reshape(-1)  # index = x_g * len(fv) + x_f
    lhs = float(np.abs(walsh_hadamard(prod)).max())
    rhs = float(np.abs(walsh_hadamard(fv)).max() * np.abs(walsh_hadamard(gv)).max())
    return lhs, rhs


def sparsity(f: BooleanFunction, encoding: str = "pm1") -> int:
    """Number of nonzero Fourier coefficients.

    The +-1 encoding transforms (-1)^f; the zero_one flag transforms the raw
    0/1 table instead (the two counts differ only around the constant
    coefficient).
    """
    if encoding == "pm1":
        t = f.signs()
    elif encoding == "zero_one":
        t = np.asarray(f.table, dtype=np.float64)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    return int((np.abs(walsh_hadamard(t)) > _ZERO_TOL).sum())


def certificate_complexity(f: BooleanFunction) -> int:
    """Parity certificate complexity.

    For every input, the smallest codimension of an affine subspace through
    it on which f is constant; the maximum of that over inputs.  Exhaustive
    over the cached coset partition, so capped at small widths.
    """
    if f.n > ALL_SUBSPACE_CAP:
        raise ValueError("width exceeds the certificate enumeration cap")
    labels = np.asarray(f.table, dtype=np.int64)
    per_dim = _coset_cache(f.n)
    best = np.full(1 << f.n, f.n + 1, dtype=np.int64)
    for u in range(f.n, -1, -1):
        _, idx, _ = per_dim[u]
        if idx.shape[0] == 0:
            continue
        vals = labels[idx]
        const = vals.min(axis=1) == vals.max(axis=1)
        if const.any():
            hit = idx[const].reshape(-1)
            np.minimum.at(best, hit, f.n - u)
        if best.max() <= f.n - u:
            break
    return int(best.max())
