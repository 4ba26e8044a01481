"""Product distributions, zero-bias normalisation and random partial fixings.

Probabilities are ordinary floats by default; passing `fractions.Fraction`
entries switches every derived quantity to exact rational arithmetic, which
the small-instance oracle comparisons rely on.  General (non-product) weight
tables live in `boolfun`; this module is product-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

ZERO, STAR, UNKNOWN = "0", "*", "?"

_TOL = 1e-12


@dataclass(frozen=True)
class PartialFixing:
    """Element of {0,*}^n, or {0,*,?}^n when used as bookkeeping state.

    Coordinates are bit positions; a plain restriction (rho) has an empty
    unknown set while bookkeeping states refine toward one by resolving '?'
    entries only.
    """

    n: int
    star_mask: int
    zero_mask: int = 0

    def __post_init__(self) -> None:
        full = (1 << self.n) - 1
        if self.star_mask & ~full or self.zero_mask & ~full:
            raise ValueError("mask wider than n")
        if self.star_mask & self.zero_mask:
            raise ValueError("a coordinate cannot be both fixed and free")

    @classmethod
    def rho(cls, n: int, star_mask: int) -> "PartialFixing":
        full = (1 << n) - 1
        return cls(n, star_mask & full, full & ~star_mask)

    @classmethod
    def from_string(cls, s: str) -> "PartialFixing":
        stars = zeros = 0
        for i, ch in enumerate(s):
            if ch == STAR:
                stars |= 1 << i
            elif ch == ZERO:
                zeros |= 1 << i
            elif ch != UNKNOWN:
                raise ValueError(f"bad symbol {ch!r}")
        return cls(len(s), stars, zeros)

    @property
    def unknown_mask(self) -> int:
        return ((1 << self.n) - 1) ^ self.star_mask ^ self.zero_mask

    @property
    def is_rho(self) -> bool:
        return self.unknown_mask == 0

    def entries(self) -> str:
        out = []
        for i in range(self.n):
            if (self.star_mask >> i) & 1:
                out.append(STAR)
            elif (self.zero_mask >> i) & 1:
                out.append(ZERO)
            else:
                out.append(UNKNOWN)
        return "".join(out)

    def consistent_with(self, x: int) -> bool:
        """True iff every zero-fixed coordinate of x is 0."""
        return x & self.zero_mask == 0

    def __str__(self) -> str:
        return self.entries()


@dataclass(frozen=True)
class ProductDistribution:
    """Product of independent Bernoulli coordinates; p[i] = Pr[x_i = 1]."""

    p: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", tuple(self.p))
        for v in self.p:
            if not 0 <= v <= 1:
                raise ValueError(f"probability {v} outside [0,1]")

    @classmethod
    def uniform(cls, n: int) -> "ProductDistribution":
        return cls((Fraction(1, 2),) * n)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.p)

    def one(self):
        return Fraction(1) if self.exact else 1.0

    def delta(self, i: int):
        """2 * Pr[x_i = 1]; meaningful once the distribution is 0-biased."""
        return 2 * self.p[i]

    def pmf(self, x: int):
        w = self.one()
        for i, pi in enumerate(self.p):
            w *= pi if (x >> i) & 1 else 1 - pi
        return w

    def pmf_table(self) -> np.ndarray:
        t = np.array([1.0])
        for pi in self.p:
            pi = float(pi)
            t = np.concatenate([t * (1.0 - pi), t * pi])
        return t

    def sample(self, rng: np.random.Generator) -> int:
        x = 0
        u = rng.random(self.n)
        for i, pi in enumerate(self.p):
            if u[i] < float(pi):
                x |= 1 << i
        return x

    @property
    def is_zero_biased(self) -> bool:
        half = Fraction(1, 2) if self.exact else 0.5 + _TOL
        return all(v <= half for v in self.p)

    def support_mask(self) -> int:
        """Mask of coordinates that can be 1."""
        m = 0
        for i, pi in enumerate(self.p):
            if pi > 0:
                m |= 1 << i
        return m


def zero_bias_normalize(f, mu: ProductDistribution):
    """Flip coordinates so every one favours 0; returns (f', mu', flip mask).

    f may be None when only the distribution needs normalising.  Applying the
    returned mask twice recovers the original pair.
    """
    mask = 0
    for i, pi in enumerate(mu.p):
        if 2 * pi > 1:  # exact for Fraction and float alike
            mask |= 1 << i
    new_p = tuple(1 - pi if (mask >> i) & 1 else pi for i, pi in enumerate(mu.p))
    mu2 = ProductDistribution(new_p)
    if f is None:
        return None, mu2, mask
    f2 = f.xor_shift(mask)
    return f2, mu2, mask


@dataclass(frozen=True)
class FixingDistribution:
    """Independent per-coordinate star probabilities over {0,*}^n."""

    star_p: tuple

    @property
    def n(self) -> int:
        return len(self.star_p)

    def sample(self, rng: np.random.Generator) -> PartialFixing:
        stars = 0
        u = rng.random(self.n)
        for i, q in enumerate(self.star_p):
            if u[i] < float(q):
                stars |= 1 << i
        return PartialFixing.rho(self.n, stars)

    def pmf(self, rho: PartialFixing):
        if rho.n != self.n or not rho.is_rho:
            raise ValueError("need a full restriction of matching arity")
        w = Fraction(1) if all(isinstance(q, Fraction) for q in self.star_p) else 1.0
        for i, q in enumerate(self.star_p):
            w *= q if (rho.star_mask >> i) & 1 else 1 - q
        return w

    def enumerate(self) -> Iterable[tuple[PartialFixing, object]]:
        """All restrictions with nonzero probability, with their weights."""
        n = self.n
        forced_star = 0
        forced_zero = 0
        free = []
        for i, q in enumerate(self.star_p):
            if q == 1:
                forced_star |= 1 << i
            elif q == 0:
                forced_zero |= 1 << i
            else:
                free.append(i)
        one = Fraction(1) if all(isinstance(q, Fraction) for q in self.star_p) else 1.0
        for sel in range(1 << len(free)):
            stars = forced_star
            w = one
            for j, i in enumerate(free):
                if (sel >> j) & 1:
                    stars |= 1 << i
                    w *= self.star_p[i]
                else:
                    w *= 1 - self.star_p[i]
            yield PartialFixing.rho(n, stars), w


def random_fixing(mu: ProductDistribution) -> FixingDistribution:
    """Coordinate-wise restriction: star with probability 2*Pr[x_i=1]."""
    if not mu.is_zero_biased:
        raise ValueError("distribution must be 0-biased")
    return FixingDistribution(tuple(mu.delta(i) for i in range(mu.n)))


def random_fixing_given_x(mu: ProductDistribution, x: int) -> FixingDistribution:
    """Conditional restriction law given the realised input x.

    A coordinate with x_i = 1 is surely free; with x_i = 0 it is free with
    probability delta_i / (2 - delta_i).  Undefined outside the support.
    """
    if not mu.is_zero_biased:
        raise ValueError("distribution must be 0-biased")
    if x & ~mu.support_mask():
        raise ValueError("x outside the support of mu")
    qs = []
    for i in range(mu.n):
        if (x >> i) & 1:
            qs.append(Fraction(1) if mu.exact else 1.0)
        else:
            d = mu.delta(i)
            qs.append(d / (2 - d))
    return FixingDistribution(tuple(qs))


def sample_rho(mu: ProductDistribution, rng: np.random.Generator) -> PartialFixing:
    return random_fixing(mu).sample(rng)


def sample_rho_given_x(mu: ProductDistribution, x: int, rng: np.random.Generator) -> PartialFixing:
    return random_fixing_given_x(mu, x).sample(rng)


def uniform_given(rho: PartialFixing) -> ProductDistribution:
    """Uniform over the free coordinates of rho, zeros elsewhere."""
    if not rho.is_rho:
        raise ValueError("bookkeeping states cannot be sampled from")
    half = Fraction(1, 2)
    return ProductDistribution(
        tuple(half if (rho.star_mask >> i) & 1 else Fraction(0) for i in range(rho.n))
    )


def condition(mu: ProductDistribution, rho: PartialFixing) -> ProductDistribution:
    """mu conditioned on the cube of rho (zero-fixed coordinates forced to 0)."""
    for i in range(mu.n):
        if (rho.zero_mask >> i) & 1 and mu.p[i] == 1:
            raise ValueError("conditioning on a zero-mass event")
    zero = Fraction(0) if mu.exact else 0.0
    return ProductDistribution(
        tuple(zero if (rho.zero_mask >> i) & 1 else mu.p[i] for i in range(mu.n))
    )


def mass(mu: ProductDistribution, members: Iterable[int]):
    """Total mu-mass of an explicit set of inputs (affine spaces enumerate first)."""
    total = mu.one() * 0
    for x in members:
        total += mu.pmf(x)
    return total


def lambda_of(mu: ProductDistribution):
    """Largest lambda with every Pr[x_i=1] in [lambda/2, 1-lambda/2]."""
    if mu.n == 0:
        return mu.one()
    return min(2 * min(pi, 1 - pi) for pi in mu.p)


def is_lambda_bounded(mu: ProductDistribution, lam) -> bool:
    return lambda_of(mu) >= lam


def distribution_from_spec(spec: dict) -> ProductDistribution:
    """Parse the JSON distribution format.

    Accepts {"n": int, "p": [...]}, {"uniform": n}, or {"fpe_mu": m} where m
    is the per-half arity of the pointer-evaluation family (total width 2m,
    selector half Ber(1/sqrt(m)), payload half uniform).
    """
    if "uniform" in spec:
        return ProductDistribution.uniform(int(spec["uniform"]))
    if "fpe_mu" in spec:
        m = int(spec["fpe_mu"])
        q = 1.0 / float(np.sqrt(m))
        return ProductDistribution(tuple([q] * m + [0.5] * m))
    if "p" in spec:
        p = tuple(float(v) for v in spec["p"])
        if "n" in spec and int(spec["n"]) != len(p):
            raise ValueError("n does not match the length of p")
        return ProductDistribution(p)
    raise ValueError(f"unrecognised distribution spec: {spec!r}")


def distribution_to_spec(mu: ProductDistribution) -> dict:
    return {"n": mu.n, "p": [float(v) for v in mu.p]}
