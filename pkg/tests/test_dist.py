"""Product distributions, restrictions, and the two-step sampling picture."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from pdtlab import dist, f2core, pdt
from pdtlab.dist import PartialFixing, ProductDistribution


def test_partial_fixing_strings():
    rho = PartialFixing.from_string("0*?")
    assert rho.zero_mask == 0b001 and rho.star_mask == 0b010 and rho.unknown_mask == 0b100
    assert str(rho) == "0*?"
    assert not rho.is_rho
    assert PartialFixing.rho(3, 0b110).is_rho


def test_partial_fixing_rejects_overlap():
    with pytest.raises(ValueError):
        PartialFixing(2, 0b01, 0b01)


def test_zero_bias_normalize_identity():
    mu = ProductDistribution((0.3, 0.5))
    _, mu2, mask = dist.zero_bias_normalize(None, mu)
    assert mask == 0 and mu2.p == mu.p


def test_zero_bias_normalize_flip():
    mu = ProductDistribution((0.9, 0.1))
    _, mu2, mask = dist.zero_bias_normalize(None, mu)
    assert mask == 0b01
    assert mu2.p[0] == pytest.approx(0.1) and mu2.p[1] == pytest.approx(0.1)


def test_zero_bias_normalize_involution():
    from pdtlab import boolfun

    rng = np.random.default_rng(0)
    f = boolfun.random_function(3, 0.5, rng)
    mu = ProductDistribution((0.8, 0.2, 0.7))
    f1, mu1, mask = dist.zero_bias_normalize(f, mu)
    f2, mu2, mask2 = dist.zero_bias_normalize(f1, mu1)
    assert mask2 == 0 and f2.table == f1.table
    assert f1.xor_shift(mask).table == f.table
    assert tuple(round(p, 12) for p in ProductDistribution(
        tuple(1 - p if (mask >> i) & 1 else p for i, p in enumerate(mu1.p))
    ).p) == tuple(round(p, 12) for p in mu.p)


def conjugate_tree(tree: pdt.ParityTree, mask: int) -> pdt.ParityTree:
    """Tree computing x -> T(x xor mask); children swap where the query hits."""

    def go(v):
        if isinstance(v, pdt.Leaf):
            return v
        c0, c1 = go(v.child0), go(v.child1)
        if f2core.dot(v.query, mask):
            c0, c1 = c1, c0
        return pdt.Node(v.query, c0, c1)

    return pdt.ParityTree(tree.width, go(tree.root), tree.out_bits)


def test_normalisation_preserves_error_and_cost():
    from pdtlab import boolfun

    rng = np.random.default_rng(1)
    for _ in range(20):
        f = boolfun.random_function(3, 0.5, rng)
        mu = ProductDistribution(tuple(float(v) for v in rng.uniform(0, 1, size=3)))
        tree = pdt.random_tree(3, rng)
        f1, mu1, mask = dist.zero_bias_normalize(f, mu)
        t1 = conjugate_tree(tree, mask)
        for x in range(8):
            assert t1.evaluate(x) == tree.evaluate(x ^ mask)
        assert float(pdt.error(t1, f1, mu1)) == pytest.approx(float(pdt.error(tree, f, mu)))
        assert float(pdt.avg_queries(t1, mu1)) == pytest.approx(float(pdt.avg_queries(tree, mu)))


def test_sample_rho_deterministic_zero_coordinate():
    mu = ProductDistribution((0.0, 0.25))
    rng = np.random.default_rng(2)
    for _ in range(50):
        rho = dist.sample_rho(mu, rng)
        assert (rho.star_mask & 1) == 0


def test_fixing_probability_one_eighth_coordinate():
    mu = ProductDistribution((Fraction(1, 8),))
    fix = dist.random_fixing(mu)
    assert fix.star_p[0] == Fraction(1, 4)  # zero with probability 3/4
    rho0 = PartialFixing.rho(1, 0)
    assert fix.pmf(rho0) == Fraction(3, 4)


def test_sample_rho_requires_zero_bias():
    with pytest.raises(ValueError):
        dist.random_fixing(ProductDistribution((0.75,)))


def test_two_step_equivalence_exact():
    # restrict then complete uniformly == sample directly
    for p in [(Fraction(1, 4), Fraction(1, 2), Fraction(1, 8)), (Fraction(0), Fraction(3, 8))]:
        mu = ProductDistribution(p)
        n = mu.n
        via = {x: Fraction(0) for x in range(1 << n)}
        for rho, w in dist.random_fixing(mu).enumerate():
            uni = dist.uniform_given(rho)
            for x in range(1 << n):
                via[x] += w * uni.pmf(x)
        for x in range(1 << n):
            assert via[x] == mu.pmf(x)


def test_two_step_equivalence_monte_carlo():
    rng = np.random.default_rng(3)
    mu = ProductDistribution((0.25, 0.5, 0.125, 0.375))
    samples = 100_000
    counts = np.zeros(16)
    for _ in range(samples):
        rho = dist.sample_rho(mu, rng)
        x = dist.uniform_given(rho).sample(rng)
        counts[x] += 1
    tv = 0.5 * np.abs(counts / samples - mu.pmf_table()).sum()
    assert tv <= 0.01


def test_two_step_equivalence_monte_carlo_wide_skewed():
    # at width 10 the TV budget needs a concentrated distribution
    rng = np.random.default_rng(4)
    mu = ProductDistribution((0.05,) * 10)
    samples = 100_000
    counts = {}
    for _ in range(samples):
        rho = dist.sample_rho(mu, rng)
        x = dist.uniform_given(rho).sample(rng)
        counts[x] = counts.get(x, 0) + 1
    table = mu.pmf_table()
    tv = 0.5 * sum(abs(counts.get(x, 0) / samples - table[x]) for x in range(1 << 10))
    assert tv <= 0.01


def test_rho_given_x_forced_star_and_formula():
    mu = ProductDistribution((Fraction(1, 8), Fraction(1, 4)))
    fix = dist.random_fixing_given_x(mu, 0b01)
    assert fix.star_p[0] == Fraction(1)  # x bit set: surely free
    assert fix.star_p[1] == Fraction(1, 3)  # delta/(2-delta) with delta=1/2
    fix0 = dist.random_fixing_given_x(mu, 0)
    assert fix0.star_p[0] == Fraction(1, 7)


def test_rho_given_x_outside_support():
    mu = ProductDistribution((Fraction(0), Fraction(1, 4)))
    with pytest.raises(ValueError):
        dist.random_fixing_given_x(mu, 0b01)


def test_joint_law_equality_exact():
    # (x ~ mu, rho ~ given x)  ==  (rho ~ restriction, x ~ uniform completion)
    mu = ProductDistribution((Fraction(1, 4), Fraction(1, 2), Fraction(1, 8), Fraction(3, 8)))
    n = mu.n
    lhs = {}
    for x in range(1 << n):
        wx = mu.pmf(x)
        if wx == 0:
            continue
        for rho, wr in dist.random_fixing_given_x(mu, x).enumerate():
            lhs[(x, rho.star_mask)] = lhs.get((x, rho.star_mask), Fraction(0)) + wx * wr
    rhs = {}
    for rho, wr in dist.random_fixing(mu).enumerate():
        uni = dist.uniform_given(rho)
        for x in range(1 << n):
            wx = uni.pmf(x)
            if wx:
                rhs[(x, rho.star_mask)] = rhs.get((x, rho.star_mask), Fraction(0)) + wr * wx
    assert lhs == {k: v for k, v in rhs.items() if v}


def test_star_marginal_consistency():
    mu = ProductDistribution((Fraction(1, 4), Fraction(1, 2), Fraction(1, 8)))
    n = mu.n
    marg = [Fraction(0)] * n
    for x in range(1 << n):
        wx = mu.pmf(x)
        if wx == 0:
            continue
        for rho, wr in dist.random_fixing_given_x(mu, x).enumerate():
            for i in range(n):
                if (rho.star_mask >> i) & 1:
                    marg[i] += wx * wr
    for i in range(n):
        assert marg[i] == mu.delta(i)


def test_uniform_given_and_condition():
    rho = PartialFixing.rho(3, 0b110)
    uni = dist.uniform_given(rho)
    assert uni.pmf(0b000) == Fraction(1, 4) and uni.pmf(0b001) == 0
    full = PartialFixing.rho(3, 0b111)
    assert dist.uniform_given(full).pmf(0b101) == Fraction(1, 8)
    point = PartialFixing.rho(3, 0)
    assert dist.uniform_given(point).pmf(0) == 1
    mu = ProductDistribution((Fraction(1, 4), Fraction(1, 2), Fraction(1, 8)))
    cond = dist.condition(mu, rho)
    assert cond.p[0] == 0 and cond.p[1:] == mu.p[1:]
    with pytest.raises(ValueError):
        dist.condition(ProductDistribution((Fraction(1),)), PartialFixing.rho(1, 0))


def test_mass_of_codim1_space():
    from pdtlab.boolfun import AffineSubspace

    mu = ProductDistribution.uniform(3)
    s = AffineSubspace.codim1(3, 0b101, 1)
    assert dist.mass(mu, s.members()) == Fraction(1, 2)


def test_lambda_values():
    assert dist.lambda_of(ProductDistribution.uniform(4)) == 1
    assert dist.lambda_of(ProductDistribution((0.25, 0.25))) == pytest.approx(0.5)
    assert dist.lambda_of(ProductDistribution((0.0, 0.5))) == 0
    assert dist.is_lambda_bounded(ProductDistribution((0.25, 0.5)), 0.5)
    assert not dist.is_lambda_bounded(ProductDistribution((0.1, 0.5)), 0.5)


def test_distribution_specs():
    mu = dist.distribution_from_spec({"uniform": 3})
    assert mu.p == (Fraction(1, 2),) * 3
    mu = dist.distribution_from_spec({"n": 2, "p": [0.25, 0.5]})
    assert mu.p == (0.25, 0.5)
    mu = dist.distribution_from_spec({"fpe_mu": 4})
    assert mu.n == 8 and mu.p[0] == pytest.approx(0.5) and mu.p[4] == 0.5
    rt = dist.distribution_from_spec(dist.distribution_to_spec(mu))
    assert rt.n == mu.n
    with pytest.raises(ValueError):
        dist.distribution_from_spec({"n": 3, "p": [0.5]})
