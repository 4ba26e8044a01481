"""Truth tables, transforms, bias maximisation, sparsity, certificates."""

from __future__ import annotations

import math

import numpy as np
import pytest

from pdtlab import boolfun, dist, f2core
from pdtlab.boolfun import AffineSubspace, BooleanFunction


def random_weights(n, rng):
    w = rng.random(1 << n)
    return w / w.sum()


# --- transform -------------------------------------------------------------


def test_walsh_constant_one():
    co = boolfun.walsh_hadamard(np.ones(8))
    assert co[0] == pytest.approx(1.0)
    assert np.abs(co[1:]).max() == 0


def test_walsh_delta_gives_flat_spectrum():
    n = 3
    F = np.zeros(1 << n)
    F[0] = 1 << n
    co = boolfun.walsh_hadamard(F)
    assert np.allclose(co, 1.0)


def test_walsh_parseval_and_roundtrip():
    rng = np.random.default_rng(0)
    F = rng.normal(size=64)
    co = boolfun.walsh_hadamard(F)
    assert (co**2).sum() == pytest.approx(2**-6 * (F**2).sum(), abs=1e-12)
    assert np.abs(boolfun.inverse_walsh(co) - F).max() < 1e-12


def test_walsh_rejects_bad_length():
    with pytest.raises(ValueError):
        boolfun.walsh_hadamard(np.ones(6))


# --- the associated real table ----------------------------------------------


def test_f_mu_xor_uniform():
    f = boolfun.xor_n(2)
    vals = boolfun.f_mu(f, dist.ProductDistribution.uniform(2))
    expected = [(-1) ** (x.bit_count() & 1) for x in range(4)]
    assert np.allclose(vals, expected)


def test_f_mu_constant_zero_is_one():
    f = BooleanFunction(2, (0, 0, 0, 0))
    assert np.allclose(boolfun.f_mu(f, dist.ProductDistribution.uniform(2)), 1.0)


def test_f_mu_and_two():
    f = boolfun.and_n(2)
    vals = boolfun.f_mu(f, dist.ProductDistribution((0.5, 0.5)))
    assert vals[0b11] == pytest.approx(-1.0)
    assert np.allclose(vals[:3], 1.0)


def test_f_mu_validates_weights():
    f = boolfun.xor_n(2)
    with pytest.raises(ValueError):
        boolfun.f_mu(f, np.array([0.5, 0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        boolfun.f_mu(f, np.array([1.5, -0.5, 0.0, 0.0]))


# --- bias -------------------------------------------------------------------


def test_bias_xor_full_space_balanced():
    f = boolfun.xor_n(2)
    uni = dist.ProductDistribution.uniform(2)
    assert boolfun.bias(f, uni, AffineSubspace.full_space(2)) == pytest.approx(0.0)


def test_bias_xor_parity_class():
    f = boolfun.xor_n(2)
    uni = dist.ProductDistribution.uniform(2)
    s = AffineSubspace.codim1(2, 0b11, 0)
    assert boolfun.bias(f, uni, s) == pytest.approx(0.5)


def test_bias_pointer_function_payload_constraint():
    # the subspace pinning the first payload bit has bias Pr[selector hits it]/2
    m = 2
    f = boolfun.fpe(m)
    q = 1 / math.sqrt(m)
    mu = dist.ProductDistribution((q, q, 0.5, 0.5))
    s = AffineSubspace.codim1(2 * m, 1 << m, 1)
    expected = (q + (1 - q) ** m) / 2
    got = boolfun.bias(f, mu, s)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got >= 0.5 / math.sqrt(m)


def test_max_bias_constant_function():
    f = BooleanFunction(2, (1, 1, 1, 1))
    uni = dist.ProductDistribution.uniform(2)
    val, wit = boolfun.max_bias(f, uni, family="codim1")
    assert val == pytest.approx(1.0) and wit.codim == 0
    val, wit = boolfun.max_bias(f, uni, family="all")
    assert val == pytest.approx(1.0) and wit.codim == 0


def test_max_bias_xor2_both_families():
    f = boolfun.xor_n(2)
    uni = dist.ProductDistribution.uniform(2)
    v1, _ = boolfun.max_bias(f, uni, family="codim1")
    v2, _ = boolfun.max_bias(f, uni, family="all")
    assert v1 == pytest.approx(0.5) and v2 == pytest.approx(0.5)


def test_max_bias_witness_attains_value():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        f = boolfun.random_function(n, 0.5, rng)
        w = random_weights(n, rng)
        for family in ("codim1", "all"):
            val, wit = boolfun.max_bias(f, w, family=family)
            assert boolfun.bias(f, w, wit) == pytest.approx(val, abs=1e-12)


def test_max_bias_fourier_method_agrees():
    rng = np.random.default_rng(2)
    for n in (3, 6, 9):
        f = boolfun.random_function(n, 0.5, rng)
        w = random_weights(n, rng)
        b1, _ = boolfun.max_bias(f, w, method="direct", include_full=False)
        b2, _ = boolfun.max_bias(f, w, method="fourier", include_full=False)
        assert b1 == pytest.approx(b2, abs=1e-11)


def test_sandwich_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        f = boolfun.random_function(n, 0.5, rng)
        w = random_weights(n, rng)
        lo, _ = boolfun.max_bias(f, w, family="codim1")
        mid, _ = boolfun.max_bias(f, w, family="all")
        hi = boolfun.sup_fourier(f, w)
        assert lo <= mid + 1e-9
        assert mid <= hi + 1e-9
        assert hi <= 2 * lo + 1e-9


# --- discrepancy ------------------------------------------------------------


def test_disc_xor2_uniform():
    res = boolfun.disc_mu(boolfun.xor_n(2), dist.ProductDistribution.uniform(2))
    assert res.exact and res.value == pytest.approx(1.0)


def test_disc_constant():
    res = boolfun.disc_mu(BooleanFunction(2, (0,) * 4), dist.ProductDistribution.uniform(2))
    assert res.value == pytest.approx(0.0)


def test_disc_xor_power_at_most_one():
    rng = np.random.default_rng(4)
    f = boolfun.xor_n(1)
    for k in (2, 3):
        fk = boolfun.xor_power(f, k)
        w = random_weights(1, rng)
        wk = w
        for _ in range(k - 1):
            wk = np.kron(w, wk)
        res = boolfun.disc_mu(fk, wk)
        assert res.value <= 1.0 + 1e-9


def test_disc_interval_beyond_cap():
    f = boolfun.random_function(7, 0.5, np.random.default_rng(5))
    res = boolfun.disc_mu(f, dist.ProductDistribution.uniform(7))
    assert not res.exact and res.lo <= res.hi <= res.lo + 1.0 + 1e-9
    with pytest.raises(ValueError):
        res.value


# --- tensor product ----------------------------------------------------------


def test_tensor_constant_tables():
    lhs, rhs = boolfun.tensor_sup_check(np.ones(4), np.ones(4))
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0)


def test_tensor_single_coefficient():
    f = boolfun.xor_n(2)
    F = boolfun.f_mu(f, dist.ProductDistribution.uniform(2))
    lhs, rhs = boolfun.tensor_sup_check(F, F)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0)


def test_tensor_random_pairs():
    rng = np.random.default_rng(6)
    for _ in range(30):
        F = rng.normal(size=16)
        G = rng.normal(size=16)
        lhs, rhs = boolfun.tensor_sup_check(F, G)
        assert abs(lhs - rhs) < 1e-9


# --- sparsity and certificates ------------------------------------------------


def test_sparsity_families():
    assert boolfun.sparsity(boolfun.xor_n(3)) == 1
    assert boolfun.sparsity(boolfun.and_n(2)) == 4
    assert boolfun.sparsity(BooleanFunction(2, (1, 1, 1, 1))) == 1
    assert boolfun.sparsity(boolfun.xor_n(3), encoding="zero_one") == 2


def certificate_oracle(f):
    """Independent brute force straight from the definition."""
    n = f.n
    vectors = list(range(1, 1 << n))
    best_for = [n + 1] * (1 << n)
    import itertools

    for d in range(n + 1):
        for combo in itertools.combinations(vectors, d):
            if f2core.rank(list(combo)) != d:
                continue
            for rhs_bits in range(1 << d):
                rows = [(a, (rhs_bits >> j) & 1) for j, a in enumerate(combo)]
                members = f2core.solve_affine(rows, n)
                vals = {f.table[x] for x in members}
                if len(vals) == 1:
                    for x in members:
                        best_for[x] = min(best_for[x], d)
    return max(best_for)


def test_certificate_examples():
    assert boolfun.certificate_complexity(BooleanFunction(2, (1, 1, 1, 1))) == 0
    assert boolfun.certificate_complexity(boolfun.xor_n(3)) == 1
    assert boolfun.certificate_complexity(boolfun.and_n(2)) == 2


def test_certificate_against_definition():
    rng = np.random.default_rng(7)
    for _ in range(15):
        f = boolfun.random_function(3, 0.5, rng)
        assert boolfun.certificate_complexity(f) == certificate_oracle(f)


def test_certificate_cap():
    with pytest.raises(ValueError):
        boolfun.certificate_complexity(boolfun.xor_n(8))


# --- combinators and corpus format ---------------------------------------------


def test_xor_power_of_single_bit():
    assert boolfun.xor_power(boolfun.xor_n(1), 3).table == boolfun.xor_n(3).table


def test_direct_sum_single_copy():
    f = boolfun.maj_n(3)
    g = boolfun.direct_sum(f, 1)
    assert g.table == f.table and g.out_bits == 1


def test_direct_sum_packs_copies_low_bits_first():
    f = BooleanFunction(1, (0, 1))
    g = boolfun.direct_sum(f, 2)
    assert g.out_bits == 2
    assert g.table[0b01] == 0b01  # copy 0 set
    assert g.table[0b10] == 0b10  # copy 1 set


def test_pointer_function_zero_selector_reads_first_payload_bit():
    m = 3
    f = boolfun.fpe(m)
    for y in range(1 << m):
        assert f.table[y << m] == y & 1


def test_nor_and_maj():
    assert boolfun.nor_n(3).table[0] == 1 and sum(boolfun.nor_n(3).table) == 1
    maj = boolfun.maj_n(3)
    assert maj.table[0b011] == 1 and maj.table[0b001] == 0


def test_function_spec_roundtrip():
    f = boolfun.maj_n(3)
    again = boolfun.function_from_spec(f.to_spec())
    assert again.table == f.table
    r1 = boolfun.function_from_spec({"family": "RANDOM", "n": 4, "seed": 9, "p": 0.3})
    r2 = boolfun.function_from_spec({"family": "RANDOM", "n": 4, "seed": 9, "p": 0.3})
    assert r1.table == r2.table
    assert boolfun.function_from_spec({"family": "FPE", "n": 2}).n == 4


def test_xor_shift_conjugation():
    f = boolfun.maj_n(3)
    g = f.xor_shift(0b101)
    for x in range(8):
        assert g.table[x] == f.table[x ^ 0b101]
