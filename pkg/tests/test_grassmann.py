"""Exact algebra identities of the Grassmann kernel."""

import numpy as np
import pytest

from cohstab import kernel
from cohstab.errors import MismatchedGenerators, NotInvertible, UnknownPair
from cohstab.grassmann import (
    GeneratorSet,
    Multivector,
    berezin_pair,
    conjugate,
    exponential,
    grade_involution,
    invert,
    left_derivative,
    multiply,
    random_multivector,
)

TOL = 1e-13


@pytest.fixture
def zeta(gens1):
    return gens1.gen("zeta")


@pytest.fixture
def zeta_star(gens1):
    return gens1.gen("zeta*")


# -- multiplication ----------------------------------------------------------


def test_generator_squares_to_zero(zeta, each_backend):
    assert multiply(zeta, zeta).sup_norm() == 0.0


def test_anticommutation_canonical_order(gens1, zeta, zeta_star, each_backend):
    # zeta* zeta is stored as -zeta zeta*
    prod = multiply(zeta_star, zeta)
    want = Multivector.from_terms(gens1, {0b11: -1.0})
    assert prod == want


def test_distributivity_over_nilpotents(gens1, zeta, zeta_star):
    prod = (1 + zeta) * (1 + zeta_star)
    want = Multivector.from_terms(gens1, {0b00: 1, 0b01: 1, 0b10: 1, 0b11: 1})
    assert prod.isclose(want, 0.0)


def test_mismatched_generators_rejected(gens1, gens2):
    with pytest.raises(MismatchedGenerators):
        multiply(gens1.gen(0), gens2.gen(0))


def test_associativity_exhaustive_monomials(gens2, each_backend):
    dim = gens2.dim
    monomials = [Multivector.from_terms(gens2, {m: 1.0}) for m in range(dim)]
    for a in monomials:
        for b in monomials:
            ab = a * b
            for c in monomials:
                assert ((ab * c) - (a * (b * c))).sup_norm() == 0.0


def test_associativity_random(gens2, rng):
    for _ in range(20):
        x = random_multivector(gens2, rng)
        y = random_multivector(gens2, rng)
        z = random_multivector(gens2, rng)
        assert ((x * y) * z).isclose(x * (y * z), 1e-12)


def test_graded_commutativity(gens2):
    degs = {}
    for mask in range(gens2.dim):
        degs[mask] = bin(mask).count("1")
    for ma in range(gens2.dim):
        for mb in range(gens2.dim):
            a = Multivector.from_terms(gens2, {ma: 1.0})
            b = Multivector.from_terms(gens2, {mb: 1.0})
            sign = (-1.0) ** (degs[ma] * degs[mb])
            assert ((a * b) - sign * (b * a)).sup_norm() == 0.0


def test_backend_equivalence_exact(gens2, rng):
    if len(kernel.available_backends()) < 2:
        pytest.skip("compiled kernel not built")
    for _ in range(50):
        x = random_multivector(gens2, rng)
        y = random_multivector(gens2, rng)
        results = {}
        for name in kernel.available_backends():
            kernel.set_backend(name)
            results[name] = (x * y).coeffs
        kernel.set_backend("compiled")
        a, b = results.values()
        assert np.array_equal(a, b)


# -- conjugation and involutions ----------------------------------------------


def test_conjugate_generator(zeta, zeta_star):
    assert conjugate(zeta) == zeta_star


def test_conjugate_two_monomial(gens1, zeta, zeta_star):
    x = 1j * (zeta * zeta_star)
    assert conjugate(x).isclose(-1j * (zeta * zeta_star), 0.0)


def test_conjugate_is_involution_all_monomials(gens2, rng):
    # brute force over all 16 basis monomials, then a random element
    for mask in range(gens2.dim):
        c = complex(rng.standard_normal(), rng.standard_normal())
        x = Multivector.from_terms(gens2, {mask: c})
        assert conjugate(conjugate(x)).isclose(x, 1e-15)
    x = random_multivector(gens2, rng)
    assert conjugate(conjugate(x)).isclose(x, 1e-14)


def test_conjugate_antihomomorphism(gens2, rng):
    for _ in range(20):
        x = random_multivector(gens2, rng)
        y = random_multivector(gens2, rng)
        assert conjugate(x * y).isclose(conjugate(y) * conjugate(x), 1e-12)


def test_grade_involution(gens1, zeta):
    zz = zeta * gens1.gen("zeta*")
    assert grade_involution(zeta).isclose(-zeta, 0.0)
    assert grade_involution(zz).isclose(zz, 0.0)
    assert grade_involution(1 + zeta).isclose(1 - zeta, 0.0)


# -- exponential and inverse --------------------------------------------------


def test_exponential_of_zero(gens2):
    assert exponential(gens2.zero()).isclose(gens2.one(), 0.0)


def test_exponential_normalization_factor(gens1, zeta, zeta_star):
    x = exponential(-0.5 * (zeta_star * zeta))
    want = 1 - 0.5 * (zeta_star * zeta)
    assert x.isclose(want, 0.0)


def test_exponential_inverse_pairs(gens2, rng):
    for _ in range(10):
        x = random_multivector(gens2, rng).even_part()
        prod = exponential(x) * exponential(-x)
        assert prod.isclose(gens2.one(), 1e-10)


def test_exponential_additive_when_commuting(gens2, rng):
    # even elements are central, so exp is a homomorphism on them
    for _ in range(10):
        x = random_multivector(gens2, rng, scale=0.5).even_part()
        y = random_multivector(gens2, rng, scale=0.5).even_part()
        assert (x * y).isclose(y * x, 1e-13)
        lhs = exponential(x + y)
        rhs = exponential(x) * exponential(y)
        assert lhs.isclose(rhs, 1e-11)


def test_invert_identity(gens1):
    assert invert(gens1.one()).isclose(gens1.one(), 0.0)


def test_invert_normalization(gens1, zeta, zeta_star):
    x = 1 - 0.5 * (zeta_star * zeta)
    assert invert(x).isclose(1 + 0.5 * (zeta_star * zeta), 0.0)


def test_invert_multiplies_back_to_one(gens1, zeta, zeta_star):
    # (zeta + zeta*)^2 = 0, so the inverse has no two-generator term
    x = 2 + zeta + zeta_star
    inv = invert(x)
    assert (x * inv).isclose(gens1.one(), 1e-15)
    want = 0.5 - 0.25 * zeta - 0.25 * zeta_star
    assert inv.isclose(want, 1e-15)


def test_invert_random_roundtrip(gens2, rng):
    for _ in range(10):
        x = random_multivector(gens2, rng) + 3.0
        assert (x * invert(x)).isclose(gens2.one(), 1e-12)


def test_invert_requires_body(zeta):
    with pytest.raises(NotInvertible):
        invert(zeta)


def test_soul_nilpotency(gens2, rng):
    n = gens2.n_generators
    for _ in range(5):
        s = random_multivector(gens2, rng).soul()
        power = gens2.one()
        for _ in range(n + 1):
            power = power * s
        assert power.sup_norm() == 0.0


# -- Berezin integration --------------------------------------------------------


def test_berezin_rules(gens1, zeta, zeta_star):
    assert berezin_pair(zeta * zeta_star, 0).isclose(gens1.one(), 0.0)
    assert berezin_pair(gens1.one(), 0).sup_norm() == 0.0
    assert berezin_pair(zeta, 0).sup_norm() == 0.0
    assert berezin_pair(zeta_star, 0).sup_norm() == 0.0


def test_berezin_reordered_integrand(gens1, zeta, zeta_star):
    assert berezin_pair(1 - zeta_star * zeta, 0).isclose(gens1.one(), 0.0)


def test_berezin_by_name_and_linearity(gens2, rng):
    x = random_multivector(gens2, rng)
    y = random_multivector(gens2, rng)
    lhs = berezin_pair(2.0 * x + y, "eta")
    rhs = 2.0 * berezin_pair(x, 1) + berezin_pair(y, 1)
    assert lhs.isclose(rhs, 1e-13)


def test_berezin_unknown_pair(gens1, zeta):
    with pytest.raises(UnknownPair):
        berezin_pair(zeta, 3)


def test_left_derivative_sign(gens2):
    # d/d(zeta*) of zeta zeta* picks the sign of moving past zeta
    zeta, zeta_star = gens2.gen("zeta"), gens2.gen("zeta*")
    d = left_derivative(zeta * zeta_star, 1)
    assert d.isclose(-zeta, 0.0)


# -- structure -----------------------------------------------------------------


def test_body_soul_split(gens2, rng):
    x = random_multivector(gens2, rng)
    assert x.isclose(x.soul() + x.body, 0.0)
    assert x.isclose(x.even_part() + x.odd_part(), 0.0)


def test_sup_norm_zero_iff_zero(gens2, rng):
    x = random_multivector(gens2, rng)
    assert (x - x).sup_norm() == 0.0
    assert x.sup_norm() > 0.0


def test_terms_view_prunes_zeros(gens1, zeta):
    x = zeta + Multivector.from_terms(gens1, {0b10: 1e-18})
    assert set(x.terms) == {0b01}


def test_generator_cap():
    with pytest.raises(ValueError):
        GeneratorSet.from_pairs(("a", "b", "c", "d", "e"))


def test_immutability(gens1, zeta):
    with pytest.raises(AttributeError):
        zeta.coeffs = None
    with pytest.raises(ValueError):
        zeta.coeffs[0] = 1.0


def test_m_zero_algebra_is_plain_complex():
    g0 = GeneratorSet(())
    x = g0.scalar(2 + 1j)
    y = g0.scalar(3 - 1j)
    assert (x * y).body == (2 + 1j) * (3 - 1j)
    assert conjugate(x).body == (2 - 1j)
