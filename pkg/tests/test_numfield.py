import math
import random
from fractions import Fraction

import pytest

from primcensus import presets
from primcensus.errors import (DiscriminantMismatch, ReducedPolynomial,
                               SignatureMismatch, UnitLatticeMismatch,
                               ZeroVector)
from primcensus.intervals import RItv
from primcensus.numfield import (IdealModule, basis_discriminant,
                                 coordinate_ideal, load_field)


def test_load_rational_field(field_q):
    assert field_q.d == 1
    assert field_q.invariants.h == 1
    assert field_q.invariants.w == 2


def test_load_gaussian_field(field_qi):
    # discriminant of basis {1, i} computed by hand: det Tr = det [[2,0],[0,-2]] = -4
    assert basis_discriminant(field_qi) == -4
    assert field_qi.r == 0 and field_qi.s == 1


def test_wrong_discriminant_rejected():
    cfg = presets.sqrt2_field()
    cfg["invariants"]["disc"] = 4  # true discriminant is 8
    with pytest.raises(DiscriminantMismatch):
        load_field(cfg)


def test_wrong_signature_rejected():
    cfg = presets.sqrt2_field()
    cfg["signature"] = [0, 1]
    with pytest.raises(SignatureMismatch):
        load_field(cfg)


def test_reducible_polynomial_rejected():
    cfg = presets.sqrt2_field()
    cfg["min_poly"] = [1, 0, -4]  # x^2 - 4 = (x-2)(x+2)
    with pytest.raises(ReducedPolynomial):
        load_field(cfg)


def test_bad_unit_rejected():
    cfg = presets.sqrt2_field()
    cfg["fundamental_units"] = [[0, 1]]  # sqrt2 has norm -2
    with pytest.raises(UnitLatticeMismatch):
        load_field(cfg)


def test_embed_identity(field_qi):
    vals = field_qi.embed(field_qi.one)
    assert vals[0].re == 1 and vals[0].im == 0 and vals[0].rad == 0


def test_embed_sqrt2(field_sqrt2):
    target = Fraction(1, 10 ** 30)
    a, b = field_sqrt2.embed(field_sqrt2.from_coords([0, 1]), target)
    assert a.rad <= target and b.rad <= target
    assert abs(float(a.mid) + math.sqrt(2)) < 1e-12
    assert abs(float(b.mid) - math.sqrt(2)) < 1e-12


def test_embed_i(field_qi):
    (z,) = field_qi.embed(field_qi.from_coords([0, 1]))
    assert abs(float(z.re)) < 1e-25 and abs(float(z.im) - 1) < 1e-25


def test_embedding_radii_shrink(field_sqrt2):
    alpha = field_sqrt2.from_coords([3, 1])
    coarse = field_sqrt2.embed(alpha, Fraction(1, 10 ** 6))
    fine = field_sqrt2.embed(alpha, Fraction(1, 10 ** 25))
    assert all(f.rad <= c.rad for c, f in zip(coarse, fine))


def test_norm_matches_embedding_product(field_biquad):
    rng = random.Random(11)
    for _ in range(10):
        alpha = field_biquad.from_coords([rng.randint(-4, 4) for _ in range(4)])
        if alpha.is_zero():
            continue
        prod = 1.0
        for v, dv in zip(field_biquad.embed_floats(alpha), field_biquad.local_degrees()):
            prod *= abs(v) ** dv
        assert abs(prod - abs(float(alpha.norm()))) <= 1e-8 * max(1.0, prod)


def test_coordinate_ideal_rational(field_q):
    three = field_q.from_rational(3)
    four = field_q.from_rational(4)
    assert coordinate_ideal(field_q, [three, four]).norm() == 1
    two = field_q.from_rational(2)
    assert coordinate_ideal(field_q, [two, field_q.from_rational(4)]).norm() == 2


def test_coordinate_ideal_gaussian(field_qi):
    # HNF of the Z-module spanned by (1+i), (1+i)i, 2, 2i is [[1,1],[0,2]]
    one_plus_i = field_qi.from_coords([1, 1])
    ideal = coordinate_ideal(field_qi, [one_plus_i, field_qi.from_rational(2)])
    assert ideal.norm() == 2
    assert ideal == IdealModule.from_generators(field_qi, [one_plus_i])


def test_coordinate_ideal_zero_vector(field_q):
    with pytest.raises(ZeroVector):
        coordinate_ideal(field_q, [field_q.from_rational(0)])


def test_coordinate_ideal_scaling(field_qi):
    # N(c * vec ideal) = |N(c)| * N(vec ideal)
    rng = random.Random(5)
    for _ in range(8):
        vec = [field_qi.from_coords([rng.randint(-3, 3), rng.randint(-3, 3)])
               for _ in range(2)]
        if all(v.is_zero() for v in vec):
            continue
        c = field_qi.from_coords([rng.randint(-3, 3), rng.randint(-3, 3)])
        if c.is_zero():
            continue
        lhs = coordinate_ideal(field_qi, [c * v for v in vec]).norm()
        rhs = abs(c.norm()) * coordinate_ideal(field_qi, vec).norm()
        assert lhs == rhs


def test_ideal_product_and_inverse(field_sqrt2):
    sqrt2 = field_sqrt2.from_coords([0, 1])
    p = IdealModule.from_generators(field_sqrt2, [sqrt2])
    assert p.norm() == 2
    inv = p.inverse()
    assert inv.norm() == Fraction(1, 2)
    assert p.mul(inv) == IdealModule.unit_ideal(field_sqrt2)


def test_ideal_valuation(field_sqrt2):
    sqrt2 = field_sqrt2.from_coords([0, 1])
    p = IdealModule.from_generators(field_sqrt2, [sqrt2])
    two = IdealModule.from_generators(field_sqrt2, [field_sqrt2.from_rational(2)])
    assert two.valuation(p) == 2
    assert p.inverse().valuation(p) == -1


def test_degree_over_examples(field_qi, field_biquad):
    i = field_qi.from_coords([0, 1])
    assert field_qi.degree_over("Q", [i]) == 2
    assert field_qi.degree_over("Q", [field_qi.from_rational(2)]) == 1
    sqrt2 = field_biquad.from_coords([0, 1, 0, 0])
    assert field_biquad.degree_over("Q", [sqrt2]) == 2
    theta = field_biquad.from_coords([0, 1, 1, 0])
    assert field_biquad.degree_over("Q", [theta]) == 4


def test_degree_over_permutation_invariance(field_biquad):
    sqrt2 = field_biquad.from_coords([0, 1, 0, 0])
    sqrt3 = field_biquad.from_coords([0, 0, 1, 0])
    assert (field_biquad.degree_over("Q", [sqrt2, sqrt3])
            == field_biquad.degree_over("Q", [sqrt3, sqrt2]) == 4)


def test_quadratic_conjugate(field_sqrt2):
    alpha = field_sqrt2.from_coords([3, 2])  # 3 + 2 sqrt2
    conj = alpha.conjugate()
    assert conj.coords == (Fraction(3), Fraction(-2))
    assert (alpha * conj).coords == (Fraction(1), Fraction(0))  # norm 1 element


def test_element_inverse(field_biquad):
    rng = random.Random(3)
    for _ in range(6):
        alpha = field_biquad.from_coords([rng.randint(-3, 3) for _ in range(4)])
        if alpha.is_zero():
            continue
        assert alpha * alpha.inverse() == field_biquad.one
