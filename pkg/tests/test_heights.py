import math
import random
from fractions import Fraction

import numpy as np
import pytest

from primcensus import presets
from primcensus.counting import verify_lipschitz
from primcensus.errors import NotANorm, UnsupportedSpec, ZeroVector
from primcensus.heights import (build_als, norm_ball_charts, weil_height,
                                weil_height_power)
from primcensus.numfield import coordinate_ideal, load_field


def test_weil_height_unit_coordinate(field_q):
    assert weil_height(field_q, [field_q.from_rational(1),
                                 field_q.from_rational(0)]) == 1.0


def test_weil_height_coprime(field_q):
    # definition oracle: coprime pair, finite part 1, max at infinity = 4
    h = weil_height(field_q, [field_q.from_rational(3), field_q.from_rational(4)])
    assert h == 4.0


def test_weil_height_gaussian_unit(field_qi):
    i = field_qi.from_coords([0, 1])
    assert abs(weil_height(field_qi, [field_qi.one, i]) - 1.0) < 1e-12


def test_weil_height_scale_invariance(field_qi):
    rng = random.Random(3)
    for _ in range(100):
        vec = [field_qi.from_coords([rng.randint(-5, 5), rng.randint(-5, 5)])
               for _ in range(2)]
        if all(v.is_zero() for v in vec):
            continue
        c = field_qi.from_coords([rng.randint(-4, 4), rng.randint(-4, 4)])
        if c.is_zero():
            continue
        h1 = weil_height(field_qi, vec)
        h2 = weil_height(field_qi, [c * v for v in vec])
        assert abs(h1 - h2) < 1e-9 * max(1.0, h1)


def test_weil_height_zero_vector(field_q):
    with pytest.raises(ZeroVector):
        weil_height(field_q, [field_q.from_rational(0)])


def test_standard_constants_gaussian(field_qi):
    als = build_als(field_qi, 1, "standard")
    assert als.C_fin == 1.0 and float(als.C_inf) == 1.0 and als.C == 1.0
    assert als.M_N == 2
    assert abs(als.L_N - 2 * math.pi * math.sqrt(3)) < 1e-12
    a_n = als.a_constant()
    expected = 2 ** 2 * (1.0 * (als.L_N + 1)) ** 3
    assert abs(a_n - expected) < 1e-9


def test_standard_reduces_to_weil(field_q):
    als = build_als(field_q, 1, "standard")
    h, _, _ = als.height([field_q.from_rational(3), field_q.from_rational(4)])
    assert h == 4.0


def test_linear_section_constants(field_q):
    als = build_als(field_q, 2, ("linear_section", [2, 3, 0], 5))
    assert als.C_fin_pow_d == 5
    assert len(als.finite_exceptions) == 1
    exc = als.finite_exceptions[0]
    assert exc.c_v == Fraction(1, 5) and exc.place.Np == 5


def test_linear_section_height(field_q):
    als = build_als(field_q, 2, ("linear_section", [2, 3, 0], 5))
    vec = [field_q.from_rational(1)] * 3
    h, h_inf, h_fin = als.height(vec)
    assert abs(h - 1.0) < 1e-12


def test_linear_section_height_nontrivial(field_q):
    # (1, 1): ell = 2+3 = 5, both corrections trivial; (1, 4): ell = 14, so
    # the 5-part of N_v is 5^{-(-1)} ... direct evaluation oracle
    als = build_als(field_q, 1, ("linear_section", [2, 3], 5))
    one = field_q.from_rational(1)
    four = field_q.from_rational(4)
    # max(|1|_5, |4|_5, |14/5|_5) = 5 at p=5, so H_N = 4 * 5^(1/1) ... d=1
    h, _, h_fin = als.height([one, four])
    assert abs(h_fin - 5.0) < 1e-12
    assert abs(h - 20.0) < 1e-12


def test_mahler_height_examples(field_q):
    als2 = build_als(field_q, 2, "mahler")
    vec = [field_q.from_rational(1), field_q.from_rational(0),
           field_q.from_rational(-1)]
    assert abs(als2.height(vec)[0] - 1.0) < 1e-9  # M(x^2 - 1) = 1
    als1 = build_als(field_q, 1, "mahler")
    vec = [field_q.from_rational(1), field_q.from_rational(-2)]
    assert abs(als1.height(vec)[0] - 2.0) < 1e-9  # M(x - 2) = 2


def test_mahler_homogeneity(field_q):
    als = build_als(field_q, 2, "mahler")
    rng = random.Random(1)
    for _ in range(20):
        vec = [field_q.from_rational(rng.randint(-5, 5)) for _ in range(3)]
        if all(v.is_zero() for v in vec):
            continue
        c = rng.randint(1, 7)
        h1 = als.height(vec)[0]
        h2 = als.height([v * c for v in vec])[0]
        assert abs(h1 - h2) < 1e-9 * max(1.0, h1)


def test_unsupported_spec(field_q):
    with pytest.raises(UnsupportedSpec):
        build_als(field_q, 1, "twisted")


def test_exact_comparator_rational_tie(field_sqrt2):
    als = build_als(field_sqrt2, 1, "standard")
    vec = [field_sqrt2.one, field_sqrt2.from_rational(3)]
    assert als.compare_height(vec, Fraction(3)) == 0
    assert als.compare_height(vec, Fraction(29, 10)) == 1
    assert als.compare_height(vec, Fraction(31, 10)) == -1


def test_exact_comparator_irrational_value(field_sqrt2):
    # H(1+sqrt2, 1-sqrt2) = 1+sqrt2; decide both sides of the threshold
    s2 = field_sqrt2.from_coords([0, 1])
    vec = [field_sqrt2.one + s2, field_sqrt2.one - s2]
    assert als_cmp(field_sqrt2, vec, Fraction(2414, 1000)) == 1
    assert als_cmp(field_sqrt2, vec, Fraction(2415, 1000)) == -1


def als_cmp(field, vec, x):
    return build_als(field, 1, "standard").compare_height(vec, x)


def test_exact_comparator_gaussian_tie(field_qi):
    i = field_qi.from_coords([0, 1])
    vec = [field_qi.one + i, field_qi.from_rational(1)]
    # H^2 = |1+i|^2 = 2, so H = sqrt(2): exact tie against sqrt(2)^2
    als = build_als(field_qi, 1, "standard")
    assert als.compare_inf_height_pow(vec, Fraction(2)) == 0


def test_height_lower_bound_standard(field_sqrt2):
    als = build_als(field_sqrt2, 1, "standard")
    rng = random.Random(11)
    for _ in range(60):
        vec = [field_sqrt2.from_coords([rng.randint(-4, 4), rng.randint(-4, 4)])
               for _ in range(2)]
        if all(v.is_zero() for v in vec):
            continue
        h_n = als.height(vec)[0]
        h = weil_height(field_sqrt2, vec)
        assert h_n * als.C >= h * (1 - 1e-9)


def test_finite_part_consistency(field_qi):
    als = build_als(field_qi, 1, "standard")
    rng = random.Random(5)
    for _ in range(40):
        vec = [field_qi.from_coords([rng.randint(-6, 6), rng.randint(-6, 6)])
               for _ in range(2)]
        if all(v.is_zero() for v in vec):
            continue
        fin = als.finite_power(vec)
        assert fin * coordinate_ideal(field_qi, vec).norm() == 1


def test_norm_ball_charts_examples():
    cs = norm_ball_charts(lambda z: float(np.linalg.norm(z)), 1, 1,
                          math.sqrt(2), seed=1)
    assert abs(cs.L - 8 * 2 ** 2.5 * math.sqrt(2)) < 1e-9  # = 64
    assert verify_lipschitz(cs, samples=3000, seed=2)["pass"]
    cs = norm_ball_charts(lambda z: float(np.max(np.abs(z))), 1, 1, 1.0, seed=1)
    assert abs(cs.L - 8 * 2 ** 2.5) < 1e-9
    assert verify_lipschitz(cs, samples=3000, seed=2)["pass"]
    cs = norm_ball_charts(lambda z: float(np.sum(np.abs(z))), 1, 2, 1.0, seed=1)
    assert abs(cs.L - 8 * 3 ** 2.5) < 1e-9
    assert verify_lipschitz(cs, samples=3000, seed=2)["pass"]


def test_norm_ball_rejects_non_norm():
    with pytest.raises(NotANorm):
        norm_ball_charts(lambda z: float(np.linalg.norm(z)) ** 2, 1, 1, 1.0,
                         seed=1)


def test_weil_height_power_exact_flag(field_qi):
    exact, bounds = weil_height_power(
        field_qi, [field_qi.one, field_qi.from_coords([0, 1])])
    assert exact == 1
