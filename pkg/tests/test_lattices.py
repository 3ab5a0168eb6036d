import math
import random
from fractions import Fraction

import pytest

from primcensus import linalg
from primcensus.errors import (DimensionTooLarge, NotLatticeMember,
                               WitnessNotInLattice)
from primcensus.lattices import (LatticeBasis, enumerate_ball,
                                 mahler_weyl_basis, mahler_weyl_defect_bound,
                                 min_outside_subspace, minkowski_verify,
                                 orthogonality_defect, power_minima_check,
                                 successive_minima)


def test_minima_identity():
    cert = LatticeBasis([[1, 0], [0, 1]]).minima()
    assert cert.lambda2 == (Fraction(1), Fraction(1))


def test_minima_skew():
    # brute-force oracle over |coeff| <= 5 gives lambda = (2, sqrt(10))
    basis = LatticeBasis([[2, 0], [1, 3]])
    best = []
    for a in range(-5, 6):
        for b in range(-5, 6):
            if (a, b) == (0, 0):
                continue
            best.append((2 * a + b) ** 2 + (3 * b) ** 2)
    best.sort()
    cert = basis.minima()
    assert cert.lambda2[0] == best[0] == 4
    assert cert.lambda2 == (Fraction(4), Fraction(10))
    assert cert.radius2 >= cert.lambda2[-1]


def test_minima_witnesses_are_members():
    basis = LatticeBasis([[3, 1], [0, 2]])
    cert = basis.minima()
    for w in cert.witnesses:
        assert basis.coeffs_of(w) is not None


def test_dimension_cap():
    rows = [[1 if i == j else 0 for j in range(13)] for i in range(13)]
    with pytest.raises(DimensionTooLarge):
        successive_minima(LatticeBasis(rows))


def test_mahler_weyl_identity_basis():
    basis = LatticeBasis([[1, 0], [0, 1]])
    out = mahler_weyl_basis(basis.minima(), basis)
    assert abs(out.det()) == 1


def test_mahler_weyl_skew_bound():
    basis = LatticeBasis([[2, 0], [1, 3]])
    cert = basis.minima()
    out = mahler_weyl_basis(cert, basis)
    lam = [math.sqrt(float(x)) for x in cert.lambda2]
    for i, row in enumerate(out.rows):
        length = math.sqrt(float(linalg.vec_norm2(row)))
        assert length <= max(lam[i], sum(lam[:i + 1]) / 2) * (1 + 1e-12)


def test_mahler_weyl_bad_witness():
    basis = LatticeBasis([[2, 0], [0, 2]])
    cert = basis.minima()
    fake = cert.__class__(lambda2=cert.lambda2,
                          witnesses=((Fraction(1), Fraction(0)),
                                     cert.witnesses[1]),
                          witness_coeffs=cert.witness_coeffs,
                          radius2=cert.radius2, enumerated=cert.enumerated)
    with pytest.raises(WitnessNotInLattice):
        mahler_weyl_basis(fake, basis)


def test_orthogonality_defect_values():
    assert orthogonality_defect(LatticeBasis([[1, 0], [0, 1]])) == 1.0
    assert abs(orthogonality_defect(LatticeBasis([[1, 0], [1, 1]]))
               - math.sqrt(2)) < 1e-12
    assert abs(orthogonality_defect(LatticeBasis([[1, 0], [10, 1]]))
               - math.sqrt(101)) < 1e-12


def test_defect_bound_rank2():
    # any rank-2 lattice after reduction: defect <= 8/(2 pi)
    assert abs(mahler_weyl_defect_bound(2) - 8 / (2 * math.pi)) < 1e-12


def test_minkowski_z2():
    basis = LatticeBasis([[1, 0], [0, 1]])
    rep = minkowski_verify(basis.minima(), basis)
    assert rep["pass"]
    assert abs(rep["lower"] - 2) < 1e-9 and abs(rep["upper"] - 4) < 1e-9
    assert abs(rep["middle"] - math.pi) < 1e-9


def test_minkowski_skew():
    basis = LatticeBasis([[2, 0], [1, 3]])
    rep = minkowski_verify(basis.minima(), basis)
    assert rep["pass"]
    assert abs(rep["middle"] - 2 * math.sqrt(10) * math.pi) < 1e-9
    assert abs(rep["lower"] - 12) < 1e-9 and abs(rep["upper"] - 24) < 1e-9


def test_power_minima_examples():
    rep = power_minima_check(LatticeBasis([[1, 0], [0, 3]]), 1)
    assert rep["pass"]
    assert rep["power_lambda2"] == ["1", "1", "9", "9"]
    rep = power_minima_check(LatticeBasis([[1]]), 2)
    assert rep["pass"]
    rep = power_minima_check(LatticeBasis([[2, 0], [1, 3]]), 1)
    assert rep["pass"]
    assert rep["power_lambda2"] == ["4", "4", "10", "10"]


def test_min_outside_subspace():
    basis = LatticeBasis([[1, 0], [0, 1]])
    cert = basis.minima()
    assert min_outside_subspace(basis, cert, 2, [5, 1])
    diag = LatticeBasis([[1, 0], [0, 3]])
    assert min_outside_subspace(diag, diag.minima(), 2, [2, 3])
    with pytest.raises(NotLatticeMember):
        min_outside_subspace(diag, diag.minima(), 2, [Fraction(1, 2), 0])


def test_enumeration_exact_norms():
    basis = LatticeBasis([[2, 0], [1, 3]])
    seen = {}
    for coeffs, norm2 in enumerate_ball(basis.rows, Fraction(20)):
        vec = basis.vector(coeffs)
        assert linalg.vec_norm2(vec) == norm2
        assert norm2 <= 20
        seen[coeffs] = norm2
    # brute-force count over the same ball
    brute = 0
    for a in range(-6, 7):
        for b in range(-6, 7):
            if (a, b) == (0, 0):
                continue
            if (2 * a + b) ** 2 + 9 * b * b <= 20:
                brute += 1
    assert 2 * len(seen) == brute


def test_random_suite_det_invariance():
    rng = random.Random(13)
    for _ in range(10):
        rows = [[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)]
        try:
            basis = LatticeBasis(rows)
            basis.det()
        except ValueError:
            continue
        if abs(basis.det()) < 2:
            continue
        cert = basis.minima()
        out = mahler_weyl_basis(cert, basis)
        assert abs(out.det()) == abs(basis.det())
        assert orthogonality_defect(out) <= mahler_weyl_defect_bound(3) + 1e-9
