import math
from fractions import Fraction

import numpy as np
import pytest

from primcensus import linalg
from primcensus.counting import (AffineChart, Chart, LipChartSet,
                                 combine_charts, discrepancy_experiment,
                                 exact_lattice_count, make_chart,
                                 pm1_translate_bound, tmv1_bound, twi1_bound,
                                 verify_lipschitz, volume_mc)
from primcensus.errors import BadParams, BadQ, DomainMismatch
from primcensus.lattices import LatticeBasis


def test_make_cube_boundary():
    cs = make_chart("cube_boundary", dim=2)
    assert cs.M == 4 and cs.L == 2.0
    assert verify_lipschitz(cs, samples=400, seed=1)["pass"]


def test_make_parallelepiped():
    cs = make_chart("fundamental_parallelepiped_boundary",
                    vectors=[[1, 0, 0], [0, 1, 0]])
    assert cs.M == 4 and cs.L == 1.0
    assert verify_lipschitz(cs, samples=400, seed=1)["pass"]


def test_make_ball_section():
    cs = make_chart("ball_hyperplane_section", d=3, r=5.0)
    assert cs.M == 1
    assert abs(cs.L - 2 * math.sqrt(2) * 5) < 1e-12
    assert verify_lipschitz(cs, samples=400, seed=1)["pass"]


def test_make_complex_max_ball():
    cs = make_chart("complex_max_ball", n=1)
    assert cs.M == 2
    assert abs(cs.L - 2 * math.pi * math.sqrt(3)) < 1e-12
    rep = verify_lipschitz(cs, samples=2000, seed=2)
    assert rep["pass"]


def test_bad_chart_params():
    with pytest.raises(BadParams):
        make_chart("sphere", D=1, r=1.0)
    with pytest.raises(BadParams):
        make_chart("nonsense")


def test_chart_images_cover_boundary_samples():
    # every cube-boundary chart point has max-norm exactly 1
    cs = make_chart("cube_boundary", dim=3)
    rng = np.random.default_rng(0)
    for chart in cs.charts:
        for t in rng.random((50, chart.dom)):
            assert abs(np.max(np.abs(chart.evaluate(t))) - 1.0) < 1e-12


def test_combinator_product():
    c1 = AffineChart(np.eye(2) * 3.0, np.zeros(2), declared_L=3.0)
    prod = combine_charts("product", [c1, c1])
    assert abs(prod.L - 3 * math.sqrt(2)) < 1e-12


def test_combinator_extend():
    c1 = AffineChart(np.eye(2) * 5.0, np.zeros(2), declared_L=5.0)
    ext = combine_charts("extend", c1, 4)
    assert ext.L == 5.0 and ext.dom == 4
    t = np.array([0.3, 0.7, 0.1, 0.9])
    assert np.allclose(ext.evaluate(t), c1.evaluate(t[:2]))


def test_combinator_scale_multiply():
    class Ident(Chart):
        dom = 1
        amb = 1
        L = 1.0

        def evaluate(self, t):
            return np.array([float(np.asarray(t)[0])])

        def sup_norm_bound(self):
            return 1.0

    const = AffineChart(np.zeros((2, 1)), np.array([2.0, 0.0]), declared_L=0.0)
    sm = combine_charts("scale_multiply", Ident(), const)
    assert abs(sm.L - 2 * math.sqrt(2)) < 1e-12
    # combined constants never below the sampled ratio
    cs = LipChartSet(D=2, c=1, charts=[sm], L=sm.L)
    assert verify_lipschitz(cs, samples=500, seed=3)["pass"]


def test_combinator_domain_mismatch():
    c1 = AffineChart(np.eye(2), np.zeros(2))
    c2 = AffineChart(np.eye(3), np.zeros(3))
    with pytest.raises(DomainMismatch):
        combine_charts("product", [c1, c2])


def test_verify_lipschitz_falsification():
    cs = make_chart("sphere", D=2, r=1.0)
    cs.L = 1.0
    for ch in cs.charts:
        ch.L = 1.0
    assert not verify_lipschitz(cs, samples=400, seed=1)["pass"]


def test_pm1_bound_values():
    assert pm1_translate_bound(1, 1, 2, 0.0, [1.0, 1.0], 1.0) == 4.0
    assert pm1_translate_bound(2, 3, 2, 6.0, [1.0, 2.0], 1.0) == 72.0
    with pytest.raises(BadQ):
        pm1_translate_bound(1, 0, 2, 1.0, [1.0, 1.0], 1.0)


def test_pm1_reproduces_corollary_choice():
    # with Q = floor(sqrt(D) Omega L / lambda_1) + 1 the translate bound is
    # within the 3^D M (sqrt(D) Omega L / lambda_1 + 1)^(D-1) envelope
    m_charts, dim, lip, defect = 2, 3, 7.0, 1.5
    minima = [1.0, 2.0, 3.0]
    q = int(math.sqrt(dim) * defect * lip / minima[0]) + 1
    val = pm1_translate_bound(m_charts, q, dim, lip, minima, defect)
    cor = tmv1_bound(m_charts, lip, minima[0], defect, dim)
    assert val <= cor * (1 + 1e-9)


def test_twi1_values():
    assert twi1_bound(1, 10.0, [1.0, 2.0], 2) == 640.0
    assert twi1_bound(5, 0.0, [1.0, 2.0], 2) == 64 * 5
    assert twi1_bound(3, 1.0, [2.0, 5.0], 2) == 192.0


def test_exact_count_disk():
    z2 = LatticeBasis([[1, 0], [0, 1]])
    count = exact_lattice_count(z2, lambda v: v[0] ** 2 + v[1] ** 2 <= Fraction(25, 4), 2.5)
    assert count == 21


def test_exact_count_empty():
    z2 = LatticeBasis([[1, 0], [0, 1]])
    assert exact_lattice_count(z2, lambda v: False, 2.5) == 0


def test_exact_count_rect():
    basis = LatticeBasis([[1, 0], [0, 3]])
    count = exact_lattice_count(basis, lambda v: max(abs(v[0]), abs(v[1])) <= 3, 4.5)
    assert count == 21


def test_discrepancy_disk():
    z2 = LatticeBasis([[1, 0], [0, 1]])

    class Disk:
        membership = staticmethod(lambda v: v[0] ** 2 + v[1] ** 2 <= 100)
        charts = make_chart("sphere", D=2, r=10.0)
        volume = math.pi * 100
        volume_ci = 0.0
        radius = 10.0

    rep = discrepancy_experiment(z2, Disk, seed=5)
    assert rep.count == 317
    assert all(rep.flags.values())
    assert abs(rep.count - rep.volume / rep.det) <= rep.bounds["thm"]


def test_discrepancy_fundamental_domain():
    basis = LatticeBasis([[2, 1], [0, 3]])
    inv = linalg.mat_inverse([list(r) for r in basis.rows])

    class Cell:
        @staticmethod
        def membership(v):
            coords = linalg.mat_vec(
                [[inv[t][k] for t in range(2)] for k in range(2)], v)
            return all(0 <= c < 1 for c in coords)
        volume = 6.0
        volume_ci = 0.0
        radius = 6.0
        charts = None

    mats = np.array([[2.0, 1.0], [0.0, 3.0]])
    charts = []
    for axis in range(2):
        for fixed in (0.0, 1.0):
            other = mats[1 - axis]
            charts.append(AffineChart(other.reshape(2, 1), fixed * mats[axis]))
    Cell.charts = LipChartSet(D=2, c=1, charts=charts,
                              L=max(c.L for c in charts))
    rep = discrepancy_experiment(basis, Cell, seed=2)
    assert rep.count == 1  # exact tiling: one lattice point per cell
    assert abs(rep.volume / rep.det - 1) < 1e-12
    assert all(rep.flags.values())


def test_volume_mc_unit_square():
    est, ci = volume_mc(lambda pts: np.all(np.abs(pts) <= 0.5, axis=1),
                        [(-1, 1), (-1, 1)], 10 ** 6, seed=3)
    assert abs(est - 1.0) <= max(ci, 0.01)


def test_volume_mc_empty():
    est, ci = volume_mc(lambda pts: np.zeros(len(pts), dtype=bool),
                        [(0, 1)], 10 ** 4, seed=3)
    assert est == 0.0


def test_volume_mc_complex_max_ball():
    # {max(|z0|, |z1|) < 1} in C^2 has volume pi^2
    def member(pts):
        z = pts.reshape(len(pts), 2, 2)
        mods = np.hypot(z[:, :, 0], z[:, :, 1])
        return np.max(mods, axis=1) < 1.0

    est, ci = volume_mc(member, [(-1, 1)] * 4, 10 ** 6, seed=9)
    assert abs(est - math.pi ** 2) <= 3 * ci


def test_volume_mc_deterministic_and_worker_independent():
    member = (lambda pts: np.all(np.abs(pts) <= 0.5, axis=1))
    a = volume_mc(member, [(-1, 1)] * 2, 10 ** 5, seed=4, workers=1)
    b = volume_mc(member, [(-1, 1)] * 2, 10 ** 5, seed=4, workers=4)
    assert a == b
