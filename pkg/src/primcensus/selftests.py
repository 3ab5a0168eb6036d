"""Seeded invariant suites shared by the CLI selftest commands and the
acceptance tests.

Each suite returns a report dict with named checks; nothing is silently
skipped (skips appear as explicit entries).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import basicset, census, counting, heights, lattices, linalg, presets
from .errors import EnumerationBudgetExceeded
from .numfield import load_field


def _random_lattice(rng: random.Random, dim: int, span: int = 5,
                    power_budget: int = 400_000) -> lattices.LatticeBasis:
    """Random integer lattice, regenerated until decently conditioned."""
    while True:
        rows = [[rng.randint(-span, span) for _ in range(dim)] for _ in range(dim)]
        try:
            basis = lattices.LatticeBasis(rows)
            det = abs(basis.det())
        except ValueError:
            continue
        if det < 2:
            continue
        reduced = linalg.lll_reduce(rows)
        worst = max(float(linalg.vec_norm2(r)) for r in reduced)
        # crude node estimate for the rank-2*dim power enumeration
        est = (worst ** dim) / float(det) ** 2
        if est > power_budget:
            continue
        return basis


def gon_suite(seed: int = 0, count: int = 100, dims=(2, 3, 4, 5, 6),
              budget: int = 2_000_000) -> dict:
    """Randomized geometry-of-numbers suite: second-theorem bounds, reduced
    basis length bounds, defect bound, power-lattice minima, subspace bound."""
    rng = random.Random(seed)
    checks = []
    for trial in range(count):
        dim = dims[trial % len(dims)]
        basis = _random_lattice(rng, dim)
        cert = basis.minima(budget=budget)
        mink = lattices.minkowski_verify(cert, basis)
        reduced = lattices.mahler_weyl_basis(cert, basis)
        # |v_i| <= max(|u_i|, (|u_1|+...+|u_i|)/2), exact squared comparison
        lam = [math.sqrt(float(x)) for x in cert.lambda2]
        mw_ok = True
        for i, row in enumerate(reduced.rows):
            length = math.sqrt(float(linalg.vec_norm2(row)))
            cap = max(lam[i], sum(lam[:i + 1]) / 2)
            if length > cap * (1 + 1e-9):
                mw_ok = False
        defect = lattices.orthogonality_defect(reduced)
        defect_ok = defect <= lattices.mahler_weyl_defect_bound(dim) * (1 + 1e-9)
        det_ok = abs(reduced.det()) == abs(basis.det())
        same_hnf = linalg.hnf_rational_rows([list(r) for r in reduced.rows]) == \
            linalg.hnf_rational_rows([list(r) for r in basis.rows])
        shortest_ok = True
        for coeffs, norm2 in lattices.enumerate_ball(basis.rows, cert.lambda2[0],
                                                     budget=budget):
            if norm2 < cert.lambda2[0]:
                shortest_ok = False
        # subspace length bound on a few lattice vectors
        sub_ok = True
        for _ in range(5):
            coeffs = [rng.randint(-3, 3) for _ in range(dim)]
            if not any(coeffs):
                continue
            vec = basis.vector(coeffs)
            wrows = [list(w) for w in cert.witnesses[:dim - 1]]
            in_span = linalg.rank_fraction(wrows + [list(vec)]) == dim - 1
            if not in_span:
                if not lattices.min_outside_subspace(basis, cert, dim, vec):
                    sub_ok = False
        try:
            power = lattices.power_minima_check(basis, 1, budget=budget)
            power_ok = power["pass"]
        except EnumerationBudgetExceeded:
            power_ok = None  # explicit skip
        checks.append({
            "trial": trial, "dim": dim,
            "minkowski": mink["pass"], "mahler_weyl_bound": mw_ok,
            "defect_bound": defect_ok, "det_invariant": bool(det_ok),
            "same_lattice": same_hnf, "shortest_certified": shortest_ok,
            "subspace_bound": sub_ok,
            "power_minima": power_ok,
        })
    skipped = sum(1 for c in checks if c["power_minima"] is None)
    ok = all(all(v is not False for k, v in c.items() if k not in ("trial", "dim"))
             for c in checks)
    return {"suite": "gon", "count": count, "pass": bool(ok),
            "skipped_power_checks": skipped, "checks": checks}


@dataclass
class _SetInstance:
    membership: object
    charts: counting.LipChartSet
    volume: float
    volume_ci: float
    radius: float
    label: str


def _disk_instance(rng, dim_unused) -> tuple[lattices.LatticeBasis, _SetInstance]:
    basis = _random_lattice(rng, 2)
    r = Fraction(rng.randint(4, 16), 2)
    r2 = r * r

    inst = _SetInstance(
        membership=lambda v, r2=r2: linalg.vec_norm2(v) <= r2,
        charts=counting.make_chart("sphere", D=2, r=float(r)),
        volume=math.pi * float(r2),
        volume_ci=0.0,
        radius=float(r),
        label="disk",
    )
    return basis, inst


def _cube_instance(rng, dim) -> tuple[lattices.LatticeBasis, _SetInstance]:
    basis = _random_lattice(rng, dim)
    a = Fraction(rng.randint(2, 6))

    inst = _SetInstance(
        membership=lambda v, a=a: max(abs(x) for x in v) <= a,
        charts=counting.make_chart("cube_boundary", dim=dim, half_width=float(a)),
        volume=float((2 * a) ** dim),
        volume_ci=0.0,
        radius=float(a) * math.sqrt(dim) * 1.001,
        label=f"cube{dim}",
    )
    return basis, inst


def _ppiped_instance(rng, dim) -> tuple[lattices.LatticeBasis, _SetInstance]:
    basis = _random_lattice(rng, dim)
    edges = _random_lattice(rng, dim, span=4)
    emat = [[edges.rows[j][i] for j in range(dim)] for i in range(dim)]
    inv = linalg.mat_inverse([list(r) for r in edges.rows])

    def member(v, inv=inv, dim=dim):
        coords = linalg.mat_vec([[inv[t][k] for t in range(dim)] for k in range(dim)], v)
        return all(0 <= c < 1 for c in coords)

    mats = np.array([[float(x) for x in row] for row in edges.rows])
    charts = []
    for axis in range(dim):
        for fixed in (0.0, 1.0):
            others = [mats[j] for j in range(dim) if j != axis]
            mat = np.stack(others, axis=1)
            charts.append(counting.AffineChart(mat, fixed * mats[axis]))
    declared = max(ch.L for ch in charts)
    chart_set = counting.LipChartSet(D=dim, c=1, charts=charts, L=declared)
    radius = float(sum(math.sqrt(float(linalg.vec_norm2(r))) for r in edges.rows))
    inst = _SetInstance(
        membership=member,
        charts=chart_set,
        volume=abs(float(edges.det())),
        volume_ci=0.0,
        radius=radius * 1.001,
        label=f"ppiped{dim}",
    )
    return basis, inst


def _sf_instance(rng, n, geom, als) -> tuple[lattices.LatticeBasis, _SetInstance]:
    field = geom.field
    dim = field.d * (n + 1)
    basis = _random_lattice(rng, dim, span=3)
    t_val = Fraction(rng.randint(3, 8))

    def member(v, t=float(t_val)):
        z = np.array([float(x) for x in v])
        return basicset.sf_membership_floats(geom, als, t, z)

    charts = basicset.sf_charts(geom, als, cell_scaled=False).scaled(float(t_val))
    vol = basicset.sf_volume_exact(geom, als, n) * float(t_val) ** dim
    gam_inv = max(max(1.0 / g for g in geom.gammas(c)) for c in geom.cells)
    radius = basicset.enclosure_radius(field, als, n, float(t_val)) * gam_inv * 1.001
    inst = _SetInstance(
        membership=member, charts=charts, volume=vol, volume_ci=0.0,
        radius=radius, label=f"sf_shell_n{n}",
    )
    return basis, inst


def lip_suite(seed: int = 0, count: int = 50, budget: int = 4_000_000) -> dict:
    """Counting-bound suite over mixed set shapes; all three bounds must hold."""
    rng = random.Random(seed)
    field = load_field(presets.sqrt2_field())
    geom = basicset.build_geometry(field)
    als0 = heights.build_als(field, 0, "standard")
    als1 = heights.build_als(field, 1, "standard")
    results = []
    for trial in range(count):
        kind = trial % 4
        if kind == 0:
            basis, inst = _disk_instance(rng, 2)
        elif kind == 1:
            basis, inst = _cube_instance(rng, 2 + trial % 5)
        elif kind == 2:
            basis, inst = _ppiped_instance(rng, 2 + trial % 2)
        else:
            n = (trial // 4) % 2
            basis, inst = _sf_instance(rng, n, geom, als0 if n == 0 else als1)
        rep = counting.discrepancy_experiment(basis, inst, seed=seed + trial,
                                              budget=budget)
        results.append({
            "trial": trial, "label": inst.label, "count": rep.count,
            "volume": rep.volume, "det": rep.det,
            "bounds": rep.bounds, "translate_hits": rep.translate_hits,
            "flags": rep.flags,
        })
    ok = all(all(r["flags"].values()) for r in results)
    return {"suite": "lip", "count": count, "pass": bool(ok), "checks": results}


def chart_suite(seed: int = 0, samples: int = 10_000) -> dict:
    """Sampled verification of every constructed chart family plus the
    under-declared falsification control."""
    field = load_field(presets.sqrt2_field())
    geom = basicset.build_geometry(field)
    als0 = heights.build_als(field, 0, "standard")
    entries = []

    def add(name, chart_set):
        rep = counting.verify_lipschitz(chart_set, samples=samples, seed=seed)
        entries.append({"name": name, "declared_L": chart_set.L,
                        "max_ratio": rep["max_ratio"], "pass": rep["pass"]})

    add("cube_boundary_2d", counting.make_chart("cube_boundary", dim=2))
    add("sphere_r1", counting.make_chart("sphere", D=2, r=1.0))
    add("sphere_r5_d3", counting.make_chart("sphere", D=3, r=5.0))
    add("parallelepiped_q2", counting.make_chart(
        "fundamental_parallelepiped_boundary", vectors=[[1, 0, 0], [0, 1, 0]]))
    add("ball_section_d3", counting.make_chart("ball_hyperplane_section", d=3, r=5.0))
    add("complex_max_ball_n1", counting.make_chart("complex_max_ball", n=1))
    add("norm_ball_euclid", heights.norm_ball_charts(
        lambda z: float(np.linalg.norm(z)), 1, 1, math.sqrt(2), seed=seed))
    add("norm_ball_max", heights.norm_ball_charts(
        lambda z: float(np.max(np.abs(z))), 1, 1, 1.0, seed=seed))
    add("norm_ball_l1", heights.norm_ball_charts(
        lambda z: float(np.sum(np.abs(z))), 1, 2, 1.0, seed=seed))
    add("sf_composite_sqrt2_n0", basicset.sf_charts(geom, als0))
    # falsification control: an under-declared constant must fail
    bad = counting.make_chart("sphere", D=2, r=1.0)
    bad.L = 1.0
    for ch in bad.charts:
        ch.L = 1.0
    rep = counting.verify_lipschitz(bad, samples=samples, seed=seed)
    entries.append({"name": "falsification_control", "declared_L": 1.0,
                    "max_ratio": rep["max_ratio"], "pass": not rep["pass"]})
    ok = all(e["pass"] for e in entries)
    return {"suite": "charts", "pass": bool(ok), "checks": entries}


def heights_suite(seed: int = 0, samples: int = 100) -> dict:
    """Scale invariance, lower bound against the plain height, finite-part
    consistency, and the exceptional-ideal norm identity."""
    rng = random.Random(seed)
    checks = []
    for mk in (presets.rational_field, presets.gaussian_field, presets.sqrt2_field):
        field = load_field(mk())
        als = heights.build_als(field, 1, "standard")
        scale_ok = True
        lower_ok = True
        fin_ok = True
        for _ in range(samples):
            vec = [field.from_coords([rng.randint(-5, 5) for _ in range(field.d)])
                   for _ in range(2)]
            if all(v.is_zero() for v in vec):
                continue
            c = field.from_coords([rng.randint(-3, 3) for _ in range(field.d)])
            if c.is_zero():
                continue
            h1 = als.height(vec)[0]
            h2 = als.height([c * v for v in vec])[0]
            if abs(h1 - h2) > 1e-9 * max(1.0, h1):
                scale_ok = False
            exact, bounds = heights.weil_height_power(field, vec)
            hw = float(exact) if exact is not None else float(bounds[0] + bounds[1]) / 2
            if (h1 ** field.d) * als.C ** field.d < hw * (1 - 1e-9):
                lower_ok = False
            fin_pow = als.finite_power(vec)
            from .numfield import coordinate_ideal
            if fin_pow * coordinate_ideal(field, vec).norm() != 1:
                fin_ok = False
        checks.append({"field": field.name, "scale_invariance": scale_ok,
                       "lower_bound": lower_ok, "finite_part": fin_ok})
    ok = all(c["scale_invariance"] and c["lower_bound"] and c["finite_part"]
             for c in checks)
    return {"suite": "heights", "pass": bool(ok), "checks": checks}


def census_structure_suite(seed: int = 0) -> dict:
    """Class-invariance of the normalized determinant, the sandwich
    inclusion, exceptional norm identity, volume bounds, height comparison
    lower bound on random vectors."""
    rng = random.Random(seed)
    checks = []
    for mk in (presets.gaussian_field, presets.sqrt2_field):
        field = load_field(mk())
        als = heights.build_als(field, 1, "standard")
        rep = field.invariants.class_reps[0]
        hl = census.build_height_lattice(als, rep)
        base = hl.delta_reduced()
        class_ok = True
        for _ in range(10):
            eps = field.from_coords([rng.randint(-4, 4) for _ in range(field.d)])
            if eps.is_zero():
                continue
            scaled = rep.scale_by_element(eps)
            hl2 = census.build_height_lattice(als, scaled)
            if hl2.delta_reduced() != base:
                class_ok = False
        # sandwich inclusion on random lattice members
        sandwich_ok = True
        upper_pow = [hl.upper] * 2
        for _ in range(50):
            coeffs = [rng.randint(-4, 4) for _ in range(len(hl.elem_basis))]
            vec = census._pullback_raw(field, hl, coeffs)
            for slot, elem in enumerate(vec):
                if not hl.upper.contains(elem):
                    sandwich_ok = False
        vol = census.global_volume(als)
        checks.append({
            "field": field.name,
            "delta_class_invariant": class_ok,
            "sandwich_inclusion": sandwich_ok,
            "volume_checks": vol["checks"],
        })
    # linear-section structural identities over Q
    field = load_field(presets.rational_field())
    als = heights.build_als(field, 1, ("linear_section", [2, 3], 5))
    c0 = census.c0_ideal(als)
    ok_c0 = c0.norm() == als.C_fin_pow_d
    hl = census.build_height_lattice(als, field.invariants.class_reps[0])
    # index-5 congruence sublattice, verified by direct enumeration
    pts = [(x, y) for x in range(-6, 7) for y in range(-6, 7)
           if (2 * x + 3 * y) % 5 == 0 and (x, y) != (0, 0)]
    member_ok = True
    for x, y in pts[:60]:
        vec = (field.from_rational(x), field.from_rational(y))
        target = np.array([float(x), float(y)])
        sol = np.linalg.lstsq(np.array(hl.rows, dtype=float).T, target, rcond=None)[0]
        if np.max(np.abs(sol - np.round(sol))) > 1e-9:
            member_ok = False
    checks.append({"field": "Q(linear_section)", "c0_norm_identity": bool(ok_c0),
                   "index5_sublattice": member_ok,
                   "delta_reduced": str(hl.delta_reduced())})
    flat_ok = []
    for c in checks:
        for k, v in c.items():
            if isinstance(v, bool):
                flat_ok.append(v)
            if isinstance(v, dict):
                flat_ok.extend(x for x in v.values() if isinstance(x, bool))
    return {"suite": "census_structure", "pass": bool(all(flat_ok)), "checks": checks}


def comparison_lower_bound_suite(seed: int = 0, samples: int = 1000) -> dict:
    """H_N >= C^{-1} H on random vectors, exact or interval certified."""
    rng = random.Random(seed)
    field = load_field(presets.rational_field())
    als = heights.build_als(field, 1, ("linear_section", [2, 3], 5))
    failures = 0
    for _ in range(samples):
        vec = [field.from_rational(rng.randint(-30, 30)) for _ in range(2)]
        if all(v.is_zero() for v in vec):
            continue
        exact, _ = heights.weil_height_power(field, vec)
        # H_N^d >= C^{-d} H^d with exact rationals on both sides
        h_n_pow = als.finite_power(vec) * _exact_inf_power_rational(field, vec)
        if h_n_pow * als.C_fin_pow_d < exact:
            failures += 1
    return {"suite": "height_lower_bound", "pass": failures == 0,
            "failures": failures, "samples": samples}


def _exact_inf_power_rational(field, vec) -> Fraction:
    """Infinite part of the height power for the rational field (exact)."""
    assert field.d == 1
    vals = [abs(v.coords[0] * field.basis_mat[0][0]) for v in vec if not v.is_zero()]
    return max(vals)


def selftest_all(seed: int = 0, quick: bool = False) -> dict:
    """Every module's invariant suite; used by the aggregated CLI command."""
    gon_n = 20 if quick else 100
    lip_n = 12 if quick else 50
    suites = [
        gon_suite(seed=seed, count=gon_n),
        lip_suite(seed=seed, count=lip_n),
        chart_suite(seed=seed, samples=2000 if quick else 10_000),
        heights_suite(seed=seed, samples=30 if quick else 100),
        census_structure_suite(seed=seed),
        comparison_lower_bound_suite(seed=seed, samples=200 if quick else 1000),
    ]
    return {"pass": all(s["pass"] for s in suites), "suites": suites}
