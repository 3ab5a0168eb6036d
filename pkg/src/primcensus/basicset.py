"""The trace-zero hyperplane, unit-lattice fundamental domain, the height
shells S_F(T), the scaling automorphisms of the cell partition, and the
composite boundary charts.

Membership decisions on field vectors go through the exact height comparator
for the radial condition; the cell coordinates are decided on intervals with
an exact algebraic seam test for real quadratic fields (the only case the
acceptance fields need) and a deterministic lower-closed seam rule plus a
logged warning otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import counting, heights, lattices, linalg
from .errors import (BadIndex, ChartsUnavailable, UnitRankMismatch, ZeroVector)
from .numfield import FieldElement, NumberField, unit_log_vectors


@dataclass
class BasicSetGeometry:
    field: NumberField
    q: int
    vecdelta: tuple[int, ...]
    unit_elements: tuple[FieldElement, ...]     # reduced system
    unit_logs: tuple[tuple[float, ...], ...]    # rows u_j in R^(q+1)
    n_js: tuple[int, ...]
    t: int
    cells: tuple[tuple[int, ...], ...]
    ratio_t_regulator: float
    sigma_basis: tuple[tuple[float, ...], ...]  # orthonormal basis of the plane
    coord_matrix: tuple[tuple[float, ...], ...]  # rows: solve x -> u-frame coords
    warnings: list = dc_field(default_factory=list)

    def gammas(self, index: tuple[int, ...]) -> tuple[float, ...]:
        """Per-place scalings of the cell automorphism (det 1)."""
        if index not in self._gamma_cache:
            raise BadIndex(f"cell index {index} out of range")
        return self._gamma_cache[index]

    _gamma_cache: dict = dc_field(default_factory=dict)


def _orthonormal_plane_basis(q: int) -> list[list[float]]:
    """Deterministic orthonormal basis of {x in R^(q+1): sum x_i = 0}."""
    out = []
    for k in range(1, q + 1):
        v = [1.0] * k + [-float(k)] + [0.0] * (q - k)
        nrm = math.sqrt(k + k * k)
        out.append([x / nrm for x in v])
    return out


def build_geometry(field: NumberField) -> BasicSetGeometry:
    """Cell geometry from the reduced fundamental-unit system."""
    q = field.r + field.s - 1
    vecdelta = tuple(field.local_degrees())
    warnings: list = []
    if q == 0:
        geom = BasicSetGeometry(
            field=field, q=0, vecdelta=vecdelta, unit_elements=tuple(),
            unit_logs=tuple(), n_js=tuple(), t=1, cells=((),),
            ratio_t_regulator=1.0 / field.invariants.regulator,
            sigma_basis=tuple(), coord_matrix=tuple(), warnings=warnings)
        geom._gamma_cache[()] = tuple(1.0 for _ in vecdelta)
        return geom

    units = list(field.invariants.fundamental_units)
    if len(units) != q:
        raise UnitRankMismatch(f"need {q} units, have {len(units)}")
    logs = unit_log_vectors(field, units)
    plane = _orthonormal_plane_basis(q)
    plane_coords = [[sum(u[i] * e[i] for i in range(q + 1)) for e in plane]
                    for u in logs]
    rat_rows, slack = lattices.rationalize_rows(plane_coords)
    lat = lattices.LatticeBasis(rat_rows, slack=slack)
    cert = lat.minima()
    reduced = lattices.mahler_weyl_basis(cert, lat)
    # integer coefficients of the reduced rows in terms of the input rows
    reduced_units = []
    for row in reduced.rows:
        coeffs = lat.coeffs_of(row)
        assert coeffs is not None
        eta = field.one
        for c, u in zip(coeffs, units):
            if c:
                eta = eta * (u ** c)
        reduced_units.append(eta)
    unit_logs = unit_log_vectors(field, reduced_units)
    n_js = []
    for u in unit_logs:
        mag = math.sqrt(sum(x * x for x in u))
        if abs(mag - round(mag)) < 1e-9:
            warnings.append(f"|u_j| = {mag} borderline at an integer")
        n_js.append(int(math.floor(mag)) + 1)
    t = 1
    for n_j in n_js:
        t *= n_j
    reg = field.invariants.regulator
    assert t > reg, "cell count must exceed the regulator"
    cells = tuple(itertools.product(*[range(n_j) for n_j in n_js]))
    u_mat = np.array(unit_logs, dtype=float)           # q x (q+1)
    gram = u_mat @ u_mat.T
    coord = np.linalg.solve(gram, u_mat)               # rows: coords = coord @ x
    geom = BasicSetGeometry(
        field=field, q=q, vecdelta=vecdelta,
        unit_elements=tuple(reduced_units),
        unit_logs=tuple(tuple(r) for r in unit_logs),
        n_js=tuple(n_js), t=t, cells=cells,
        ratio_t_regulator=t / reg,
        sigma_basis=tuple(tuple(r) for r in plane),
        coord_matrix=tuple(tuple(r) for r in coord),
        warnings=warnings)
    for index in cells:
        shift = [0.0] * (q + 1)
        for j, i_j in enumerate(index):
            for k in range(q + 1):
                shift[k] += i_j * unit_logs[j][k] / n_js[j]
        geom._gamma_cache[index] = tuple(
            math.exp(-shift[k] / vecdelta[k]) for k in range(q + 1))
    return geom


def tau_apply(geom: BasicSetGeometry, index: tuple[int, ...], vec) -> np.ndarray:
    """Blockwise scaling automorphism of R^(d(n+1)) for one cell index."""
    gammas = geom.gammas(tuple(index))
    vec = np.asarray(vec, dtype=float)
    d = geom.field.d
    if vec.shape[-1] % d != 0:
        raise ValueError("vector length must be a multiple of the degree")
    n_plus_1 = vec.shape[-1] // d
    out = vec.astype(float).copy()
    offset = 0
    for k, d_k in enumerate(geom.vecdelta):
        width = d_k * n_plus_1
        out[..., offset:offset + width] *= gammas[k]
        offset += width
    return out


def tau0_scaling(geom: BasicSetGeometry, index: tuple[int, ...]) -> np.ndarray:
    """Diagonal of the degree-d version of the cell automorphism."""
    gammas = geom.gammas(tuple(index))
    diag = []
    for k, d_k in enumerate(geom.vecdelta):
        diag.extend([gammas[k]] * d_k)
    return np.array(diag)


@dataclass
class SfMembershipDecision:
    accepted: bool
    t_height: float
    cell: Optional[tuple[int, ...]]
    coords: tuple[float, ...]
    borderline: bool = False
    reason: str = ""


def _log_interval(bounds: tuple[Fraction, Fraction]) -> tuple[float, float]:
    from .intervals import log_bounds
    return log_bounds(bounds[0], bounds[1])


def _seam_sign_quadratic(geom: BasicSetGeometry, als, vec, k_int: int) -> int:
    """Exact sign of (n1 * c1 - k) for real quadratic standard systems.

    Reduces to the sign of |sigma_0(w)| - 1 for the explicit field element
    w = a^n conj(b)^(-n) eta^(-2k), corrected by the orientation of u_1.
    """
    field = geom.field
    a, b = als.selected_max_elements(vec)
    n1 = geom.n_js[0]
    eta = geom.unit_elements[0]
    w = (a ** n1) * (b.conjugate() ** n1).inverse() * (eta ** (2 * k_int)).inverse()
    w2 = w * w - field.one
    s = heights._sign_of_embedding(field, w2, 0)
    du = geom.unit_logs[0][0] - geom.unit_logs[0][1]
    return s if du > 0 else -s


def sf_membership(geom: BasicSetGeometry, als, T, vec,
                  t_pow_d: Optional[Fraction] = None) -> SfMembershipDecision:
    """Decide vec (a K-vector of n+1 field elements) against S_F(T).

    Accepts iff the radial part satisfies H_inf <= T and the plane part lies
    in the fundamental domain; reports which cell contains it.
    ``t_pow_d`` may supply T^d exactly; otherwise T is taken as a rational.
    """
    field = geom.field
    if all(a.is_zero() for a in vec):
        raise ZeroVector("zero vector is never in the shell")
    if t_pow_d is None:
        t_pow_d = Fraction(T).limit_denominator(10 ** 12) ** field.d
    radial = als.compare_inf_height_pow(vec, t_pow_d)
    d = field.d
    bounds = als.inf_value_bounds(vec, Fraction(1, 10 ** 30))
    y_lo, y_hi = [], []
    for i, (lo, hi) in enumerate(bounds):
        if lo <= 0:
            return SfMembershipDecision(False, -math.inf, None, (), reason="degenerate block")
        llo, lhi = _log_interval((lo, hi))
        y_lo.append(geom.vecdelta[i] * llo)
        y_hi.append(geom.vecdelta[i] * lhi)
    th_lo = sum(y_lo) / d
    th_hi = sum(y_hi) / d
    t_height = (th_lo + th_hi) / 2
    if radial > 0:
        return SfMembershipDecision(False, t_height, None, (), reason="radial")
    if geom.q == 0:
        return SfMembershipDecision(True, t_height, (), ())
    coord = np.array(geom.coord_matrix)
    delta = np.array(geom.vecdelta, dtype=float)
    y_mid = (np.array(y_lo) + np.array(y_hi)) / 2
    y_rad = (np.array(y_hi) - np.array(y_lo)) / 2
    x_mid = y_mid - (y_mid.sum() / d) * delta
    x_rad = y_rad + (y_rad.sum() / d) * delta
    c_mid = coord @ x_mid
    c_rad = np.abs(coord) @ x_rad + 1e-13
    cell = []
    coords_out = []
    borderline = False
    for j in range(geom.q):
        s_mid = c_mid[j] * geom.n_js[j]
        s_rad = c_rad[j] * geom.n_js[j]
        coords_out.append(float(c_mid[j]))
        lo_k = math.floor(s_mid - s_rad)
        hi_k = math.floor(s_mid + s_rad)
        if hi_k > lo_k:
            # straddles an integer seam; try the exact test
            k_seam = hi_k
            if geom.q == 1 and field.d == 2 and field.r == 2 and \
                    als.kind in ("standard", "linear_section"):
                sgn = _seam_sign_quadratic(geom, als, vec, k_seam)
                s_j = k_seam if sgn == 0 else (k_seam + 0.5 if sgn > 0 else k_seam - 0.5)
            else:
                borderline = True
                geom.warnings.append("cell seam decided by midpoint")
                s_j = s_mid
            k_j = math.floor(s_j) if s_j != k_seam else k_seam
        else:
            k_j = lo_k
        if k_j < 0 or k_j >= geom.n_js[j]:
            return SfMembershipDecision(False, t_height, None, tuple(coords_out),
                                        borderline=borderline, reason="outside domain")
        cell.append(k_j)
    return SfMembershipDecision(True, t_height, tuple(cell), tuple(coords_out),
                                borderline=borderline)


def sf_membership_floats(geom: BasicSetGeometry, als, T: float,
                         z: np.ndarray) -> bool:
    """Float membership of a raw point of R^D in S_F(T) (full domain)."""
    field = geom.field
    d = field.d
    n_plus_1 = len(z) // d
    vals = []
    offset = 0
    for i, part in enumerate(als.infinite_parts):
        width = part.d_v * n_plus_1
        vals.append(part.evaluator(np.asarray(z[offset:offset + width], dtype=float)))
        offset += width
    if any(v <= 0 for v in vals):
        return False
    y = np.array([geom.vecdelta[i] * math.log(vals[i]) for i in range(len(vals))])
    t_h = y.sum() / d
    if t_h > math.log(T):
        return False
    if geom.q == 0:
        return True
    delta = np.array(geom.vecdelta, dtype=float)
    x = y - t_h * delta
    c = np.array(geom.coord_matrix) @ x
    return bool(np.all(c >= 0.0) and np.all(c < 1.0))


def sf_membership_floats_batch(geom: BasicSetGeometry, als, T: float,
                               pts: np.ndarray) -> np.ndarray:
    """Vectorized float membership for the max-norm systems."""
    field = geom.field
    d = field.d
    m, D = pts.shape
    n_plus_1 = D // d
    vals = np.empty((m, len(als.infinite_parts)))
    offset = 0
    for i, part in enumerate(als.infinite_parts):
        width = part.d_v * n_plus_1
        block = pts[:, offset:offset + width]
        if part.d_v == 1:
            vals[:, i] = np.max(np.abs(block), axis=1)
        else:
            zz = block.reshape(m, -1, 2)
            vals[:, i] = np.max(np.hypot(zz[:, :, 0], zz[:, :, 1]), axis=1)
        offset += width
    ok = np.all(vals > 0, axis=1)
    out = np.zeros(m, dtype=bool)
    if not ok.any():
        return out
    y = np.where(vals > 0, vals, 1.0)
    y = np.log(y) * np.array(geom.vecdelta, dtype=float)
    t_h = y.sum(axis=1) / d
    good = ok & (t_h <= math.log(T))
    if geom.q == 0:
        return good
    delta = np.array(geom.vecdelta, dtype=float)
    x = y - t_h[:, None] * delta[None, :]
    c = x @ np.array(geom.coord_matrix).T
    return good & np.all(c >= 0.0, axis=1) & np.all(c < 1.0, axis=1)


def enclosure_radius(field: NumberField, als, n: int, T: float) -> float:
    """Ball radius containing the cell-0 shell: sqrt(d(n+1)) C_inf e^q T."""
    q = field.r + field.s - 1
    return math.sqrt(field.d * (n + 1)) * float(als.C_inf) * math.exp(q) * T


def sf_bounding_box(geom: BasicSetGeometry, als, n: int, t_val: float):
    """Axis box in the place-major layout enclosing the full shell: block i
    coordinates are bounded by T exp(sum_j max(0, u_j[i])) / c_v."""
    field = geom.field
    out = []
    for i, d_k in enumerate(geom.vecdelta):
        exponent = sum(max(0.0, geom.unit_logs[j][i]) / d_k
                       for j in range(geom.q))
        half = t_val * math.exp(exponent) * float(1 / als.infinite_parts[i].c_v)
        half *= 1.000001
        out.extend([(-half, half)] * (d_k * (n + 1)))
    return out


def sf_volume_exact(geom: BasicSetGeometry, als, n: int) -> float:
    """(n+1)^q R_K V_inf for the supported max-norm systems."""
    field = geom.field
    v_inf = (2.0 ** (field.r * (n + 1))) * (math.pi ** (field.s * (n + 1)))
    return (n + 1) ** geom.q * field.invariants.regulator * v_inf


# -- composite boundary charts ----------------------------------------------------

def sf_charts(geom: BasicSetGeometry, als, cell_scaled: bool = True
              ) -> counting.LipChartSet:
    """Boundary charts of the unit shell over cell 0 (or over the full
    fundamental domain when ``cell_scaled`` is false)."""
    field = geom.field
    n = als.n
    D = field.d * (n + 1)
    for part in als.infinite_parts:
        if part.charts is None:
            raise ChartsUnavailable("infinite-place distance function has no charts")
    if geom.q == 0:
        place_charts = als.infinite_parts[0].charts
        return counting.LipChartSet(D=D, c=1,
                                    charts=list(place_charts.charts),
                                    L=place_charts.L)
    q = geom.q
    if cell_scaled:
        w = [[geom.unit_logs[j][k] / geom.n_js[j] for k in range(q + 1)]
             for j in range(q)]
        l_prime = float(max(q - 1, 0))
        r_f = float(q)
    else:
        w = [list(geom.unit_logs[j]) for j in range(q)]
        l_prime = float(max(q - 1, 0)) * max(1.0, max(
            math.sqrt(sum(x * x for x in row)) for row in w))
        r_f = sum(math.sqrt(sum(x * x for x in row)) for row in w)
    c_inf = float(als.C_inf)
    l_n = als.L_N
    big_l = 3 * math.sqrt(D) * (l_prime + r_f + 1) * \
        math.exp(math.sqrt(q) * (l_prime + r_f)) * (l_n + c_inf)
    big_m = (2 * q + 1)
    for part in als.infinite_parts:
        big_m *= part.M_v

    scalar_variants = []  # each: list of q+1 scalar charts over a shared domain
    # faces of the fundamental cell composed with the radial parameter
    for axis in range(q):
        for fixed in (0.0, 1.0):
            scalars = []
            for i in range(q + 1):
                weights = [w[j][i] for j in range(q) if j != axis]
                const = fixed * w[axis][i]
                psi_i = counting.ScalarExpAffineChart(
                    [x / geom.vecdelta[i] for x in weights],
                    const / geom.vecdelta[i])
                scalars.append(counting.ScaleMultiplyChart(
                    counting.IdentityScalarChart(), psi_i))
            scalar_variants.append(scalars)
    # the cap chart over the closure of the cell
    plane = geom.sigma_basis
    scalars = []
    for i in range(q + 1):
        weights = [-2 * r_f * plane[k][i] for k in range(q)]
        const = r_f * sum(plane[k][i] for k in range(q))
        scalars.append(counting.ScalarExpAffineChart(
            [x / geom.vecdelta[i] for x in weights],
            const / geom.vecdelta[i]))
    scalar_variants.append(scalars)

    charts = []
    eta_lists = [list(part.charts.charts) for part in als.infinite_parts]
    for scalars in scalar_variants:
        for combo in itertools.product(*eta_lists):
            charts.append(_SFBoundaryChart(scalars, list(combo), D, big_l))
    assert len(charts) <= big_m
    return counting.LipChartSet(D=D, c=1, charts=charts, L=big_l)


class _SFBoundaryChart(counting.Chart):
    """One composite boundary map: shared radial/face parameters feeding the
    per-place scalar factors, then one parameter block per place chart."""

    def __init__(self, scalars, etas, amb, declared_L):
        doms = {s.dom for s in scalars}
        assert len(doms) == 1
        self.shared = doms.pop()
        self.scalars = scalars
        self.etas = etas
        self.dom = self.shared + sum(e.dom for e in etas)
        self.amb = amb
        self.L = declared_L

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        shared = t[:self.shared]
        out = []
        offset = self.shared
        for s_chart, eta in zip(self.scalars, self.etas):
            s_val = float(s_chart.evaluate(shared)[0])
            block = eta.evaluate(t[offset:offset + eta.dom])
            out.append(s_val * block)
            offset += eta.dom
        return np.concatenate(out)

    def sup_norm_bound(self):
        tot = 0.0
        for s_chart, eta in zip(self.scalars, self.etas):
            tot += (s_chart.sup_norm_bound() * eta.sup_norm_bound()) ** 2
        return math.sqrt(tot)
