"""Heights-to-lattices bridge and the two censuses of bounded-height points.

The direct census enumerates class-representative-normalized coordinate
vectors in per-cell balls, decides the height exactly and deduplicates
projective representatives.  The decomposed census follows the divisor-sum
pipeline (class representatives, squarefree divisor inversion, cell
partition, unit-count division) and must agree with the direct census
exactly; that equality doubles as the completeness certificate for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from . import basicset, counting, heights, lattices, linalg
from .errors import (BudgetExceeded, ConsistencyError, GridTooSmall,
                     NonIntegralExponent, NothingFound, QuotientTooLarge,
                     TruncationInsufficient, ZeroVector, ZetaUnavailable)
from .numfield import (FieldElement, IdealModule, NumberField, Subfield,
                       coordinate_ideal)

DEFAULT_ENUM_BUDGET = 8_000_000
QUOTIENT_BUDGET = 1_000_000


# -- embedding matrices ------------------------------------------------------------

def sigma_rows(field: NumberField, elements: Sequence[FieldElement],
               prec: Fraction = Fraction(1, 10 ** 25)) -> list[list[float]]:
    """Rows sigma(beta) in R^d (complex places interleaved Re, Im)."""
    out = []
    for b in elements:
        vals = field.embed(b, prec)
        row: list[float] = []
        for i in range(field.r + field.s):
            if i < field.r:
                row.append(float(vals[i].mid))
            else:
                row.append(float(vals[i].re))
                row.append(float(vals[i].im))
        out.append(row)
    return out


def place_major_slot(field: NumberField, n: int, slot: int,
                     sigma_row: Sequence[float]) -> list[float]:
    """Lay a degree-d embedding row into the slot of a place-major D-vector.

    Place-major layout: one block per infinite place, of width d_v (n+1),
    complex coordinates interleaved (Re, Im) within their block.
    """
    d = field.d
    big = [0.0] * (d * (n + 1))
    place_offset = 0
    for i in range(field.r + field.s):
        d_v = 1 if i < field.r else 2
        src = i if i < field.r else field.r + 2 * (i - field.r)
        dst = place_offset + slot * d_v
        big[dst:dst + d_v] = sigma_row[src:src + d_v]
        place_offset += d_v * (n + 1)
    return big


@dataclass
class HeightLattice:
    ideal: IdealModule
    elem_basis: list[tuple[FieldElement, ...]]   # D vectors of n+1 elements
    rows: np.ndarray                             # D x D floats, place-major layout
    det_ratio: Fraction                          # det = det_ratio (2^-s sqrt|disc|)^{n+1}
    lower: IdealModule
    upper: IdealModule

    def delta_reduced(self) -> Fraction:
        """Delta_N(class) divided by (2^-s sqrt|disc|)^{n+1}; class invariant."""
        return self.det_ratio / (self.ideal.norm() ** (len(self.elem_basis[0])))

    def det_float(self, field: NumberField) -> float:
        n_plus_1 = len(self.elem_basis[0])
        base = 2.0 ** (-field.s) * math.sqrt(abs(field.invariants.disc))
        return float(self.det_ratio) * base ** n_plus_1


def c0_ideal(als) -> IdealModule:
    """The exceptional-support ideal with norm C_fin^d."""
    field = als.field
    out = IdealModule.unit_ideal(field)
    for exc in als.finite_exceptions:
        target = (Fraction(1) / exc.c_v) ** exc.place.d_v  # Np^j
        j = 0
        val = Fraction(1)
        while val < target:
            val *= exc.place.Np
            j += 1
        if val != target:
            raise NonIntegralExponent(
                f"lower constant {exc.c_v} is not in the value group at Np={exc.place.Np}")
        out = out.mul(exc.place.prime ** j)
    if out.norm() != als.C_fin_pow_d:
        raise ConsistencyError("norm of the exceptional ideal must equal C_fin^d")
    return out


def c1_ideal(als) -> IdealModule:
    """Integral ideal with |c1|_v <= 1/C_v at every finite place."""
    field = als.field
    out = IdealModule.unit_ideal(field)
    for exc in als.finite_exceptions:
        target = Fraction(exc.C_v) ** exc.place.d_v
        j = 0
        val = Fraction(1)
        while val < target:
            val *= exc.place.Np
            j += 1
        out = out.mul(exc.place.prime ** j)
    return out


def build_height_lattice(als, ideal: IdealModule,
                         quotient_budget: int = QUOTIENT_BUDGET) -> HeightLattice:
    """Lattice of coordinate vectors obeying the finite conditions at ideal."""
    field = als.field
    n = als.n
    d = field.d
    n_plus_1 = n + 1
    zero = field.from_rational(0)
    if not als.finite_exceptions:
        basis = ideal.basis_elements()
        rows_d = sigma_rows(field, basis)
        elem_basis = []
        rows = []
        for slot in range(n_plus_1):
            for b, row in zip(basis, rows_d):
                vec = [zero] * n_plus_1
                vec[slot] = b
                elem_basis.append(tuple(vec))
                rows.append(place_major_slot(field, n, slot, row))
        return HeightLattice(ideal=ideal, elem_basis=elem_basis,
                             rows=np.array(rows), det_ratio=ideal.norm() ** n_plus_1,
                             lower=ideal, upper=ideal)

    upper = c0_ideal(als).inverse().mul(ideal)
    lower = c1_ideal(als).mul(ideal)
    up_basis = upper.basis_elements()
    # integer coordinates of the lower basis w.r.t. the upper basis
    up_mat = [[b.coords[k] for k in range(d)] for b in up_basis]
    low_in_up = []
    for b in lower.basis_elements():
        sol = linalg.solve_fraction(
            [[up_mat[j][i] for j in range(d)] for i in range(d)], list(b.coords))
        assert sol is not None and all(x.denominator == 1 for x in sol)
        low_in_up.append([int(x) for x in sol])
    h = linalg.hnf(low_in_up)
    diag = [h[i][i] for i in range(d)]
    slot_index = 1
    for x in diag:
        slot_index *= x
    total = slot_index ** n_plus_1
    if total > quotient_budget:
        raise QuotientTooLarge(f"sandwich quotient has {total} cosets")

    import itertools
    slot_reps = []
    for combo in itertools.product(*[range(x) for x in diag]):
        coeffs = list(combo)
        elem = zero
        for c, b in zip(coeffs, up_basis):
            if c:
                elem = elem + b * c
        slot_reps.append((tuple(coeffs), elem))

    ideal_ords = {id(exc): exc_ord_of_ideal(als, exc, ideal)
                  for exc in als.finite_exceptions}
    accepted = []
    for combo in itertools.product(slot_reps, repeat=n_plus_1):
        vec = tuple(elem for _, elem in combo)
        if all(e.is_zero() for e in vec):
            accepted.append(combo)
            continue
        ok = True
        for exc in als.finite_exceptions:
            if exc.nv_ord(als, vec) < ideal_ords[id(exc)]:
                ok = False
                break
        if ok:
            accepted.append(combo)

    # lattice = Z-span of accepted coset representatives plus the lower block
    rows_int = []
    for combo in accepted:
        flat = []
        for coeffs, _ in combo:
            flat.extend(coeffs)
        rows_int.append(flat)
    for slot in range(n_plus_1):
        for row in low_in_up:
            big = [0] * (d * n_plus_1)
            big[slot * d:(slot + 1) * d] = row
            rows_int.append(big)
    h_big = linalg.hnf(rows_int)
    assert len(h_big) == d * n_plus_1
    index_in_upper = 1
    for i in range(len(h_big)):
        index_in_upper *= h_big[i][i]
    # group-order cross-check: accepted cosets times the lattice index must
    # recover the full quotient size
    if len(accepted) * index_in_upper != total:
        raise ConsistencyError("finite-condition cosets do not form a subgroup")

    elem_basis = []
    rows = []
    rows_d = sigma_rows(field, up_basis)
    for hrow in h_big:
        vec = [zero] * n_plus_1
        big = [0.0] * (d * n_plus_1)
        for slot in range(n_plus_1):
            for k in range(d):
                c = hrow[slot * d + k]
                if c:
                    vec[slot] = vec[slot] + up_basis[k] * c
                    part = place_major_slot(field, n, slot, rows_d[k])
                    for col in range(d * n_plus_1):
                        big[col] += c * part[col]
        elem_basis.append(tuple(vec))
        rows.append(big)
    det_ratio = (upper.norm() ** n_plus_1) * index_in_upper
    return HeightLattice(ideal=ideal, elem_basis=elem_basis, rows=np.array(rows),
                         det_ratio=det_ratio, lower=lower, upper=upper)


def exc_ord_of_ideal(als, exc, ideal: IdealModule) -> Fraction:
    return Fraction(ideal.valuation(exc.place.prime))


# -- primitivity -----------------------------------------------------------------

def primitive_test(field: NumberField, sub: Subfield, vec,
                   cross_check: bool = True) -> bool:
    """k(coordinate ratios) = K, cross-checked by integer scalarization."""
    nonzero = [(idx, a) for idx, a in enumerate(vec) if not a.is_zero()]
    if not nonzero:
        raise ZeroVector("primitivity of the zero vector")
    if sub.m == field.d:
        return True
    j0, a0 = nonzero[0]
    inv = a0.inverse()
    ratios = [a * inv for _, a in nonzero]
    deg = field.degree_over(sub, ratios)
    result = deg == sub.e
    if cross_check:
        import itertools
        found = False
        for ms in itertools.product(range(sub.e), repeat=len(ratios)):
            combo = field.from_rational(0)
            for m, rho in zip(ms, ratios):
                if m:
                    combo = combo + rho * m
            if field.degree_over(sub, [combo]) == sub.e:
                found = True
                break
        if found != result:
            raise ConsistencyError("scalarization disagrees with the rank test")
    return result


# -- generator-height search -------------------------------------------------------

@dataclass
class DeltaEstimate:
    g: int
    value: Optional[float]
    value_pow_d: Optional[Fraction]
    witness: Optional[tuple]
    certified: bool
    bound: float


def _candidate_elements(field: NumberField, bound_pow_d: Fraction,
                        budget: int) -> list[FieldElement]:
    """All alpha with house(alpha) <= B^d and denominator norm <= B^d."""
    d = field.d
    basis = IdealModule.unit_ideal(field).basis_elements()
    rows = sigma_rows(field, basis)
    den_cap = math.floor(bound_pow_d)
    seen = {}
    for c in range(1, den_cap + 1):
        radius = math.sqrt(d) * c * float(bound_pow_d) * (1 + 1e-9)
        for coeffs in lattices.enumerate_ball_floats(rows, radius, budget=budget):
            for sign in (1, -1):
                beta = field.from_rational(0)
                for cf, b in zip(coeffs, basis):
                    if cf:
                        beta = beta + b * (sign * cf)
                alpha = beta * Fraction(1, c)
                if alpha.coords in seen:
                    continue
                house2 = max(
                    hi for hi in _abs2_uppers(field, alpha))
                if house2 > float(bound_pow_d) ** 2 * (1 + 1e-6):
                    continue
                seen[alpha.coords] = alpha
    return list(seen.values())


def _abs2_uppers(field: NumberField, alpha: FieldElement):
    vals = field.embed(alpha, Fraction(1, 10 ** 15))
    out = []
    for i in range(field.r + field.s):
        v = vals[i]
        if i < field.r:
            out.append(float(v.abs_bounds()[1]) ** 2)
        else:
            out.append(float(v.abs2_bounds()[1]))
    return out


def _height_one_alpha_pow(field: NumberField, alphas) -> Fraction:
    """H(1, alpha_1, ..)^d via interval evaluation; exact where possible."""
    vec = [field.one] + list(alphas)
    exact, bounds = heights.weil_height_power(field, vec)
    if exact is not None:
        return exact
    return (bounds[0] + bounds[1]) / 2


def delta_search(field: NumberField, sub: Subfield, gs: Sequence[int],
                 bound: Fraction, budget: int = DEFAULT_ENUM_BUDGET) -> dict:
    """Certified minimal generator heights delta_g for each g in gs.

    Search region: house and denominator-ideal norm at most B^d, which
    contains every candidate of height <= B.
    """
    bound = Fraction(bound)
    bound_pow_d = bound ** field.d
    cands = _candidate_elements(field, bound_pow_d, budget)
    # single-generator minimum (used for delta itself and for g = 1)
    best_single: Optional[tuple] = None
    degrees = {}
    for alpha in cands:
        deg = field.degree_over(sub, [alpha])
        degrees[alpha.coords] = deg
        if deg != sub.e:
            continue
        pw = _height_one_alpha_pow(field, [alpha])
        if pw > bound_pow_d * (1 + Fraction(1, 10 ** 9)):
            continue
        if best_single is None or pw < best_single[0]:
            best_single = (pw, alpha)
    out = {}
    e = sub.e
    for g in gs:
        if g == 1:
            # pairs (alpha in k, beta): padding with 0 shows delta_1 = delta
            if best_single is None:
                out[g] = DeltaEstimate(g=1, value=None, value_pow_d=None,
                                       witness=None, certified=False,
                                       bound=float(bound))
                continue
            pw, alpha = best_single
            out[g] = DeltaEstimate(
                g=1, value=float(pw) ** (1.0 / field.d), value_pow_d=pw,
                witness=(tuple(field.from_rational(0).coords), tuple(alpha.coords)),
                certified=pw <= bound_pow_d, bound=float(bound))
            continue
        best_pair = None
        firsts = [a for a in cands if degrees[a.coords] == g]
        if len(firsts) * len(cands) > budget:
            raise BudgetExceeded("pair search too large")
        for a in firsts:
            for b in cands:
                if field.degree_over(sub, [a, b]) != e:
                    continue
                pw = _height_one_alpha_pow(field, [a, b])
                if pw > bound_pow_d * (1 + Fraction(1, 10 ** 9)):
                    continue
                if best_pair is None or pw < best_pair[0]:
                    best_pair = (pw, a, b)
        if best_pair is None:
            out[g] = DeltaEstimate(g=g, value=None, value_pow_d=None,
                                   witness=None, certified=False,
                                   bound=float(bound))
        else:
            pw, a, b = best_pair
            out[g] = DeltaEstimate(
                g=g, value=float(pw) ** (1.0 / field.d), value_pow_d=pw,
                witness=(tuple(a.coords), tuple(b.coords)),
                certified=pw <= bound_pow_d, bound=float(bound))
    # delta <= 2 e delta_g for every certified g
    delta_val = out.get(1).value if 1 in out and out[1].value is not None else None
    if delta_val is None and best_single is not None:
        delta_val = float(best_single[0]) ** (1.0 / field.d)
    if delta_val is not None:
        for g, est in out.items():
            if est.value is not None:
                assert delta_val <= 2 * e * est.value * (1 + 1e-9), \
                    "primitive-element comparison failed"
    return out


# -- zeta and the leading constant ----------------------------------------------------

def kronecker_symbol(a: int, n: int) -> int:
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        return (-1 if a < 0 else 1) * kronecker_symbol(a, -n)
    t = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            t = -t
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def dedekind_zeta(field: NumberField, s: int,
                  terms: int = 2_000_000) -> tuple[float, float]:
    """zeta_K(s) with a rigorous error estimate (series for degree <= 2)."""
    if s < 2:
        raise ZetaUnavailable("argument must be >= 2")
    if field.d == 1:
        with mpmath.workdps(40):
            return float(mpmath.zeta(s)), 1e-30
    if field.d == 2:
        disc = field.invariants.disc
        period = abs(disc)
        chi = np.array([kronecker_symbol(disc, m) for m in range(period)],
                       dtype=float)
        m = np.arange(1, terms + 1, dtype=float)
        chi_vals = chi[np.arange(1, terms + 1) % period]
        l_val = float(np.sum(chi_vals / m ** s))
        l_err = period * (terms ** (-s)) * (s + 1)
        with mpmath.workdps(40):
            z = float(mpmath.zeta(s))
        return z * l_val, z * l_err + 1e-25
    zeta_cfg = field.invariants.zeta.get(s)
    if zeta_cfg is None:
        raise ZetaUnavailable(
            f"degree {field.d} needs a configured zeta value at s={s}")
    return zeta_cfg


def schanuel_constant(field: NumberField, n: int) -> tuple[float, float]:
    """Leading coefficient of the bounded-height point count, with error."""
    inv = field.invariants
    zeta, zeta_err = dedekind_zeta(field, n + 1)
    base = (2.0 ** field.r * (2 * math.pi) ** field.s) / math.sqrt(abs(inv.disc))
    val = (inv.h * inv.regulator / (inv.w * zeta)) * base ** (n + 1) \
        * (n + 1) ** (field.r + field.s - 1)
    err = val * (zeta_err / zeta)
    return val, err


def global_volume(als, mc_samples: int = 200_000, seed: int = 0) -> dict:
    """Finite and infinite volume factors with their structural checks."""
    field = als.field
    n = als.n
    inv = field.invariants
    deltas = []
    for rep in inv.class_reps:
        hl = build_height_lattice(als, rep)
        deltas.append(hl.delta_reduced())
    v_fin = sum(Fraction(1) / x for x in deltas) / inv.h
    if als.kind in ("standard", "linear_section"):
        v_inf = (2.0 ** (field.r * (n + 1))) * math.pi ** (field.s * (n + 1))
        v_inf_ci = 0.0
    else:
        v_inf = 1.0
        v_inf_ci = 0.0
        for part in als.infinite_parts:
            dim = part.d_v * (n + 1)
            c_inf = float(als.C_inf)
            half = math.sqrt(n + 1) * c_inf if part.d_v == 2 else c_inf * (n + 1) ** 0.5
            box = [(-half * 1.5, half * 1.5)] * dim

            def member(pts, ev=part.evaluator):
                return np.array([ev(p) < 1.0 for p in pts])

            est, ci = counting.volume_mc(member, box, mc_samples, seed=seed)
            v_inf_ci = v_inf_ci + ci * v_inf
            v_inf *= est
    bound = (2 * float(als.C_inf)) ** (field.d * (n + 1))
    checks = {"v_inf_bound_ok": v_inf <= bound * (1 + 1e-9)}
    if als.kind == "standard":
        checks["v_fin_is_one"] = (v_fin == 1)
    return {"V_fin": v_fin, "V_inf": v_inf, "V_inf_ci": v_inf_ci,
            "V_N": float(v_fin) * v_inf, "checks": checks,
            "delta_reduced": deltas}


def main_term_coefficient(field: NumberField, als, n: int) -> tuple[float, float]:
    """2^{-r(n+1)} pi^{-s(n+1)} V_N S_K(n), with propagated error."""
    vol = global_volume(als)
    s_k, s_err = schanuel_constant(field, n)
    scale = 2.0 ** (-field.r * (n + 1)) * math.pi ** (-field.s * (n + 1))
    coeff = scale * vol["V_N"] * s_k
    err = scale * (vol["V_N"] * s_err + vol["V_inf_ci"] * s_k)
    return coeff, err


# -- ideal enumeration and the divisor-sum function ------------------------------------

def enumerate_ideals(field: NumberField, norm_bound: int) -> list[IdealModule]:
    """All integral ideals of norm <= norm_bound (HNF enumeration)."""
    if norm_bound < 1:
        return []
    d = field.d
    out = []
    if d == 1:
        for m in range(1, norm_bound + 1):
            out.append(IdealModule.from_generators(field, [field.from_rational(m)]))
        return out
    gens = [field.basis_element(k) for k in range(d)
            if field.basis_element(k) != field.one]
    for m in range(1, norm_bound + 1):
        for diag in _divisor_tuples(m, d):
            for num in _hnf_candidates(diag):
                mod = IdealModule(field, num, 1)
                if all(mod.contains(b * w)
                       for b in mod.basis_elements() for w in gens):
                    out.append(mod)
    return out


def _divisor_tuples(m: int, d: int):
    if d == 1:
        yield (m,)
        return
    for a in range(1, m + 1):
        if m % a == 0:
            for rest in _divisor_tuples(m // a, d - 1):
                yield (a,) + rest


def _hnf_candidates(diag):
    """Upper-triangular HNF matrices with the given diagonal."""
    import itertools
    d = len(diag)
    free_positions = [(j, i) for i in range(d) for j in range(i)]
    ranges = [range(diag[i]) for (j, i) in free_positions]
    for combo in itertools.product(*ranges):
        mat = [[0] * d for _ in range(d)]
        for i in range(d):
            mat[i][i] = diag[i]
        for (pos, val) in zip(free_positions, combo):
            j, i = pos
            mat[j][i] = val
        yield mat


class MoebiusTable:
    """Divisor-sum inversion coefficients over the ideal lattice, computed
    from the containment order alone (no prime factorization)."""

    def __init__(self, field: NumberField):
        self.field = field
        self._mu: dict = {}
        self._ideals: list[IdealModule] = []
        self._ideals_bound = 0

    def ideals_up_to(self, bound: int) -> list[IdealModule]:
        if bound > self._ideals_bound:
            self._ideals = enumerate_ideals(self.field, bound)
            self._ideals_bound = bound
        return [i for i in self._ideals if i.norm() <= bound]

    def mu(self, ideal: IdealModule) -> int:
        key = ideal.key()
        if key in self._mu:
            return self._mu[key]
        nrm = ideal.norm()
        assert nrm.denominator == 1
        if nrm == 1:
            self._mu[key] = 1
            return 1
        total = 0
        for j in self.ideals_up_to(int(nrm)):
            if j.key() == key:
                continue
            if j.contains_ideal(ideal):
                total += self.mu(j)
        self._mu[key] = -total
        return -total


# -- the censuses ------------------------------------------------------------------------

@dataclass
class CensusRow:
    x: Fraction
    count_all: int
    count_primitive: int
    main_term: float
    residual: float
    method: str
    detail: dict = dc_field(default_factory=dict)


@dataclass
class CensusContext:
    field: NumberField
    sub: Subfield
    als: object
    n: int
    geometry: basicset.BasicSetGeometry
    enum_budget: int = DEFAULT_ENUM_BUDGET
    primitive_cross_check: bool = False

    def __post_init__(self):
        self._prim_cache: dict = {}
        self._lattice_cache: dict = {}
        self._main_coeff: Optional[tuple[float, float]] = None

    def lattice_for(self, ideal: IdealModule) -> HeightLattice:
        key = ideal.key()
        if key not in self._lattice_cache:
            self._lattice_cache[key] = build_height_lattice(self.als, ideal)
        return self._lattice_cache[key]

    def main_coefficient(self) -> tuple[float, float]:
        if self._main_coeff is None:
            self._main_coeff = main_term_coefficient(self.field, self.als, self.n)
        return self._main_coeff

    def is_primitive(self, canon) -> bool:
        if canon not in self._prim_cache:
            vec = [self.field.from_coords(c) for c in canon]
            self._prim_cache[canon] = primitive_test(
                self.field, self.sub, vec, cross_check=self.primitive_cross_check)
        return self._prim_cache[canon]


def make_context(field: NumberField, base_field: str, als, n: int,
                 **kw) -> CensusContext:
    return CensusContext(field=field, sub=field.subfield(base_field), als=als,
                         n=n, geometry=basicset.build_geometry(field), **kw)


def _candidate_coeff_sets(ctx: CensusContext, hl: HeightLattice, t_float: float):
    """Candidate coefficient vectors per cell ball, deduplicated."""
    geom = ctx.geometry
    seen = set()
    radius = basicset.enclosure_radius(ctx.field, ctx.als, ctx.n, t_float) * (1 + 1e-9)
    for cell in geom.cells:
        rows = basicset.tau_apply(geom, cell, hl.rows)
        for coeffs in lattices.enumerate_ball_floats(rows.tolist(), radius,
                                                     budget=ctx.enum_budget):
            seen.add(coeffs)
    return seen


def _prefilter_inf_power(ctx: CensusContext, hl: HeightLattice, coeff_set,
                         t_pow_d: Fraction):
    """Float screen of H_inf^d <= T^d with a relative safety band."""
    if not coeff_set:
        return []
    ordered = sorted(coeff_set)
    coeffs = np.array(ordered, dtype=float)
    vecs = coeffs @ hl.rows
    field = ctx.field
    n_plus_1 = ctx.n + 1
    m = vecs.shape[0]
    power = np.ones(m)
    offset = 0
    for i in range(field.r + field.s):
        d_v = 1 if i < field.r else 2
        width = d_v * n_plus_1
        block = vecs[:, offset:offset + width]
        if d_v == 1:
            nv = np.max(np.abs(block), axis=1)
        else:
            zz = block.reshape(m, -1, 2)
            nv = np.max(zz[:, :, 0] ** 2 + zz[:, :, 1] ** 2, axis=1)
        power *= nv
        offset += width
    keep = power <= float(t_pow_d) * (1 + 1e-6) + 1e-9
    return [ordered[i] for i in np.flatnonzero(keep)]


def _pullback_raw(field: NumberField, hl: HeightLattice, coeffs) -> tuple:
    n_plus_1 = len(hl.elem_basis[0])
    zero = field.from_rational(0)
    vec = [zero] * n_plus_1
    for c, base_vec in zip(coeffs, hl.elem_basis):
        if c:
            for slot in range(n_plus_1):
                if not base_vec[slot].is_zero():
                    vec[slot] = vec[slot] + base_vec[slot] * c
    return tuple(vec)


def _pullback(ctx: CensusContext, hl: HeightLattice, coeffs) -> tuple:
    return _pullback_raw(ctx.field, hl, coeffs)


def _canonical_projective(vec) -> tuple:
    j0 = next(i for i, a in enumerate(vec) if not a.is_zero())
    inv = vec[j0].inverse()
    return tuple((a * inv).coords for a in vec)


def _value_ideal(ctx: CensusContext, vec) -> IdealModule:
    """The unique ideal matching the finite values of the vector."""
    content = coordinate_ideal(ctx.field, vec)
    for exc in ctx.als.finite_exceptions:
        shift = int(exc.max_ord(ctx.als, vec) - exc.nv_ord(ctx.als, vec))
        if shift:
            content = content.mul(exc.place.prime.inverse() ** shift)
    return content


def census_direct(ctx: CensusContext, x: Fraction) -> CensusRow:
    """Exact count of projective points of height <= x (all and primitive)."""
    x = Fraction(x)
    field = ctx.field
    if field.d == 1 and ctx.als.kind == "standard" and \
            (2 * math.floor(x) + 1) ** (ctx.n + 1) <= 4 * 10 ** 7:
        return _census_direct_rational(ctx, x)
    seen: dict = {}
    for rep in field.invariants.class_reps:
        hl = ctx.lattice_for(rep)
        t_pow_d = rep.norm() * x ** field.d
        t_float = float(t_pow_d) ** (1.0 / field.d)
        cand = _candidate_coeff_sets(ctx, hl, t_float)
        survivors = _prefilter_inf_power(ctx, hl, cand, t_pow_d)
        for coeffs in survivors:
            vec = _pullback(ctx, hl, coeffs)
            if all(a.is_zero() for a in vec):
                continue
            if _value_ideal(ctx, vec) != rep:
                continue
            if ctx.als.compare_height(vec, x) > 0:
                continue
            canon = _canonical_projective(vec)
            if canon not in seen:
                seen[canon] = ctx.is_primitive(canon)
    count_all = len(seen)
    count_prim = sum(1 for v in seen.values() if v)
    coeff, _ = ctx.main_coefficient()
    main = coeff * float(x) ** (field.d * (ctx.n + 1))
    return CensusRow(x=x, count_all=count_all, count_primitive=count_prim,
                     main_term=main, residual=count_prim - main, method="direct")


def _census_direct_rational(ctx: CensusContext, x: Fraction) -> CensusRow:
    """Vectorized fast path over the rationals (same algorithm, int dtype)."""
    n_plus_1 = ctx.n + 1
    cap = math.floor(x)
    if cap >= 1:
        rng = np.arange(-cap, cap + 1)
        grids = np.meshgrid(*([rng] * n_plus_1), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        pts = pts[np.any(pts != 0, axis=1)]
        heights_ok = np.max(np.abs(pts), axis=1) * x.denominator <= x.numerator
        pts = pts[heights_ok]
        g = np.gcd.reduce(np.abs(pts), axis=1)
        pts = pts[g == 1]
        lead = np.argmax(pts != 0, axis=1)
        signs = np.sign(pts[np.arange(len(pts)), lead])
        pts = pts * signs[:, None]
        count = len(np.unique(pts, axis=0))
    else:
        count = 0
    coeff, _ = ctx.main_coefficient()
    main = coeff * float(x) ** (ctx.field.d * n_plus_1)
    return CensusRow(x=x, count_all=count, count_primitive=count,
                     main_term=main, residual=count - main, method="direct")


def moebius_truncation_bound(ctx: CensusContext, rep_norm: Fraction,
                             t_float: float) -> int:
    """Norm bound past which every divisor term provably vanishes.

    A nonzero shell point has a nonzero coordinate in the enlarged ideal, so
    H_inf >= C_inf^{-1} |Norm|^{1/d} >= C_inf^{-1} (N ideal / C_fin^d)^{1/d};
    combined with the first-minimum bound and, over the rationals with n = 1,
    the classical restriction, whichever is smallest.
    """
    field = ctx.field
    d = field.d
    c_fin = float(ctx.als.C_fin)
    c_inf = float(ctx.als.C_inf)
    norm_based = (c_inf * t_float) ** d * c_fin ** d / float(rep_norm)
    delta1 = basicset.enclosure_radius(field, ctx.als, ctx.n, 1.0)
    lam_based = (delta1 * t_float * math.sqrt(2.0 / d) * c_fin ** 2) ** d \
        / float(rep_norm)
    vanish = min(norm_based, lam_based)
    if (ctx.n, d) == (1, 1):
        exact = 2 * ctx.als.C * t_float / float(rep_norm)
        vanish = min(vanish, exact)
    return max(math.floor(vanish * (1 + 1e-9)), 0)


def _place_power_blocks(ctx: CensusContext, vecs: np.ndarray):
    """Per-place N_v^{d_v} columns for a batch of embedded vectors."""
    field = ctx.field
    n_plus_1 = ctx.n + 1
    m = vecs.shape[0]
    cols = np.empty((m, field.r + field.s))
    offset = 0
    for i in range(field.r + field.s):
        d_v = 1 if i < field.r else 2
        width = d_v * n_plus_1
        block = vecs[:, offset:offset + width]
        if d_v == 1:
            cols[:, i] = np.max(np.abs(block), axis=1)
        else:
            zz = block.reshape(m, -1, 2)
            cols[:, i] = np.max(zz[:, :, 0] ** 2 + zz[:, :, 1] ** 2, axis=1)
        offset += width
    return cols


def _quadratic_cross_primitive(ctx: CensusContext, hl: HeightLattice,
                               coeffs: np.ndarray):
    """Vectorized primitivity for relative-degree-2 extensions: primitive iff
    some pair of coordinates has a nonzero 2x2 coordinate cross (exact
    integer arithmetic; sizes are checked against the int64 range)."""
    tensor = np.array([[[int(x) for x in base_vec[slot].coords]
                        for slot in range(ctx.n + 1)]
                       for base_vec in hl.elem_basis], dtype=np.int64)
    coeffs = coeffs.astype(np.int64)
    scale = (np.abs(coeffs).max(initial=1) *
             np.abs(tensor).max(initial=1) * tensor.shape[0])
    assert scale < 2 ** 30, "coordinate sizes exceed the vectorized range"
    coords = np.einsum("mk,ksc->msc", coeffs, tensor)
    m = coords.shape[0]
    prim = np.zeros(m, dtype=bool)
    n_plus_1 = ctx.n + 1
    for i in range(n_plus_1):
        for j in range(i + 1, n_plus_1):
            cross = coords[:, i, 0] * coords[:, j, 1] \
                - coords[:, j, 0] * coords[:, i, 1]
            prim |= cross != 0
    return prim


def _z_star_counts(ctx: CensusContext, hl: HeightLattice, t_pow_d: Fraction,
                   t_float: float) -> tuple[int, int]:
    """Lattice points of the full shell, all and primitive (no unit division).

    Decisions are float-screened with exact arithmetic on every point within
    a relative 1e-6 band of the radial boundary or 1e-7 of a cell seam; the
    shell is symmetric under negation so only canonical-sign representatives
    are processed and the counts doubled.
    """
    geom = ctx.geometry
    field = ctx.field
    cand = _candidate_coeff_sets(ctx, hl, t_float)
    if not cand:
        return 0, 0
    ordered = sorted(cand)
    arr = np.array(ordered, dtype=float)
    vecs = arr @ hl.rows
    cols = _place_power_blocks(ctx, vecs)
    power = np.prod(cols, axis=1)
    t_val = float(t_pow_d)
    clear_in = power <= t_val * (1 - 1e-6)
    maybe = power <= t_val * (1 + 1e-6)
    radial_band = maybe & ~clear_in
    if geom.q == 0:
        accepted_float = clear_in
        exact_mask = radial_band
    else:
        degrees = np.array(geom.vecdelta, dtype=float)
        safe = np.where(cols > 0, cols, 1.0)
        y = np.log(safe)
        # complex columns already carry the square
        for i in range(field.r + field.s):
            if i >= field.r:
                continue
            y[:, i] *= degrees[i]
        t_h = y.sum(axis=1) / field.d
        x = y - t_h[:, None] * degrees[None, :]
        c = x @ np.array(geom.coord_matrix).T
        s = c * np.array(geom.n_js, dtype=float)[None, :]
        near_seam = np.any(np.abs(s - np.round(s)) < 1e-7, axis=1)
        inside = np.all(c >= 0.0, axis=1) & np.all(c < 1.0, axis=1)
        positive = np.all(cols > 0, axis=1)
        accepted_float = clear_in & inside & ~near_seam & positive
        exact_mask = maybe & (radial_band | near_seam)
    count_all = int(np.count_nonzero(accepted_float))
    exact_indices = np.flatnonzero(exact_mask)
    exact_accept_idx = []
    for idx in exact_indices:
        vec = _pullback(ctx, hl, ordered[idx])
        if all(a.is_zero() for a in vec):
            continue
        dec = basicset.sf_membership(geom, ctx.als, t_float, vec,
                                     t_pow_d=t_pow_d)
        if dec.accepted:
            exact_accept_idx.append(idx)
    count_all += len(exact_accept_idx)
    # primitivity over the accepted set
    if ctx.sub.m == field.d:
        return 2 * count_all, 2 * count_all
    acc_idx = np.concatenate([np.flatnonzero(accepted_float),
                              np.array(exact_accept_idx, dtype=int)]) \
        if exact_accept_idx else np.flatnonzero(accepted_float)
    if field.d == 2 and ctx.sub.e == 2 and \
            all(b[s].denominator() == 1
                for b in hl.elem_basis for s in range(ctx.n + 1)):
        arr_int = np.array(ordered, dtype=np.int64)
        prim = _quadratic_cross_primitive(ctx, hl, arr_int[acc_idx])
        count_prim = int(np.count_nonzero(prim))
    else:
        count_prim = 0
        for idx in acc_idx:
            vec = _pullback(ctx, hl, ordered[idx])
            canon = _canonical_projective(vec)
            if ctx.is_primitive(canon):
                count_prim += 1
    return 2 * count_all, 2 * count_prim


def census_decomposed(ctx: CensusContext, x: Fraction,
                      moebius_depth: Optional[int] = None,
                      mtable: Optional[MoebiusTable] = None) -> CensusRow:
    """Census through the class/divisor/cell decomposition pipeline."""
    x = Fraction(x)
    field = ctx.field
    w_k = field.invariants.w
    mtable = mtable or MoebiusTable(field)
    total_all = 0
    total_prim = 0
    detail = {"terms": 0, "truncation": []}
    for rep in field.invariants.class_reps:
        t_pow_d = rep.norm() * x ** field.d
        t_float = float(t_pow_d) ** (1.0 / field.d)
        bound = moebius_truncation_bound(ctx, rep.norm(), t_float)
        detail["truncation"].append(bound)
        for divisor in mtable.ideals_up_to(bound):
            mu = mtable.mu(divisor)
            if mu == 0:
                continue
            if moebius_depth is not None and divisor.norm() > moebius_depth:
                hl = ctx.lattice_for(rep.mul(divisor))
                ca, cp = _z_star_counts(ctx, hl, t_pow_d, t_float)
                if ca or cp:
                    raise TruncationInsufficient(
                        f"nonzero term at divisor norm {divisor.norm()}")
                continue
            hl = ctx.lattice_for(rep.mul(divisor))
            ca, cp = _z_star_counts(ctx, hl, t_pow_d, t_float)
            total_all += mu * ca
            total_prim += mu * cp
            detail["terms"] += 1
    if total_all % w_k or total_prim % w_k:
        raise ConsistencyError(
            f"counts {total_all}/{total_prim} not divisible by w_K = {w_k}")
    count_all = total_all // w_k
    count_prim = total_prim // w_k
    coeff, _ = ctx.main_coefficient()
    main = coeff * float(x) ** (field.d * (ctx.n + 1))
    return CensusRow(x=x, count_all=count_all, count_primitive=count_prim,
                     main_term=main, residual=count_prim - main,
                     method="decomposed", detail=detail)


# -- structural reports ---------------------------------------------------------------

def minima_bounds_check(ctx: CensusContext, ideal: IdealModule,
                        cell: tuple, deltas: dict) -> dict:
    """Minima lower bounds at one cell and one ideal (report + pass flags)."""
    field = ctx.field
    d = field.d
    upper = c0_ideal(ctx.als).inverse().mul(ideal)
    rows = sigma_rows(field, upper.basis_elements())
    scal = basicset.tau0_scaling(ctx.geometry, cell)
    scaled = [[rows[i][k] * scal[k] for k in range(d)] for i in range(d)]
    rat_rows, slack = lattices.rationalize_rows(scaled)
    lat = lattices.LatticeBasis(rat_rows, slack=slack)
    cert = lat.minima()
    lam = cert.lambdas()
    thetas = []
    for coeffs in cert.witness_coeffs:
        theta = field.from_rational(0)
        for c, b in zip(coeffs, upper.basis_elements()):
            if c:
                theta = theta + b * c
        thetas.append(theta)
    inv0 = thetas[0].inverse()
    ratios = [t * inv0 for t in thetas]
    l_val = None
    for l_try in range(1, d + 1):
        if field.degree_over(ctx.sub, ratios[:l_try]) == ctx.sub.e:
            l_val = l_try
            break
    assert l_val is not None
    l_cap = d // 2 + 1
    g = 1 if l_val == 1 else field.degree_over(ctx.sub, ratios[:l_val - 1])
    c_fin = float(ctx.als.C_fin)
    n_d = float(ideal.norm())
    lam1_bound = math.sqrt(d / 2.0) / c_fin * n_d ** (1.0 / d)
    delta_g = deltas[g].value if g in deltas and deltas[g].value else 1.0
    e = ctx.sub.e
    laml_bound = delta_g * n_d ** (1.0 / d) / (math.sqrt(2) * e * d * c_fin)
    tol = 1 + 1e-9
    report = {
        "l": l_val,
        "l_cap_ok": l_val <= l_cap,
        "g": g,
        "lambda1": lam[0],
        "lambda1_bound": lam1_bound,
        "lambda1_ok": lam[0] * tol >= lam1_bound - 10 * slack,
        "lambda_l": lam[l_val - 1],
        "lambda_l_bound": laml_bound,
        "lambda_l_ok": lam[l_val - 1] * tol >= laml_bound - 10 * slack,
    }
    # sampled length bound for primitive integral vectors
    rng = np.random.default_rng(7)
    samples_ok = True
    basis_elems = upper.basis_elements()
    for _ in range(20):
        coeff = rng.integers(-3, 4, size=(ctx.n + 1, d))
        vec = []
        for slot in range(ctx.n + 1):
            elem = field.from_rational(0)
            for c, b in zip(coeff[slot], basis_elems):
                if c:
                    elem = elem + b * int(c)
            vec.append(elem)
        if all(v.is_zero() for v in vec):
            continue
        if not primitive_test(field, ctx.sub, vec, cross_check=False):
            continue
        flat = []
        for slot in range(ctx.n + 1):
            r = sigma_rows(field, [vec[slot]])[0]
            flat.extend(r[k] * scal[k] for k in range(d))
        length = math.sqrt(sum(v * v for v in flat))
        if length * tol < lam[l_val - 1] - 10 * slack:
            samples_ok = False
    report["primitive_length_ok"] = samples_ok
    report["pass"] = bool(report["l_cap_ok"] and report["lambda1_ok"]
                          and report["lambda_l_ok"] and samples_ok)
    return report


def asymptotic_fit(rows: Sequence[CensusRow], field: NumberField, als, n: int,
                   coeff_tolerance: float = 0.1) -> dict:
    """Leading-coefficient estimate and residual-exponent fit over a grid."""
    if len(rows) < 5:
        raise GridTooSmall("need at least 5 grid points")
    rows = sorted(rows, key=lambda r: r.x)
    d = field.d
    exp_main = d * (n + 1)
    coeff_pred, _ = main_term_coefficient(field, als, n)
    largest = rows[-1]
    coeff_est = largest.count_primitive / float(largest.x) ** exp_main
    xs, ys = [], []
    for r in rows:
        resid = abs(r.count_primitive - r.main_term)
        if resid <= 0:
            continue
        l_n = math.log(max(2.0, 2.0 * als.C * float(r.x))) if (n, d) == (1, 1) else 1.0
        xs.append(math.log(float(r.x)))
        ys.append(math.log(resid / l_n))
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else 0.0
    ok_coeff = abs(coeff_est - coeff_pred) <= coeff_tolerance * coeff_pred
    ok_slope = slope <= exp_main - 1 + 0.3
    return {"coefficient": coeff_est, "predicted": coeff_pred,
            "residual_slope": slope, "slope_cap": exp_main - 1 + 0.3,
            "pass": bool(ok_coeff and ok_slope)}


def residual_trend_slope(rows: Sequence[CensusRow], field: NumberField, als,
                         n: int, top_half: bool = True) -> float:
    """Log-log slope of |Z - main| / (X^{d(n+1)-1} L_N) over the grid tail."""
    rows = sorted(rows, key=lambda r: r.x)
    if top_half:
        rows = rows[len(rows) // 2:]
    d = field.d
    xs, ys = [], []
    for r in rows:
        resid = abs(r.count_primitive - r.main_term)
        l_n = math.log(max(2.0, 2.0 * als.C * float(r.x))) if (n, d) == (1, 1) else 1.0
        denom = float(r.x) ** (d * (n + 1) - 1) * l_n
        if resid <= 0:
            resid = 0.5
        xs.append(math.log(float(r.x)))
        ys.append(math.log(resid / denom))
    if len(xs) < 2:
        return 0.0
    return float(np.polyfit(xs, ys, 1)[0])


def lemma_truncation_series(ctx: CensusContext, bounds: Sequence[int],
                            mtable: Optional[MoebiusTable] = None) -> dict:
    """Partial divisor sums converging to (1/zeta_K) * sum 1/Delta-reduced."""
    field = ctx.field
    mtable = mtable or MoebiusTable(field)
    n_plus_1 = ctx.n + 1
    partials = []
    reps = field.invariants.class_reps
    for bnd in bounds:
        total = Fraction(0)
        for rep in reps:
            for divisor in mtable.ideals_up_to(bnd):
                mu = mtable.mu(divisor)
                if mu == 0:
                    continue
                hl = ctx.lattice_for(rep.mul(divisor))
                total += Fraction(mu, 1) / (divisor.norm() ** n_plus_1) \
                    / hl.delta_reduced()
        partials.append(float(total))
    zeta, _ = dedekind_zeta(field, n_plus_1)
    target = 0.0
    for rep in reps:
        target += 1.0 / float(ctx.lattice_for(rep).delta_reduced())
    target /= zeta
    errs = [abs(p - target) for p in partials]
    # divisor partial sums oscillate; require decay from head to tail
    return {"partials": partials, "target": target, "errors": errs,
            "converging": errs[-1] <= errs[0] + 1e-12}
