"""Places, the Weil height, adelic Lipschitz systems and their heights.

Heights are compared against rational thresholds exactly whenever the
arithmetic allows it: the d-th power of the finite part is always an exact
rational for the supported systems, and the infinite part is decided through
embedding intervals with exact algebraic tie-breaking (norm identities for
fields of degree <= 2).  Only genuinely transcendental comparisons (Mahler
measures, higher-degree mixed products) fall back to a refine-then-midpoint
rule, and those decisions are flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import counting
from .errors import (NotANorm, PrecisionStall, UnsupportedSpec, ZeroVector)
from .intervals import CItv, RItv
from .linalg import sqrt_lower, sqrt_upper
from .numfield import (FieldElement, IdealModule, NumberField,
                       coordinate_ideal)

_PREC_LADDER = [Fraction(1, 10 ** k) for k in (12, 20, 30, 45, 60, 80)]


@dataclass(frozen=True)
class ArchimedeanPlace:
    index: int       # embedding index among 0..r+s-1
    d_v: int         # 1 real, 2 complex


@dataclass(frozen=True)
class FinitePlace:
    prime: IdealModule
    Np: int
    d_v: int


@dataclass
class LipschitzDistanceFunction:
    """Distance function at an infinite place: evaluator on the real block
    plus (optionally) boundary charts with declared constants."""

    n: int
    d_v: int
    kind: str                                  # max-norm | mahler | custom
    evaluator: Callable[[np.ndarray], float]
    charts: Optional[counting.LipChartSet]
    M_v: Optional[int]
    L_v: Optional[float]
    c_v: Fraction = Fraction(1)


@dataclass
class FiniteException:
    """A finite place where the distance function is not the max-norm."""

    place: FinitePlace
    c_v: Fraction                      # lower constant, in the value group
    C_v: Fraction                      # upper constant >= 1
    linear_form: Optional[tuple] = None   # integer coefficients of ell
    divisor_ord: int = 0                  # ord_p(a)

    def nv_ord(self, als: "AdelicLipschitzSystem",
               vec: Sequence[FieldElement]) -> Fraction:
        """Valuation m with N_v(vec) = Np^(-m / d_v)."""
        ords = [als._element_ord(self, a) for a in vec if not a.is_zero()]
        m = min(ords)
        if self.linear_form is not None:
            ell = _linear_combination(als.field, self.linear_form, vec)
            if not ell.is_zero():
                m = min(m, als._element_ord(self, ell) - self.divisor_ord)
        return m

    def max_ord(self, als: "AdelicLipschitzSystem",
                vec: Sequence[FieldElement]) -> Fraction:
        return min(als._element_ord(self, a) for a in vec if not a.is_zero())


def _linear_combination(field: NumberField, coeffs, vec) -> FieldElement:
    out = field.from_rational(0)
    for c, a in zip(coeffs, vec):
        if c:
            out = out + a * c
    return out


class AdelicLipschitzSystem:
    """An adelic Lipschitz system of dimension n on a number field."""

    def __init__(self, field: NumberField, n: int, kind: str,
                 infinite_parts, finite_exceptions,
                 linear_form=None, divisor: int = 1):
        self.field = field
        self.n = n
        self.kind = kind
        self.infinite_parts: list[LipschitzDistanceFunction] = infinite_parts
        self.finite_exceptions: list[FiniteException] = finite_exceptions
        self.linear_form = linear_form
        self.divisor = divisor
        self._ord_cache: dict = {}
        self.warnings: list[str] = []
        # associated constants: C_fin^d = prod c_v^{-d_v} is exact
        self.C_fin_pow_d = Fraction(1)
        for exc in finite_exceptions:
            self.C_fin_pow_d *= (Fraction(1) / exc.c_v) ** exc.place.d_v
        self.C_fin = float(self.C_fin_pow_d) ** (1.0 / field.d)
        self.C_inf = max((Fraction(1) / p.c_v for p in infinite_parts),
                         default=Fraction(1))
        self.C = self.C_fin * float(self.C_inf)
        ms = [p.M_v for p in infinite_parts if p.M_v is not None]
        ls = [p.L_v for p in infinite_parts if p.L_v is not None]
        self.M_N = max(ms) if len(ms) == len(infinite_parts) and ms else None
        self.L_N = max(ls) if len(ls) == len(infinite_parts) and ls else None

    # -- constants -------------------------------------------------------------

    def a_constant(self) -> Optional[float]:
        """M^d (C (L+1))^(d(n+1)-1), when the chart constants exist."""
        if self.M_N is None or self.L_N is None:
            return None
        d = self.field.d
        return (self.M_N ** d) * (self.C * (self.L_N + 1)) ** (d * (self.n + 1) - 1)

    def constants_table(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "C_fin": self.C_fin,
            "C_fin_pow_d": str(self.C_fin_pow_d),
            "C_inf": float(self.C_inf),
            "C": self.C,
            "M_N": self.M_N,
            "L_N": self.L_N,
            "A_N": self.a_constant(),
        }

    # -- finite side -------------------------------------------------------------

    def _element_ord(self, exc: FiniteException, alpha: FieldElement) -> Fraction:
        key = (id(exc), alpha.coords)
        hit = self._ord_cache.get(key)
        if hit is not None:
            return hit
        if self.field.d == 1:
            x = alpha.coords[0] * self.field.basis_mat[0][0]
            p = exc.place.Np
            m = 0
            num, den = x.numerator, x.denominator
            while num % p == 0:
                num //= p
                m += 1
            while den % p == 0:
                den //= p
                m -= 1
            out = Fraction(m)
        else:
            ideal = IdealModule.from_generators(self.field, [alpha])
            out = Fraction(ideal.valuation(exc.place.prime))
        self._ord_cache[key] = out
        return out

    def finite_power(self, vec: Sequence[FieldElement]) -> Fraction:
        """Exact H_fin(vec)^d as a positive rational."""
        ideal = coordinate_ideal(self.field, vec)
        out = Fraction(1) / ideal.norm()
        for exc in self.finite_exceptions:
            m = exc.nv_ord(self, vec)
            m0 = exc.max_ord(self, vec)
            out *= Fraction(exc.place.Np) ** int(m0 - m)
        return out

    def content_ord_shifts(self, vec) -> dict:
        """Per-exception ord difference between N_v and the max-norm."""
        return {id(exc): int(exc.max_ord(self, vec) - exc.nv_ord(self, vec))
                for exc in self.finite_exceptions}

    # -- infinite side -----------------------------------------------------------

    def selected_max_elements(self, vec: Sequence[FieldElement]):
        """Per infinite place, the coordinate attaining the max modulus."""
        return _select_max_elements(self.field, vec, self.warnings)

    def inf_value_bounds(self, vec, prec: Fraction) -> list:
        """Rational bound pairs for N_v(sigma_v vec) at each infinite place."""
        if self.kind in ("standard", "linear_section"):
            return _max_norm_bounds(self.field, vec, prec)
        if self.kind == "mahler":
            out = []
            blocks = _embedding_blocks(self.field, vec)
            for part, block in zip(self.infinite_parts, blocks):
                val = part.evaluator(block)
                eps = Fraction(1, 10 ** 9)
                v = Fraction(val).limit_denominator(10 ** 15)
                out.append((v * (1 - eps), v * (1 + eps)))
            return out
        raise UnsupportedSpec(self.kind)

    def inf_power_compare(self, vec, c: Fraction) -> int:
        """Compare prod_v N_v^{d_v} against a rational c; exact when possible."""
        if self.kind in ("standard", "linear_section"):
            return _compare_inf_power(self.field, vec, c, self.warnings)
        # numeric fallback (Mahler)
        prod = 1.0
        blocks = _embedding_blocks(self.field, vec)
        for part, block in zip(self.infinite_parts, blocks):
            prod *= part.evaluator(block) ** part.d_v
        if abs(prod - float(c)) <= 1e-12 * max(1.0, float(c)):
            self.warnings.append("mahler comparison decided by midpoint")
        return -1 if prod <= float(c) else 1

    # -- heights -------------------------------------------------------------------

    def height(self, vec: Sequence[FieldElement]) -> tuple[float, float, float]:
        """(H_N, H_N^inf, H_N^fin) as floats."""
        if all(a.is_zero() for a in vec):
            raise ZeroVector("height of the zero vector")
        d = self.field.d
        fin_pow = self.finite_power(vec)
        if self.kind in ("standard", "linear_section"):
            lo, hi = _inf_power_bounds(self.field, vec, Fraction(1, 10 ** 20))
            inf_pow = (float(lo) + float(hi)) / 2
        else:
            inf_pow = 1.0
            blocks = _embedding_blocks(self.field, vec)
            for part, block in zip(self.infinite_parts, blocks):
                inf_pow *= part.evaluator(block) ** part.d_v
        h_inf = inf_pow ** (1.0 / d)
        h_fin = float(fin_pow) ** (1.0 / d)
        return h_inf * h_fin, h_inf, h_fin

    def compare_height(self, vec, x: Fraction) -> int:
        """Sign of H_N(vec) - x for rational x > 0 (0 means exactly equal)."""
        if all(a.is_zero() for a in vec):
            raise ZeroVector("height of the zero vector")
        x = Fraction(x)
        if x <= 0:
            return 1
        fin_pow = self.finite_power(vec)
        c = x ** self.field.d / fin_pow
        return self.inf_power_compare(vec, c)

    def compare_inf_height_pow(self, vec, t_pow_d: Fraction) -> int:
        """Sign of H_N^inf(vec)^d - t_pow_d."""
        return self.inf_power_compare(vec, Fraction(t_pow_d))


# -- construction -------------------------------------------------------------------


def _max_norm_evaluator(n: int, d_v: int):
    if d_v == 1:
        def ev(block: np.ndarray) -> float:
            return float(np.max(np.abs(block)))
    else:
        def ev(block: np.ndarray) -> float:
            z = block.reshape(-1, 2)
            return float(np.max(np.hypot(z[:, 0], z[:, 1])))
    return ev


def _mahler_evaluator(n: int, d_v: int):
    def ev(block: np.ndarray) -> float:
        if d_v == 1:
            coeffs = np.asarray(block, dtype=float)
        else:
            z = np.asarray(block, dtype=float).reshape(-1, 2)
            coeffs = z[:, 0] + 1j * z[:, 1]
        nz = np.flatnonzero(np.abs(coeffs) > 0)
        if nz.size == 0:
            return 0.0
        coeffs = coeffs[nz[0]:]
        lead = abs(coeffs[0])
        if coeffs.size == 1:
            return float(lead)
        roots = np.roots(coeffs)
        out = float(lead)
        for rho in roots:
            out *= max(1.0, abs(rho))
        return out
    return ev


def build_als(field: NumberField, n: int, spec) -> AdelicLipschitzSystem:
    """Build an adelic system: 'standard', 'mahler' or
    ('linear_section', linear_form_coeffs, divisor)."""
    if isinstance(spec, str):
        kind, lin, a = spec, None, 1
    else:
        kind = spec[0]
        lin = tuple(int(c) for c in spec[1])
        a = int(spec[2])
    parts = []
    for i in range(field.r + field.s):
        d_v = 1 if i < field.r else 2
        if kind in ("standard", "linear_section"):
            if d_v == 1:
                charts = counting.make_chart("cube_boundary", dim=n + 1)
                m_v, l_v = 2 * n + 2, 2.0
            else:
                charts = counting.make_chart("complex_max_ball", n=n)
                m_v, l_v = n + 1, 2 * math.pi * math.sqrt(2 * n + 1)
            parts.append(LipschitzDistanceFunction(
                n=n, d_v=d_v, kind="max-norm",
                evaluator=_max_norm_evaluator(n, d_v),
                charts=charts, M_v=m_v, L_v=l_v, c_v=Fraction(1)))
        elif kind == "mahler":
            parts.append(LipschitzDistanceFunction(
                n=n, d_v=d_v, kind="mahler",
                evaluator=_mahler_evaluator(n, d_v),
                charts=None, M_v=None, L_v=None,
                c_v=Fraction(1, 2 ** n)))
        else:
            raise UnsupportedSpec(f"unknown system kind {kind!r}")

    exceptions: list[FiniteException] = []
    if kind == "linear_section":
        if lin is None or len(lin) != n + 1:
            raise UnsupportedSpec("linear_section needs n+1 integer coefficients")
        if a == 0:
            raise UnsupportedSpec("divisor must be nonzero")
        if field.d != 1:
            raise UnsupportedSpec(
                "linear_section exceptions are derived only over the rationals; "
                "configure explicit exceptions for larger fields")
        for p in _prime_divisors(abs(a)):
            ord_a = 0
            aa = abs(a)
            while aa % p == 0:
                aa //= p
                ord_a += 1
            prime_ideal = IdealModule.from_generators(field, [field.from_rational(p)])
            exceptions.append(FiniteException(
                place=FinitePlace(prime=prime_ideal, Np=p, d_v=1),
                c_v=Fraction(1, p ** ord_a),
                C_v=Fraction(p ** ord_a),
                linear_form=lin,
                divisor_ord=ord_a))
    return AdelicLipschitzSystem(field, n, kind, parts, exceptions,
                                 linear_form=lin, divisor=a)


def _prime_divisors(m: int) -> list[int]:
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


# -- the Weil height ------------------------------------------------------------------

def weil_height_power(field: NumberField, vec) -> tuple[Optional[Fraction], tuple]:
    """H(vec)^d: exact rational when available, plus rational bounds."""
    if all(a.is_zero() for a in vec):
        raise ZeroVector("height of the zero vector")
    fin = Fraction(1) / coordinate_ideal(field, vec).norm()
    warnings: list[str] = []
    sel = _select_max_elements(field, vec, warnings)
    exact = None
    if all(x == sel[0] for x in sel):
        exact = abs(sel[0].norm()) * fin
    lo, hi = _inf_power_bounds(field, vec, Fraction(1, 10 ** 25))
    return exact, (lo * fin, hi * fin)


def weil_height(field: NumberField, vec) -> float:
    exact, (lo, hi) = weil_height_power(field, vec)
    pw = float(exact) if exact is not None else (float(lo) + float(hi)) / 2
    return pw ** (1.0 / field.d)


# -- exact comparison machinery ----------------------------------------------------------

def _embedding_blocks(field: NumberField, vec, prec=Fraction(1, 10 ** 20)):
    """Float blocks per place: real -> (n+1,), complex -> (2(n+1),) interleaved."""
    embs = [field.embed(a, prec) for a in vec]
    blocks = []
    for i in range(field.r + field.s):
        if i < field.r:
            blocks.append(np.array([float(e[i].mid) for e in embs]))
        else:
            flat = []
            for e in embs:
                flat.extend([float(e[i].re), float(e[i].im)])
            blocks.append(np.array(flat))
    return blocks


def _abs_pow_bounds(field: NumberField, alpha: FieldElement, place: int,
                    prec: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds for |sigma_place(alpha)|^{d_v}."""
    emb = field.embed(alpha, prec)[place]
    if place < field.r:
        return emb.abs_bounds()
    return emb.abs2_bounds()


def _cmp_abs_at_place(field: NumberField, x: FieldElement, y: FieldElement,
                      place: int, warnings: list) -> int:
    """Compare |sigma_place(x)| with |sigma_place(y)|, exactly when possible."""
    if x == y:
        return 0
    # exact-equality screens
    if place < field.r:
        if (x * x) == (y * y):
            return 0
    elif field.d == 2 and field.s == 1:
        nx, ny = abs(x.norm()), abs(y.norm())
        return -1 if nx < ny else (0 if nx == ny else 1)
    else:
        if (x * x) == (y * y):
            return 0
    for prec in _PREC_LADDER:
        ax = _abs_pow_bounds(field, x, place, prec)
        ay = _abs_pow_bounds(field, y, place, prec)
        if ax[1] < ay[0]:
            return -1
        if ay[1] < ax[0]:
            return 1
    if place < field.r:
        # |sigma x| = |sigma y| at a real place forces x^2 = y^2, which was
        # screened above; reaching this is a refinement failure.
        raise PrecisionStall("real-place comparison failed to separate")
    warnings.append("complex modulus tie decided by midpoint")
    ax = _abs_pow_bounds(field, x, place, _PREC_LADDER[-1])
    ay = _abs_pow_bounds(field, y, place, _PREC_LADDER[-1])
    return -1 if (ax[0] + ax[1]) <= (ay[0] + ay[1]) else 1


def _select_max_elements(field: NumberField, vec, warnings: list):
    nonzero = [a for a in vec if not a.is_zero()]
    if not nonzero:
        raise ZeroVector("selection over the zero vector")
    out = []
    for place in range(field.r + field.s):
        best = nonzero[0]
        for cand in nonzero[1:]:
            if _cmp_abs_at_place(field, best, cand, place, warnings) < 0:
                best = cand
        out.append(best)
    return out


def _inf_power_bounds(field: NumberField, vec, prec: Fraction):
    """Rational bounds for prod_v max_j |sigma_v(alpha_j)|^{d_v}."""
    nonzero = [a for a in vec if not a.is_zero()]
    lo, hi = Fraction(1), Fraction(1)
    for place in range(field.r + field.s):
        plo, phi = Fraction(0), Fraction(0)
        for a in nonzero:
            alo, ahi = _abs_pow_bounds(field, a, place, prec)
            plo = max(plo, alo)
            phi = max(phi, ahi)
        lo *= plo
        hi *= phi
    return lo, hi


def _max_norm_bounds(field: NumberField, vec, prec: Fraction):
    """Per-place bounds for the max-norm value N_v (not powered)."""
    from .linalg import sqrt_bounds
    digits = max(18, -_frac_floor_log10(prec) + 5)
    nonzero = [a for a in vec if not a.is_zero()]
    out = []
    for place in range(field.r + field.s):
        plo, phi = Fraction(0), Fraction(0)
        for a in nonzero:
            alo, ahi = _abs_pow_bounds(field, a, place, prec)
            plo = max(plo, alo)
            phi = max(phi, ahi)
        if place < field.r:
            out.append((plo, phi))
        else:
            out.append((sqrt_bounds(plo, digits)[0], sqrt_bounds(phi, digits)[1]))
    return out


def _frac_floor_log10(x: Fraction) -> int:
    if x <= 0:
        return -40
    return int(math.floor(math.log10(float(x)))) if float(x) > 0 else -40


def _sign_of_embedding(field: NumberField, elem: FieldElement, place: int) -> int:
    if elem.is_zero():
        return 0
    for prec in _PREC_LADDER:
        emb = field.embed(elem, prec)[place]
        s = emb.sign()
        if s is not None:
            return s
    raise PrecisionStall("sign of a nonzero embedding did not resolve")


def _compare_inf_power(field: NumberField, vec, c: Fraction, warnings: list) -> int:
    """Exact-first comparison of prod_v max_j |sigma_v(alpha_j)|^{d_v} vs c."""
    c = Fraction(c)
    if c <= 0:
        return 1
    sel = _select_max_elements(field, vec, warnings)
    if all(x == sel[0] for x in sel):
        p = abs(sel[0].norm())
        return -1 if p < c else (0 if p == c else 1)
    if field.d == 2 and field.r == 2:
        z = sel[0] * sel[1].conjugate()
        w = z * z - field.from_rational(c * c)
        return _sign_of_embedding(field, w, 0)
    for prec in _PREC_LADDER:
        lo, hi = _inf_power_bounds(field, vec, prec)
        if hi < c:
            return -1
        if lo > c:
            return 1
    warnings.append("height comparison decided by midpoint")
    lo, hi = _inf_power_bounds(field, vec, _PREC_LADDER[-1])
    return -1 if (lo + hi) <= 2 * c else 1


# -- norm-ball charts ----------------------------------------------------------------

def norm_ball_charts(evaluator: Callable[[np.ndarray], float], d_v: int, n: int,
                     c_system: float, seed: int = 0,
                     triangle_samples: int = 500) -> counting.LipChartSet:
    """Single boundary chart for a convex norm's unit sphere.

    Radial normalization of a full spherical parameterization; declared
    constant 8 d_v^2 (n+1)^{5/2} C.  The triangle inequality is sample-checked
    first; failures raise NotANorm.
    """
    dim = d_v * (n + 1)
    rng = np.random.default_rng(seed)
    for _ in range(triangle_samples):
        x = rng.normal(size=dim)
        y = rng.normal(size=dim)
        if evaluator(x + y) > evaluator(x) + evaluator(y) + 1e-9:
            raise NotANorm("sampled triangle inequality failed")
        if evaluator(2.0 * x) > 2.0 * evaluator(x) + 1e-9:
            raise NotANorm("sampled homogeneity failed")
    declared = 8 * d_v ** 2 * (n + 1) ** 2.5 * c_system
    sup_bound = c_system * math.sqrt(n + 1)
    chart = counting.RadialNormalizedChart(dim, evaluator, declared, sup_bound)
    return counting.LipChartSet(D=dim, c=1, charts=[chart], L=declared)
