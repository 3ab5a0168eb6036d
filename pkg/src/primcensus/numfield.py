"""Number fields with exact arithmetic and certified embeddings.

A field is loaded from configuration: minimal polynomial, integral basis and
the classical invariants (class number, regulator, roots of unity,
discriminant, fundamental units, class representatives).  The loader
validates everything it can cheaply and certifies the embeddings as
arbitrarily refinable intervals with exact rational midpoints.  Fractional
ideals are full-rank integer modules in Hermite normal form; no prime
factorization is ever performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import linalg
from .errors import (ConfigInvalid, ConsistencyError, DiscriminantMismatch,
                     NotASubfield, PrecisionUnreachable, ReducedPolynomial,
                     SignatureMismatch, UnitLatticeMismatch, UnitRankMismatch,
                     ZeroVector)
from .intervals import CItv, RItv, poly_eval_complex, poly_eval_real

DEFAULT_EMBED_RADIUS = Fraction(1, 10 ** 30)


# -- polynomial helpers (coefficients ascending, exact rationals) ---------------

def poly_deriv(p):
    return [p[i] * i for i in range(1, len(p))]


def poly_eval(p, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        f = a[-1] / b[-1]
        k = len(a) - len(b)
        q[k] = f
        for i in range(len(b)):
            a[k + i] -= f * b[i]
        a.pop()
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return q, a


def poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_gcd_degree(a, b) -> int:
    """Degree of gcd(a, b) over Q."""
    a, b = list(a), list(b)
    while any(x != 0 for x in b):
        _, r = poly_divmod(a, b)
        a, b = b, r
    return len(a) - 1 if any(a) else -1


def sturm_chain(p):
    chain = [list(p), poly_deriv(p)]
    while any(x != 0 for x in chain[-1]):
        _, r = poly_divmod(chain[-2], chain[-1])
        if not any(r):
            break
        chain.append([-x for x in r])
    return chain


def sign_variations(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def cauchy_root_bound(p) -> Fraction:
    lead = p[-1]
    return 1 + max((abs(c / lead) for c in p[:-1]), default=Fraction(0))


def isolate_real_roots(p) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals, each containing exactly one real root."""
    chain = sturm_chain(p)
    bound = cauchy_root_bound(p)
    lo, hi = -bound - 1, bound + 1

    def count(a, b):
        return sign_variations(chain, a) - sign_variations(chain, b)

    out = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        c = count(a, b)
        if c == 0:
            continue
        if c == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        # The minimal polynomial of a field of degree >= 2 has no rational
        # roots, so midpoints are never roots; guard anyway.
        if poly_eval(p, m) == 0:
            m = (2 * a + b) / 3
        stack.append((a, m))
        stack.append((m, b))
    out.sort()
    return out


def _nth_root_upper(x: Fraction, k: int) -> Fraction:
    """Rational u with u >= x**(1/k), modestly tight."""
    if x == 0:
        return Fraction(0)
    guess = float(x) ** (1.0 / k) * (1 + 1e-9) + 1e-300
    u = Fraction(guess).limit_denominator(10 ** 18)
    while u ** k < x:
        u *= Fraction(1000000001, 1000000000)
    return u


def _round_frac(x: Fraction, digits: int) -> Fraction:
    scale = 10 ** digits
    return Fraction(round(x * scale), scale)


class RealRoot:
    """A real root of the minimal polynomial, certified by sign change."""

    def __init__(self, poly, lo: Fraction, hi: Fraction):
        self.poly = poly
        self.lo = lo
        self.hi = hi
        sa = poly_eval(poly, lo)
        sb = poly_eval(poly, hi)
        assert sa * sb < 0, "isolating interval must change sign"
        self._sign_lo = 1 if sa > 0 else -1

    @property
    def rad(self) -> Fraction:
        return (self.hi - self.lo) / 2

    def interval(self) -> RItv:
        return RItv((self.lo + self.hi) / 2, self.rad)

    def refine(self, target: Fraction, max_iter: int = 4000):
        it = 0
        while self.hi - self.lo > 2 * target:
            it += 1
            if it > max_iter:
                raise PrecisionUnreachable("real root refinement stalled")
            m = (self.lo + self.hi) / 2
            v = poly_eval(self.poly, m)
            if v == 0:  # cannot happen for irreducible d >= 2
                eps = (self.hi - self.lo) / 16
                m += eps
                v = poly_eval(self.poly, m)
            if (1 if v > 0 else -1) == self._sign_lo:
                self.lo = m
            else:
                self.hi = m

    def __float__(self):
        return float((self.lo + self.hi) / 2)


class ComplexRoot:
    """A non-real root (upper half plane), certified via |p(z)|^(1/d) disks."""

    def __init__(self, poly, re: Fraction, im: Fraction):
        self.poly = poly
        self.deg = len(poly) - 1
        self.re = re
        self.im = im
        self.rad = self._certify()

    def _certify(self) -> Fraction:
        z = CItv(self.re, self.im)
        v = poly_eval_complex(self.poly, z)
        m2 = v.re * v.re + v.im * v.im
        return _nth_root_upper(m2, 2 * self.deg)

    def interval(self) -> CItv:
        return CItv(self.re, self.im, self.rad)

    def refine(self, target: Fraction, max_iter: int = 200):
        it = 0
        dp = poly_deriv(self.poly)
        digits = max(20, -min(0, _frac_exp10(self.rad)) if self.rad else 20)
        while self.rad > target:
            it += 1
            if it > max_iter:
                raise PrecisionUnreachable("complex root refinement stalled")
            digits = max(25, 2 * digits)
            z = CItv(self.re, self.im)
            pv = poly_eval_complex(self.poly, z)
            dv = poly_eval_complex(dp, z)
            den = dv.re * dv.re + dv.im * dv.im
            if den == 0:
                raise PrecisionUnreachable("derivative vanished at approximation")
            qre = (pv.re * dv.re + pv.im * dv.im) / den
            qim = (pv.im * dv.re - pv.re * dv.im) / den
            self.re = _round_frac(self.re - qre, digits)
            self.im = _round_frac(self.im - qim, digits)
            new_rad = self._certify()
            if new_rad < self.rad:
                self.rad = new_rad

    def __complex__(self):
        return complex(float(self.re), float(self.im))


def _frac_exp10(x: Fraction) -> int:
    if x == 0:
        return 0
    return int(math.floor(math.log10(abs(float(x))))) if float(x) else -320


class FieldElement:
    """Element of a number field; coordinates w.r.t. the integral basis."""

    __slots__ = ("field", "coords")

    def __init__(self, field: "NumberField", coords: Sequence[Fraction]):
        self.field = field
        self.coords = tuple(Fraction(c) for c in coords)

    def __repr__(self):
        return f"FieldElement({list(self.coords)})"

    def __eq__(self, other):
        return (isinstance(other, FieldElement) and other.field is self.field
                and other.coords == self.coords)

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __add__(self, other):
        return FieldElement(self.field, linalg.vec_add(self.coords, other.coords))

    def __sub__(self, other):
        return FieldElement(self.field, linalg.vec_sub(self.coords, other.coords))

    def __neg__(self):
        return FieldElement(self.field, tuple(-c for c in self.coords))

    def __mul__(self, other):
        if isinstance(other, FieldElement):
            return self.field.mul(self, other)
        return FieldElement(self.field, linalg.vec_scale(self.coords, Fraction(other)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.field.one
        base = self
        if k < 0:
            base = base.inverse()
            k = -k
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("zero element")
        m = self.field.mult_matrix(self)
        sol = linalg.solve_fraction(m, self.field.one.coords)
        if sol is None:
            raise ZeroDivisionError("element is a zero divisor (field bug)")
        return FieldElement(self.field, sol)

    def norm(self) -> Fraction:
        return linalg.det_fraction(self.field.mult_matrix(self))

    def trace(self) -> Fraction:
        m = self.field.mult_matrix(self)
        return sum(m[i][i] for i in range(len(m)))

    def power_coords(self) -> tuple[Fraction, ...]:
        return self.field.coords_to_power(self.coords)

    def conjugate(self) -> "FieldElement":
        """Nontrivial automorphism image (quadratic fields only)."""
        return self.field.quadratic_conjugate(self)

    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coords))


@dataclass(frozen=True)
class Subfield:
    name: str
    degrees: tuple[int, ...]
    generators: tuple[FieldElement, ...]
    m: int           # [k:Q]
    e: int           # [K:k]
    qbasis: tuple[tuple[Fraction, ...], ...]  # Q-basis coord rows of k in K


class IdealModule:
    """Nonzero fractional ideal as (1/den) * Z-span of HNF rows."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: "NumberField", num, den: int):
        self.field = field
        rows = [list(map(int, r)) for r in num]
        if len(rows) != field.d:
            raise ValueError("ideal module must have full rank")
        g = abs(int(den))
        for row in rows:
            for x in row:
                g = math.gcd(g, abs(x))
        if g > 1:
            rows = [[x // g for x in row] for row in rows]
            den //= g
        self.num = tuple(tuple(r) for r in rows)
        self.den = int(den)

    # construction -------------------------------------------------------

    @staticmethod
    def from_generators(field: "NumberField", gens: Iterable[FieldElement]) -> "IdealModule":
        rows = []
        for g in gens:
            if g.is_zero():
                continue
            for k in range(field.d):
                rows.append((g * field.basis_element(k)).coords)
        if not rows:
            raise ZeroVector("ideal needs a nonzero generator")
        h, den = linalg.hnf_rational_rows(rows)
        if len(h) != field.d:
            raise ConsistencyError("generated module is not full rank")
        return IdealModule(field, h, den)

    @staticmethod
    def unit_ideal(field: "NumberField") -> "IdealModule":
        return IdealModule.from_generators(field, [field.one])

    # basic data ---------------------------------------------------------

    def key(self):
        return (self.den, self.num)

    def __eq__(self, other):
        return isinstance(other, IdealModule) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"IdealModule(den={self.den}, num={self.num})"

    def norm(self) -> Fraction:
        det = 1
        for i in range(len(self.num)):
            det *= self.num[i][i]
        return Fraction(det, self.den ** self.field.d)

    def basis_elements(self) -> list[FieldElement]:
        return [FieldElement(self.field, [Fraction(x, self.den) for x in row])
                for row in self.num]

    # arithmetic ---------------------------------------------------------

    def mul(self, other: "IdealModule") -> "IdealModule":
        gens = [a * b for a in self.basis_elements() for b in other.basis_elements()]
        return IdealModule.from_generators(self.field, gens)

    def __pow__(self, k: int) -> "IdealModule":
        if k < 0:
            return self.inverse() ** (-k)
        out = IdealModule.unit_ideal(self.field)
        base = self
        while k:
            if k & 1:
                out = out.mul(base)
            base = base.mul(base)
            k >>= 1
        return out

    def scale_by_element(self, alpha: FieldElement) -> "IdealModule":
        return IdealModule.from_generators(
            self.field, [alpha * b for b in self.basis_elements()])

    def scale_by_rational(self, q: Fraction) -> "IdealModule":
        q = Fraction(q)
        num = [[x * q.numerator for x in row] for row in self.num]
        return IdealModule(self.field, num, self.den * q.denominator)

    def inverse(self) -> "IdealModule":
        """Fractional inverse via the multiplier module {x : x*I <= O_K}."""
        field = self.field
        d = field.d
        integral = IdealModule(field, self.num, 1)  # clear denominator
        m_int = int(integral.norm())
        assert m_int > 0
        stacked = []
        for row in integral.num:
            a = FieldElement(field, row)
            ma = field.mult_matrix(a)  # integer entries: a and basis integral
            for r in ma:
                stacked.append([int(x) for x in r])
        width = d + len(stacked)
        big = [[0] * width for _ in range(len(stacked))]
        for i, row in enumerate(stacked):
            big[i][:d] = row
            big[i][d + i] = m_int
        kern = linalg.integer_kernel(big)
        sol_rows = [k[:d] for k in kern]
        sol_rows.extend([[m_int if i == j else 0 for j in range(d)] for i in range(d)])
        h = linalg.hnf(sol_rows)
        inv_integral = IdealModule(field, h, m_int)
        # self = integral / den  =>  self^{-1} = den * integral^{-1}
        return inv_integral.scale_by_rational(Fraction(self.den))

    # membership / valuation ----------------------------------------------

    def contains(self, alpha: FieldElement) -> bool:
        target = [c * self.den for c in alpha.coords]
        if any(t.denominator != 1 for t in target):
            return False
        return linalg.member_of_hnf_span(self.num, [int(t) for t in target]) is not None

    def contains_ideal(self, other: "IdealModule") -> bool:
        return all(self.contains(b) for b in other.basis_elements())

    def valuation(self, prime: "IdealModule") -> int:
        """ord_p(self) for a prime ideal p, via containment in powers."""
        npr = prime.norm()
        assert npr > 1

        def ord_integral(ideal: IdealModule) -> int:
            k = 0
            power = prime
            while power.contains_ideal(ideal):
                k += 1
                power = power.mul(prime)
            return k

        integral = IdealModule(self.field, self.num, 1)
        den_ideal = IdealModule.from_generators(
            self.field, [self.field.from_rational(self.den)])
        return ord_integral(integral) - ord_integral(den_ideal)


class NumberField:
    """A number field K of degree d with validated configured invariants."""

    def __init__(self, name, poly_asc, basis_rows, r, s, invariants, subfield_cfg):
        self.name = name
        self.poly = [Fraction(c) for c in poly_asc]
        self.d = len(self.poly) - 1
        self.r = r
        self.s = s
        self.basis_mat = [list(map(Fraction, row)) for row in basis_rows]
        self.basis_inv = linalg.mat_inverse(self.basis_mat)
        self.invariants = invariants
        self._embed_cache: dict[tuple, list] = {}
        self._roots_real: list[RealRoot] = []
        self._roots_complex: list[ComplexRoot] = []
        self._isolate_roots()
        self.one = self.from_rational(1)
        self.subfields: dict[str, Subfield] = {}
        for sub_name, sub in (subfield_cfg or {}).items():
            self._register_subfield(sub_name, sub)

    # -- construction helpers ------------------------------------------------

    def basis_element(self, k: int) -> FieldElement:
        coords = [Fraction(0)] * self.d
        coords[k] = Fraction(1)
        return FieldElement(self, coords)

    def from_rational(self, x) -> FieldElement:
        pow_coords = [Fraction(x)] + [Fraction(0)] * (self.d - 1)
        return FieldElement(self, self.power_to_coords(pow_coords))

    def from_power_coords(self, pow_coords) -> FieldElement:
        pw = list(map(Fraction, pow_coords))
        pw += [Fraction(0)] * (self.d - len(pw))
        return FieldElement(self, self.power_to_coords(pw))

    def from_coords(self, coords) -> FieldElement:
        return FieldElement(self, coords)

    def generator(self) -> FieldElement:
        return self.from_power_coords([0, 1] if self.d > 1 else [0])

    # -- coordinate conversions ----------------------------------------------

    def coords_to_power(self, coords) -> tuple[Fraction, ...]:
        return tuple(sum(Fraction(coords[k]) * self.basis_mat[k][j]
                         for k in range(self.d)) for j in range(self.d))

    def power_to_coords(self, pow_coords) -> tuple[Fraction, ...]:
        return tuple(sum(Fraction(pow_coords[j]) * self.basis_inv[j][k]
                         for j in range(self.d)) for k in range(self.d))

    # -- arithmetic ------------------------------------------------------------

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        pa = self.coords_to_power(a.coords)
        pb = self.coords_to_power(b.coords)
        prod = poly_mul(list(pa), list(pb))
        _, rem = poly_divmod(prod, self.poly)
        rem += [Fraction(0)] * (self.d - len(rem))
        return FieldElement(self, self.power_to_coords(rem[:self.d]))

    def mult_matrix(self, a: FieldElement):
        """Matrix of multiplication by a on integral-basis coordinates."""
        cols = [(a * self.basis_element(j)).coords for j in range(self.d)]
        return [[cols[j][i] for j in range(self.d)] for i in range(self.d)]

    def quadratic_conjugate(self, a: FieldElement) -> FieldElement:
        if self.d != 2:
            raise ConsistencyError("conjugate() needs a quadratic field")
        c0, c1 = self.coords_to_power(a.coords)
        a1 = self.poly[1]  # x^2 + a1 x + a0
        return self.from_power_coords([c0 - a1 * c1, -c1])

    # -- embeddings --------------------------------------------------------------

    def _isolate_roots(self):
        p = self.poly
        if self.d == 1:
            # K = Q: the unique root is rational; treat it exactly.
            root = -p[0] / p[1]
            self._rational_root = root
            return
        intervals = isolate_real_roots(p)
        if len(intervals) != self.r:
            raise SignatureMismatch(
                f"polynomial has {len(intervals)} real roots, signature says {self.r}")
        self._roots_real = [RealRoot(p, a, b) for a, b in intervals]
        for root in self._roots_real:
            root.refine(Fraction(1, 10 ** 8))
        if self.s:
            coeffs = [float(c) for c in reversed(p)]
            approx = np.roots(coeffs)
            ups = sorted((z for z in approx if z.imag > 1e-9),
                         key=lambda z: (z.real, z.imag))
            if len(ups) != self.s:
                raise SignatureMismatch(
                    f"found {len(ups)} upper-half roots, signature says {self.s}")
            self._roots_complex = [
                ComplexRoot(p, Fraction(z.real).limit_denominator(10 ** 15),
                            Fraction(z.imag).limit_denominator(10 ** 15))
                for z in ups]
            for root in self._roots_complex:
                root.refine(Fraction(1, 10 ** 8))
            self._check_disjoint()

    def _check_disjoint(self):
        pts = []
        for rt in self._roots_real:
            pts.append((float(rt), 0.0, float(rt.rad)))
        for rt in self._roots_complex:
            pts.append((float(rt.re), float(rt.im), float(rt.rad)))
            pts.append((float(rt.re), -float(rt.im), float(rt.rad)))
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                dx = pts[i][0] - pts[j][0]
                dy = pts[i][1] - pts[j][1]
                if math.hypot(dx, dy) <= pts[i][2] + pts[j][2]:
                    raise PrecisionUnreachable("root certification disks overlap")

    def refine_embeddings(self, target: Fraction):
        for rt in self._roots_real:
            rt.refine(target)
        for rt in self._roots_complex:
            rt.refine(target)
        self._embed_cache.clear()

    def embed(self, alpha: FieldElement, precision: Fraction = DEFAULT_EMBED_RADIUS):
        """Certified intervals for sigma_i(alpha), i = 1..r+s.

        Real embeddings come first (ascending), then the upper-half complex
        ones; each returned interval has radius <= precision.
        """
        key = (alpha.coords, precision)
        cached = self._embed_cache.get(key)
        if cached is not None:
            return cached
        if self.d == 1:
            val = alpha.coords[0] * self.basis_mat[0][0]
            out = [RItv(val)]
            self._embed_cache[key] = out
            return out
        pow_coords = list(self.coords_to_power(alpha.coords))
        out = []
        for rt in self._roots_real:
            for attempt in range(220):
                itv = poly_eval_real(pow_coords, rt.interval())
                if itv.rad <= precision:
                    break
                rt.refine(rt.rad / 8)
            else:
                raise PrecisionUnreachable("embedding refinement stalled")
            out.append(itv)
        for rt in self._roots_complex:
            for attempt in range(220):
                itv = poly_eval_complex(pow_coords, rt.interval())
                if itv.rad <= precision:
                    break
                rt.refine(rt.rad / 8)
            else:
                raise PrecisionUnreachable("embedding refinement stalled")
            out.append(itv)
        self._embed_cache[key] = out
        return out

    def embed_floats(self, alpha: FieldElement) -> list:
        """Cheap float view of the embeddings (reals then complex)."""
        vals = self.embed(alpha, Fraction(1, 10 ** 20))
        out = []
        for v in vals:
            if isinstance(v, RItv):
                out.append(float(v))
            else:
                out.append(complex(v))
        return out

    def local_degrees(self) -> list[int]:
        return [1] * self.r + [2] * self.s

    def house(self, alpha: FieldElement) -> float:
        return max(abs(v) for v in self.embed_floats(alpha))

    # -- subfields ---------------------------------------------------------------

    def _algebra_basis(self, gens: list[FieldElement]) -> list[tuple[Fraction, ...]]:
        basis_rows: list[tuple[Fraction, ...]] = []

        def rank_of(rows):
            return linalg.rank_fraction(rows)

        def try_add(vec):
            if not basis_rows:
                if any(vec):
                    basis_rows.append(vec)
                return bool(any(vec))
            if rank_of(basis_rows + [vec]) > len(basis_rows):
                basis_rows.append(vec)
                return True
            return False

        try_add(self.one.coords)
        frontier = [self.one]
        while frontier:
            new_frontier = []
            for b in frontier:
                for g in gens:
                    prod = b * g
                    if try_add(prod.coords):
                        new_frontier.append(prod)
            frontier = new_frontier
        return basis_rows

    def _register_subfield(self, name: str, cfg: dict):
        gens = [FieldElement(self, c) for c in cfg.get("generators", [])]
        qbasis = self._algebra_basis(gens)
        m = len(qbasis)
        if self.d % m != 0:
            raise ConfigInvalid(f"subfield {name}: Q-dimension {m} does not divide {self.d}")
        e = self.d // m
        degrees = tuple(sorted(set(int(g) for g in cfg["degrees"])))
        if m == self.d:
            if degrees != (1,):
                raise ConfigInvalid(f"subfield {name}: k = K forces degrees [1]")
        else:
            for g in degrees:
                if g < 1 or g >= e or e % g != 0:
                    raise ConfigInvalid(
                        f"subfield {name}: intermediate degree {g} invalid for e={e}")
            if 1 not in degrees:
                raise ConfigInvalid(f"subfield {name}: degrees must contain 1")
        self.subfields[name] = Subfield(
            name=name, degrees=degrees, generators=tuple(gens), m=m, e=e,
            qbasis=tuple(tuple(row) for row in qbasis))

    def subfield(self, name: str) -> Subfield:
        try:
            return self.subfields[name]
        except KeyError:
            raise NotASubfield(f"no subfield named {name!r} configured") from None

    def degree_over(self, sub: Subfield, alphas: Sequence[FieldElement]) -> int:
        """[k(alphas) : k] via the dimension of the generated algebra."""
        if isinstance(sub, str):
            sub = self.subfield(sub)
        gens = [FieldElement(self, row) for row in sub.qbasis] + list(alphas)
        dim = len(self._algebra_basis(gens))
        if dim % sub.m != 0:
            raise ConsistencyError("algebra dimension not divisible by [k:Q]")
        return dim // sub.m


@dataclass
class InvariantRecord:
    h: int
    regulator: float
    w: int
    disc: int
    fundamental_units: list = dc_field(default_factory=list)   # FieldElements, set by loader
    class_reps: list = dc_field(default_factory=list)          # IdealModules, set by loader
    zeta: dict = dc_field(default_factory=dict)                # {s: (value, error)}


def coordinate_ideal(field: NumberField, vec: Sequence[FieldElement]) -> IdealModule:
    """Fractional ideal generated by the coordinates of a nonzero vector."""
    if all(a.is_zero() for a in vec):
        raise ZeroVector("coordinate ideal of the zero vector")
    return IdealModule.from_generators(field, [a for a in vec if not a.is_zero()])


def basis_discriminant(field: NumberField) -> Fraction:
    tr = [[ (field.basis_element(i) * field.basis_element(j)).trace()
            for j in range(field.d)] for i in range(field.d)]
    return linalg.det_fraction(tr)


def load_field(config: dict) -> NumberField:
    """Validate a field configuration block and build the NumberField."""
    try:
        name = config.get("name", "K")
        poly_desc = [int(c) for c in config["min_poly"]]
        basis = config["integral_basis"]
        sig = config["signature"]
        inv_cfg = config["invariants"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"field config malformed: {exc}") from exc

    poly_asc = list(reversed(poly_desc))  # config order: leading first
    d = len(poly_asc) - 1
    if d < 1:
        raise ConfigInvalid("min_poly must have positive degree")
    if poly_asc[-1] != 1:
        raise ReducedPolynomial("min_poly must be monic")
    frac_poly = [Fraction(c) for c in poly_asc]

    if d >= 2:
        if poly_gcd_degree(frac_poly, poly_deriv(frac_poly)) > 0:
            raise ReducedPolynomial("min_poly is not squarefree")
        c0 = abs(poly_asc[0])
        for cand in range(1, c0 + 1):
            if c0 % cand == 0:
                for sgn in (1, -1):
                    if poly_eval(frac_poly, Fraction(sgn * cand)) == 0:
                        raise ReducedPolynomial(f"rational root {sgn * cand}")
        if poly_asc[0] == 0:
            raise ReducedPolynomial("rational root 0")
        if d > 3 and not config.get("irreducible_attested", False):
            raise ReducedPolynomial(
                "degree > 3 requires irreducible_attested: true in the config")

    r, s = int(sig[0]), int(sig[1])
    if r + 2 * s != d:
        raise SignatureMismatch(f"r + 2s = {r + 2 * s} != degree {d}")
    if len(basis) != d or any(len(row) != d for row in basis):
        raise ConfigInvalid("integral_basis must be a d x d rational matrix")

    basis_rows = [[Fraction(x) for x in row] for row in basis]
    if linalg.det_fraction(basis_rows) == 0:
        raise ConfigInvalid("integral_basis is singular")

    invariants = InvariantRecord(
        h=int(inv_cfg["h"]),
        regulator=float(inv_cfg["R"]),
        w=int(inv_cfg["w"]),
        disc=int(inv_cfg["disc"]),
        zeta={int(k): (float(v[0]), float(v[1]))
              for k, v in (inv_cfg.get("zeta") or {}).items()},
    )
    if invariants.h < 1 or invariants.w < 1 or invariants.regulator <= 0:
        raise ConfigInvalid("h, w must be positive integers and R positive")
    if invariants.disc == 0:
        raise ConfigInvalid("discriminant must be nonzero")

    field = NumberField(name, poly_asc, basis_rows, r, s, invariants,
                        config.get("subfields"))

    disc = basis_discriminant(field)
    if disc != invariants.disc:
        raise DiscriminantMismatch(
            f"integral basis discriminant {disc} != configured {invariants.disc}")

    q = r + s - 1
    units_cfg = config.get("fundamental_units", [])
    if len(units_cfg) != q:
        raise UnitRankMismatch(f"expected {q} fundamental units, got {len(units_cfg)}")
    units = [FieldElement(field, c) for c in units_cfg]
    for u in units:
        if abs(u.norm()) != 1:
            raise UnitLatticeMismatch(f"unit {u} has norm {u.norm()}")
    if q > 0:
        logs = unit_log_vectors(field, units)
        gram = [[sum(a * b for a, b in zip(logs[i], logs[j])) for j in range(q)]
                for i in range(q)]
        det2 = np.linalg.det(np.array(gram, dtype=float))
        if det2 <= 0:
            raise UnitLatticeMismatch("unit logs are linearly dependent")
        covol = math.sqrt(det2)
        target = math.sqrt(q + 1) * invariants.regulator
        if abs(covol - target) > 1e-6 * max(1.0, target):
            raise UnitLatticeMismatch(
                f"unit lattice covolume {covol} != sqrt(q+1)*R = {target}")
        for vec in logs:
            if abs(sum(vec)) > 1e-9:
                raise UnitLatticeMismatch("unit log vector is not in the trace-zero plane")
    else:
        if abs(invariants.regulator - 1.0) > 1e-12:
            raise UnitLatticeMismatch("fields with unit rank 0 must declare R = 1")
    invariants.fundamental_units = units

    reps_cfg = config.get("class_reps") or [{"num": None, "den": 1}]
    reps = []
    for rep in reps_cfg:
        if rep.get("num") is None:
            reps.append(IdealModule.unit_ideal(field))
            continue
        mod = IdealModule(field, rep["num"], int(rep.get("den", 1)))
        for b in mod.basis_elements():
            for k in range(field.d):
                if not mod.contains(b * field.basis_element(k)):
                    raise ConfigInvalid("class representative is not an ideal")
        reps.append(mod)
    if len(reps) != invariants.h:
        raise ConfigInvalid(f"need h = {invariants.h} class representatives")
    invariants.class_reps = reps
    return field


def unit_log_vectors(field: NumberField, units=None) -> list[list[float]]:
    """Rows l(eta_j) = (d_i log|sigma_i(eta_j)|) in R^{q+1}."""
    if units is None:
        units = field.invariants.fundamental_units
    dvs = field.local_degrees()
    out = []
    for u in units:
        vals = field.embed(u, Fraction(1, 10 ** 25))
        row = []
        for i, v in enumerate(vals):
            if isinstance(v, RItv):
                mag = abs(float(v))
            else:
                mag = abs(complex(v))
            row.append(dvs[i] * math.log(mag))
        out.append(row)
    return out
