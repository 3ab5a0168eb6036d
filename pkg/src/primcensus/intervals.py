"""Certified interval arithmetic with exact rational midpoints.

Real and complex intervals carry a ``Fraction`` midpoint and a ``Fraction``
radius, so every operation here is exact: the returned interval provably
contains the image of the inputs.  Logs drop to floats (with outward
nudging), which is all the fundamental-domain geometry needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .linalg import sqrt_lower, sqrt_upper

_ULPS = 4


def nudge_down(x: float) -> float:
    for _ in range(_ULPS):
        x = math.nextafter(x, -math.inf)
    return x


def nudge_up(x: float) -> float:
    for _ in range(_ULPS):
        x = math.nextafter(x, math.inf)
    return x


@dataclass(frozen=True)
class RItv:
    """Closed real interval [mid - rad, mid + rad] with rational endpoints."""

    mid: Fraction
    rad: Fraction = Fraction(0)

    def __post_init__(self):
        assert self.rad >= 0

    @staticmethod
    def exact(x) -> "RItv":
        return RItv(Fraction(x))

    @property
    def lo(self) -> Fraction:
        return self.mid - self.rad

    @property
    def hi(self) -> Fraction:
        return self.mid + self.rad

    def __add__(self, o: "RItv") -> "RItv":
        return RItv(self.mid + o.mid, self.rad + o.rad)

    def __sub__(self, o: "RItv") -> "RItv":
        return RItv(self.mid - o.mid, self.rad + o.rad)

    def __neg__(self) -> "RItv":
        return RItv(-self.mid, self.rad)

    def __mul__(self, o: "RItv") -> "RItv":
        return RItv(self.mid * o.mid,
                    abs(self.mid) * o.rad + abs(o.mid) * self.rad + self.rad * o.rad)

    def scale(self, c: Fraction) -> "RItv":
        return RItv(self.mid * c, self.rad * abs(c))

    def abs_bounds(self) -> tuple[Fraction, Fraction]:
        lo = abs(self.mid) - self.rad
        if lo < 0:
            lo = Fraction(0)
        return lo, abs(self.mid) + self.rad

    def sign(self):
        """-1, 0 or +1 when decided, None when the interval straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.rad == 0:
            return 0
        return None

    def compare(self, x: Fraction):
        """Compare against an exact rational; None when undecided."""
        if self.hi < x:
            return -1
        if self.lo > x:
            return 1
        if self.rad == 0:
            return 0
        return None

    def __float__(self) -> float:
        return float(self.mid)


@dataclass(frozen=True)
class CItv:
    """Complex disk: center re + i*im (rational), radius rad (rational)."""

    re: Fraction
    im: Fraction
    rad: Fraction = Fraction(0)

    @staticmethod
    def exact(re, im=0) -> "CItv":
        return CItv(Fraction(re), Fraction(im))

    def _center_abs_upper(self) -> Fraction:
        return sqrt_upper(self.re * self.re + self.im * self.im)

    def __add__(self, o: "CItv") -> "CItv":
        return CItv(self.re + o.re, self.im + o.im, self.rad + o.rad)

    def __sub__(self, o: "CItv") -> "CItv":
        return CItv(self.re - o.re, self.im - o.im, self.rad + o.rad)

    def __mul__(self, o: "CItv") -> "CItv":
        re = self.re * o.re - self.im * o.im
        im = self.re * o.im + self.im * o.re
        rad = (self._center_abs_upper() * o.rad
               + o._center_abs_upper() * self.rad
               + self.rad * o.rad)
        return CItv(re, im, rad)

    def scale(self, c: Fraction) -> "CItv":
        return CItv(self.re * c, self.im * c, self.rad * abs(c))

    def abs2_bounds(self) -> tuple[Fraction, Fraction]:
        """Rational bounds enclosing |z|^2 over the disk (tight as rad -> 0:
        | |z|^2 - |mid|^2 | <= rad (2 |mid| + rad))."""
        m2 = self.re * self.re + self.im * self.im
        if self.rad == 0:
            return m2, m2
        spread = self.rad * (2 * (sqrt_upper(m2) + 1) + self.rad)
        lo = m2 - spread
        if lo < 0:
            lo = Fraction(0)
        return lo, m2 + spread

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


def poly_eval_real(coeffs_asc, x: RItv) -> RItv:
    """Horner evaluation of a rational polynomial on a real interval."""
    acc = RItv(Fraction(0))
    for c in reversed(coeffs_asc):
        acc = acc * x + RItv(Fraction(c))
    return acc


def poly_eval_complex(coeffs_asc, z: CItv) -> CItv:
    acc = CItv(Fraction(0), Fraction(0))
    for c in reversed(coeffs_asc):
        acc = acc * z + CItv(Fraction(c), Fraction(0))
    return acc


def log_bounds(lo: Fraction, hi: Fraction) -> tuple[float, float]:
    """Float bounds for log over a positive rational interval."""
    if lo <= 0:
        raise ValueError("log of nonpositive interval")
    return nudge_down(math.log(nudge_down(float(lo)))), \
        nudge_up(math.log(nudge_up(float(hi))))


def mul_pos_bounds(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]):
    """Product of nonnegative rational bound pairs."""
    return a[0] * b[0], a[1] * b[1]
