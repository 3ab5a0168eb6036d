"""Geometry of numbers: successive minima, basis reduction, structural checks.

Lattices are full-rank and stored as exact rational basis rows.  Minima are
certified by sphere enumeration (Fincke-Pohst) after an exact LLL
pre-reduction; lattices whose entries come from field embeddings are
rationalized first and carry a recorded slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

import mpmath

from . import linalg
from .errors import (DimensionTooLarge, EnumerationBudgetExceeded,
                     NotLatticeMember, WitnessNotInLattice)

DIMENSION_CAP = 12
DEFAULT_ENUM_BUDGET = 2_000_000


@dataclass(frozen=True)
class MinimaCertificate:
    lambda2: tuple[Fraction, ...]          # squared successive minima
    witnesses: tuple[tuple[Fraction, ...], ...]
    witness_coeffs: tuple[tuple[int, ...], ...]
    radius2: Fraction                      # enumeration radius proving completeness
    enumerated: int
    slack: float = 0.0

    def lambdas(self) -> list[float]:
        return [math.sqrt(float(l2)) for l2 in self.lambda2]


class LatticeBasis:
    """Full-rank lattice in R^D given by exact rational basis rows."""

    def __init__(self, rows, slack: float = 0.0):
        self.rows = tuple(tuple(Fraction(x) for x in row) for row in rows)
        self.D = len(self.rows)
        if any(len(r) != self.D for r in self.rows):
            raise ValueError("basis must be square (full rank)")
        self.slack = slack
        self._det: Optional[Fraction] = None
        self._cert: Optional[MinimaCertificate] = None

    def det(self) -> Fraction:
        if self._det is None:
            self._det = linalg.det_fraction([list(r) for r in self.rows])
            if self._det == 0:
                raise ValueError("basis is singular")
        return self._det

    def gram(self):
        return [[linalg.vec_dot(a, b) for b in self.rows] for a in self.rows]

    def vector(self, coeffs: Sequence[int]) -> tuple[Fraction, ...]:
        out = [Fraction(0)] * self.D
        for c, row in zip(coeffs, self.rows):
            if c:
                for k in range(self.D):
                    out[k] += c * row[k]
        return tuple(out)

    def coeffs_of(self, vec) -> Optional[tuple[int, ...]]:
        sol = linalg.solve_fraction(
            [[self.rows[j][i] for j in range(self.D)] for i in range(self.D)],
            list(vec))
        if sol is None or any(x.denominator != 1 for x in sol):
            return None
        return tuple(int(x) for x in sol)

    def minima(self, budget: int = DEFAULT_ENUM_BUDGET) -> MinimaCertificate:
        if self._cert is None:
            self._cert = successive_minima(self, budget=budget)
        return self._cert


def _gso(rows):
    n = len(rows)
    bstar = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms = []
    for i in range(n):
        v = list(rows[i])
        for j in range(i):
            mu[i][j] = linalg.vec_dot(rows[i], bstar[j]) / norms[j]
            v = [v[t] - mu[i][j] * bstar[j][t] for t in range(len(v))]
        bstar.append(v)
        norms.append(linalg.vec_dot(v, v))
    return mu, norms


def enumerate_ball(rows, radius2: Fraction, budget: int = DEFAULT_ENUM_BUDGET,
                   ) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """All nonzero (coeffs, |v|^2) with |v|^2 <= radius2, up to sign.

    The tree traversal runs on inflated float bounds (so no candidate is
    missed at any realistic conditioning) while each emitted vector carries
    its exact rational squared norm, checked exactly against radius2.  Only
    one of {c, -c} is emitted (first nonzero coefficient positive).
    """
    n = len(rows)
    gram = [[linalg.vec_dot(a, b) for b in rows] for a in rows]
    fb = [[float(x) for x in row] for row in rows]
    radius2 = Fraction(radius2)
    mu = [[0.0] * n for _ in range(n)]
    norms = [0.0] * n
    bstar = [[0.0] * len(fb[0]) for _ in range(n)]
    for i in range(n):
        v = list(fb[i])
        for j in range(i):
            mu[i][j] = sum(a * b for a, b in zip(fb[i], bstar[j])) / norms[j]
            v = [v[t] - mu[i][j] * bstar[j][t] for t in range(len(v))]
        bstar[i] = v
        norms[i] = sum(x * x for x in v)
        if norms[i] <= 0:
            raise ValueError("degenerate basis")
    r2f = float(radius2) * (1 + 1e-9) + 1e-12
    coeffs = [0] * n
    visited = 0

    def exact_norm2(vec) -> Fraction:
        total = Fraction(0)
        for i in range(n):
            ci = vec[i]
            if not ci:
                continue
            total += ci * ci * gram[i][i]
            for j in range(i + 1, n):
                if vec[j]:
                    total += 2 * ci * vec[j] * gram[i][j]
        return total

    def rec(i: int, remaining: float) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        nonlocal visited
        if i < 0:
            if any(coeffs):
                vec = tuple(coeffs)
                for c in vec:
                    if c != 0:
                        if c < 0:
                            return
                        break
                norm2 = exact_norm2(vec)
                if norm2 <= radius2:
                    yield vec, norm2
            return
        center = -sum(mu[j][i] * coeffs[j] for j in range(i + 1, n))
        span = math.sqrt(max(0.0, remaining / norms[i])) * (1 + 1e-12) + 1e-9
        for x in range(math.ceil(center - span), math.floor(center + span) + 1):
            visited += 1
            if visited > budget:
                raise EnumerationBudgetExceeded(f"enumeration exceeded {budget} nodes")
            coeffs[i] = x
            used = norms[i] * (x - center) ** 2
            rem = remaining - used
            if rem >= -1e-9:
                yield from rec(i - 1, max(rem, 0.0))
        coeffs[i] = 0

    yield from rec(n - 1, r2f)


def _norm2_of(rows, coeffs) -> Fraction:
    vec = [Fraction(0)] * len(rows[0])
    for c, row in zip(coeffs, rows):
        if c:
            for k in range(len(vec)):
                vec[k] += c * row[k]
    return linalg.vec_norm2(vec)


def enumerate_ball_floats(rows_float, radius: float, budget: int = DEFAULT_ENUM_BUDGET,
                          inflate: float = 1e-6) -> list[tuple[int, ...]]:
    """Float Fincke-Pohst returning a slight *superset* of the closed ball.

    Used to generate candidate coefficient vectors that exact field-side
    filters then decide; the bounds are inflated so no true member is lost.
    """
    import numpy as np

    b = np.array(rows_float, dtype=float)
    n = len(b)
    # float Gram-Schmidt
    bstar = np.zeros_like(b)
    mu = np.zeros((n, n))
    norms = np.zeros(n)
    for i in range(n):
        v = b[i].copy()
        for j in range(i):
            mu[i][j] = float(np.dot(b[i], bstar[j]) / norms[j])
            v -= mu[i][j] * bstar[j]
        bstar[i] = v
        norms[i] = float(np.dot(v, v))
    r2 = (radius * (1 + inflate)) ** 2 + 1e-12
    out: list[tuple[int, ...]] = []
    coeffs = [0] * n
    visited = 0

    def rec(i: int, remaining: float):
        nonlocal visited
        if i < 0:
            if any(coeffs):
                vec = tuple(coeffs)
                for c in vec:
                    if c != 0:
                        if c > 0:
                            out.append(vec)
                        return
            return
        center = -sum(mu[j][i] * coeffs[j] for j in range(i + 1, n))
        span = math.sqrt(max(0.0, remaining / norms[i])) + 1e-9
        for x in range(math.ceil(center - span), math.floor(center + span) + 1):
            visited += 1
            if visited > budget:
                raise EnumerationBudgetExceeded(f"enumeration exceeded {budget} nodes")
            coeffs[i] = x
            used = norms[i] * (x - center) ** 2
            rem = remaining - used
            if rem >= -1e-9:
                rec(i - 1, max(rem, 0.0))
        coeffs[i] = 0

    rec(n - 1, r2)
    return out


def successive_minima(basis: LatticeBasis, budget: int = DEFAULT_ENUM_BUDGET
                      ) -> MinimaCertificate:
    """Exact successive minima with witnesses, by sphere enumeration."""
    if basis.D > DIMENSION_CAP:
        raise DimensionTooLarge(f"rank {basis.D} exceeds cap {DIMENSION_CAP}")
    reduced = linalg.lll_reduce([list(r) for r in basis.rows])
    radius2 = max(linalg.vec_norm2(r) for r in reduced)
    found = []
    count = 0
    for coeffs, norm2 in enumerate_ball(reduced, radius2, budget=budget):
        count += 1
        found.append((norm2, coeffs))
    found.sort(key=lambda t: (t[0], t[1]))
    witnesses = []
    witness_coeffs = []
    lambda2 = []
    rows_acc: list[list[Fraction]] = []
    for norm2, coeffs in found:
        vec = _vector_from(reduced, coeffs)
        if linalg.rank_fraction(rows_acc + [list(vec)]) > len(rows_acc):
            rows_acc.append(list(vec))
            witnesses.append(vec)
            lambda2.append(norm2)
            orig = basis.coeffs_of(vec)
            witness_coeffs.append(orig if orig is not None else tuple())
            if len(witnesses) == basis.D:
                break
    if len(witnesses) != basis.D:
        raise EnumerationBudgetExceeded("radius did not yield a full witness set")
    return MinimaCertificate(
        lambda2=tuple(lambda2),
        witnesses=tuple(witnesses),
        witness_coeffs=tuple(witness_coeffs),
        radius2=radius2,
        enumerated=count,
        slack=basis.slack,
    )


def _vector_from(rows, coeffs):
    out = [Fraction(0)] * len(rows[0])
    for c, row in zip(coeffs, rows):
        if c:
            for k in range(len(out)):
                out[k] += c * row[k]
    return tuple(out)


def mahler_weyl_basis(cert: MinimaCertificate, basis: LatticeBasis) -> LatticeBasis:
    """Genuine basis v_i with v_i in span(u_1..u_i) and
    |v_i| <= max(|u_i|, (|u_1|+...+|u_i|)/2), from the minima witnesses."""
    D = basis.D
    for w in cert.witnesses:
        if basis.coeffs_of(w) is None:
            raise WitnessNotInLattice(f"witness {w} not in lattice")
    wmat = [list(w) for w in cert.witnesses]
    winv = linalg.mat_inverse(wmat)
    # coordinates of the lattice in the witness frame
    coord_rows = [linalg.mat_vec([[winv[t][k] for t in range(D)] for k in range(D)], row)
                  for row in basis.rows]
    den = 1
    for row in coord_rows:
        for x in row:
            den = math.lcm(den, x.denominator)
    int_rows = [[int(x * den) for x in row] for row in coord_rows]
    # include the witnesses themselves (unit vectors in this frame)
    for i in range(D):
        int_rows.append([den if j == i else 0 for j in range(D)])
    reversed_rows = [list(reversed(r)) for r in int_rows]
    h = linalg.hnf(reversed_rows)
    assert len(h) == D
    lower = [list(reversed(r)) for r in reversed(h)]
    coords = [[Fraction(x, den) for x in row] for row in lower]
    for i in range(D):
        theta = coords[i][i]
        assert theta > 0
        if theta == 1:
            coords[i] = [Fraction(1) if j == i else Fraction(0) for j in range(D)]
            continue
        assert theta.numerator == 1, "minimal positive coordinate must divide 1"
        for j in range(i - 1, -1, -1):
            t = math.floor(coords[i][j] + Fraction(1, 2))
            if t:
                coords[i][j] -= t
    out_rows = [linalg.mat_vec([[wmat[t][k] for t in range(D)] for k in range(D)], row)
                for row in coords]
    out = LatticeBasis(out_rows, slack=basis.slack)
    # same lattice: compare normalized HNF forms
    assert linalg.hnf_rational_rows([list(r) for r in out.rows]) == \
        linalg.hnf_rational_rows([list(r) for r in basis.rows])
    return out


def orthogonality_defect(basis: LatticeBasis) -> float:
    num = Fraction(1)
    for row in basis.rows:
        num *= linalg.vec_norm2(row)
    ratio = num / (basis.det() ** 2)
    return math.sqrt(float(ratio))


def mahler_weyl_defect_bound(D: int) -> float:
    """Upper bound D^{3D/2} / (2 pi)^{D/2} for the lattice defect, D > 1."""
    return float(D ** Fraction(3 * D, 2)) / float((2 * math.pi) ** (D / 2))


def minkowski_verify(cert: MinimaCertificate, basis: LatticeBasis) -> dict:
    """Check 2^D/D! det <= prod(lambda) Vol B <= 2^D det (ball volume exact)."""
    D = basis.D
    with mpmath.workdps(60):
        vol = mpmath.pi ** Fraction(D, 2) / mpmath.gamma(Fraction(D, 2) + 1)
        lam_prod2 = Fraction(1)
        for l2 in cert.lambda2:
            lam_prod2 *= l2
        middle = mpmath.sqrt(mpmath.mpf(lam_prod2.numerator) / lam_prod2.denominator) * vol
        det = abs(basis.det())
        detf = mpmath.mpf(det.numerator) / det.denominator
        lower = mpmath.mpf(2) ** D / mpmath.factorial(D) * detf
        upper = mpmath.mpf(2) ** D * detf
        eps = mpmath.mpf(10) ** (-40)
        ok = (lower * (1 - eps) <= middle <= upper * (1 + eps))
        return {
            "lower": float(lower),
            "middle": float(middle),
            "upper": float(upper),
            "pass": bool(ok),
        }


def power_lattice(basis: LatticeBasis, n: int) -> LatticeBasis:
    """Block-diagonal lattice basis of the (n+1)-fold direct power."""
    d = basis.D
    D = d * (n + 1)
    rows = []
    for block in range(n + 1):
        for r in basis.rows:
            row = [Fraction(0)] * D
            row[block * d:(block + 1) * d] = list(r)
            rows.append(row)
    return LatticeBasis(rows, slack=basis.slack)


def power_minima_check(base_basis: LatticeBasis, n: int,
                       budget: int = DEFAULT_ENUM_BUDGET) -> dict:
    """Minima of the power lattice equal the base minima repeated n+1 times,
    verified by independent enumeration of both lattices."""
    if base_basis.D * (n + 1) > DIMENSION_CAP:
        raise DimensionTooLarge("power lattice exceeds dimension cap")
    base_cert = successive_minima(base_basis, budget=budget)
    big = power_lattice(base_basis, n)
    big_cert = successive_minima(big, budget=budget)
    expected = []
    for l2 in base_cert.lambda2:
        expected.extend([l2] * (n + 1))
    ok = list(big_cert.lambda2) == expected
    return {
        "base_lambda2": [str(x) for x in base_cert.lambda2],
        "power_lambda2": [str(x) for x in big_cert.lambda2],
        "pass": ok,
    }


def min_outside_subspace(basis: LatticeBasis, cert: MinimaCertificate,
                         i: int, v) -> bool:
    """Whether |v| >= lambda_i; guaranteed whenever v lies outside the span
    of the first i-1 witnesses."""
    vec = tuple(Fraction(x) for x in v)
    if basis.coeffs_of(vec) is None:
        raise NotLatticeMember(f"{v} is not in the lattice")
    return linalg.vec_norm2(vec) >= cert.lambda2[i - 1]


def rationalize_rows(rows_float, digits: int = 25) -> tuple[list[list[Fraction]], float]:
    """Rational approximation of float rows plus the rounding slack."""
    scale = 10 ** digits
    out = []
    slack = 0.0
    for row in rows_float:
        new = []
        for x in row:
            fx = Fraction(round(float(x) * scale), scale)
            slack = max(slack, abs(float(fx) - float(x)))
            new.append(fx)
        out.append(new)
    slack += 10 ** (-digits)
    return out, slack
