"""Exact linear algebra over the rationals and the integers.

Everything here works on plain lists/tuples of ``int`` or ``Fraction`` so the
rest of the package can stay exact wherever the mathematics demands it.  The
routines are written for the small dimensions this package needs (<= 12);
no attempt is made at asymptotic cleverness.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence


Vec = tuple[Fraction, ...]


def frac_vec(xs: Iterable) -> Vec:
    return tuple(Fraction(x) for x in xs)


def vec_add(a: Sequence, b: Sequence):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Sequence, b: Sequence):
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(a: Sequence, c):
    return tuple(c * x for x in a)


def vec_dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def vec_norm2(a: Sequence):
    return sum(x * x for x in a)


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def mat_vec(a, v):
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in a)


def identity(n, one=Fraction(1)):
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def det_fraction(mat) -> Fraction:
    """Determinant by fraction-free-ish Gaussian elimination (exact)."""
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / inv
                a[i] = [a[i][j] - f * a[c][j] for j in range(n)]
    return det


def solve_fraction(mat, rhs) -> Vec | None:
    """Solve mat * x = rhs over Q; returns None when singular/inconsistent."""
    n = len(mat)
    m = len(mat[0])
    a = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(mat)]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        a[r] = [x / inv for x in a[r]]
        for i in range(n):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [a[i][j] - f * a[r][j] for j in range(m + 1)]
        pivots.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if a[i][m] != 0:
            return None
    x = [Fraction(0)] * m
    for i, c in enumerate(pivots):
        x[c] = a[i][m]
    return tuple(x)


def mat_inverse(mat):
    n = len(mat)
    a = [[Fraction(x) for x in row] + row_id for row, row_id in
         zip(mat, identity(n))]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = a[c][c]
        a[c] = [x / inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [a[i][j] - f * a[c][j] for j in range(2 * n)]
    return [row[n:] for row in a]


def rank_fraction(rows) -> int:
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    if n == 0:
        return 0
    m = len(a[0])
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [a[i][j] - f * a[r][j] for j in range(m)]
        r += 1
        if r == n:
            break
    return r


# -- integer Hermite normal form ----------------------------------------------

def hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix.

    Returns the nonzero rows in echelon form: pivots positive, entries above
    each pivot reduced into [0, pivot).
    """
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return []
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        while True:
            nz = [i for i in range(r, m) if a[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[i0] = a[i0], a[r]
            done = True
            for i in range(r + 1, m):
                if a[i][c] != 0:
                    q = a[i][c] // a[r][c]
                    a[i] = [a[i][j] - q * a[r][j] for j in range(n)]
                    if a[i][c] != 0:
                        done = False
            if done:
                break
        if r < m and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                q = a[i][c] // a[r][c]
                if q:
                    a[i] = [a[i][j] - q * a[r][j] for j in range(n)]
            r += 1
            if r == m:
                break
    return [row for row in a[:r]]


def hnf_with_transform(rows: Sequence[Sequence[int]]):
    """Like :func:`hnf` but also returns U (unimodular) with U*A = H.

    Zero rows of H are kept so that U stays square; the kernel of A (as row
    combinations) is spanned by the U-rows opposite the zero H-rows.
    """
    a = [list(map(int, r)) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        while True:
            nz = [i for i in range(r, m) if a[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[i0] = a[i0], a[r]
            u[r], u[i0] = u[i0], u[r]
            done = True
            for i in range(r + 1, m):
                if a[i][c] != 0:
                    q = a[i][c] // a[r][c]
                    a[i] = [a[i][j] - q * a[r][j] for j in range(n)]
                    u[i] = [u[i][j] - q * u[r][j] for j in range(m)]
                    if a[i][c] != 0:
                        done = False
            if done:
                break
        if r < m and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
                u[r] = [-x for x in u[r]]
            for i in range(r):
                q = a[i][c] // a[r][c]
                if q:
                    a[i] = [a[i][j] - q * a[r][j] for j in range(n)]
                    u[i] = [u[i][j] - q * u[r][j] for j in range(m)]
            r += 1
            if r == m:
                break
    return a, u, r


def integer_kernel(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of {x in Z^k : M x = 0} for an integer matrix M (n x k)."""
    if not mat:
        return []
    k = len(mat[0])
    transposed = [[mat[i][j] for i in range(len(mat))] for j in range(k)]
    h, u, rank = hnf_with_transform(transposed)
    return [u[i] for i in range(rank, k)]


def hnf_rational_rows(rows) -> tuple[list[list[int]], int]:
    """HNF description of the Z-span of rational row vectors.

    Returns (H, den) with the span equal to (1/den) * Z-span(H); content is
    normalised out of (H, den).
    """
    fr = [[Fraction(x) for x in row] for row in rows]
    den = 1
    for row in fr:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [[int(x * den) for x in row] for row in fr]
    h = hnf(ints)
    g = den
    for row in h:
        for x in row:
            g = math.gcd(g, abs(x))
        if g == 1:
            break
    if g > 1:
        h = [[x // g for x in row] for row in h]
        den //= g
    return h, den


def member_of_hnf_span(h: Sequence[Sequence[int]], target: Sequence[int]) -> list[int] | None:
    """Integer coefficients expressing target in the row span of echelon H."""
    t = list(map(int, target))
    n = len(t)
    coeffs = []
    pivots = []
    for row in h:
        p = next((j for j in range(n) if row[j] != 0), None)
        if p is None:
            continue
        pivots.append((p, row))
    for p, row in pivots:
        if t[p] % row[p] != 0:
            return None
        q = t[p] // row[p]
        coeffs.append(q)
        if q:
            t = [t[j] - q * row[j] for j in range(n)]
    if any(t):
        return None
    return coeffs


# -- LLL over the rationals ----------------------------------------------------

def lll_reduce(rows, delta: Fraction = Fraction(99, 100)):
    """Exact LLL reduction of linearly independent rational row vectors."""
    b = [list(map(Fraction, r)) for r in rows]
    n = len(b)

    def gso(bv):
        bstar = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        norms = []
        for i in range(n):
            v = list(bv[i])
            for j in range(i):
                mu[i][j] = vec_dot(bv[i], bstar[j]) / norms[j]
                v = [v[t] - mu[i][j] * bstar[j][t] for t in range(len(v))]
            bstar.append(v)
            norms.append(vec_dot(v, v))
        return bstar, mu, norms

    bstar, mu, norms = gso(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = mu[k][j]
            r = math.floor(q + Fraction(1, 2))
            if r:
                b[k] = [b[k][t] - r * b[j][t] for t in range(len(b[k]))]
                bstar, mu, norms = gso(b)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bstar, mu, norms = gso(b)
            k = max(k - 1, 1)
    return [tuple(r) for r in b]


# -- bounds used by sphere enumeration -----------------------------------------

def floor_sqrt_fraction(x: Fraction) -> int:
    """floor(sqrt(x)) for x >= 0."""
    if x < 0:
        raise ValueError("negative argument")
    n, d = x.numerator, x.denominator
    r = math.isqrt(n * d) // d
    while (r + 1) * (r + 1) <= x:
        r += 1
    while r * r > x:
        r -= 1
    return r


def int_range_for_quadratic(center: Fraction, bound: Fraction) -> tuple[int, int]:
    """Integer interval {m : (m - center)^2 <= bound}; empty as (1, 0)."""
    if bound < 0:
        return (1, 0)
    s = floor_sqrt_fraction(bound)
    lo = math.ceil(center - s - 1)
    hi = math.floor(center + s + 1)
    while (Fraction(lo) - center) ** 2 > bound:
        lo += 1
    while (Fraction(hi) - center) ** 2 > bound:
        hi -= 1
    return (lo, hi)


def sqrt_lower(x: Fraction) -> Fraction:
    """Rational lower bound for sqrt(x), x >= 0 (coarse, fast)."""
    if x == 0:
        return Fraction(0)
    n, d = x.numerator, x.denominator
    return Fraction(math.isqrt(n * d), d)


def sqrt_upper(x: Fraction) -> Fraction:
    """Rational upper bound for sqrt(x), x >= 0 (coarse, fast)."""
    if x == 0:
        return Fraction(0)
    n, d = x.numerator, x.denominator
    return Fraction(math.isqrt(n * d) + 1, d)


def sqrt_bounds(x: Fraction, digits: int = 25) -> tuple[Fraction, Fraction]:
    """Rational bounds for sqrt(x) with absolute gap about 10^-digits."""
    if x == 0:
        return Fraction(0), Fraction(0)
    n, d = x.numerator, x.denominator
    s = 10 ** digits
    r = math.isqrt(n * d * s * s)
    return Fraction(r, d * s), Fraction(r + 1, d * s)
