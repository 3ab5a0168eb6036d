"""Lipschitz chart sets, the counting bounds, exact lattice counts and
Monte-Carlo volumes.

Charts are closed-form descriptors (affine, spherical, exponential-affine,
and the product/extend/scale-multiply combinators) so that sup-norms used in
the combinator constants come from the descriptors, not from sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import linalg
from .errors import (BadParams, BadQ, BudgetExceeded, DomainMismatch,
                     NotANorm, UndecidableMembership)
from .lattices import LatticeBasis, MinimaCertificate, enumerate_ball


# -- chart descriptors ----------------------------------------------------------

class Chart:
    """Map [0,1]^dom -> R^amb with a declared Lipschitz constant."""

    dom: int
    amb: int
    L: float

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sup_norm_bound(self) -> float:
        """Rigorous upper bound for sup |phi| over the domain."""
        raise NotImplementedError


class AffineChart(Chart):
    """t -> A t + b; Lipschitz constant = spectral bound of A."""

    def __init__(self, mat: np.ndarray, offset: np.ndarray,
                 declared_L: Optional[float] = None):
        self.mat = np.array(mat, dtype=float)
        self.offset = np.array(offset, dtype=float)
        if self.mat.ndim != 2 or self.mat.shape[0] != self.offset.shape[0]:
            raise BadParams("affine chart dimensions inconsistent")
        self.amb, self.dom = self.mat.shape
        op_norm = float(np.linalg.norm(self.mat, 2)) if self.dom else 0.0
        self.L = declared_L if declared_L is not None else op_norm
        self._op_norm = op_norm

    def evaluate(self, t):
        return self.mat @ np.asarray(t, dtype=float) + self.offset

    def sup_norm_bound(self):
        # |A t + b| <= |b| + sum_j |col_j| over t in [0,1]^dom
        col = np.linalg.norm(self.mat, axis=0).sum() if self.dom else 0.0
        return float(np.linalg.norm(self.offset)) + float(col)


class PointChart(Chart):
    """Zero-parameter chart: a single point."""

    def __init__(self, point, declared_L: float = 0.0):
        self.point = np.array(point, dtype=float)
        self.dom = 0
        self.amb = self.point.shape[0]
        self.L = declared_L

    def evaluate(self, t):
        return self.point.copy()

    def sup_norm_bound(self):
        return float(np.linalg.norm(self.point))


class SphereChart(Chart):
    """Single spherical-coordinates cover of the sphere |x| = r in R^D."""

    def __init__(self, D: int, r: float, declared_L: Optional[float] = None):
        if D < 2 or r <= 0:
            raise BadParams("sphere needs D >= 2, r > 0")
        self.D = D
        self.r = float(r)
        self.dom = D - 1
        self.amb = D
        self.L = declared_L if declared_L is not None else 2 * math.pi * r * math.sqrt(D)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        angles = np.empty(self.dom)
        angles[:-1] = math.pi * t[:-1]
        angles[-1] = 2 * math.pi * t[-1]
        out = np.empty(self.amb)
        sin_prod = 1.0
        for i in range(self.dom):
            out[i] = sin_prod * math.cos(angles[i])
            sin_prod *= math.sin(angles[i])
        out[self.dom] = sin_prod
        return self.r * out

    def sup_norm_bound(self):
        return self.r


class ScalarExpAffineChart(Chart):
    """t -> exp(w . t + b), a positive scalar chart (amb = 1)."""

    def __init__(self, weights: Sequence[float], const: float,
                 declared_L: Optional[float] = None):
        self.w = np.array(weights, dtype=float)
        self.b = float(const)
        self.dom = len(self.w)
        self.amb = 1
        self._sup = math.exp(self.b + float(np.clip(self.w, 0, None).sum()))
        wnorm = float(np.linalg.norm(self.w))
        self.L = declared_L if declared_L is not None else self._sup * wnorm

    def evaluate(self, t):
        return np.array([math.exp(float(self.w @ np.asarray(t, dtype=float)) + self.b)])

    def sup_norm_bound(self):
        return self._sup


class IdentityScalarChart(Chart):
    """t -> t on [0,1] (amb = 1)."""

    def __init__(self):
        self.dom = 1
        self.amb = 1
        self.L = 1.0

    def evaluate(self, t):
        return np.array([float(np.asarray(t, dtype=float)[0])])

    def sup_norm_bound(self):
        return 1.0


class RadialNormalizedChart(Chart):
    """Sphere chart pushed onto {N = 1} by u -> u / N(u) for a norm N."""

    def __init__(self, D: int, evaluator: Callable[[np.ndarray], float],
                 declared_L: float, sup_bound: float):
        if D < 2:
            raise BadParams("radial chart needs D >= 2")
        self.sphere = SphereChart(D, 1.0)
        self.evaluator = evaluator
        self.dom = D - 1
        self.amb = D
        self.L = declared_L
        self._sup = sup_bound

    def evaluate(self, t):
        u = self.sphere.evaluate(t)
        nv = self.evaluator(u)
        if nv <= 0:
            raise BadParams("evaluator vanished on the unit sphere")
        return u / nv

    def sup_norm_bound(self):
        return self._sup


class ProductChart(Chart):
    """Stack component charts over a shared domain; L = sqrt(sum L_i^2)."""

    def __init__(self, parts: Sequence[Chart]):
        doms = {p.dom for p in parts}
        if len(doms) != 1:
            raise DomainMismatch("product parts must share the domain")
        self.parts = list(parts)
        self.dom = doms.pop()
        self.amb = sum(p.amb for p in parts)
        self.L = math.sqrt(sum(p.L ** 2 for p in parts))

    def evaluate(self, t):
        return np.concatenate([p.evaluate(t) for p in self.parts])

    def sup_norm_bound(self):
        return math.sqrt(sum(p.sup_norm_bound() ** 2 for p in self.parts))


class ExtendChart(Chart):
    """Same map on a larger parameter cube (extra parameters ignored)."""

    def __init__(self, chart: Chart, new_dom: int):
        if new_dom < chart.dom:
            raise DomainMismatch("can only extend to a larger domain")
        self.inner = chart
        self.dom = new_dom
        self.amb = chart.amb
        self.L = chart.L

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return self.inner.evaluate(t[:self.inner.dom])

    def sup_norm_bound(self):
        return self.inner.sup_norm_bound()


class ScaleMultiplyChart(Chart):
    """(x, x') -> f(x) * f'(x') for scalar f; L = sqrt2 max(|f'| L, |f| L')."""

    def __init__(self, scalar: Chart, vector: Chart):
        if scalar.amb != 1:
            raise DomainMismatch("first factor must be scalar")
        self.scalar = scalar
        self.vector = vector
        self.dom = scalar.dom + vector.dom
        self.amb = vector.amb
        self.L = math.sqrt(2) * max(vector.sup_norm_bound() * scalar.L,
                                    scalar.sup_norm_bound() * vector.L)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        s = float(self.scalar.evaluate(t[:self.scalar.dom])[0])
        return s * self.vector.evaluate(t[self.scalar.dom:])

    def sup_norm_bound(self):
        return self.scalar.sup_norm_bound() * self.vector.sup_norm_bound()


class ScaledChart(Chart):
    """Chart composed with scalar multiplication by a positive factor."""

    def __init__(self, chart: Chart, factor: float):
        if factor <= 0:
            raise BadParams("scale factor must be positive")
        self.inner = chart
        self.factor = float(factor)
        self.dom = chart.dom
        self.amb = chart.amb
        self.L = chart.L * self.factor

    def evaluate(self, t):
        return self.factor * self.inner.evaluate(t)

    def sup_norm_bound(self):
        return self.factor * self.inner.sup_norm_bound()


@dataclass
class LipChartSet:
    """A Lip(D, c, M, L) family: M maps with shared declared constant L."""

    D: int
    c: int
    charts: list
    L: float

    @property
    def M(self) -> int:
        return len(self.charts)

    def scaled(self, factor: float) -> "LipChartSet":
        return LipChartSet(D=self.D, c=self.c,
                           charts=[ScaledChart(ch, factor) for ch in self.charts],
                           L=self.L * factor)


# -- chart factory ----------------------------------------------------------------

def make_chart(kind: str, **params) -> LipChartSet:
    if kind == "cube_boundary":
        dim = int(params["dim"])
        half = float(params.get("half_width", 1.0))
        if dim < 1:
            raise BadParams("cube needs dim >= 1")
        charts = []
        for axis in range(dim):
            for sgn in (1.0, -1.0):
                if dim == 1:
                    charts.append(PointChart([sgn * half], declared_L=2 * half))
                    continue
                mat = np.zeros((dim, dim - 1))
                rows = [i for i in range(dim) if i != axis]
                for c_idx, r_idx in enumerate(rows):
                    mat[r_idx, c_idx] = 2 * half
                off = np.full(dim, -half)
                off[axis] = sgn * half
                charts.append(AffineChart(mat, off, declared_L=2 * half))
        return LipChartSet(D=dim, c=1, charts=charts, L=2 * half)

    if kind == "sphere":
        D = int(params["D"])
        r = float(params["r"])
        ch = SphereChart(D, r)
        return LipChartSet(D=D, c=1, charts=[ch], L=ch.L)

    if kind == "ball_hyperplane_section":
        d = int(params["d"])
        r = float(params["r"])
        if d < 2 or r <= 0:
            raise BadParams("section needs d >= 2, r > 0")
        basis = params.get("basis")
        if basis is None:
            basis = np.eye(d)[: d - 1]
        basis = np.array(basis, dtype=float)
        if basis.shape != (d - 1, d):
            raise BadParams("section basis must be (d-1) x d")
        center = np.array(params.get("center", np.zeros(d)), dtype=float)
        mat = (-2 * r) * basis.T
        off = center + r * basis.sum(axis=0)
        declared = 2 * math.sqrt(d - 1) * r
        return LipChartSet(D=d, c=1,
                           charts=[AffineChart(mat, off, declared_L=declared)],
                           L=declared)

    if kind == "fundamental_parallelepiped_boundary":
        vectors = [np.array(v, dtype=float) for v in params["vectors"]]
        q = len(vectors)
        if q < 1:
            raise BadParams("need at least one edge vector")
        amb = vectors[0].shape[0]
        if any(v.shape[0] != amb for v in vectors):
            raise BadParams("edge vectors must share the ambient dimension")
        declared = float(max(q - 1, 0))
        charts = []
        for axis in range(q):
            for fixed in (0.0, 1.0):
                others = [vectors[j] for j in range(q) if j != axis]
                base = fixed * vectors[axis]
                if not others:
                    charts.append(PointChart(base, declared_L=declared))
                    continue
                mat = np.stack(others, axis=1)
                charts.append(AffineChart(mat, base, declared_L=declared))
        return LipChartSet(D=amb, c=2, charts=charts, L=declared)

    if kind == "complex_max_ball":
        n = int(params["n"])
        D = 2 * (n + 1)
        declared = 2 * math.pi * math.sqrt(2 * n + 1)
        charts = []
        for j in range(n + 1):
            charts.append(_ComplexMaxChart(n, j, declared))
        return LipChartSet(D=D, c=1, charts=charts, L=declared)

    raise BadParams(f"unknown chart kind {kind!r}")


class _ComplexMaxChart(Chart):
    """One chart of {max_j |z_j| = 1} in C^{n+1}: slot j on the unit circle,
    the others covering the unit disks via squares."""

    def __init__(self, n: int, slot: int, declared_L: float):
        self.n = n
        self.slot = slot
        self.dom = 2 * n + 1
        self.amb = 2 * (n + 1)
        self.L = declared_L

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty(self.amb)
        theta = 2 * math.pi * t[0]
        out[2 * self.slot] = math.cos(theta)
        out[2 * self.slot + 1] = math.sin(theta)
        k = 1
        for j in range(self.n + 1):
            if j == self.slot:
                continue
            out[2 * j] = 2 * t[k] - 1
            out[2 * j + 1] = 2 * t[k + 1] - 1
            k += 2
        return out

    def sup_norm_bound(self):
        return math.sqrt(2 * (self.n + 1))


def combine_charts(op: str, *args) -> Chart:
    if op == "product":
        return ProductChart(list(args[0]) if len(args) == 1 else list(args))
    if op == "extend":
        chart, new_dom = args
        return ExtendChart(chart, int(new_dom))
    if op == "scale_multiply":
        scalar, vector = args
        return ScaleMultiplyChart(scalar, vector)
    raise DomainMismatch(f"unknown combinator {op!r}")


# -- sampled Lipschitz verification -------------------------------------------------

def verify_lipschitz(chart_set: LipChartSet, samples: int = 2000,
                     seed: int = 0) -> dict:
    """Sampled check that every chart respects its declared constant."""
    rng = np.random.default_rng(seed)
    max_ratio = 0.0
    worst = None
    for idx, chart in enumerate(chart_set.charts):
        if chart.dom == 0:
            continue
        ts = rng.random((samples, 2, chart.dom))
        for a, b in ts:
            dt = float(np.linalg.norm(a - b))
            if dt < 1e-12:
                continue
            dphi = float(np.linalg.norm(chart.evaluate(a) - chart.evaluate(b)))
            ratio = dphi / dt
            if ratio > max_ratio:
                max_ratio = ratio
                worst = idx
    declared = chart_set.L
    ok = max_ratio <= declared * (1 + 1e-9) + 1e-12
    return {"max_ratio": max_ratio, "declared_L": declared,
            "worst_chart": worst, "pass": bool(ok)}


# -- the counting bounds -------------------------------------------------------------

def pm1_translate_bound(M: int, Q: int, D: int, L: float,
                        minima: Sequence[float], defect: float) -> float:
    """Translate-count bound M Q^{D-1} prod_i (sqrt(D-1) Omega L / (lambda_i Q) + 2)."""
    if not isinstance(Q, int) or Q < 1:
        raise BadQ("Q must be a positive integer")
    if len(minima) != D:
        raise BadParams("need D minima")
    prod = 1.0
    for lam in minima:
        prod *= math.sqrt(D - 1) * defect * L / (lam * Q) + 2
    return M * Q ** (D - 1) * prod


def twi1_bound(M: int, L: float, minima: Sequence[float], D: int) -> float:
    """c0(D) M max_i L^i / (lambda_1 ... lambda_i), c0(D) = D^(3 D^2 / 2)."""
    c0 = float(D) ** (1.5 * D * D)
    best = 1.0
    prod = 1.0
    for i in range(1, D):
        prod *= minima[i - 1]
        best = max(best, L ** i / prod)
    return c0 * M * best


def tmv1_bound(M: int, L: float, lambda1: float, defect: float, D: int) -> float:
    """3^D M (sqrt(D) Omega L / lambda_1 + 1)^(D-1)."""
    return 3 ** D * M * (math.sqrt(D) * defect * L / lambda1 + 1) ** (D - 1)


# -- exact counts and experiments ------------------------------------------------------

def exact_lattice_count(basis: LatticeBasis, membership: Callable,
                        radius: float, budget: int = 4_000_000,
                        include_zero: bool = True) -> int:
    """|Lambda ∩ S| for S inside the ball of the given radius.

    ``membership`` receives an exact rational vector and must return a bool
    (raising UndecidableMembership when it cannot decide).
    """
    r2 = Fraction(radius).limit_denominator(10 ** 12) ** 2
    count = 0
    zero = tuple(Fraction(0) for _ in range(basis.D))
    if include_zero and membership(zero):
        count += 1
    for coeffs, _norm2 in enumerate_ball(basis.rows, r2, budget=budget):
        vec = basis.vector(coeffs)
        if membership(vec):
            count += 1
        neg = tuple(-x for x in vec)
        if membership(neg):
            count += 1
    return count


@dataclass
class CountReport:
    det: float
    count: int
    volume: float
    volume_ci: float
    bounds: dict
    translate_hits: int
    flags: dict


def discrepancy_experiment(basis: LatticeBasis, set_descr, seed: int = 0,
                           budget: int = 4_000_000) -> CountReport:
    """Count lattice points of a bounded set and check every counting bound.

    ``set_descr`` provides: membership(vec)->bool, charts: LipChartSet,
    volume: float (exact or MC estimate), volume_ci: float, radius: float
    (enclosing ball).
    """
    D = basis.D
    cert = basis.minima(budget=budget)
    minima = cert.lambdas()
    count = exact_lattice_count(basis, set_descr.membership, set_descr.radius,
                                budget=budget)
    det = abs(float(basis.det()))
    vol = set_descr.volume
    discrepancy = abs(count - vol / det)
    charts = set_descr.charts
    from .lattices import mahler_weyl_basis, orthogonality_defect
    reduced = mahler_weyl_basis(cert, basis)
    defect = orthogonality_defect(reduced)
    bound_thm = twi1_bound(charts.M, charts.L, minima, D)
    bound_cor = tmv1_bound(charts.M, charts.L, minima[0], defect, D)
    q_cor = int(math.sqrt(D) * defect * charts.L / minima[0]) + 1
    bound_prop = pm1_translate_bound(charts.M, q_cor, D, charts.L, minima, defect)
    t_hat = sampled_translate_hits(reduced, charts, seed=seed)
    slack = 1e-9 * max(1.0, abs(vol / det)) + set_descr.volume_ci
    flags = {
        "thm_bound_ok": discrepancy <= bound_thm + slack,
        "cor_bound_ok": discrepancy <= bound_cor + slack,
        "translate_bound_ok": t_hat <= bound_prop + 1e-9,
    }
    return CountReport(det=det, count=count, volume=vol,
                       volume_ci=set_descr.volume_ci,
                       bounds={"thm": bound_thm, "cor": bound_cor,
                               "prop_translates": bound_prop, "Q": q_cor},
                       translate_hits=t_hat, flags=flags)


def sampled_translate_hits(basis: LatticeBasis, charts: LipChartSet,
                           seed: int = 0, samples_per_chart: int = 400) -> int:
    """Lower estimate of the number of fundamental-domain translates meeting
    the boundary: sample chart points, map them to their containing cell."""
    rng = np.random.default_rng(seed)
    rows = np.array([[float(x) for x in r] for r in basis.rows])
    inv = np.linalg.inv(rows.T)
    cells = set()
    for chart in charts.charts:
        pts = []
        if chart.dom == 0:
            pts.append(chart.evaluate(np.zeros(0)))
        else:
            for t in rng.random((samples_per_chart, chart.dom)):
                pts.append(chart.evaluate(t))
        for p in pts:
            coords = inv @ p
            cells.add(tuple(int(math.floor(c)) for c in coords))
    return len(cells)


# -- Monte-Carlo volume -----------------------------------------------------------------

def volume_mc(membership_batch: Callable, box: Sequence[tuple[float, float]],
              n_samples: int, seed: int = 0, shards: int = 64,
              workers: int = 1) -> tuple[float, float]:
    """Hit-rate volume estimate with a 99% CI halfwidth.

    ``membership_batch`` maps an (m, D) float array to a boolean array.
    Sharded deterministically: results do not depend on ``workers``.
    """
    box = [(float(a), float(b)) for a, b in box]
    dim = len(box)
    vol_box = 1.0
    for a, b in box:
        vol_box *= (b - a)
    base = n_samples // shards
    sizes = [base + (1 if i < n_samples % shards else 0) for i in range(shards)]

    def run_shard(i: int) -> int:
        rng = np.random.default_rng((seed, i))
        m = sizes[i]
        if m == 0:
            return 0
        pts = rng.random((m, dim))
        for k, (a, b) in enumerate(box):
            pts[:, k] = a + (b - a) * pts[:, k]
        return int(np.count_nonzero(membership_batch(pts)))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run_shard, range(shards)))
    else:
        hits = sum(run_shard(i) for i in range(shards))
    p_hat = hits / n_samples if n_samples else 0.0
    est = vol_box * p_hat
    ci = 2.5758293035489004 * vol_box * math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n_samples)
    return est, ci
