"""Cyclic orbits of loxodromic isometries: quasi-geodesic constants and the
linear displacement lower bound d(y, g^k y) >= C k + 2 d(y, <g> x) - A."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .hypmodels import (
    GeometryError,
    Isometry,
    Model,
    Point,
    apply,
    axis,
    distance,
    distance_to_geodesic,
    normalizing_map,
    point_off_axis,
)

MIN_K_MAX = 10


class RangeError(ValueError):
    """The orbit minimiser sits on the boundary of the searched index range."""


def _check_axial(g: Isometry):
    if not g.classification.is_axial:
        raise GeometryError(f"need a hyperbolic or loxodromic element, got {g.classification.kind.value}")


def orbit_points(g: Isometry, x: Point, k_max: int) -> dict[int, Point]:
    """g^k x for |k| <= k_max, built by repeated application (no large matrix powers)."""
    pts = {0: x}
    ginv = g.inverse()
    for k in range(1, k_max + 1):
        pts[k] = apply(g, pts[k - 1])
        pts[-k] = apply(ginv, pts[-k + 1])
    return pts


def quasi_geodesic_constants(g: Isometry, x: Point, k_max: int = 50) -> tuple[float, float]:
    """(c, a) with |i - j| l / c - a <= d(g^i x, g^j x) <= c |i - j| l + a for |i|, |j| <= k_max.

    With c = 1 the lower inequality is automatic (l is the minimal displacement
    of every power divided by its exponent), so a = max_n d(x, g^n x) - n l.
    """
    _check_axial(g)
    if k_max < MIN_K_MAX:
        raise ValueError(f"k_max must be at least {MIN_K_MAX}")
    ell = g.classification.length
    pts = orbit_points(g, x, 2 * k_max)
    excess = [distance(x, pts[n]) - n * ell for n in range(1, 2 * k_max + 1)]
    a = max(0.0, max(excess))
    if a < 1e-9 * max(1.0, ell * k_max):
        a = 0.0  # roundoff on the axis
    return 1.0, a


def orbit_distance(y: Point, g: Isometry, x: Point, k_max: int = 50) -> float:
    """min_{|k| <= k_max} d(y, g^k x); raises RangeError if the minimiser is at +-k_max."""
    _check_axial(g)
    pts = orbit_points(g, x, k_max)
    best = min(pts, key=lambda k: (distance(y, pts[k]), abs(k)))
    if abs(best) == k_max:
        raise RangeError(f"minimising index {best} is on the range boundary; increase k_max")
    return distance(y, pts[best])


@dataclass(frozen=True)
class OrbitSample:
    g: Isometry
    x: Point
    ys: tuple[Point, ...]
    k_range: tuple[int, int]  # inclusive

    def __post_init__(self):
        _check_axial(self.g)
        lo, hi = self.k_range
        if lo > hi or lo < 1:
            raise ValueError("k_range must be a nonempty interval of positive integers")
        if not self.ys:
            raise ValueError("no sample points")


@dataclass(frozen=True)
class WitnessRow:
    index: int
    rho: float  # distance from y to the axis
    k: int
    orbit_distance: float
    lhs: float  # d(y, g^k y)
    rhs: float  # C k + 2 d(y, <g>x) - A

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


@dataclass
class ConstantsWitness:
    C: float
    A: float
    k0: int
    verified: bool
    rows: list[WitnessRow] = field(default_factory=list)
    violations: list[WitnessRow] = field(default_factory=list)

    @property
    def min_slack(self) -> float:
        return min(r.slack for r in self.rows)

    def write_csv(self, path_or_file):
        cols = ("index", "rho", "k", "lhs", "rhs", "slack")
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow([r.index, repr(r.rho), r.k, repr(r.lhs), repr(r.rhs), repr(r.slack)])
        finally:
            if own:
                fh.close()


def displacement_lower_bound_witness(sample: OrbitSample, a_cap: float | None = None,
                                     orbit_k_max: int | None = None) -> ConstantsWitness:
    """Fix C = l/2 and k0 = start of k_range, take the smallest A that works.

    The inequality then holds on the sample by construction; the content of the
    witness is that A is finite and (if ``a_cap`` is given) below the cap.
    Pairs needing more than ``a_cap`` are recorded as violations.
    """
    g, x = sample.g, sample.x
    ell = g.classification.length
    C = ell / 2.0
    k0, k1 = sample.k_range
    geo = axis(g)
    raw = []
    for i, y in enumerate(sample.ys):
        rho = distance_to_geodesic(y, geo)
        # the nearest orbit point is within about rho / l + 1 steps of the projection of x
        km = orbit_k_max or _orbit_range(g, x, y)
        od = orbit_distance(y, g, x, km)
        gy = y
        gk = {}
        for k in range(1, k1 + 1):
            gy = apply(g, gy)
            gk[k] = distance(y, gy)
        for k in range(k0, k1 + 1):
            raw.append((i, rho, k, od, gk[k], C * k + 2.0 * od))
    need = max(0.0, max(r[5] - r[4] for r in raw))
    A = need if a_cap is None else min(need, a_cap)
    rows = [WitnessRow(i, rho, k, od, lhs, base - A) for i, rho, k, od, lhs, base in raw]
    viol = [r for r in rows if r.slack < 0]
    return ConstantsWitness(C, A, k0, not viol, rows, viol)


def _orbit_range(g: Isometry, x: Point, y: Point) -> int:
    ell = g.classification.length
    d = distance(x, y)
    return int(math.ceil(d / ell)) + 3


def recheck_witness(w: ConstantsWitness, ell: float) -> list[WitnessRow]:
    """Re-evaluate each recorded row from the closed form for d(y, g^k y).

    Uses cosh d = cosh^2(rho) cosh(k l) - sinh^2(rho) (hyperbolic, zero twist),
    i.e. d = arccosh(1 + (cosh kl - 1) cosh^2 rho), in the overflow-safe form
    2 asinh(sinh(kl/2) cosh rho). Returns rows whose inequality fails.
    """
    bad = []
    for r in w.rows:
        lhs = 2.0 * math.asinh(math.sinh(r.k * ell / 2.0) * math.cosh(r.rho))
        rhs = w.C * r.k + 2.0 * r.orbit_distance - w.A
        if abs(lhs - r.lhs) > 1e-8 * max(1.0, lhs) or lhs < rhs - 1e-9:
            bad.append(r)
    return bad


def asymptotic_defect(ell: float, k: int, rho: float) -> float:
    """d(y, g^k y) - k l - 2 rho for y at distance rho from the axis; tends to -2 log 2."""
    return 2.0 * math.asinh(math.sinh(k * ell / 2.0) * math.cosh(rho)) - k * ell - 2.0 * rho


def random_orbit_sample(rng: np.random.Generator, g: Isometry, x: Point, n: int,
                        rho_max: float, k_range: tuple[int, int]) -> OrbitSample:
    """n points at uniform distance in [0, rho_max] from the axis of g, random position along it."""
    _check_axial(g)
    back = normalizing_map(axis(g), g.model).inverse()
    ell = g.classification.length
    ys = []
    for _ in range(n):
        rho = float(rng.uniform(0, rho_max))
        height = math.exp(float(rng.uniform(-ell, 2 * ell)))
        phase = float(rng.uniform(0, 2 * math.pi))
        p = point_off_axis(rho, g.model, phase, height)
        if g.model is Model.H2 and phase > math.pi:
            p = Point.h2(-p.coords[0], p.coords[1])  # other side of the axis
        ys.append(apply(back, p))
    return OrbitSample(g, x, tuple(ys), k_range)
