"""Thin-part radii, region volumes and elementary subgroup recognition."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .hypmodels import (
    ENDPOINT_TOL,
    Geodesic,
    GeometryError,
    Isometry,
    Kind,
    Model,
    Point,
    apply,
    apply_boundary,
    axis,
    chordal_distance,
    displacement,
    distance,
    distance_to_geodesic,
    fixed_boundary_point,
    fixed_point,
    normalizing_map,
    point_at_distance,
    point_off_axis,
    rotation,
    translation,
)

DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class MargulisConstant:
    """A single epsilon used for both H^2 and H^3."""

    value: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("Margulis constant must be positive")

    def __float__(self):
        return float(self.value)


def _check_theta(theta):
    if not 0 < theta <= math.pi:
        raise ValueError(f"rotation angle must lie in (0, pi], got {theta}")


def bisect_increasing(f: Callable[[float], float], target: float, lo: float = 0.0,
                      hi: float = 1.0, xtol: float = 1e-15, hi_max: float = 1e3) -> float:
    """Smallest x in [lo, inf) with f(x) >= target, f increasing."""
    while f(hi) < target:
        lo, hi = hi, 2.0 * hi
        if hi > hi_max:
            raise ArithmeticError("no bracket for bisection")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# --- radius functions -------------------------------------------------------------

def ell_theta(theta: float, eps: float, model: Model = Model.H2) -> float:
    """Radius at which the rotation by theta first moves points by eps.

    From sinh(d/2) = sin(theta/2) sinh(rho), valid in both models.
    """
    _check_theta(theta)
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return math.asinh(math.sinh(eps / 2.0) / math.sin(theta / 2.0))


def ell_theta_disk(theta: float, eps: float) -> float:
    """Same radius computed in the Poincare disk.

    Solves cosh(eps) = 1 + 2 r^2 |1 - e^{i theta}|^2 / (1 - r^2)^2 for the
    Euclidean radius r and returns log((1 + r) / (1 - r)).
    """
    _check_theta(theta)
    # r / (1 - r^2) = q, with |1 - e^{i theta}| = 2 sin(theta/2)
    # sqrt((cosh eps - 1) / 2) = sinh(eps / 2), without the cancellation
    q = math.sinh(eps / 2.0) / (2.0 * math.sin(theta / 2.0))
    r = 2.0 * q / (1.0 + math.sqrt(1.0 + 4.0 * q * q))
    return math.log1p(r) - math.log1p(-r)


def ell_theta_bisect(theta: float, eps: float, model: Model = Model.H2) -> float:
    """Bisection on the matrix-action displacement of a rotation."""
    _check_theta(theta)
    rot = rotation(theta, model)
    if model is Model.H2:
        def f(rho):
            return displacement(rot, point_at_distance(rho, model))
    else:
        def f(rho):
            return displacement(rot, point_off_axis(rho, model, phase=0.3))
    return bisect_increasing(f, float(eps))


def r_ell(ell: float, eps: float, model: Model = Model.H2, twist: float = 0.0) -> float:
    """Distance from the axis at which a translation of length ell moves points by eps.

    Zero when ell >= eps.  Uses
    cosh^2 rho = (sinh^2(eps/2) + sin^2(twist/2)) / (sinh^2(ell/2) + sin^2(twist/2)).
    """
    if ell <= 0:
        raise ValueError("translation length must be positive")
    eps = float(eps)
    if ell >= eps:
        return 0.0
    s = math.sin(twist / 2.0) ** 2
    c2 = (math.sinh(eps / 2.0) ** 2 + s) / (math.sinh(ell / 2.0) ** 2 + s)
    return math.acosh(math.sqrt(c2))


def r_ell_bisect(ell: float, eps: float, model: Model = Model.H2, twist: float = 0.0) -> float:
    if ell >= eps:
        return 0.0
    g = translation(ell, model, twist)

    def f(rho):
        return displacement(g, point_off_axis(rho, model, phase=0.7))
    return bisect_increasing(f, float(eps))


@dataclass(frozen=True)
class ThinRadii:
    theta: float
    ell: float
    eps: float
    ell_theta: float
    r_ell: float


def thin_radii(theta: float, ell: float, eps: float, model: Model = Model.H2) -> ThinRadii:
    return ThinRadii(theta, ell, float(eps), ell_theta(theta, eps, model), r_ell(ell, eps, model))


# --- region volumes ---------------------------------------------------------------

def cone_point_eps(m: int, eps: float) -> float:
    """Effective epsilon around a cone point: angle-pi points get the eps/6 collar."""
    return float(eps) / 6.0 if m == 2 else float(eps)


def cone_region_volume(m: int, eps: float) -> float:
    """Area of the eps-thin ball around a cone point of order m in a 2-orbifold."""
    if m < 2:
        raise ValueError("cone order must be >= 2")
    rho = ell_theta(2.0 * math.pi / m, cone_point_eps(m, eps))
    # cosh(rho) - 1 written stably
    return 2.0 * math.pi * 2.0 * math.sinh(rho / 2.0) ** 2 / m


def cusp_region_area(eps: float, width: float = 1.0) -> float:
    """Area of the horoball quotient where the cusp generator z -> z + width moves by <= eps."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return 0.0
    # displacement of z -> z + w at height y is 2 asinh(w / 2y)
    y0 = width / (2.0 * math.sinh(eps / 2.0))
    return width / y0


def collar_volume(ell: float, eps: float, dim: int = 2, twist: float = 0.0) -> float:
    """Volume of the tube where a primitive translation of length ell moves by <= eps."""
    model = Model.H2 if dim == 2 else Model.H3
    r = r_ell(ell, eps, model, twist)
    if dim == 2:
        return 2.0 * ell * math.sinh(r)
    return math.pi * ell * math.sinh(r) ** 2


# --- singular locus separation ------------------------------------------------------

@dataclass(frozen=True)
class Separation:
    branch: str  # "isolated" or "paired"
    radius: float


def singular_separation(m: int, eps: float, ell_x: float | None = None) -> Separation:
    """Guaranteed radius around a cone point of order m free of other singular points.

    For m = 2 a second angle-pi point may sit at distance ell_x < ell(pi, eps);
    the exclusion radius is then r(ell_x, eps).
    """
    if m < 2:
        raise ValueError("cone order must be >= 2")
    if m >= 3:
        return Separation("isolated", ell_theta(2.0 * math.pi / m, eps))
    lp = ell_theta(math.pi, eps)
    if ell_x is None or ell_x >= lp:
        return Separation("isolated", lp)
    return Separation("paired", r_ell(ell_x, eps))


# --- elementary groups ---------------------------------------------------------------

class ElementaryTag(str, Enum):
    CYCLIC = "CyclicHyperbolicOrParabolic"
    FINITE_CYCLIC = "FiniteCyclicElliptic"
    INFINITE_DIHEDRAL = "InfiniteDihedral"
    AXIAL_ZXZM = "AxialZxZm"
    AXIAL_DIHEDRAL = "AxialDihedral"
    FINITE_DIHEDRAL = "FiniteDihedral"
    FINITE_NON_DIHEDRAL = "FiniteNonDihedral"
    NOT_ELEMENTARY = "NotElementary"


@dataclass(frozen=True)
class ElementaryType:
    tag: ElementaryTag
    length: float | None = None
    order: int | None = None
    twist: float | None = None


def rotation_order(angle: float, max_order: int = 10_000) -> int | None:
    """Order of a rotation by angle, or None if it is not a rational multiple of 2 pi."""
    frac = Fraction(angle / (2.0 * math.pi)).limit_denominator(max_order)
    if abs(float(frac) * 2.0 * math.pi - angle) > 1e-9:
        return None
    return frac.denominator


def _lcm(values):
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _is_half_turn(g: Isometry) -> bool:
    c = g.classification
    return c.kind is Kind.ELLIPTIC and abs(c.angle - math.pi) < 1e-9


def _invariant_object(g: Isometry):
    if g.model is Model.H2 and g.classification.kind is Kind.ELLIPTIC:
        return fixed_point(g)
    return axis(g)


def _same_object(u, v) -> bool:
    if isinstance(u, Point) and isinstance(v, Point):
        return distance(u, v) < 1e-9
    if isinstance(u, Geodesic) and isinstance(v, Geodesic):
        return u.same_as(v)
    return False


def _flips(h: Isometry, geo: Geodesic) -> bool:
    """Whether h exchanges the two endpoints of geo."""
    a, b = geo.endpoints
    return (chordal_distance(apply_boundary(h, a), b) < ENDPOINT_TOL
            and chordal_distance(apply_boundary(h, b), a) < ENDPOINT_TOL)


def geodesic_intersection(g1: Geodesic, g2: Geodesic, model: Model = Model.H3) -> Point | None:
    """Interior intersection point of two geodesics, or None."""
    n = normalizing_map(g1, model)
    c, d = (apply_boundary(n, z) for z in g2.endpoints)
    if not (math.isfinite(abs(c)) and math.isfinite(abs(d))):
        return None
    c, d = complex(c), complex(d)
    if abs(c) < 1e-12 or abs(d) < 1e-12:
        return None
    if abs((c * d.conjugate()).imag) > 1e-9 * abs(c) * abs(d):
        return None
    if (c * d.conjugate()).real >= 0:  # same side of the origin
        return None
    height = math.sqrt(abs(c) * abs(d))
    p = Point(model, (0.0, height) if model is Model.H2 else (0.0, 0.0, height))
    return apply(n.inverse(), p)


def _axial_summary(core):
    axial = [g.classification for g in core if g.classification.is_axial]
    orders = [rotation_order(g.classification.angle) for g in core
              if g.classification.kind is Kind.ELLIPTIC]
    length = min(c.length for c in axial) if axial else None
    return axial, orders, length


def classify_elementary(gens: Sequence[Isometry]) -> ElementaryType:
    """Recognise the virtually abelian groups of the 2- and 3-dimensional lists."""
    if not gens:
        raise ValueError("empty generator list")
    model = gens[0].model
    if any(g.model is not model for g in gens):
        raise GeometryError("generators must share a model")
    gens = [g for g in gens if g.classification.kind is not Kind.IDENTITY]
    if not gens:
        return ElementaryType(ElementaryTag.FINITE_CYCLIC, order=1)
    not_elem = ElementaryType(ElementaryTag.NOT_ELEMENTARY)

    parabolic = [g for g in gens if g.classification.kind is Kind.PARABOLIC]
    if parabolic:
        if len(parabolic) != len(gens):
            return not_elem
        p0 = fixed_boundary_point(parabolic[0])
        if all(chordal_distance(fixed_boundary_point(g), p0) < ENDPOINT_TOL for g in parabolic):
            return ElementaryType(ElementaryTag.CYCLIC)
        return not_elem

    core = [g for g in gens if not _is_half_turn(g)]
    halves = [g for g in gens if _is_half_turn(g)]

    if not core:
        obj = _invariant_object(halves[0])
        others = [h for h in halves if not _same_object(_invariant_object(h), obj)]
        if not others:
            return ElementaryType(ElementaryTag.FINITE_CYCLIC, order=2)
        eta = halves[0] @ others[0]
        ce = eta.classification
        if ce.kind is Kind.PARABOLIC:
            return not_elem
        geo = axis(eta)
        if not all(_flips(h, geo) or _same_object(_invariant_object(h), geo) for h in halves):
            return not_elem
        if ce.is_axial:
            return ElementaryType(ElementaryTag.INFINITE_DIHEDRAL, length=ce.length)
        return ElementaryType(ElementaryTag.FINITE_DIHEDRAL, order=rotation_order(ce.angle))

    obj = _invariant_object(core[0])
    if not all(_same_object(_invariant_object(g), obj) for g in core):
        return _finite_non_dihedral(core + halves, model) or not_elem
    if isinstance(obj, Point):
        # H2 rotation group about one point; any extra half-turn must share it
        if all(_same_object(_invariant_object(h), obj) for h in halves):
            orders = [rotation_order(g.classification.angle) for g in core + halves]
            if None in orders:
                return not_elem
            return ElementaryType(ElementaryTag.FINITE_CYCLIC, order=_lcm(orders))
        return not_elem

    inner = [h for h in halves if _same_object(_invariant_object(h), obj)]
    flips = [h for h in halves if h not in inner]
    if not all(_flips(h, obj) for h in flips):
        return not_elem
    core = core + inner
    axial, orders, length = _axial_summary(core)
    if None in orders:
        return not_elem
    m = _lcm(orders)
    if flips:
        if length is None and len(flips) >= 2:
            cf = (flips[0] @ flips[1]).classification
            length = cf.length if cf.is_axial else None
        if model is Model.H2:
            return ElementaryType(ElementaryTag.INFINITE_DIHEDRAL, length=length)
        if length is None:
            return ElementaryType(ElementaryTag.FINITE_DIHEDRAL, order=m)
        return ElementaryType(ElementaryTag.AXIAL_DIHEDRAL, length=length, order=m)
    if not axial:
        return ElementaryType(ElementaryTag.FINITE_CYCLIC, order=m)
    if orders:
        return ElementaryType(ElementaryTag.AXIAL_ZXZM, length=length, order=m)
    twist = axial[0].twist if len(axial) == 1 else None
    return ElementaryType(ElementaryTag.CYCLIC, length=length, twist=twist)


def _finite_non_dihedral(gens, model):
    """All rotations through one common point of H^3 with distinct axes."""
    if model is not Model.H3:
        return None
    if any(g.classification.kind is not Kind.ELLIPTIC for g in gens):
        return None
    axes = [axis(g) for g in gens]
    centre = None
    for other in axes[1:]:
        if not other.same_as(axes[0]):
            centre = geodesic_intersection(axes[0], other)
            break
    if centre is None:
        return None
    if all(distance_to_geodesic(centre, a) < 1e-8 for a in axes):
        return ElementaryType(ElementaryTag.FINITE_NON_DIHEDRAL)
    return None
