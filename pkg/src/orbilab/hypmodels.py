"""Upper half-plane / half-space models and their isometries.

Isometries of H^2 are elements of PSL(2, R) acting by Mobius maps, those of
H^3 are elements of PSL(2, C) acting on the upper half-space through the
usual quaternionic extension.  Everything here is immutable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

#: |tr^2 - 4| below this is treated as the parabolic / identity branch
TRACE_TOL = 1e-9
#: chordal distance below which two boundary points are considered equal
ENDPOINT_TOL = 1e-9
#: |log|lambda|| below this means the isometry is elliptic (H^3)
_ROTATION_TOL = 1e-10

INF = math.inf


class Model(str, Enum):
    H2 = "H2"
    H3 = "H3"


class Kind(str, Enum):
    IDENTITY = "Identity"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"
    LOXODROMIC = "Loxodromic"


class GeometryError(ValueError):
    """Invalid input for a geometric operation."""


@dataclass(frozen=True)
class Classification:
    kind: Kind
    angle: float = 0.0  # rotation angle in (0, pi] for elliptic
    length: float = 0.0  # translation length for hyperbolic / loxodromic
    twist: float = 0.0  # rotation about the axis, in (-pi, pi]

    @property
    def is_axial(self) -> bool:
        return self.kind in (Kind.HYPERBOLIC, Kind.LOXODROMIC)


@dataclass(frozen=True)
class Point:
    """A point of H^2 (x, y) or H^3 (x1, x2, y) with y > 0."""

    model: Model
    coords: tuple

    def __post_init__(self):
        n = 2 if self.model is Model.H2 else 3
        if len(self.coords) != n:
            raise GeometryError(f"{self.model.value} point needs {n} coordinates")
        if not self.coords[-1] > 0:
            raise GeometryError("height coordinate must be positive")

    @classmethod
    def h2(cls, x: float, y: float) -> "Point":
        return cls(Model.H2, (float(x), float(y)))

    @classmethod
    def h3(cls, x1: float, x2: float, y: float) -> "Point":
        return cls(Model.H3, (float(x1), float(x2), float(y)))

    @property
    def height(self) -> float:
        return self.coords[-1]

    @property
    def horizontal(self) -> complex:
        if self.model is Model.H2:
            return complex(self.coords[0], 0.0)
        return complex(self.coords[0], self.coords[1])


def _is_inf(z) -> bool:
    return not cmath.isfinite(z)


def chordal_distance(z, w) -> float:
    """Spherical (chordal) distance between two points of the boundary sphere."""
    if _is_inf(z) and _is_inf(w):
        return 0.0
    if _is_inf(z):
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if _is_inf(w):
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


@dataclass(frozen=True)
class Geodesic:
    """Oriented geodesic given by its boundary endpoints (``math.inf`` is infinity)."""

    start: complex | float
    end: complex | float

    def __post_init__(self):
        if chordal_distance(self.start, self.end) < ENDPOINT_TOL:
            raise GeometryError("geodesic endpoints must be distinct")

    @property
    def endpoints(self) -> tuple:
        return (self.start, self.end)

    def same_as(self, other: "Geodesic", tol: float = ENDPOINT_TOL) -> bool:
        """Setwise equality of the endpoint pairs."""
        a, b = self.endpoints
        c, d = other.endpoints
        same = chordal_distance(a, c) < tol and chordal_distance(b, d) < tol
        flipped = chordal_distance(a, d) < tol and chordal_distance(b, c) < tol
        return same or flipped


def _normalize(m: np.ndarray, model: Model) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-300:
        raise GeometryError("singular matrix")
    if model is Model.H2:
        if abs(det.imag) > 0 or det.real < 0:
            raise GeometryError("H2 isometries need a real matrix with positive determinant")
        m = m.real / math.sqrt(det.real)
    else:
        m = m.astype(complex) / cmath.sqrt(det)
    # canonical sign: first nonzero entry has nonnegative real part
    for entry in m.flat:
        if entry != 0:
            e = complex(entry)
            if e.real < 0 or (e.real == 0 and e.imag < 0):
                m = -m
            break
    return m


@dataclass(frozen=True, eq=False)
class Isometry:
    """A projective 2x2 matrix, determinant normalized to 1."""

    model: Model
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex).reshape(2, 2)
        object.__setattr__(self, "matrix", _normalize(m, self.model))
        self.matrix.setflags(write=False)

    @classmethod
    def h2(cls, a, b, c, d) -> "Isometry":
        return cls(Model.H2, np.array([[a, b], [c, d]], dtype=float))

    @classmethod
    def h3(cls, a, b, c, d) -> "Isometry":
        return cls(Model.H3, np.array([[a, b], [c, d]], dtype=complex))

    def __eq__(self, other):
        if not isinstance(other, Isometry) or other.model is not self.model:
            return NotImplemented
        return bool(np.allclose(self.matrix, other.matrix, atol=1e-12, rtol=1e-12))

    def __hash__(self):
        return hash((self.model, tuple(np.round(self.matrix.flatten(), 9))))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        if other.model is not self.model:
            raise GeometryError("model mismatch")
        return Isometry(self.model, self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        (a, b), (c, d) = self.matrix
        return Isometry(self.model, np.array([[d, -b], [-c, a]]))

    def power(self, k: int) -> "Isometry":
        if k < 0:
            return self.inverse().power(-k)
        return Isometry(self.model, np.linalg.matrix_power(self.matrix, k))

    def conjugate_by(self, g: "Isometry") -> "Isometry":
        """g . self . g^-1"""
        return g @ self @ g.inverse()

    @property
    def trace(self) -> complex:
        return complex(self.matrix[0, 0] + self.matrix[1, 1])

    @cached_property
    def classification(self) -> Classification:
        return classify(self)

    def __call__(self, p):
        """Act on a point of the space or on a boundary point."""
        if isinstance(p, Point):
            return apply(self, p)
        return apply_boundary(self, p)


def classify(iso: Isometry) -> Classification:
    tr = iso.trace
    if abs(tr * tr - 4) < TRACE_TOL:
        if np.allclose(iso.matrix, np.eye(2), atol=1e-9):
            return Classification(Kind.IDENTITY)
        return Classification(Kind.PARABOLIC)
    if iso.model is Model.H2:
        t = abs(tr.real)
        if t < 2:
            return Classification(Kind.ELLIPTIC, angle=2.0 * math.acos(t / 2.0))
        return Classification(Kind.HYPERBOLIC, length=2.0 * math.acosh(t / 2.0))
    s = cmath.sqrt(tr * tr - 4)
    lam = max((tr + s) / 2, (tr - s) / 2, key=abs)
    log_mod = math.log(abs(lam))
    rot = 2.0 * cmath.phase(lam)
    # wrap into (-pi, pi]
    rot = math.remainder(rot, 2.0 * math.pi)
    if rot == -math.pi:
        rot = math.pi
    if abs(log_mod) < _ROTATION_TOL:
        return Classification(Kind.ELLIPTIC, angle=abs(rot))
    length = 2.0 * log_mod
    if abs(rot) < _ROTATION_TOL:
        return Classification(Kind.HYPERBOLIC, length=length)
    return Classification(Kind.LOXODROMIC, length=length, twist=rot)


# --- action -----------------------------------------------------------------

def act_h2(m: np.ndarray, x, y):
    """Vectorised action of a real 2x2 matrix (det 1) on upper half-plane points."""
    a, b, c, d = (float(m[0, 0].real), float(m[0, 1].real),
                  float(m[1, 0].real), float(m[1, 1].real))
    z = np.asarray(x) + 1j * np.asarray(y)
    w = (a * z + b) / (c * z + d)
    return w.real, np.abs(w.imag)


def act_h3(m: np.ndarray, z, t):
    """Vectorised action of a complex 2x2 matrix (det 1) on upper half-space points."""
    a, b, c, d = complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1])
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    czd = c * z + d
    denom = np.abs(czd) ** 2 + abs(c) ** 2 * t * t
    zn = ((a * z + b) * np.conj(czd) + a * np.conj(c) * t * t) / denom
    return zn, t / denom


def apply(iso: Isometry, p: Point) -> Point:
    if iso.model is not p.model:
        raise GeometryError("model mismatch")
    if p.model is Model.H2:
        x, y = act_h2(iso.matrix, p.coords[0], p.coords[1])
        return Point.h2(float(x), float(y))
    z, t = act_h3(iso.matrix, p.horizontal, p.height)
    z = complex(z)
    return Point.h3(z.real, z.imag, float(t))


def apply_boundary(iso: Isometry, z):
    (a, b), (c, d) = iso.matrix
    if _is_inf(z):
        return INF if abs(c) == 0 else _clean(a / c, iso.model)
    den = c * z + d
    if abs(den) == 0:
        return INF
    return _clean((a * z + b) / den, iso.model)


def _clean(z, model):
    z = complex(z)
    return z.real if model is Model.H2 else z


# --- metric -----------------------------------------------------------------

def distance_arrays(za, ya, zb, yb):
    """Vectorised distance; za/zb horizontal coordinates (real or complex)."""
    num = np.abs(np.asarray(za) - np.asarray(zb)) ** 2 + (np.asarray(ya) - np.asarray(yb)) ** 2
    return 2.0 * np.arcsinh(np.sqrt(num) / (2.0 * np.sqrt(np.asarray(ya) * np.asarray(yb))))


def distance(p: Point, q: Point) -> float:
    if p.model is not q.model:
        raise GeometryError("model mismatch")
    return float(distance_arrays(p.horizontal, p.height, q.horizontal, q.height))


def displacement(iso: Isometry, p: Point) -> float:
    """d(p, iso . p) by direct matrix action."""
    return distance(p, apply(iso, p))


def displacement_closed_form(cls: Classification, rho: float) -> float:
    """Displacement at distance rho from the fixed point / axis."""
    if cls.kind is Kind.ELLIPTIC:
        return 2.0 * math.asinh(math.sin(cls.angle / 2.0) * math.sinh(rho))
    if cls.is_axial:
        s2 = (math.cosh(rho) * math.sinh(cls.length / 2.0)) ** 2 + \
             (math.sinh(rho) * math.sin(cls.twist / 2.0)) ** 2
        return 2.0 * math.asinh(math.sqrt(s2))
    if cls.kind is Kind.IDENTITY:
        return 0.0
    raise GeometryError("parabolic displacement is not a function of one distance")


def _fixed_points(iso: Isometry) -> tuple:
    """Boundary fixed points, attracting one last when that makes sense."""
    (a, b), (c, d) = iso.matrix
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(c) <= 1e-14 * scale:
        if abs(a - d) <= 1e-14 * scale:
            return (INF,)
        other = _clean(b / (d - a), iso.model)
        # infinity attracting iff |a| > |d|
        return (other, INF) if abs(a) > abs(d) else (INF, other)
    disc = cmath.sqrt((a + d) ** 2 - 4)
    r1 = (a - d + disc) / (2 * c)
    r2 = (a - d - disc) / (2 * c)
    # derivative at z is (cz + d)^-2, attracting where |cz + d| > 1
    if abs(c * r1 + d) >= abs(c * r2 + d):
        return (r2, r1)
    return (r1, r2)


def axis(iso: Isometry) -> Geodesic:
    cls = iso.classification
    if cls.is_axial or (cls.kind is Kind.ELLIPTIC and iso.model is Model.H3):
        pts = _fixed_points(iso)
        if iso.model is Model.H2:
            pts = tuple(p if _is_inf(p) else complex(p).real for p in pts)
        return Geodesic(*pts)
    raise GeometryError(f"{cls.kind.value} isometry has no axis")


def fixed_point(iso: Isometry) -> Point:
    """Interior fixed point of an elliptic isometry of H^2."""
    if iso.model is not Model.H2 or iso.classification.kind is not Kind.ELLIPTIC:
        raise GeometryError("fixed_point needs an elliptic isometry of H2")
    (a, b), (c, d) = iso.matrix.real
    disc = complex((a + d) ** 2 - 4)
    z = (a - d + cmath.sqrt(disc)) / (2 * c)
    if z.imag < 0:
        z = z.conjugate()
    return Point.h2(z.real, z.imag)


def fixed_boundary_point(iso: Isometry):
    if iso.classification.kind is not Kind.PARABOLIC:
        raise GeometryError("only parabolic isometries have a unique boundary fixed point")
    return _fixed_points(iso)[0]


def normalizing_map(g: Geodesic, model: Model) -> Isometry:
    """An isometry sending the geodesic g to the vertical geodesic {0, inf}."""
    s, e = g.start, g.end
    if _is_inf(e):
        m = np.array([[1, -s], [0, 1]], dtype=complex)
    elif _is_inf(s):
        m = np.array([[0, 1], [-1, e]], dtype=complex)  # inf -> 0, e -> inf
    else:
        m = np.array([[1, -s], [-1, e]], dtype=complex)  # s -> 0, e -> inf
    if model is Model.H2:
        if (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real < 0:
            m = np.array([[1, -e], [-1, s]], dtype=complex)  # e -> 0, s -> inf
        m = m.real
    return Isometry(model, m)


def distance_to_geodesic(p: Point, g: Geodesic) -> float:
    n = normalizing_map(g, p.model)
    q = apply(n, p)
    return math.asinh(abs(q.horizontal) / q.height)


def distance_to_fixed_set(iso: Isometry, p: Point) -> float:
    """Distance from p to the fixed point (H^2 elliptic) or axis."""
    if iso.model is Model.H2 and iso.classification.kind is Kind.ELLIPTIC:
        return distance(p, fixed_point(iso))
    return distance_to_geodesic(p, axis(iso))


# --- centralisers --------------------------------------------------------------

@dataclass(frozen=True)
class CentralizerProfile:
    """Identity component of the centraliser and compactness of G_gamma / <gamma>."""

    description: str
    invariant_set: object  # Geodesic, Point or boundary point
    quotient_compact: bool
    hypothesis_met: bool  # whether gamma is hyperbolic, so the centraliser quotient is compact


def centralizer_profile(iso: Isometry) -> CentralizerProfile:
    cls = iso.classification
    if cls.kind is Kind.IDENTITY:
        raise GeometryError("centraliser of the identity is the whole group")
    if cls.is_axial:
        desc = ("translations along the axis" if iso.model is Model.H2
                else "translations and rotations along the axis")
        return CentralizerProfile(desc, axis(iso), True, True)
    if cls.kind is Kind.ELLIPTIC:
        if iso.model is Model.H2:
            return CentralizerProfile("rotations about the fixed point", fixed_point(iso), True, False)
        # R x S^1 along the axis modulo a finite group: not compact
        return CentralizerProfile("translations and rotations along the rotation axis",
                                  axis(iso), False, False)
    p = fixed_boundary_point(iso)
    if iso.model is Model.H2:
        # centraliser is R, <gamma> = Z is cocompact in it
        return CentralizerProfile("horocyclic translations fixing the cusp point", p, True, False)
    return CentralizerProfile("horospherical translations fixing the cusp point", p, False, False)


# --- constructors used across the package ------------------------------------------

def translation(length: float, model: Model = Model.H2, twist: float = 0.0) -> Isometry:
    """Translation along {0, inf} by length (with rotation by twist in H^3)."""
    lam = cmath.exp((length + 1j * twist) / 2.0)
    if model is Model.H2:
        if twist:
            raise GeometryError("twist only exists in H3")
        lam = lam.real
    return Isometry(model, np.array([[lam, 0], [0, 1 / lam]]))


def rotation(angle: float, model: Model = Model.H2) -> Isometry:
    """Rotation by angle about i (H^2) or about the axis {0, inf} (H^3)."""
    h = angle / 2.0
    if model is Model.H2:
        return Isometry(model, np.array([[math.cos(h), math.sin(h)], [-math.sin(h), math.cos(h)]]))
    return Isometry(model, np.array([[cmath.exp(1j * h), 0], [0, cmath.exp(-1j * h)]]))


def point_at_distance(rho: float, model: Model = Model.H2, phase: float = 0.0,
                      height: float = 1.0) -> Point:
    """Point at distance rho from the base object of :func:`translation`/:func:`rotation`.

    In H^2 this is distance rho from i along the imaginary axis for rotations;
    use :func:`point_off_axis` for distance from the vertical axis.
    """
    if model is Model.H2:
        return Point.h2(0.0, height * math.exp(rho))
    return point_off_axis(rho, model, phase, height)


def point_off_axis(rho: float, model: Model = Model.H2, phase: float = 0.0,
                   height: float = 1.0) -> Point:
    """Point at distance rho from the vertical geodesic {0, inf}."""
    t = height / math.cosh(rho)
    r = height * math.tanh(rho)
    if model is Model.H2:
        return Point.h2(r, t)  # phase is meaningless in H2
    return Point.h3(r * math.cos(phase), r * math.sin(phase), t)


def random_isometry(rng: np.random.Generator, model: Model = Model.H2, scale: float = 1.0) -> Isometry:
    """A random (generally hyperbolic) isometry with entries of size ~scale."""
    while True:
        if model is Model.H2:
            m = rng.normal(scale=scale, size=(2, 2))
            if np.linalg.det(m) > 1e-3:
                return Isometry(model, m)
        else:
            m = rng.normal(scale=scale, size=(2, 2)) + 1j * rng.normal(scale=scale, size=(2, 2))
            if abs(np.linalg.det(m)) > 1e-3:
                return Isometry(model, m)
