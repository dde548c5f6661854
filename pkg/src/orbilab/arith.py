"""Orbifold signatures, congruence subgroup descriptors and quaternion checks.

Volumes are tracked as exact rational multiples of pi (``vol_over_pi``).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from sympy import factorint


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class OrbifoldSignature:
    genus: int
    cusps: int = 0
    cone_orders: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cone_orders", tuple(sorted(int(m) for m in self.cone_orders)))
        if self.genus < 0 or self.cusps < 0:
            raise SignatureError("genus and cusp count must be nonnegative")
        if any(m < 2 for m in self.cone_orders):
            raise SignatureError("cone orders must be >= 2")

    @property
    def neg_euler_characteristic(self) -> Fraction:
        """2g - 2 + k + sum(1 - 1/m_i)."""
        return (2 * self.genus - 2 + self.cusps
                + sum((1 - Fraction(1, m) for m in self.cone_orders), Fraction(0)))

    @property
    def is_hyperbolic(self) -> bool:
        return self.neg_euler_characteristic > 0

    @property
    def r(self) -> int:
        return len(self.cone_orders)


def signature_volume_over_pi(sig: OrbifoldSignature) -> Fraction:
    chi = sig.neg_euler_characteristic
    if chi <= 0:
        raise SignatureError(f"signature {sig} is not hyperbolic")
    return 2 * chi


def signature_volume(sig: OrbifoldSignature) -> float:
    """Orbifold Gauss-Bonnet area 2 pi (2g - 2 + k + sum(1 - 1/m_i))."""
    return float(signature_volume_over_pi(sig)) * math.pi


@dataclass(frozen=True)
class GenusDefect:
    exact: Fraction  # g - vol / 4 pi
    count_bound: Fraction  # (k + r + 2) / 2
    published_bound: float  # (k + r + 2) / (4 pi)

    @property
    def published_bound_holds(self) -> bool:
        return abs(float(self.exact)) <= self.published_bound


def genus_defect(sig: OrbifoldSignature) -> GenusDefect:
    signature_volume_over_pi(sig)  # hyperbolicity check
    cone = sum((1 - Fraction(1, m) for m in sig.cone_orders), Fraction(0))
    exact = 1 - (sig.cusps + cone) / 2
    n = sig.cusps + sig.r + 2
    return GenusDefect(exact, Fraction(n, 2), n / (4 * math.pi))


# --- congruence descriptors ------------------------------------------------------

GAMMA0 = "Gamma0"
GAMMA_FULL = "GammaFull"


@dataclass(frozen=True)
class CongruenceDescriptor:
    N: int
    kind: str
    index: int
    nu2: int
    nu3: int
    cusps: int
    genus: int

    @property
    def vol_over_pi(self) -> Fraction:
        return Fraction(self.index, 3)

    @property
    def volume(self) -> float:
        return self.index * math.pi / 3

    @property
    def signature(self) -> OrbifoldSignature:
        return OrbifoldSignature(self.genus, self.cusps, (2,) * self.nu2 + (3,) * self.nu3)

    def fields(self) -> tuple:
        return (self.N, self.index, self.nu2, self.nu3, self.cusps, self.genus)

    def check(self):
        """Gauss-Bonnet must reproduce index * pi / 3 exactly."""
        if signature_volume_over_pi(self.signature) != self.vol_over_pi:
            raise SignatureError(f"Gauss-Bonnet mismatch for {self}")
        return self


def _genus_from_counts(index, nu2, nu3, cusps) -> int:
    g = 1 + Fraction(index, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    if g.denominator != 1 or g < 0:
        raise SignatureError(f"non-integral genus {g} (index={index}, nu2={nu2}, nu3={nu3}, cusps={cusps})")
    return int(g)


def _legendre_minus1(p: int) -> int:
    if p == 2:
        return 0
    return 1 if p % 4 == 1 else -1


def _legendre_minus3(p: int) -> int:
    if p == 3:
        return 0
    if p == 2:
        return -1
    return 1 if p % 3 == 1 else -1


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorint(n).items():
        divs = [d * p ** k for d in divs for k in range(e + 1)]
    return sorted(divs)


def _phi(n: int) -> int:
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out


def gamma0_descriptor(N: int) -> CongruenceDescriptor:
    """Closed formulas for Gamma_0(N) in PSL_2(Z)."""
    if N < 1:
        raise ValueError("level must be >= 1")
    fac = factorint(N)
    index = N
    for p in fac:
        index = index // p * (p + 1)
    nu2 = 0 if N % 4 == 0 else math.prod(1 + _legendre_minus1(p) for p in fac)
    nu3 = 0 if N % 9 == 0 else math.prod(1 + _legendre_minus3(p) for p in fac)
    cusps = sum(_phi(math.gcd(d, N // d)) for d in _divisors(N))
    genus = _genus_from_counts(index, nu2, nu3, cusps)
    return CongruenceDescriptor(N, GAMMA0, index, nu2, nu3, cusps, genus).check()


def gamma_full_descriptor(N: int) -> CongruenceDescriptor:
    """Closed formulas for the principal congruence subgroup Gamma(N) in PSL_2(Z)."""
    if N < 1:
        raise ValueError("level must be >= 1")
    if N == 1:
        return CongruenceDescriptor(1, GAMMA_FULL, 1, 1, 1, 1, 0)
    sl = N ** 3
    for p in factorint(N):
        sl = sl // (p * p) * (p * p - 1)
    index = sl // 2 if N > 2 else sl
    cusps = index // N
    genus = _genus_from_counts(index, 0, 0, cusps)
    return CongruenceDescriptor(N, GAMMA_FULL, index, 0, 0, cusps, genus).check()


def descriptor(N: int, kind: str = GAMMA0) -> CongruenceDescriptor:
    if kind == GAMMA0:
        return gamma0_descriptor(N)
    if kind == GAMMA_FULL:
        return gamma_full_descriptor(N)
    raise ValueError(f"unknown family {kind!r}")


# --- brute-force coset enumeration --------------------------------------------------

ORACLE_MAX_LEVEL = 300
ORACLE_MAX_LEVEL_FULL = 24

# generators of PSL_2(Z): S of order 2, ST of order 3, T parabolic
_S = ((0, -1), (1, 0))
_T = ((1, 1), (0, 1))
_ST = ((0, -1), (1, 1))


def _p1_component(c: int, d: int, q: int) -> tuple[int, int]:
    """Canonical representative of (c : d) in P^1(Z/q), q a prime power."""
    c, d = c % q, d % q
    if math.gcd(c, q) == 1:
        return (1, d * pow(c, -1, q) % q)
    return (c * pow(d, -1, q) % q, 1)


class CosetSpace:
    """Right action of PSL_2(Z) on a finite set of coset labels."""

    def __init__(self, elements: list, act):
        self.elements = elements
        self.lookup = {e: i for i, e in enumerate(elements)}
        self._act = act

    def permutation(self, m) -> np.ndarray:
        return np.array([self.lookup[self._act(e, m)] for e in self.elements], dtype=np.int64)

    def invariants(self):
        s = self.permutation(_S)
        st = self.permutation(_ST)
        t = self.permutation(_T)
        idx = np.arange(len(self.elements))
        nu2 = int(np.count_nonzero(s == idx))
        nu3 = int(np.count_nonzero(st == idx))
        return len(self.elements), nu2, nu3, _count_cycles(t)


def _count_cycles(perm: np.ndarray) -> int:
    seen = np.zeros(len(perm), dtype=bool)
    cycles = 0
    for i in range(len(perm)):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return cycles


def p1_coset_space(N: int) -> CosetSpace:
    """Gamma_0(N) \\ PSL_2(Z) realised as P^1(Z/N) via bottom rows."""
    moduli = [p ** e for p, e in factorint(N).items()]

    comps = []
    for q in moduli:
        p = next(iter(factorint(q)))
        comps.append([(1, d) for d in range(q)] + [(c, 1) for c in range(0, q, p)])
    if not moduli:
        elements = [()]
    else:
        elements = list(itertools.product(*comps))

    def act(e, m):
        return tuple(_p1_component(c * m[0][0] + d * m[1][0], c * m[0][1] + d * m[1][1], q)
                     for (c, d), q in zip(e, moduli))

    return CosetSpace(elements, act)


def sl2_coset_space(N: int) -> CosetSpace:
    """Gamma(N) \\ PSL_2(Z) realised as SL_2(Z/N) / {+-1}."""
    def canon(a, b, c, d):
        x = (a % N, b % N, c % N, d % N)
        y = ((-a) % N, (-b) % N, (-c) % N, (-d) % N)
        return min(x, y)

    elements = sorted({canon(a, b, c, d)
                       for a, b, c, d in itertools.product(range(N), repeat=4)
                       if (a * d - b * c) % N == 1 % N})

    def act(e, m):
        a, b, c, d = e
        return canon(a * m[0][0] + b * m[1][0], a * m[0][1] + b * m[1][1],
                     c * m[0][0] + d * m[1][0], c * m[0][1] + d * m[1][1])

    return CosetSpace(elements, act)


def coset_enumeration_oracle(N: int, kind: str = GAMMA0) -> CongruenceDescriptor:
    """Descriptor from the permutation action of S, ST, T on explicit cosets."""
    if N < 1:
        raise ValueError("level must be >= 1")
    if kind == GAMMA0:
        if N > ORACLE_MAX_LEVEL:
            raise ValueError(f"oracle limited to N <= {ORACLE_MAX_LEVEL}")
        space = p1_coset_space(N)
    elif kind == GAMMA_FULL:
        if N > ORACLE_MAX_LEVEL_FULL:
            raise ValueError(f"oracle limited to N <= {ORACLE_MAX_LEVEL_FULL} for Gamma(N)")
        space = sl2_coset_space(N) if N > 1 else CosetSpace([()], lambda e, m: ())
    else:
        raise ValueError(f"unknown family {kind!r}")
    index, nu2, nu3, cusps = space.invariants()
    # Riemann-Hurwitz for the cover of the modular orbifold
    genus = _genus_from_counts(index, nu2, nu3, cusps)
    return CongruenceDescriptor(N, kind, index, nu2, nu3, cusps, genus)


GOLDEN_COLUMNS = ("N", "index", "nu2", "nu3", "cusps", "genus", "vol_over_pi")


def write_golden_table(path, descriptors: Iterable[CongruenceDescriptor]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(GOLDEN_COLUMNS)
        for d in descriptors:
            w.writerow([*d.fields(), str(d.vol_over_pi)])


def read_golden_table(path, kind: str = GAMMA0) -> list[CongruenceDescriptor]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            d = CongruenceDescriptor(int(row["N"]), kind, int(row["index"]), int(row["nu2"]),
                                     int(row["nu3"]), int(row["cusps"]), int(row["genus"]))
            if str(d.vol_over_pi) != row["vol_over_pi"]:
                raise ValueError(f"inconsistent vol_over_pi in row N={row['N']}")
            out.append(d)
    return out


# --- quaternion algebras at the archimedean places ----------------------------------------

@dataclass(frozen=True)
class ArchimedeanPlace:
    kind: str  # "real" or "complex"
    a_sign: int = 0  # sign of a at a real place
    b_sign: int = 0


@dataclass(frozen=True)
class QuaternionData:
    """A = k + ik + jk + ijk with i^2 = -a, j^2 = -b, seen at the infinite places.

    ``places[0]`` is the distinguished place nu_1.
    """

    degree: int
    places: tuple[ArchimedeanPlace, ...]

    def __post_init__(self):
        if not self.places:
            raise ValueError("at least one archimedean place is needed")
        n_real = sum(p.kind == "real" for p in self.places)
        n_cplx = sum(p.kind == "complex" for p in self.places)
        if n_real + n_cplx != len(self.places):
            raise ValueError("place kind must be 'real' or 'complex'")
        if n_real + 2 * n_cplx != self.degree:
            raise ValueError(f"degree {self.degree} does not match {n_real} real and {n_cplx} complex places")
        for i, p in enumerate(self.places):
            if p.kind == "real" and (p.a_sign not in (-1, 1) or p.b_sign not in (-1, 1)):
                raise ValueError(f"place {i + 1}: a and b must be nonzero with recorded signs")


def splits_at_real_place(a_sign: int, b_sign: int) -> bool:
    """(-a, -b)_R is split iff the norm form x^2 + a y^2 + b z^2 + ab w^2 is indefinite."""
    return a_sign < 0 or b_sign < 0


@dataclass(frozen=True)
class ArchimedeanVerdict:
    split: tuple[bool, ...]

    @property
    def pattern_ok(self) -> bool:
        return self.split[0] and not any(self.split[1:])


def quaternion_archimedean_check(q: QuaternionData) -> ArchimedeanVerdict:
    """Per-place splitting; rejects data outside the split-at-nu_1, Hamilton-elsewhere pattern."""
    split = tuple(True if p.kind == "complex" else splits_at_real_place(p.a_sign, p.b_sign)
                  for p in q.places)
    problems = []
    if any(p.kind == "complex" for p in q.places[1:]):
        problems.append("only nu_1 may be complex")
    if not split[0]:
        problems.append("nu_1 is real with a > 0 and b > 0, so A is a division algebra there")
    for i, s in enumerate(split[1:], start=2):
        if s:
            problems.append(f"nu_{i}: a or b is negative, so A splits instead of being Hamilton's quaternions")
    if problems:
        raise ValueError("; ".join(problems))
    return ArchimedeanVerdict(split)


# --- synthetic 3-orbifold descriptors ------------------------------------------------

@dataclass(frozen=True)
class SingularGeodesic:
    length: float
    order: int
    clearance: float  # distance to the nearest other singular component


@dataclass(frozen=True)
class SingularVertex:
    tag: str  # "dihedral" or "exceptional"
    neighbours_within_half_eps: int


@dataclass(frozen=True)
class Synthetic3DDescriptor:
    volume: float
    singular_geodesics: tuple[SingularGeodesic, ...] | None
    short_geodesics: tuple[tuple[float, float], ...] = ()  # (length, twist)
    vertices: tuple[SingularVertex, ...] = ()
    seed: int = 0
    scale: float = 1.0

    @property
    def total_singular_length(self) -> float:
        return sum(g.length for g in self.singular_geodesics or ())


def synthetic_3d_descriptor(seed: int = 0, scale: float = 1.0,
                            eps: float = 0.1) -> Synthetic3DDescriptor:
    """Fixture family with vol = 10 s and total singular length 0.5 sqrt(s).

    Stand-in for congruence 3-orbifold data: volume grows linearly while the
    singular locus grows like the square root, so the sequence has vanishing
    singular length per volume.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    rng = np.random.default_rng(seed)
    total = 0.5 * math.sqrt(scale)
    n = max(1, int(math.ceil(math.sqrt(scale))))
    weights = np.ones(n) if n == 1 else rng.dirichlet(np.full(n, 8.0))
    orders = [2] + [int(o) for o in rng.choice([2, 3, 4, 6], size=n - 1)]
    clear = rng.uniform(0.5 * eps, 4.0, size=n)
    geos = []
    for w, o, c in zip(weights, orders, clear):
        # only two angle-pi geodesics may come closer than eps/2
        geos.append(SingularGeodesic(float(total * w), o, float(c)))
    n_vert = int(rng.integers(0, n // 4 + 1)) if n > 1 else 0
    verts = tuple(SingularVertex("dihedral", int(rng.integers(0, 2))) for _ in range(n_vert))
    return Synthetic3DDescriptor(10.0 * scale, tuple(geos), (), verts, seed, scale)


def validate_separation(desc: Synthetic3DDescriptor, eps: float = 0.1) -> list[str]:
    """Violations of the singular-locus separation rules (empty list when valid)."""
    problems = []
    for i, g in enumerate(desc.singular_geodesics or ()):
        if g.clearance < eps / 2 and g.order != 2:
            problems.append(f"geodesic {i}: clearance {g.clearance:.4g} < eps/2 with cone order {g.order}")
        if g.length <= 0 or g.order < 2:
            problems.append(f"geodesic {i}: invalid length or order")
    for i, v in enumerate(desc.vertices):
        if v.tag == "dihedral" and v.neighbours_within_half_eps > 1:
            problems.append(f"vertex {i}: more than one other vertex within eps/2")
        if v.tag == "exceptional" and v.neighbours_within_half_eps > 0:
            problems.append(f"vertex {i}: exceptional vertex with a neighbour within eps/2")
    return problems
