"""Heat kernels on H^2 / H^3 and the geometric side of the heat trace.

Degree-1 (1-form) off-diagonal contributions are never computed exactly:
they go through a Gaussian envelope C(t) exp(-c(t) r^2), so every degree-1
total is an upper bound and is tagged as such.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from .arith import Synthetic3DDescriptor
from .hypmodels import Isometry, Kind, Model
from .margulis import DEFAULT_EPSILON, ell_theta, r_ell, rotation_order

EXACT = "Exact"
GAUSSIAN_UPPER_BOUND = "GaussianUpperBound"

#: multiplier on the diagonal value when building the degree-1 envelope
SAFETY = 4.0
#: quadrature is carried out on [R0, R0 + TAIL_WIDTH * sqrt(t)], the rest is bounded analytically
TAIL_WIDTH = 20.0
QUAD_TOL = 1e-10
#: sinh r cosh r overflows past r ~ 355; the tail bound takes over from here
R_MAX = 340.0


def _check_t(t):
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")


# --- kernels --------------------------------------------------------------------------

def heat_kernel_h3_scalar(r, t):
    """(4 pi t)^(-3/2) e^(-t) (r / sinh r) e^(-r^2 / 4t)."""
    _check_t(t)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distance must be nonnegative")
    out = (4 * math.pi * t) ** -1.5 * math.exp(-t) * _ratio(r) * np.exp(-r * r / (4 * t))
    return float(out) if out.ndim == 0 else out


def _ratio(r):
    """r / sinh r, with the r -> 0 limit and 0 past overflow."""
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        ratio = np.where(r < 1e-8, 1.0 - r * r / 6.0, r / np.sinh(np.maximum(r, 1e-300)))
    return np.where(np.isfinite(ratio), ratio, 0.0)


def heat_kernel_h2_scalar(rho: float, t: float) -> float:
    """H^2 heat kernel from the Mehler-type integral representation.

    sqrt(2) e^(-t/4) (4 pi t)^(-3/2) int_rho^inf s e^(-s^2/4t) / sqrt(cosh s - cosh rho) ds,
    evaluated with s = rho + u^2 to remove the endpoint singularity.
    """
    _check_t(t)
    if rho < 0:
        raise ValueError("distance must be nonnegative")
    sh = math.sinh(rho)

    def integrand(u):
        s = rho + u * u
        # cosh s - cosh rho = 2 sinh((s + rho)/2) sinh((s - rho)/2)
        gap = 2.0 * math.sinh((s + rho) / 2.0) * math.sinh(u * u / 2.0)
        if u == 0.0:
            # limit of the integrand as u -> 0
            if rho > 0:
                return 2.0 * rho * math.exp(-rho * rho / (4 * t)) / math.sqrt(sh)
            return 0.0
        return s * math.exp(-s * s / (4 * t)) * 2.0 * u / math.sqrt(gap)

    # exp(-s^2/4t) is negligible beyond s = rho + 40 sqrt(t) + 40
    umax = math.sqrt(40.0 * math.sqrt(t) + 40.0)
    val, _ = integrate.quad(integrand, 0.0, umax, epsabs=0, epsrel=1e-13, limit=400)
    return math.sqrt(2.0) * math.exp(-t / 4.0) * (4 * math.pi * t) ** -1.5 * val


def one_form_trace_h3(t: float) -> float:
    """Pointwise trace of exp(-t Delta) on 1-forms of H^3.

    Exact forms carry the scalar spectrum shifted by 1 (density nu^2 / 2 pi^2);
    coclosed forms have spectrum [0, inf) with density (nu^2 + 1) / pi^2.
    Together: (4 pi t)^(-3/2) (e^(-t) + 2 + 4t).
    """
    _check_t(t)
    return (4 * math.pi * t) ** -1.5 * (math.exp(-t) + 2.0 + 4.0 * t)


def one_form_trace_h3_spectral(t: float) -> float:
    """The same trace by quadrature over the spectral densities."""
    _check_t(t)
    exact_part, _ = integrate.quad(lambda v: math.exp(-t * (1 + v * v)) * v * v / (2 * math.pi ** 2),
                                   0, np.inf, epsabs=0, epsrel=1e-12)
    coclosed, _ = integrate.quad(lambda v: math.exp(-t * v * v) * (v * v + 1) / math.pi ** 2,
                                 0, np.inf, epsabs=0, epsrel=1e-12)
    return exact_part + coclosed


def one_form_profile_h3(t: float) -> float:
    """Diagonal value of the degree-1 profile (the identity-term density)."""
    return one_form_trace_h3(t)


@dataclass(frozen=True)
class KernelProfile:
    """Radial heat-kernel trace r -> k(r, t) with a Gaussian certificate.

    In GaussianUpperBound mode the profile is SAFETY * diag(t) / k0(0, t) * k0(r, t),
    with k0 the exact scalar H^3 kernel: the envelope is calibrated on the
    diagonal and inherits the scalar off-diagonal decay.

    ``certificate(t)`` returns (C, c) with k(r, t) <= C exp(-c r^2) and k
    decreasing in r, which is what the analytic tail bounds rely on.
    """

    dimension: int
    degree: int
    mode: str

    def __post_init__(self):
        if self.dimension not in (2, 3) or self.degree not in (0, 1):
            raise ValueError("unsupported kernel profile")
        if self.degree == 1 and (self.dimension != 3 or self.mode != GAUSSIAN_UPPER_BOUND):
            raise ValueError("degree-1 profiles exist only in H^3 Gaussian upper-bound mode")

    @property
    def is_upper_bound(self) -> bool:
        return self.mode == GAUSSIAN_UPPER_BOUND

    def diagonal(self, t: float) -> float:
        if self.degree == 1:
            return one_form_trace_h3(t)
        if self.dimension == 3:
            return heat_kernel_h3_scalar(0.0, t)
        return heat_kernel_h2_scalar(0.0, t)

    def certificate(self, t: float) -> tuple[float, float]:
        _check_t(t)
        c = 1.0 / (4.0 * t)
        if self.mode == GAUSSIAN_UPPER_BOUND:
            return SAFETY * self.diagonal(t), c
        if self.dimension == 3:
            return (4 * math.pi * t) ** -1.5 * math.exp(-t), c
        return _h2_certificate(t), c

    def shape_constant(self, t: float) -> float | None:
        """K with k(r, t) = K (r / sinh r) exp(-r^2 / 4t) for the H^3 profiles, else None."""
        if self.dimension != 3:
            return None
        if self.mode == GAUSSIAN_UPPER_BOUND:
            return SAFETY * self.diagonal(t)
        return (4 * math.pi * t) ** -1.5 * math.exp(-t)

    def __call__(self, r, t):
        if self.mode == GAUSSIAN_UPPER_BOUND:
            # scalar kernel shape, rescaled to this degree's diagonal, times SAFETY;
            # it stays below the certificate C exp(-r^2 / 4t) since r / sinh r <= 1
            r = np.asarray(r, dtype=float)
            shape = heat_kernel_h3_scalar(r, t) * (4 * math.pi * t) ** 1.5 * math.exp(t) \
                if t < 600 else _ratio(r) * np.exp(-r * r / (4 * t))
            out = SAFETY * self.diagonal(t) * shape
            return float(out) if np.ndim(out) == 0 else out
        if self.dimension == 3:
            return heat_kernel_h3_scalar(r, t)
        if np.ndim(r):
            return np.array([heat_kernel_h2_scalar(float(x), t) for x in np.ravel(r)]).reshape(np.shape(r))
        return heat_kernel_h2_scalar(float(r), t)


@lru_cache(maxsize=64)
def _h2_certificate(t: float) -> float:
    """Sup of k(r, t) e^(r^2/4t) on a grid, with 10 percent margin.

    The ratio behaves like (1 + r) e^(-r/2) / sqrt(1 + r + t), peaking near r = 1.
    """
    grid = np.linspace(0.0, 40.0, 161)
    logs = []
    for r in grid:
        k = heat_kernel_h2_scalar(float(r), t)
        if k > 0.0:  # skip underflowed points; the ratio there is past its peak
            logs.append(math.log(k) + r * r / (4 * t))
    return 1.1 * math.exp(max(logs))


SCALAR_H3 = KernelProfile(3, 0, EXACT)
SCALAR_H2 = KernelProfile(2, 0, EXACT)
ENVELOPE_H3 = KernelProfile(3, 0, GAUSSIAN_UPPER_BOUND)
ONE_FORM_H3 = KernelProfile(3, 1, GAUSSIAN_UPPER_BOUND)


def profile_for(degree: int) -> KernelProfile:
    return SCALAR_H3 if degree == 0 else ONE_FORM_H3


# --- displacement as a function of the distance to the fixed set ------------------------

def elliptic_displacement(angle: float, r):
    return 2.0 * np.arcsinh(math.sin(angle / 2.0) * np.sinh(r))


def axial_displacement(length: float, r, twist: float = 0.0):
    s2 = (np.cosh(r) * math.sinh(length / 2.0)) ** 2 + (np.sinh(r) * math.sin(twist / 2.0)) ** 2
    return 2.0 * np.arcsinh(np.sqrt(s2))


# --- tube integrals ------------------------------------------------------------------------

@dataclass(frozen=True)
class TermValue:
    value: float  # quadrature part + tail bound (an upper bound on the tail)
    quadrature: float
    quad_error: float
    tail_bound: float
    r_min: float
    r_cut: float


# Jacobians and their exponential majorants A e^{kappa r}
_JACOBIANS = {
    "sinhcosh": (lambda r: np.sinh(r) * np.cosh(r), 0.25, 2.0),
    "cosh": (np.cosh, 1.0, 1.0),
    "sinh": (np.sinh, 0.5, 1.0),
}


def _gaussian_tail(K0, c, A, kappa, beta, u0) -> float:
    """Bound on int_{r >= R} K0 exp(-c d^2) A e^{kappa r} dr when d >= u = 2 r + beta >= u0 >= 0."""
    a = kappa / 2.0
    z = math.sqrt(c) * (u0 - a / (2.0 * c))
    pref = K0 * A * 0.5 * math.exp(-kappa * beta / 2.0) * 0.5 * math.sqrt(math.pi / c)
    if z > 0:
        # exp(a^2/4c) erfc(z) = exp(a^2/4c - z^2) erfcx(z)
        return pref * math.exp(a * a / (4.0 * c) - z * z) * special.erfcx(z)
    return pref * math.exp(a * a / (4.0 * c)) * special.erfc(z)


def _shape_tail(K1, A, beta, u0, t) -> float:
    """Bound on int_{r >= R} K1 (d / sinh d) e^(-d^2/4t) A e^(2r) dr when d >= u = 2r + beta >= u0 >= 1.

    d / sinh d <= 2 d e^-d / (1 - e^-2) and x e^(-x - x^2/4t) decreases for x >= 1,
    so the integrand is at most A K1' e^-beta u e^(-u^2/4t) / 2 in u = 2r + beta.
    """
    k1 = 2.0 * K1 / (1.0 - math.exp(-2.0))
    return A * k1 * math.exp(-beta) * t * math.exp(-u0 * u0 / (4.0 * t))


def tube_integral(kernel: Callable, t: float, K0: float, c: float,
                  displacement: Callable, log_slope: Callable[[float], float],
                  r_min: float, jacobian: str = "sinhcosh",
                  shape_constant: float | None = None) -> TermValue:
    """int_{r_min}^inf kernel(displacement(r)) J(r) dr with an analytic tail.

    ``log_slope(R)`` must return beta with displacement(r) >= 2 r + beta for r >= R.
    With ``shape_constant`` K the kernel is K (d / sinh d) exp(-d^2/4t) and the
    sharper tail applies; otherwise only the Gaussian certificate (K0, c) is used.
    """
    jac, A, kappa = _JACOBIANS[jacobian]
    sharp = shape_constant is not None and jacobian == "sinhcosh"
    r_cut = r_min + TAIL_WIDTH * math.sqrt(t)
    if not sharp:
        # past kappa t / 2 the Gaussian beats the Jacobian growth
        r_cut = min(r_cut + kappa * t / 2.0, max(r_min + 1.0, R_MAX))
    while 2 * r_cut + log_slope(r_cut) < 1.0:
        r_cut += 1.0
    f = lambda r: float(kernel(float(displacement(r))) * jac(r))  # noqa: E731
    mid = min(r_cut, r_min + 5.0 * math.sqrt(t) + 1.0)
    val, err = 0.0, 0.0
    for a, b in ((r_min, mid), (mid, r_cut)):
        if b > a:
            v, e = integrate.quad(f, a, b, epsabs=0, epsrel=QUAD_TOL, limit=400)
            val, err = val + v, err + e
    beta = log_slope(r_cut)
    try:
        if sharp:
            tail = _shape_tail(shape_constant, A, beta, 2 * r_cut + beta, t)
        else:
            tail = _gaussian_tail(K0, c, A, kappa, beta, 2 * r_cut + beta)
    except OverflowError:
        tail = math.inf
    if not math.isfinite(tail):
        raise ArithmeticError(f"Gaussian tail bound is not finite at t = {t}; reduce t")
    return TermValue(val + tail, val, err, tail, r_min, r_cut)


def _elliptic_slope(angle):
    s = math.sin(angle / 2.0)
    return lambda R: 2.0 * math.log(s) + 2.0 * math.log1p(-math.exp(-2.0 * R))


def _axial_slope(length):
    s = math.sinh(length / 2.0)
    return lambda R: 2.0 * math.log(s)


def elliptic_lower_limit(ell_c: float, o_c: int, eps: float) -> float:
    """max(ell(2 pi / o, eps), r(ell_c, eps))."""
    return max(ell_theta(2 * math.pi / o_c, eps), r_ell(ell_c, eps, Model.H3))


def elliptic_term(ell_c: float, o_c: int, eps: float, t: float,
                  profile: KernelProfile = SCALAR_H3) -> TermValue:
    """2 pi ell_c (o - 1)/o int_{R0}^inf f(r) sinh r cosh r dr for one singular geodesic.

    f is the profile at the displacement of the minimal rotation 2 pi / o; the
    other powers move points further, so in exact mode this bounds their sum.
    """
    if o_c < 1 or ell_c <= 0:
        raise ValueError("need o_c >= 1 and ell_c > 0")
    if o_c == 1:
        return TermValue(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    _check_t(t)
    angle = 2 * math.pi / o_c
    R0 = elliptic_lower_limit(ell_c, o_c, eps)
    K0, c = profile.certificate(t)
    res = tube_integral(lambda d: profile(d, t), t, K0, c,
                        lambda r: elliptic_displacement(angle, r), _elliptic_slope(angle), R0,
                        shape_constant=profile.shape_constant(t))
    if not math.isfinite(res.value):
        raise ArithmeticError("profile is not integrable")
    f = 2 * math.pi * ell_c * (o_c - 1) / o_c
    return TermValue(f * res.value, f * res.quadrature, f * res.quad_error, f * res.tail_bound,
                     res.r_min, res.r_cut)


def hyperbolic_term(ell: float, t: float, profile: KernelProfile = SCALAR_H3, *,
                    twist: float = 0.0, eps: float | None = None,
                    primitive_length: float | None = None) -> TermValue:
    """Tube integral 2 pi ell_0 int_{R0}^inf k(d(rho)) sinh rho cosh rho d rho for a loxodromic class.

    R0 = r(ell, eps) restricts to the thick part when eps is given.
    """
    if ell <= 0:
        raise ValueError("translation length must be positive")
    _check_t(t)
    ell0 = primitive_length or ell
    R0 = r_ell(ell, eps, Model.H3, twist) if eps is not None else 0.0
    K0, c = profile.certificate(t)
    res = tube_integral(lambda d: profile(d, t), t, K0, c,
                        lambda r: axial_displacement(ell, r, twist), _axial_slope(ell), R0,
                        shape_constant=profile.shape_constant(t))
    f = 2 * math.pi * ell0
    return TermValue(f * res.value, f * res.quadrature, f * res.quad_error, f * res.tail_bound,
                     res.r_min, res.r_cut)


# --- orbital integrals ------------------------------------------------------------------------

def orbital_term(gamma: Isometry, phi: Callable[[float], float], *, support: float | None = None,
                 certificate: tuple[float, float] | None = None, axis_length: float | None = None,
                 order: int | None = None, r_min: float = 0.0) -> float:
    """Integral of phi(d(x, gamma x)) over a fundamental domain of the centraliser.

    The domain is the quotient of the tube around the axis (or the disc around
    the fixed point) by the cyclic translation / rotation group:

    * H^2 hyperbolic: 2 ell int_0^inf phi cosh rho d rho
    * H^2 elliptic: (2 pi / m) int_0^inf phi sinh rho d rho
    * H^3 loxodromic: 2 pi ell int_0^inf phi sinh rho cosh rho d rho
    * H^3 elliptic: ell_c (2 pi / o) int_0^inf phi sinh rho cosh rho d rho

    phi must either vanish beyond ``support`` or come with a Gaussian
    ``certificate`` (C, c): phi(u) <= C exp(-c u^2), decreasing.
    """
    cls = gamma.classification
    if cls.kind in (Kind.IDENTITY, Kind.PARABOLIC):
        raise ValueError("orbital_term needs an elliptic or hyperbolic element")
    if support is None and certificate is None:
        raise ValueError("phi needs a compact support or a Gaussian decay certificate")
    h3 = gamma.model is Model.H3
    if cls.kind is Kind.ELLIPTIC:
        m = order or rotation_order(cls.angle)
        if m is None:
            raise ValueError("elliptic element of infinite order")
        if h3:
            if axis_length is None:
                raise ValueError("H3 elliptic terms need the translation length along the axis")
            factor, jac = axis_length * 2 * math.pi / m, "sinhcosh"
        else:
            factor, jac = 2 * math.pi / m, "sinh"
        disp = lambda r: elliptic_displacement(cls.angle, r)  # noqa: E731
        slope = _elliptic_slope(cls.angle)
    else:
        ell0 = axis_length or cls.length
        factor, jac = (2 * math.pi * ell0, "sinhcosh") if h3 else (2 * ell0, "cosh")
        disp = lambda r: axial_displacement(cls.length, r, cls.twist)  # noqa: E731
        slope = _axial_slope(cls.length)

    if support is not None:
        if disp(r_min) >= support:
            return 0.0
        # displacement is increasing in r: find where it leaves the support
        hi = r_min + 1.0
        while disp(hi) < support:
            hi *= 2.0
        rmax = _bisect(lambda r: disp(r) - support, r_min, hi)
        j = _JACOBIANS[jac][0]
        val, _ = integrate.quad(lambda r: phi(float(disp(r))) * float(j(r)), r_min, rmax,
                                epsabs=0, epsrel=1e-12, limit=400)
        return factor * val
    K0, c = certificate
    t_eff = 1.0 / (4.0 * c)
    res = tube_integral(phi, t_eff, K0, c, disp, slope, r_min, jac)
    return factor * res.value


def _bisect(f, lo, hi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


# --- geometric side ---------------------------------------------------------------------------

@dataclass
class GeometricSide:
    identity: float
    elliptic: list[dict] = field(default_factory=list)
    hyperbolic: list[dict] = field(default_factory=list)
    mode: str = EXACT
    degree: int = 0
    t: float = 1.0
    eps: float = DEFAULT_EPSILON
    complete: bool = True

    @property
    def total(self) -> float:
        return math.fsum([self.identity] + [e["value"] for e in self.elliptic]
                         + [h["value"] for h in self.hyperbolic])

    @property
    def is_upper_bound(self) -> bool:
        return self.mode == GAUSSIAN_UPPER_BOUND

    @property
    def tail_bounds(self) -> float:
        return math.fsum([e["tail_bound"] for e in self.elliptic]
                         + [h["tail_bound"] for h in self.hyperbolic])

    def report(self) -> dict:
        prof = profile_for(self.degree)
        C, c = prof.certificate(self.t)
        d = asdict(self)
        d.update(total=self.total, tail_bounds=self.tail_bounds, upper_bound=self.is_upper_bound,
                 calibration={"C": C, "c": c, "safety": SAFETY if self.is_upper_bound else 1.0,
                              "envelope": "safety * diag(t) / k0(0, t) * k0(r, t) <= C exp(-c r^2)"
                              if self.is_upper_bound else "exact scalar kernel"})
        return d

    def to_json(self) -> str:
        return json.dumps(self.report(), sort_keys=True)


def geometric_side(desc: Synthetic3DDescriptor, eps: float = DEFAULT_EPSILON, t: float = 1.0,
                   degree: int = 0) -> GeometricSide:
    """Identity + elliptic + hyperbolic contributions for a 3-orbifold descriptor.

    The identity term uses the full volume; in degree 1 all entries are upper bounds.
    """
    _check_t(t)
    prof = profile_for(degree)
    side = GeometricSide(desc.volume * prof.diagonal(t), mode=prof.mode, degree=degree, t=t, eps=eps)
    if desc.singular_geodesics is None:
        side.complete = False
        return side
    for g in desc.singular_geodesics:
        tv = elliptic_term(g.length, g.order, eps, t, prof)
        side.elliptic.append({"length": g.length, "order": g.order, "value": tv.value,
                              "tail_bound": tv.tail_bound, "r_min": tv.r_min})
    for ell, twist in desc.short_geodesics:
        tv = hyperbolic_term(ell, t, prof, twist=twist, eps=eps)
        side.hyperbolic.append({"length": ell, "twist": twist, "value": tv.value,
                                "tail_bound": tv.tail_bound, "r_min": tv.r_min})
    return side


@dataclass(frozen=True)
class B1Bound:
    value: float  # upper bound on b_1 / vol
    identity_density: float
    correction: float
    t: float
    upper_bound: bool = True


def b1_upper_bound(desc: Synthetic3DDescriptor, eps: float = DEFAULT_EPSILON,
                   t: float = 1.0) -> B1Bound:
    """Heat-trace bound on b_1 / vol: 1-form diagonal density plus envelope corrections."""
    side = geometric_side(desc, eps, t, degree=1)
    corr = (side.total - side.identity) / desc.volume
    dens = one_form_profile_h3(t)
    return B1Bound(dens + corr, dens, corr, t)
