"""Acceptance checks, one per criterion.

Each check returns (ok, detail) and prints a single
``CRITERION n: PASS|FAIL detail`` line.  Tolerances are fixed here and never
adjusted to make a check pass.  Run directly with ``python3 tests/test_acceptance.py``
or through pytest.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import bump, elliptic_cylinder_oracle, orbital_h2_oracle  # noqa: E402
from orbilab.arith import coset_enumeration_oracle, gamma0_descriptor, synthetic_3d_descriptor  # noqa: E402
from orbilab.diagnostics import (  # noqa: E402
    bs_criterion_check,
    genus_ratio_scan,
    mean_ratio_deviation,
    prime_levels,
)
from orbilab.gromov import (  # noqa: E402
    displacement_lower_bound_witness,
    random_orbit_sample,
    recheck_witness,
)
from orbilab.hypmodels import (  # noqa: E402
    Model,
    apply,
    axis,
    distance_to_geodesic,
    point_off_axis,
    random_isometry,
    translation,
)
from orbilab.margulis import ell_theta, ell_theta_bisect, r_ell, r_ell_bisect  # noqa: E402
from orbilab.trace import (  # noqa: E402
    ONE_FORM_H3,
    SCALAR_H3,
    b1_upper_bound,
    elliptic_term,
    geometric_side,
    heat_kernel_h3_scalar,
    one_form_profile_h3,
    orbital_term,
)

EPS = 0.1
SEED = 20240607


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line, flush=True)
    return ok, detail


# 1 ------------------------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    big = genus_ratio_scan(prime_levels(5000, 20000), EPS)
    s = genus_ratio_scan(prime_levels(100, 10_000), EPS)
    dt = time.perf_counter() - t0
    worst = max(abs(r.ratio - 1) for r in big)
    m_lo, m_hi = mean_ratio_deviation(s, 100, 1000), mean_ratio_deviation(s, 1000, 10_000)
    ok = worst <= 0.02 and m_hi < m_lo and dt < 60
    return report(1, ok, f"max|4pi g/vol-1| on primes [5000,20000] = {worst:.5f} (<= 0.02); "
                         f"mean [1e3,1e4] = {m_hi:.5f} < mean [1e2,1e3] = {m_lo:.5f}; {dt:.1f} s (< 60)")


# 2 ------------------------------------------------------------------------------------------

def criterion_2():
    d, o = gamma0_descriptor(11), coset_enumeration_oracle(11)
    fields = lambda x: (x.index, x.nu2, x.nu3, x.cusps, x.genus)  # noqa: E731
    ok = fields(d) == fields(o) == (12, 0, 0, 2, 1) and abs(d.volume - 4 * math.pi) < 1e-12 \
        and d.genus / d.volume == 1 / (4 * math.pi)
    return report(2, ok, f"Gamma0(11) formula {fields(d)} oracle {fields(o)}, vol/4pi = {d.volume / (4 * math.pi)!r}")


# 3 ------------------------------------------------------------------------------------------

def criterion_3():
    bad = [N for N in range(1, 301) if gamma0_descriptor(N) != coset_enumeration_oracle(N)]
    return report(3, not bad, f"{300 - len(bad)}/300 levels match field-by-field" + (f"; mismatches {bad[:10]}" if bad else ""))


# 4 ------------------------------------------------------------------------------------------

def criterion_4():
    series = genus_ratio_scan(range(1000, 10_001), EPS)
    over = [r for r in series if r.thin_fraction > 1e-3]
    worst = max(series, key=lambda r: r.thin_fraction)
    verdict = bs_criterion_check(series, 1e-3, EPS)
    primes = genus_ratio_scan(prime_levels(1000, 10_000), EPS)
    pmax = max(r.thin_fraction for r in primes)
    ok = not over and verdict.status == "pass"
    return report(4, ok, f"all N in [1000,10000]: {len(over)} levels above 1e-3, max {worst.thin_fraction:.3e} "
                         f"at N = {worst.N}, bs-check {verdict.status} (tail max {verdict.tail_max:.3e}); "
                         f"primes only: max {pmax:.3e}")


# 5 ------------------------------------------------------------------------------------------

def criterion_5():
    thetas = np.geomspace(1e-3, math.pi, 100)
    epss = np.geomspace(1e-3, 1.0, 100)
    err = max(abs(ell_theta(th, e) - ell_theta_bisect(th, e)) for th in thetas for e in epss)
    th = np.geomspace(1e-6, 0.1, 5000)
    corr = np.array([ell_theta(x, EPS) + math.log(x) for x in th])
    var = float(np.sum(np.abs(np.diff(corr))))
    # translation radii, reported only; the bisection reference is limited by the
    # matrix entries exp(+-l/2), which carry l to about 1e-16 / l relative accuracy
    r_err = max(abs(r_ell(l, e) - r_ell_bisect(l, e)) for e in epss[::10] for l in e * np.geomspace(0.01, 0.9, 10))
    ok = err <= 1e-10 and var <= 1
    return report(5, ok, f"ell(theta,eps) closed form vs bisection on 100x100 grid: max {err:.2e} (<= 1e-10); "
                         f"variation of ell + log theta on [1e-6, 0.1] = {var:.2e} (<= 1); "
                         f"[info] r(l,eps) max {r_err:.2e}")


# 6 ------------------------------------------------------------------------------------------

def criterion_6():
    rng = np.random.default_rng(SEED)
    n_cfg, n_viol, n_recheck, worst_a, worst_cap = 0, 0, 0, 0.0, 0.0
    for _ in range(10):
        ell = float(rng.uniform(0.5, 3.0))
        h = random_isometry(rng)
        g = translation(ell).conjugate_by(h)
        x = apply(h, point_off_axis(float(rng.uniform(0, 2))))
        # from lhs >= k l + 2 rho + 2 log(1 - e^{-kl}) and d(y, <g>x) <= rho + l/2 + d(x, axis)
        cap = 2 * distance_to_geodesic(x, axis(g)) + 3.0
        w = displacement_lower_bound_witness(random_orbit_sample(rng, g, x, 100, 10.0, (5, 60)), a_cap=cap)
        n_cfg += 100
        n_viol += len(w.violations)
        n_recheck += len(recheck_witness(w, ell))
        worst_a, worst_cap = max(worst_a, w.A), max(worst_cap, cap)
    ok = n_cfg == 1000 and n_viol == 0 and n_recheck == 0
    return report(6, ok, f"{n_cfg} H2 configurations, k in [5,60], rho <= 10, C = l/2: {n_viol} violations, "
                         f"{n_recheck} recheck failures, max A = {worst_a:.3f} (cap <= {worst_cap:.3f})")


# 7 ------------------------------------------------------------------------------------------

def _pde_residual(r, t, h=1e-2):
    k = heat_kernel_h3_scalar
    d2 = (-k(r + 2 * h, t) + 16 * k(r + h, t) - 30 * k(r, t) + 16 * k(r - h, t) - k(r - 2 * h, t)) / (12 * h * h)
    d1 = (-k(r + 2 * h, t) + 8 * k(r + h, t) - 8 * k(r - h, t) + k(r - 2 * h, t)) / (12 * h)
    dt = (-k(r, t + 2 * h) + 8 * k(r, t + h) - 8 * k(r, t - h) + k(r, t - 2 * h)) / (12 * h)
    return abs(d2 + 2 * d1 / math.tanh(r) - dt)


def criterion_7():
    from scipy import integrate
    mass_err = 0.0
    for t in (0.1, 1.0, 10.0):
        m, _ = integrate.quad(lambda r: heat_kernel_h3_scalar(r, t) * 4 * math.pi * math.sinh(r) ** 2,
                              0, 40 * math.sqrt(t) + 4 * t, limit=200)
        mass_err = max(mass_err, abs(m - 1))
    pde = max(_pde_residual(r, t) for r in (0.3, 1.0, 2.5, 4.0) for t in (0.5, 1.0, 2.0, 5.0))
    small = one_form_profile_h3(1e-3) / (3 * (4 * math.pi * 1e-3) ** -1.5)
    late = one_form_profile_h3(100.0)
    ok = mass_err <= 1e-6 and pde <= 1e-6 and abs(small - 1) <= 0.05 and late <= 1e-3
    return report(7, ok, f"mass error {mass_err:.1e} (<= 1e-6); PDE residual {pde:.1e} (<= 1e-6); "
                         f"1-form / 3(4 pi t)^-3/2 at t=1e-3 = {small:.4f} (within 5%); "
                         f"1-form at t=100 = {late:.3e} (<= 1e-3)")


# 8 ------------------------------------------------------------------------------------------

def criterion_8():
    rng = np.random.default_rng(SEED + 8)
    e_err = 0.0
    for _ in range(50):
        ell, o = float(rng.uniform(0.005, 2.0)), int(rng.integers(2, 9))
        t = float(rng.choice([0.2, 0.5, 1.0, 3.0, 8.0]))
        prof = SCALAR_H3 if rng.random() < 0.5 else ONE_FORM_H3
        ref = elliptic_cylinder_oracle(ell, o, EPS, t, prof, random_isometry(rng, Model.H3), s=float(rng.normal()))
        e_err = max(e_err, abs(elliptic_term(ell, o, EPS, t, prof).value / ref - 1))
    o_err = 0.0
    for _ in range(50):
        ell = float(rng.uniform(0.2, 2.5))
        support = ell + float(rng.uniform(0.3, 3.0))
        phi = bump(support, float(rng.uniform(0.5, 2)), float(rng.uniform(-0.5, 0.5)))
        h = random_isometry(rng)
        val = orbital_term(translation(ell).conjugate_by(h), lambda u: float(phi(u)), support=support)
        o_err = max(o_err, abs(val / orbital_h2_oracle(ell, phi, support, h) - 1))
    ok = e_err <= 1e-4 and o_err <= 1e-4
    return report(8, ok, f"elliptic_term vs cylinder quadrature: max rel {e_err:.1e}; "
                         f"orbital_term vs annulus quadrature: max rel {o_err:.1e} (both <= 1e-4, 50 cases each)")


# 9 ------------------------------------------------------------------------------------------

def criterion_9():
    b = b1_upper_bound(synthetic_3d_descriptor(0, 1e4), EPS, 50.0)
    flags = all(geometric_side(synthetic_3d_descriptor(s, sc), EPS, t, 1).is_upper_bound
                for s in range(3) for sc in (1.0, 1e2, 1e4) for t in (1.0, 50.0)) and b.upper_bound
    lin = max(abs(elliptic_term(lam * ell, o, EPS, t).value / (lam * elliptic_term(ell, o, EPS, t).value) - 1)
              for ell in (0.1, 0.4, 1.3) for lam in (1.5, 3.0, 10.0) for o in (2, 3, 6) for t in (1.0, 50.0))
    d = synthetic_3d_descriptor(1, 1e2)
    side = geometric_side(d, EPS, 1.0, 0)
    unit = {o: elliptic_term(1.0, o, EPS, 1.0).value for o in {g.order for g in d.singular_geodesics}}
    predicted = math.fsum(g.length * unit[g.order] for g in d.singular_geodesics if g.length >= EPS)
    actual = math.fsum(e["value"] for e, g in zip(side.elliptic, d.singular_geodesics) if g.length >= EPS)
    sum_err = abs(actual / predicted - 1)
    ok = b.value < 0.01 and flags and lin <= 1e-12 and sum_err <= 1e-12
    return report(9, ok, f"b1 bound at t=50, scale 1e4 = {b.value:.5f} (< 0.01; identity part {b.identity_density:.5f}, "
                         f"correction {b.correction:.5f}); degree-1 flagged: {flags}; "
                         f"linearity in l_c max rel {lin:.1e}; elliptic sum vs sum of l_c {sum_err:.1e}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(check, capsys):
    with capsys.disabled():
        ok, detail = check()
    assert ok, detail


if __name__ == "__main__":
    results = [c()[0] for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
