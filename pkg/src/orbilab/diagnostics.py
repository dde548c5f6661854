"""Thin-part estimates and Benjamini-Schramm convergence diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from sympy import primerange

from .arith import GAMMA0, CongruenceDescriptor, OrbifoldSignature, descriptor, signature_volume
from .margulis import (
    DEFAULT_EPSILON,
    collar_volume,
    cone_region_volume,
    cusp_region_area,
)

#: below this volume the itemized bound is reported as the small-volume regime
SMALL_VOLUME = 4 * math.pi


@dataclass(frozen=True)
class ThinItem:
    kind: str  # "Cusp", "ConePoint" or "ShortGeodesicCollar"
    region_volume: float
    order: int | None = None
    length: float | None = None


@dataclass(frozen=True)
class ThinPartEstimate:
    items: tuple[ThinItem, ...]
    volume: float
    eps: float

    @property
    def total(self) -> float:
        return math.fsum(i.region_volume for i in self.items)

    @property
    def ratio(self) -> float:
        return self.total / self.volume

    @property
    def small_volume(self) -> bool:
        return self.volume < SMALL_VOLUME

    @property
    def exceeds_volume(self) -> bool:
        return self.ratio > 1.0


def _check_eps(eps):
    if not 0 < eps <= DEFAULT_EPSILON:
        raise ValueError(f"eps must lie in (0, {DEFAULT_EPSILON}], got {eps}")


def thin_fraction(desc: CongruenceDescriptor | OrbifoldSignature, eps: float = DEFAULT_EPSILON,
                  short_geodesics: Sequence[float] = ()) -> ThinPartEstimate:
    """Itemized upper bound on the eps-thin volume of a 2-orbifold.

    Cusps contribute a horoball quotient each, cone points the ball on which
    the minimal rotation moves by at most eps (eps/6 for angle pi), and short
    closed geodesics their collar.
    """
    _check_eps(eps)
    if isinstance(desc, CongruenceDescriptor):
        sig, vol = desc.signature, desc.volume
    else:
        sig, vol = desc, signature_volume(desc)
    cusp = cusp_region_area(eps)
    items = [ThinItem("Cusp", cusp) for _ in range(sig.cusps)]
    cone_vols = {m: cone_region_volume(m, eps) for m in set(sig.cone_orders)}
    items += [ThinItem("ConePoint", cone_vols[m], order=m) for m in sig.cone_orders]
    items += [ThinItem("ShortGeodesicCollar", collar_volume(ell, eps), length=ell)
              for ell in short_geodesics if ell < eps]
    return ThinPartEstimate(tuple(items), vol, float(eps))


# --- scans -------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    N: int
    volume: float
    genus: int
    ratio: float  # 4 pi g / vol
    thin_fraction: float
    cusp_cone_count: int
    index: int = 0
    nu2: int = 0
    nu3: int = 0
    cusps: int = 0


SCAN_COLUMNS = ("N", "index", "nu2", "nu3", "cusps", "genus", "volume", "ratio",
                "thin_fraction", "cusp_cone_count")


def scan_record(N: int, eps: float = DEFAULT_EPSILON, kind: str = GAMMA0) -> ScanRecord:
    d = descriptor(N, kind)
    est = thin_fraction(d, eps)
    return ScanRecord(N, d.volume, d.genus, 4 * math.pi * d.genus / d.volume, est.ratio,
                      d.cusps + d.nu2 + d.nu3, d.index, d.nu2, d.nu3, d.cusps)


@dataclass
class ScanSeries:
    records: list[ScanRecord] = field(default_factory=list)

    def __post_init__(self):
        if any(r.volume <= 0 for r in self.records):
            raise ValueError("volumes must be positive")

    def sorted(self) -> "ScanSeries":
        return ScanSeries(sorted(self.records, key=lambda r: (r.volume, r.N)))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def rows(self):
        for r in self.records:
            yield {c: getattr(r, c) for c in SCAN_COLUMNS}


def genus_ratio_scan(levels: Iterable[int], eps: float = DEFAULT_EPSILON, kind: str = GAMMA0,
                     executor=None) -> ScanSeries:
    """4 pi g / vol and the thin fraction for each level, in input order."""
    levels = list(levels)
    if not levels:
        raise ValueError("empty level range")
    if executor is None:
        recs = [scan_record(N, eps, kind) for N in levels]
    else:
        # map preserves order, so the result does not depend on scheduling
        recs = list(executor.map(scan_record, levels, [eps] * len(levels), [kind] * len(levels),
                                 chunksize=max(1, len(levels) // 64)))
    return ScanSeries(recs)


def prime_levels(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    return [int(p) for p in primerange(lo, hi + 1)]


def mean_ratio_deviation(series: ScanSeries, lo: float, hi: float) -> float:
    """Mean of |4 pi g / vol - 1| over records with lo <= N <= hi."""
    devs = [abs(r.ratio - 1) for r in series if lo <= r.N <= hi]
    if not devs:
        raise ValueError(f"no records with N in [{lo}, {hi}]")
    return math.fsum(devs) / len(devs)


# --- Benjamini-Schramm verdict -------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
MIN_RECORDS = 10


@dataclass(frozen=True)
class BSVerdict:
    status: str
    threshold: float
    tail_max: float | None
    witness: tuple[tuple[int, float, float], ...]  # (N, volume, thin_fraction)
    eps: float | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d["witness"] = [list(w) for w in self.witness]
        return json.dumps(d, sort_keys=True)


def bs_criterion_check(series: ScanSeries, threshold: float = 1e-3,
                       eps: float | None = None) -> BSVerdict:
    """Pass iff the thin fraction is below threshold on the top volume decile."""
    recs = series.sorted().records
    if len(recs) < MIN_RECORDS:
        return BSVerdict(INCONCLUSIVE, threshold, None, (), eps)
    tail = recs[-max(1, len(recs) // 10):]
    tail_max = max(r.thin_fraction for r in tail)
    ok = tail_max < threshold and recs[-1].thin_fraction < threshold
    witness = tuple((r.N, r.volume, r.thin_fraction) for r in tail)
    return BSVerdict(PASS if ok else FAIL, threshold, tail_max, witness, eps)


# --- cusp and cone counting ----------------------------------------------------------------

def min_region_volume(eps: float = DEFAULT_EPSILON) -> float:
    """Lower bound c on the region attached to any cusp or cone point."""
    # cone volumes increase with m >= 3, so m = 3 is the worst case there
    return min(cone_region_volume(2, eps), cone_region_volume(3, eps), cusp_region_area(eps))


@dataclass(frozen=True)
class CountingBound:
    count: int  # r + k
    c: float
    bound: float  # (2 / c) * thin volume
    holds: bool


def counting_bound_report(desc: CongruenceDescriptor | OrbifoldSignature,
                          eps: float = DEFAULT_EPSILON) -> CountingBound:
    est = thin_fraction(desc, eps)
    sig = desc.signature if isinstance(desc, CongruenceDescriptor) else desc
    c = min_region_volume(eps)
    count = sig.cusps + sig.r
    bound = 2.0 / c * est.total
    return CountingBound(count, c, bound, count <= bound)
