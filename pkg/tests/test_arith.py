import math
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbilab.arith import (
    GAMMA0,
    GAMMA_FULL,
    ArchimedeanPlace,
    OrbifoldSignature,
    QuaternionData,
    SignatureError,
    coset_enumeration_oracle,
    descriptor,
    gamma0_descriptor,
    gamma_full_descriptor,
    genus_defect,
    quaternion_archimedean_check,
    read_golden_table,
    signature_volume,
    signature_volume_over_pi,
    splits_at_real_place,
    synthetic_3d_descriptor,
    validate_separation,
    write_golden_table,
)

GOLDEN = Path(__file__).parent / "data" / "gamma0_golden.csv"


def test_signature_volumes():
    assert signature_volume_over_pi(OrbifoldSignature(0, 0, (2, 3, 7))) == Fraction(1, 21)
    assert signature_volume(OrbifoldSignature(0, 0, (2, 3, 7))) == pytest.approx(0.149600, abs=1e-6)
    assert signature_volume_over_pi(OrbifoldSignature(0, 1, (2, 3))) == Fraction(1, 3)
    assert signature_volume(OrbifoldSignature(1, 2)) == pytest.approx(4 * math.pi)


def test_signature_errors():
    with pytest.raises(SignatureError):
        signature_volume(OrbifoldSignature(0, 0, (2, 3, 6)))  # Euclidean
    with pytest.raises(SignatureError):
        OrbifoldSignature(0, 0, (1,))
    with pytest.raises(SignatureError):
        OrbifoldSignature(-1)


def test_genus_defect_examples():
    assert genus_defect(OrbifoldSignature(0, 1, (2, 3))).exact == Fraction(-1, 12)
    assert genus_defect(OrbifoldSignature(1, 2)).exact == 0
    d = genus_defect(OrbifoldSignature(2))
    assert d.exact == 1 and d.count_bound == 1


@given(st.integers(0, 5), st.integers(0, 6), st.lists(st.integers(2, 12), max_size=6))
def test_genus_defect_identity(g, k, cones):
    sig = OrbifoldSignature(g, k, tuple(cones))
    if not sig.is_hyperbolic:
        return
    d = genus_defect(sig)
    assert d.exact == g - signature_volume_over_pi(sig) / 4
    assert abs(d.exact) <= d.count_bound


def test_published_bound_can_fail():
    # closed genus-2 surface: defect 1, but (k + r + 2) / 4 pi is about 0.16
    assert not genus_defect(OrbifoldSignature(2)).published_bound_holds


@pytest.mark.parametrize("N, fields", [
    (1, (1, 1, 1, 1, 0)), (2, (3, 1, 0, 2, 0)), (4, (6, 0, 0, 3, 0)),
    (11, (12, 0, 0, 2, 1)), (13, (14, 2, 2, 2, 0)),
])
def test_gamma0_examples(N, fields):
    assert gamma0_descriptor(N).fields()[1:] == fields
    assert coset_enumeration_oracle(N).fields()[1:] == fields


def test_formula_matches_oracle_49():
    assert gamma0_descriptor(49) == coset_enumeration_oracle(49)


def test_golden_table_matches_formulas():
    rows = read_golden_table(GOLDEN)
    assert [r.N for r in rows] == list(range(1, 301))
    for r in rows:
        assert gamma0_descriptor(r.N) == r


def test_golden_roundtrip(tmp_path):
    rows = [gamma0_descriptor(N) for N in range(1, 30)]
    p = tmp_path / "g.csv"
    write_golden_table(p, rows)
    assert read_golden_table(p) == rows


@pytest.mark.parametrize("N", range(1, 13))
def test_gamma_full_formula_vs_oracle(N):
    assert gamma_full_descriptor(N) == coset_enumeration_oracle(N, GAMMA_FULL)


def test_oracle_limits():
    with pytest.raises(ValueError):
        coset_enumeration_oracle(301)
    with pytest.raises(ValueError):
        gamma0_descriptor(0)
    with pytest.raises(ValueError):
        descriptor(5, "nonsense")


@given(st.integers(1, 5000))
def test_volume_and_genus_sanity(N):
    d = descriptor(N, GAMMA0)
    assert d.genus >= 0
    assert d.volume / d.index == pytest.approx(math.pi / 3, rel=1e-15)
    assert signature_volume_over_pi(d.signature) == d.vol_over_pi


@given(st.integers(1, 200), st.integers(1, 200))
def test_multiplicativity(a, b):
    if math.gcd(a, b) != 1:
        return
    da, db, dab = gamma0_descriptor(a), gamma0_descriptor(b), gamma0_descriptor(a * b)
    assert dab.index == da.index * db.index
    assert dab.nu2 == da.nu2 * db.nu2
    assert dab.nu3 == da.nu3 * db.nu3
    assert dab.cusps == da.cusps * db.cusps


# the construction uses i^2 = -a, j^2 = -b: a real place splits iff a < 0 or b < 0

def test_quaternion_split_rule():
    assert splits_at_real_place(-1, 1)
    assert splits_at_real_place(1, -1)
    assert not splits_at_real_place(1, 1)


def test_quaternion_pattern_accepted():
    q = QuaternionData(2, (ArchimedeanPlace("real", -1, 1), ArchimedeanPlace("real", 1, 1)))
    v = quaternion_archimedean_check(q)
    assert v.split == (True, False) and v.pattern_ok
    q = QuaternionData(3, (ArchimedeanPlace("complex"), ArchimedeanPlace("real", 1, 1)))
    assert quaternion_archimedean_check(q).split == (True, False)


def test_quaternion_pattern_rejected():
    with pytest.raises(ValueError, match="nu_1"):
        quaternion_archimedean_check(QuaternionData(1, (ArchimedeanPlace("real", 1, 1),)))
    with pytest.raises(ValueError, match="nu_2"):
        quaternion_archimedean_check(
            QuaternionData(3, (ArchimedeanPlace("complex"), ArchimedeanPlace("real", -1, 1))))
    with pytest.raises(ValueError):
        QuaternionData(2, (ArchimedeanPlace("real", 1, 1),))  # degree mismatch


def test_synthetic_fixture():
    d = synthetic_3d_descriptor(0, 1.0)
    assert d.volume == 10.0
    assert [(g.length, g.order) for g in d.singular_geodesics] == [(0.5, 2)]
    for s in (4.0, 100.0, 1e4):
        d = synthetic_3d_descriptor(3, s)
        assert d.volume == pytest.approx(10 * s)
        assert d.total_singular_length == pytest.approx(0.5 * math.sqrt(s))


@given(st.integers(0, 10_000), st.floats(1.0, 1e5))
def test_synthetic_passes_separation(seed, scale):
    assert validate_separation(synthetic_3d_descriptor(seed, scale)) == []


def test_synthetic_deterministic():
    assert synthetic_3d_descriptor(5, 50.0) == synthetic_3d_descriptor(5, 50.0)
