import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rllforge.family import (
    FamilyOrbit,
    MissingParameterError,
    OrbitRangeError,
    RhoSpec,
    apply_rho,
    check_orbit,
    check_rho_admissible,
    identity_rho,
    mostly_identity,
    orbit,
    period_recursion,
    period_replace,
    phase_shift,
    tau,
)
from rllforge.report import Sampler
from rllforge.rmatrix import builtin_rational, builtin_trig

small = Sampler(seed=0, count=20)


def test_period_recursion_single_step():
    R = builtin_trig(1 / math.pi, 0.3)
    up = apply_rho(period_recursion(1.0), "+", 0, R)
    assert abs(1 / up.params.eta - (math.pi + 0.3)) < 1e-14


def test_phase_shift_step_and_exact_inverse():
    R = builtin_trig(hbar=0.3)
    up = apply_rho(phase_shift(0.1), "+", 0, R)
    assert abs(up.params.hbar - 0.4) < 1e-15
    back = apply_rho(phase_shift(0.1), "-", 1, up)
    assert back.params.hbar == 0.3
    assert back.params == R.params


def test_identity_rule_returns_same_parameters():
    R = builtin_trig()
    assert apply_rho(identity_rho(), "+", 0, R).params == R.params
    assert apply_rho(identity_rho(), "-", 0, R).params == R.params


def test_missing_parameter():
    with pytest.raises(MissingParameterError):
        apply_rho(period_recursion(1.0), "+", 0, builtin_rational())


def test_phase_shift_orbit_sequence():
    orb = orbit(builtin_trig(hbar=0.3), phase_shift(0.1), (-2, 2))
    hbars = [orb.member(n).params.hbar for n in range(-2, 3)]
    assert all(abs(h - e) < 1e-14 for h, e in zip(hbars, (0.1, 0.2, 0.3, 0.4, 0.5)))
    assert orb.member(0) == orb.base


def test_identity_orbit_members_bit_identical():
    orb = orbit(builtin_trig(), identity_rho())
    assert all(R.params == orb.base.params for _, R in orb.members())


def test_mostly_identity_orbit():
    rho = mostly_identity({0: phase_shift(0.1)})
    orb = orbit(builtin_trig(hbar=0.3), rho, (-3, 1))
    for n in range(-3, 2):
        if n == 1:
            assert orb.member(n).params.hbar == pytest.approx(0.4, abs=1e-15)
        else:
            assert orb.member(n).params == orb.base.params
    # beyond the nontrivial step the members repeat member(1)
    wide = orbit(builtin_trig(hbar=0.3), rho, (-3, 3))
    assert wide.member(3).params == wide.member(1).params


def test_range_must_contain_zero_and_bounds_checked():
    with pytest.raises(OrbitRangeError):
        orbit(builtin_trig(), identity_rho(), (1, 3))
    orb = orbit(builtin_trig(), identity_rho(), (-1, 1))
    with pytest.raises(OrbitRangeError):
        orb.member(2)


@pytest.mark.parametrize(
    "rho",
    [phase_shift(0.1), period_recursion(0.7), period_replace({1: 0.5, -1: 0.2}), identity_rho()],
    ids=["phase", "recursion", "replace", "identity"],
)
def test_rho_minus_after_rho_plus_is_exact(rho):
    orb = orbit(builtin_trig(0.31, 0.3), rho, (-3, 3))
    for n in range(-3, 3):
        R = orb.member(n)
        assert apply_rho(rho, "-", n + 1, apply_rho(rho, "+", n, R)).params == R.params
    for n in range(-2, 4):
        R = orb.member(n)
        assert apply_rho(rho, "+", n - 1, apply_rho(rho, "-", n, R)).params == R.params


@given(st.floats(-1, 1).filter(lambda x: abs(x) > 1e-3), st.integers(-3, 2))
@settings(max_examples=60)
def test_period_recursion_roundtrip_property(charge, n):
    orb = orbit(builtin_trig(0.4, 0.3), period_recursion(charge), (-3, 3))
    R = orb.member(n)
    assert apply_rho(orb.rho, "-", n + 1, apply_rho(orb.rho, "+", n, R)).params == R.params


def test_period_recursion_matches_exact_rational_sum():
    # 1/eta(n) = 1/eta(0) + n * hbar * c, checked with fractions to rule out drift
    eta0, hbar, c = Fraction(1, 4), Fraction(3, 10), Fraction(7, 10)
    orb = orbit(builtin_trig(float(eta0), float(hbar)), period_recursion(float(c)), (-3, 3))
    for n in range(-3, 4):
        exact = 1 / (1 / eta0 + n * hbar * c)
        assert abs(orb.member(n).params.eta - float(exact)) < 1e-15


def test_regeneration_is_bit_identical():
    a = orbit(builtin_trig(), period_recursion(0.3))
    b = orbit(builtin_trig(), period_recursion(0.3))
    assert [R.params for _, R in a.members()] == [R.params for _, R in b.members()]


def test_concurrent_member_fill_is_idempotent():
    orb = orbit(builtin_trig(), phase_shift(0.05))
    with ThreadPoolExecutor(4) as pool:
        got = list(pool.map(lambda n: orb.member(n).params, [3, -3, 2, -2, 1, -1] * 4))
    fresh = orbit(builtin_trig(), phase_shift(0.05))
    assert got[:6] == [fresh.member(n).params for n in (3, -3, 2, -2, 1, -1)]


@pytest.mark.parametrize("rho", [phase_shift(0.1), period_replace({1: 0.9, -1: 0.15})], ids=["phase", "replace"])
def test_admissible_rules(rho):
    rep = check_rho_admissible(rho, builtin_trig(), small, 1e-10)
    assert rep.status == "pass"


def test_rule_rescaling_t_is_not_admissible():
    bad = RhoSpec("custom", forward=lambda R: R.scaled("t", 1.5), backward=lambda R: R.scaled("t", 1 / 1.5))
    rep = check_rho_admissible(bad, builtin_trig(), small, 1e-10)
    assert rep.status == "fail"
    assert any("unitarity" in f["check"] for f in rep.failures)


@pytest.mark.parametrize("rho", [phase_shift(0.1), period_recursion(1.0)], ids=["phase", "recursion"])
def test_every_orbit_member_admissible(rho):
    rep = check_orbit(orbit(builtin_trig(), rho), Sampler(seed=1, count=20), 1e-10, ybe_samples=10)
    assert rep.status == "pass"


def test_tau_composition_and_inverse():
    orb = orbit(builtin_trig(0.3, 0.3), phase_shift({"default": 0.1, "values": {0: 0.25, -2: 0.05}}))
    for m in range(-3, 4):
        for p in range(-3, 4):
            for n in range(-3, 4):
                assert (tau(orb, m, p) @ tau(orb, p, n)).equals(tau(orb, m, n))
        for n in range(-3, 4):
            assert (tau(orb, n, m) @ tau(orb, m, n)).params() == orb.member(n).params


def test_tau_maps_members():
    orb = orbit(builtin_trig(), period_recursion(0.4))
    for m, n in [(2, -1), (-3, 3), (0, 0)]:
        assert tau(orb, m, n)(orb.member(n)).params == orb.member(m).params


def test_tau_identity_orbit_trivial():
    orb = orbit(builtin_trig(), identity_rho())
    assert tau(orb, 3, -2).params() == orb.base.params


def test_tau_out_of_range():
    orb = orbit(builtin_trig(), identity_rho(), (-1, 1))
    with pytest.raises(OrbitRangeError):
        tau(orb, 2, 0)


def test_rho_json_roundtrip():
    rho = mostly_identity({0: phase_shift(0.1), 2: period_recursion({"default": 0.5})})
    assert RhoSpec.from_json(rho.to_json()) == rho


def test_center_is_additive():
    orb = FamilyOrbit(builtin_trig(), period_recursion({"default": 0.0, "values": {0: 0.5, 1: 0.25}}))
    assert orb.center(0, 2) == orb.charge(0) + orb.charge(1) == 0.75
    assert orb.center(0, 1) + orb.center(1, 2) == orb.center(0, 2)
