import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rllforge.currents import (
    N_CONVENTION,
    NonSimplePoleError,
    check_psi_compatibility,
    delta_normalization,
    phi,
    psi_e,
    psi_f,
    structure_functions,
)
from rllforge.family import apply_rho, orbit, phase_shift
from rllforge.report import Sampler
from rllforge.rmatrix import PoleError, builtin_rational, builtin_trig

ETA, HBAR = 1 / math.pi, 0.3


def away(R):
    return lambda u: abs(u) < 1e-2 or R.near_pole(u, 1e-2) or R.near_pole(-u, 1e-2)


def test_psi_e_closed_form_trig():
    R = builtin_trig(ETA, HBAR)
    k = math.pi * ETA
    for u in Sampler(seed=1, count=20).points(avoid=away(R)):
        closed = cmath.sinh(k * (u + HBAR)) / cmath.sinh(k * (u - HBAR))
        assert abs(psi_e(R, u) - closed) < 1e-10 * max(1, abs(closed))


def test_psi_inversion_and_reciprocal():
    for R in (builtin_trig(), builtin_rational()):
        for u in Sampler(seed=2, count=20).points(avoid=away(R)):
            assert abs(psi_e(R, u) * psi_e(R, -u) - 1) < 1e-10
            assert abs(psi_f(R, u) * psi_e(R, u) - 1) < 1e-10


def test_psi_e_limit_at_origin():
    assert abs(psi_e(builtin_trig(), 1e-6 * 1.0001) + 1) < 1e-5


def test_psi_e_guarded_at_origin():
    with pytest.raises(PoleError):
        psi_e(builtin_trig(), 1e-9)
    with pytest.raises(PoleError):
        phi(builtin_rational(), 0)


def test_phi_trig_and_rational():
    R = builtin_trig(ETA, HBAR)
    k = math.pi * ETA
    for u in Sampler(seed=3, count=20).points(avoid=away(R)):
        assert abs(phi(R, u) - math.sinh(k * HBAR) / cmath.sinh(k * u)) < 1e-10 * max(1, abs(phi(R, u)))
        assert abs(phi(R, -u) + phi(R, u)) < 1e-10 * max(1, abs(phi(R, u)))
    rat = builtin_rational(HBAR)
    for u in (0.5, 1j, -1.3 + 0.2j):
        assert abs(phi(rat, u) - HBAR / u) < 1e-14


@given(st.floats(0.05, 1.2), st.floats(0.05, 1.0))
def test_delta_normalization_trig(hbar, eta):
    R = builtin_trig(eta, hbar)
    expected = math.sinh(math.pi * eta * hbar) / (math.pi * eta)
    assert abs(delta_normalization(R) - expected) < 1e-8


def test_delta_normalization_rational_and_zero():
    assert abs(delta_normalization(builtin_rational(0.7)) - 0.7) < 1e-10
    assert delta_normalization(builtin_trig().with_entries(t=lambda u: 0.0)) == 0


def test_non_simple_pole_detected():
    R = builtin_rational().with_entries(t=lambda u: 1 / u)
    with pytest.raises(NonSimplePoleError):
        delta_normalization(R)


def test_delta_normalization_tracks_phase_shift():
    R = builtin_trig(ETA, HBAR)
    up = apply_rho(phase_shift(0.15), "+", 0, R)
    expected = math.sinh(math.pi * ETA * 0.45) / (math.pi * ETA)
    assert abs(delta_normalization(up) - expected) < 1e-8


@pytest.mark.parametrize("R", [builtin_trig(), builtin_rational()], ids=["trig", "rational"])
def test_compatibility_passes(R):
    rep = check_psi_compatibility(R, Sampler(seed=0, count=50), 1e-10)
    assert rep.status == "pass"
    assert rep.details["convention"] == N_CONVENTION


def test_compatibility_fails_for_asymmetric_a():
    R = builtin_trig().with_entries(a=lambda u: 1 + u)
    rep = check_psi_compatibility(R, Sampler(seed=0, count=20), 1e-10)
    assert rep.status == "fail"


def test_orbit_members_keep_inversion():
    orb = orbit(builtin_trig(), phase_shift(0.1))
    for n, R in orb.members():
        assert check_psi_compatibility(R, Sampler(seed=n + 10, count=10), 1e-10).passed


def test_structure_function_set():
    sf = structure_functions(builtin_rational(0.4))
    assert abs(sf.N - 0.4) < 1e-10
    assert abs(sf.psi_e(0.7) * sf.psi_f(0.7) - 1) < 1e-14
    assert sf.convention == N_CONVENTION
