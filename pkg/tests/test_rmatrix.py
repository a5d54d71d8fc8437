import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rllforge.report import Sampler
from rllforge.rmatrix import (
    PERMUTATION,
    ParameterError,
    PoleError,
    StructuredR,
    builtin_rational,
    builtin_trig,
    check_unitarity,
    check_ybe,
    constant_form,
    eval_r,
    identity_r,
    polynomial_ratio_form,
    r21,
    unitarity_residual,
    ybe_residual,
)

SPARSITY = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 1, 0],
        [0, 1, 1, 0],
        [0, 0, 0, 1],
    ],
    dtype=bool,
)

coords = st.floats(-2, 2, allow_nan=False)
points = st.builds(complex, coords, coords)


def test_trig_at_zero_is_permutation():
    assert np.array_equal(eval_r(builtin_trig(), 0), PERMUTATION)


def test_rational_at_zero_is_permutation():
    assert np.array_equal(eval_r(builtin_rational(), 0), PERMUTATION)


def test_trig_large_u_against_high_precision():
    mpmath.mp.dps = 40
    R = builtin_trig(1 / math.pi, 0.3)
    b_ref = mpmath.sinh(10) / mpmath.sinh(mpmath.mpf("10.3"))
    t_ref = mpmath.sinh(mpmath.mpf("0.3")) / mpmath.sinh(mpmath.mpf("10.3"))
    assert abs(R.b(10) - complex(b_ref)) < 1e-12
    assert abs(R.t(10) - complex(t_ref)) < 1e-15
    assert abs(R.b(10) - math.exp(-0.3)) < 1e-6
    # t decays like e^-u but is still about 2e-5 at u = 10
    assert abs(R.t(10)) < 1e-4


def test_identity_entries_give_identity_matrix():
    R = StructuredR(constant_form("unit"))
    for u in (0.0, 1.5 - 2j, -7.0):
        assert np.array_equal(eval_r(R, u), np.eye(4))


def test_trig_entry_at_07():
    R = builtin_trig(1 / math.pi, 0.3)
    assert abs(R.b(0.7) - math.sinh(0.7) / math.sinh(1.0)) < 1e-14


@given(points)
def test_rational_b_plus_t_is_one(u):
    R = builtin_rational(0.3)
    if R.near_pole(u):
        return
    assert abs(R.b(u) + R.t(u) - 1) < 1e-12 * max(1, abs(R.b(u)))


def test_trig_tends_to_rational():
    trig = builtin_trig(1e-6, 0.3)
    rat = builtin_rational(0.3)
    for u in Sampler(seed=4, count=20).points(avoid=lambda z: abs(z + 0.3) < 0.1):
        for name in "abcdst":
            assert abs(trig.entry(name, u) - rat.entry(name, u)) < 1e-8


def test_zero_parameters_rejected():
    with pytest.raises(ParameterError):
        builtin_trig(0, 0.3)
    with pytest.raises(ParameterError):
        builtin_trig(1, 0)
    with pytest.raises(ParameterError):
        builtin_rational(0)


def test_pole_error_names_entry_and_distance():
    R = builtin_rational(0.3)
    with pytest.raises(PoleError) as info:
        eval_r(R, -0.3 + 1e-9)
    assert info.value.distance < 1e-6
    assert info.value.entry in "abcdst"


@given(points)
def test_sparsity_pattern_is_exact(u):
    for R in (builtin_trig(), builtin_rational()):
        if R.near_pole(u):
            continue
        m = eval_r(R, u)
        assert np.all(m[~SPARSITY] == 0.0)


def test_r21_of_symmetric_builtin_matches_entries():
    R = builtin_trig()
    for u in Sampler(seed=1, count=10).points(avoid=R.near_pole):
        assert r21(R).entries(u) == R.entries(u)


def test_r21_is_permutation_conjugate():
    R = builtin_trig().scaled("t", 2.0)
    P = PERMUTATION
    for u in Sampler(seed=2, count=20).points(avoid=R.near_pole):
        assert np.max(np.abs(eval_r(r21(R), u) - P @ eval_r(R, u) @ P)) < 1e-12


def test_r21_involution():
    R = builtin_rational().scaled("s", 0.5)
    assert r21(r21(R)) == R
    for u in Sampler(seed=3, count=10).points(avoid=R.near_pole):
        assert np.array_equal(eval_r(r21(r21(R)), u), eval_r(R, u))


@pytest.mark.parametrize("R", [builtin_trig(1 / math.pi, 0.3), builtin_rational(0.3)], ids=["trig", "rational"])
def test_unitarity_builtins(R):
    rep = check_unitarity(R, Sampler(seed=0, count=100), 1e-10)
    assert rep.status == "pass" and rep.max_residual < 1e-10
    assert rep.samples_used == 100


def test_unitarity_oracle_sinh_identity():
    # b(u) b(-u) + t(u) s(-u) = 1 follows from sinh(A+B) sinh(A-B) = sinh^2 A - sinh^2 B
    R = builtin_trig(0.37, 0.52)
    for u in Sampler(seed=5, count=20).points(avoid=lambda z: R.near_pole(z) or R.near_pole(-z)):
        x, h = math.pi * 0.37 * u, math.pi * 0.37 * 0.52
        expected = (cmath.sinh(x) * cmath.sinh(-x) + cmath.sinh(h) ** 2) / (cmath.sinh(x + h) * cmath.sinh(h - x))
        assert abs(expected - 1) < 1e-10
        assert abs(R.b(u) * R.b(-u) + R.t(u) * R.s(-u) - 1) < 1e-10


def test_unitarity_fails_with_doubled_t():
    R = builtin_trig().scaled("t", 2.0)
    rep = check_unitarity(R, Sampler(seed=0, count=100), 1e-10)
    assert rep.status == "fail" and rep.max_residual > 0.1
    assert rep.failures


@given(points, st.floats(0.05, 1.5), st.floats(0.05, 1.0))
@settings(max_examples=50)
def test_unitarity_property_any_parameters(u, hbar, eta):
    R = builtin_trig(eta, hbar)
    if R.near_pole(u, 1e-3) or R.near_pole(-u, 1e-3):
        return
    assert unitarity_residual(R, u) < 1e-9


@pytest.mark.parametrize("R", [builtin_trig(1 / math.pi, 0.3), builtin_rational(0.3)], ids=["trig", "rational"])
def test_ybe_builtins(R):
    rep = check_ybe(R, Sampler(seed=0, count=50), 1e-10)
    assert rep.status == "pass" and rep.max_residual < 1e-10


def test_ybe_identity_exact():
    rep = check_ybe(identity_r(), Sampler(seed=0, count=10), 0.0)
    assert rep.max_residual == 0.0 and rep.status == "pass"


def test_ybe_fails_with_constant_d():
    R = builtin_trig().with_entries(d=lambda u: 1.5)
    rep = check_ybe(R, Sampler(seed=0, count=20), 1e-10)
    assert rep.status == "fail"


def test_ybe_direct_matrix_oracle():
    # independent construction with numpy kron and the swap operator
    R = builtin_trig(0.4, 0.7)
    P = PERMUTATION
    I2 = np.eye(2)
    P23 = np.kron(I2, P)
    u, v, w = 0.3 + 0.2j, -0.5 + 0.1j, 0.9 - 0.4j
    R12 = np.kron(eval_r(R, u - v), I2)
    R23 = np.kron(I2, eval_r(R, v - w))
    R13 = P23 @ np.kron(eval_r(R, u - w), I2) @ P23
    resid = np.max(np.abs(R12 @ R13 @ R23 - R23 @ R13 @ R12))
    assert resid < 1e-12
    assert ybe_residual(R, u, v, w) < 1e-12


def test_report_is_deterministic():
    a = check_ybe(builtin_trig(), Sampler(seed=9, count=5)).to_dict()
    b = check_ybe(builtin_trig(), Sampler(seed=9, count=5)).to_dict()
    assert a == b and a["seed"] == 9


def test_inline_polynomial_entries_match_rational():
    table = {"b": ([1, 0], [1, 0.3]), "c": ([1, 0], [1, 0.3]), "s": ([0.3], [1, 0.3]), "t": ([0.3], [1, 0.3])}
    R = StructuredR(polynomial_ratio_form(table))
    rat = builtin_rational(0.3)
    for u in (0.2, 1 + 1j, -2.0):
        assert np.allclose(eval_r(R, u), eval_r(rat, u), atol=1e-14)
    assert R.near_pole(-0.3)


def test_grading_sets_varpi():
    R = builtin_trig(grading=-1)
    assert np.array_equal(R.varpi, np.diag([1, 1, 1, -1]))
    with pytest.raises(ParameterError):
        builtin_trig(grading=2)
