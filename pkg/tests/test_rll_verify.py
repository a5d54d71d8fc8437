import math

import numpy as np
import pytest

from rllforge.family import identity_rho, orbit, period_recursion, phase_shift
from rllforge.ncpoly import NCPoly, SpectralTag, TagTable, k1
from rllforge.report import Sampler
from rllforge.rll_verify import (
    EF_RELATIONS,
    SIGN_PAIRS,
    TagShiftError,
    brute_force_components,
    component_label,
    expand_components,
    verify_components,
    verify_EF_relations,
    weight,
)
from rllforge.rmatrix import builtin_rational, builtin_trig
from rllforge.rules import instantiate_catalog, normal_order

U, V = SpectralTag(0), SpectralTag(1)
BASE = builtin_trig(1 / math.pi, 0.3)
ORBITS = {
    "degenerate": orbit(BASE, identity_rho()),
    "phase_shift": orbit(BASE, phase_shift(0.1)),
    "period_recursion": orbit(BASE, period_recursion(0.5)),
}


def test_first_component_is_the_kk1_relation():
    R_i, R_j = ORBITS["phase_shift"].member(0), ORBITS["phase_shift"].member(1)
    table = TagTable((0.2 + 0.1j, -0.9 + 0.4j), 0.075)
    u, v = table.values
    comp = expand_components(R_i, R_j, 1, (1, 1), U, V, table)[0]
    expected = NCPoly.word(k1(1, U), k1(1, V)) * R_i.a(u - v) - NCPoly.word(k1(1, V), k1(1, U)) * R_j.a(u - v)
    assert (comp - expected).max_abs() < 1e-15
    assert component_label(0) == "((1,1),(1,1))"
    assert component_label(15) == "((2,2),(2,2))"


@pytest.mark.parametrize("eps", [1, -1])
@pytest.mark.parametrize("sp", SIGN_PAIRS)
def test_expansion_matches_explicit_matrix_products(eps, sp):
    R_i, R_j = ORBITS["period_recursion"].member(0), ORBITS["period_recursion"].member(1)
    table = TagTable((0.2 + 0.1j, -0.9 + 0.4j), 0.075)
    fast = expand_components(R_i, R_j, eps, sp, U, V, table)
    slow = brute_force_components(R_i, R_j, eps, sp, U, V, table)
    for a, b in zip(fast, slow):
        assert (a - b).max_abs() < 1e-14


def test_epsilon_changes_some_components():
    table = TagTable((0.2 + 0.1j, -0.9 + 0.4j), 0.075)
    plus = expand_components(BASE, BASE, 1, (1, 1), U, V, table)
    minus = expand_components(BASE, BASE, -1, (1, 1), U, V, table)
    changed = [component_label(n) for n, (a, b) in enumerate(zip(plus, minus)) if (a - b).max_abs() > 0.1]
    assert changed and "((2,2),(2,2))" not in changed


def test_components_are_weight_homogeneous():
    table = TagTable((0.2 + 0.1j, -0.9 + 0.4j), 0.075)
    for sp in SIGN_PAIRS:
        for comp in expand_components(BASE, BASE, -1, sp, U, V, table):
            assert not comp.is_zero()
            assert len({weight(w) for w in comp.words()}) == 1


def test_mixed_signs_need_increasing_modulus():
    table = TagTable((1.5, 0.2), 0.075)
    with pytest.raises(TagShiftError):
        expand_components(BASE, BASE, 1, (1, -1), U, V, table)
    expand_components(BASE, BASE, 1, (1, 1), U, V, table)


def _times(R, g):
    return R.with_entries(**{n: (lambda z, n=n: R.entry(n, z) * g(z)) for n in "abcdst"})


def test_common_scalar_factor_leaves_residuals_zero():
    # the components are linear in R, so a common factor g(u) on every entry of both matrices cancels
    g = lambda z: complex(np.exp(0.3 * z) * (2 + z * z))
    orb = ORBITS["phase_shift"]
    S_i, S_j = _times(orb.member(0), g), _times(orb.member(1), g)
    table = TagTable((0.2 + 0.1j, -0.9 + 0.4j), 0.3 * orb.center(0, 1) / 4)
    rules = instantiate_catalog(S_i, S_j, 1, table)
    for sp in SIGN_PAIRS:
        for comp in expand_components(S_i, S_j, 1, sp, U, V, table):
            nf, scale = normal_order(comp, rules, with_scale=True)
            assert nf.max_abs() <= 1e-12 * scale


@pytest.mark.parametrize("name", sorted(ORBITS))
@pytest.mark.parametrize("eps", [1, -1])
def test_verify_components_passes(name, eps):
    rep = verify_components(ORBITS[name], 0, 1, eps, Sampler(seed=5, count=3), 1e-9)
    assert rep.passed, rep.failures[:3]
    assert rep.details["cross_order_max"] <= 1e-10


def test_rational_orbit_passes():
    rep = verify_components(orbit(builtin_rational(0.3), phase_shift(0.2)), -1, 0, 1, Sampler(seed=1, count=2), 1e-9)
    assert rep.passed


@pytest.mark.parametrize("fault", ["kk3", "ek1", "fk2", "ef"])
def test_fault_injection_is_detected(fault):
    rep = verify_components(ORBITS["phase_shift"], 0, 1, 1, Sampler(seed=2, count=2), 1e-9, faults=[fault], cross_order=False)
    assert not rep.passed
    assert rep.failures


def test_kk3_fault_names_a_k1_k2_component():
    rep = verify_components(ORBITS["phase_shift"], 0, 1, 1, Sampler(seed=2, count=2), 1e-9, faults=["kk3"], cross_order=False)
    labels = {f["component"] for f in rep.failures}
    assert "((2,1),(1,2))" in labels or "((1,2),(2,1))" in labels


@pytest.mark.parametrize("name", sorted(ORBITS))
@pytest.mark.parametrize("c", [0.0, 1.0])
def test_ef_relations_pass(name, c):
    rep = verify_EF_relations(ORBITS[name], 0, 1, 1, c, Sampler(seed=4, count=2), 1e-9)
    assert rep.passed, rep.failures[:3]
    assert rep.details["relations"] == list(EF_RELATIONS)


def test_ef_wrong_shift_fails():
    rep = verify_EF_relations(ORBITS["phase_shift"], 0, 1, 1, 1.0, Sampler(seed=4, count=2), 1e-9, quanta=2)
    assert not rep.passed


def test_ef_wrong_shift_is_harmless_at_zero_level():
    rep = verify_EF_relations(ORBITS["degenerate"], 0, 1, 1, 0.0, Sampler(seed=4, count=2), 1e-9, quanta=2)
    assert rep.passed


def test_report_is_reproducible():
    a = verify_components(ORBITS["phase_shift"], 0, 1, -1, Sampler(seed=9, count=2), 1e-9).to_dict()
    b = verify_components(ORBITS["phase_shift"], 0, 1, -1, Sampler(seed=9, count=2), 1e-9).to_dict()
    assert a == b
