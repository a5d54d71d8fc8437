import pytest
from hypothesis import given
from hypothesis import strategies as st

from rllforge.ncpoly import CurrentSymbol, NCPoly, SpectralTag, TagTable, e, f, is_normal, k1, k2

symbols = st.builds(
    CurrentSymbol,
    st.sampled_from(["E", "F"]),
    st.sampled_from([1, -1]),
    st.builds(SpectralTag, st.integers(0, 3), st.integers(-1, 1)),
) | st.builds(
    CurrentSymbol,
    st.sampled_from(["K1", "K2"]),
    st.sampled_from([1, -1]),
    st.builds(SpectralTag, st.integers(0, 3), st.integers(-1, 1)),
    st.booleans(),
)
coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
polys = st.dictionaries(st.lists(symbols, max_size=3).map(tuple), coef, max_size=4).map(NCPoly)


def test_inversion_only_for_k():
    with pytest.raises(ValueError):
        CurrentSymbol("E", 1, SpectralTag(0), True)
    with pytest.raises(ValueError):
        CurrentSymbol("K3", 1, SpectralTag(0))
    with pytest.raises(ValueError):
        e(1, SpectralTag(0)).inverse()
    assert k1(1, SpectralTag(0)).inverse().inverse() == k1(1, SpectralTag(0))


def test_tag_value():
    t = TagTable((1.0, 2j), 0.25)
    assert t.value(SpectralTag(1, -2)) == 2j - 0.5
    assert SpectralTag(0, 1) != SpectralTag(0, 0)


def test_zero_coefficients_dropped():
    p = NCPoly.word(k1(1, SpectralTag(0))) - NCPoly.word(k1(1, SpectralTag(0)))
    assert p.is_zero() and len(p) == 0


def test_scalar_is_empty_word():
    assert NCPoly.scalar(3).coefficient(()) == 3


def test_pruning_relative():
    p = NCPoly({(k1(1, SpectralTag(0)),): 1.0, (k2(1, SpectralTag(0)),): 1e-15})
    assert len(p.pruned()) == 1


def test_normal_word_order():
    U, V = SpectralTag(0), SpectralTag(1)
    assert is_normal((f(1, U), k2(1, V), k1(-1, U), e(1, U), e(-1, U)))
    assert not is_normal((e(1, U), f(1, U)))
    assert not is_normal((k1(-1, U), k1(1, V)))


@given(polys, polys, polys)
def test_multiplication_associative(p, q, r):
    lhs, rhs = (p * q) * r, p * (q * r)
    assert (lhs - rhs).max_abs() <= 1e-9 * max(1.0, lhs.max_abs())


@given(polys, polys, polys)
def test_distributive(p, q, r):
    lhs, rhs = p * (q + r), p * q + p * r
    assert (lhs - rhs).max_abs() <= 1e-9 * max(1.0, lhs.max_abs())


@given(polys)
def test_additive_inverse(p):
    assert (p - p).is_zero()
    assert p + NCPoly.zero() == p
    assert p * NCPoly.scalar(1) == p
