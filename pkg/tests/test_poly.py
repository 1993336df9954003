from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import polys, small_fractions
from steinalg.hermite import hermite
from steinalg.poly import Poly, PolySyntaxError, compose_target, content_normalize, format_poly, parse_poly


def y(text):
    return parse_poly(text, names=("y",))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x^4-6*x^2+3", {(4,): 1, (2,): -6, (0,): 3}),
        ("(x+1)^2", {(2,): 1, (1,): 2, (0,): 1}),
        ("x/2 - 1/3", {(1,): Fraction(1, 2), (0,): Fraction(-1, 3)}),
        ("-x**3", {(3,): -1}),
        ("2*(x-1)*(x+1)", {(2,): 2, (0,): -2}),
    ],
)
def test_parse_univariate(text, expected):
    assert parse_poly(text) == Poly(1, expected)


def test_parse_multivariate_infers_arity():
    p = parse_poly("x1^2*x3 - x2")
    assert p.nvars == 3
    assert p.coeff((2, 0, 1)) == 1 and p.coeff((0, 1, 0)) == -1


@pytest.mark.parametrize("bad", ["", "x^", "1.5*x", "x/(x+1)", "(x+1", "x $ 2", "x^-1"])
def test_parse_rejects(bad):
    with pytest.raises((PolySyntaxError, ValueError)):
        parse_poly(bad)


@given(polys())
def test_format_parse_round_trip(p):
    assert parse_poly(format_poly(p), nvars=p.nvars) == p


@given(polys(nvars=2), polys(nvars=2), polys(nvars=2))
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + b == b + a
    assert a - a == Poly.zero(2)


@given(polys(nvars=2, max_degree=5), polys(nvars=2, max_degree=5), st.integers(0, 1))
def test_leibniz(a, b, k):
    assert (a * b).partial(k) == a.partial(k) * b + a * b.partial(k)


@given(polys(nvars=1, max_degree=3), polys(nvars=1, max_degree=3), polys(nvars=2, max_degree=3))
def test_compose_is_a_ring_map(p, q, h):
    assert compose_target(p * q, h) == compose_target(p, h) * compose_target(q, h)
    assert compose_target(p + q, h) == compose_target(p, h) + compose_target(q, h)


@pytest.mark.parametrize(
    "p, h, expected",
    [
        ("y^2", hermite(2), "x^4-2*x^2+1"),
        ("y^2-3", hermite(3), "x^6-6*x^4+9*x^2-3"),
    ],
)
def test_compose_examples(p, h, expected):
    assert compose_target(y(p), h) == parse_poly(expected)


@given(polys(nvars=1))
def test_compose_identity(h):
    assert compose_target(y("y"), h) == h


def test_degree_of_zero_is_sentinel():
    z = Poly.zero(2)
    assert z.degree < 0 and not isinstance(z.degree, int)
    assert z.is_zero()


@pytest.mark.parametrize(
    "coeffs, expected, scale",
    [
        (["y/2", "-3/2"], ["y", "-3"], Fraction(2)),
        (["y", "-3"], ["y", "-3"], Fraction(1)),
        (["-y", "2*y^2"], ["y", "-2*y^2"], Fraction(-1)),
        (["0", "-4*y+6"], ["0", "-2*y+3"], Fraction(1, 2)),
    ],
)
def test_content_normalize_examples(coeffs, expected, scale):
    out, s = content_normalize([y(c) for c in coeffs])
    assert out == [y(c) for c in expected]
    assert s == scale


def test_content_normalize_rejects_zero():
    with pytest.raises(ValueError):
        content_normalize([Poly.zero(1)])


@given(st.lists(polys(nvars=1), min_size=1, max_size=4).filter(lambda ps: any(ps)), small_fractions.filter(bool))
def test_content_normalize_idempotent_and_scale_invariant(ps, c):
    once, _ = content_normalize(ps)
    twice, s = content_normalize(once)
    assert twice == once and s == 1
    scaled, _ = content_normalize([p * c for p in ps])
    assert scaled == once


def test_evaluation_and_embed():
    p = parse_poly("x^2-2*x+1")
    assert p(Fraction(3)) == 4
    q = p.embed(3, 2)
    assert q == parse_poly("x3^2-2*x3+1", nvars=3)
