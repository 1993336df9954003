import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import polys
from steinalg.hermite import cumulant, expect, hermite
from steinalg.malliavin import (
    MODIFIED,
    STANDARD,
    TargetSpec,
    delta,
    gamma,
    gamma_malliavin_iter,
    gamma_power,
    modified_pseudo_inverse,
    ou_inverse,
    pseudo_inverse,
    pseudo_inverse_hermite,
)
from steinalg.poly import Poly, compose_target, parse_poly

x = parse_poly


def target(text):
    return TargetSpec.from_poly(x(text))


H2 = TargetSpec.from_poly(hermite(2))
H3 = TargetSpec.from_poly(hermite(3))


def test_target_is_centered():
    t = target("x^2")
    assert t.h == hermite(2) and t.centered_shift == 1
    assert expect(t.h) == 0
    with pytest.raises(ValueError):
        target("5")


@pytest.mark.parametrize("n", range(0, 8))
def test_delta_of_monomial(n):
    lhs = delta((x("x") ** n,))
    rhs = x("x") ** (n + 1) - (x("x") ** (n - 1) * n if n else Poly.zero(1))
    assert lhs == rhs


@pytest.mark.parametrize("p, v", [("x^2", "x"), ("x^3", "x^2+2"), ("x", "1"), ("7", "0")])
def test_pseudo_inverse_univariate(p, v):
    assert pseudo_inverse(x(p)) == (x(v),)


def test_pseudo_inverse_two_variables_display():
    v = pseudo_inverse(x("x1^3*x2^2"))
    h1, h2 = hermite(1), hermite(2)
    H = lambda p, k: p.embed(2, k)  # noqa: E731
    first = H(h2, 0) * H(h2, 1) * Fraction(3, 5) + H(h2, 0) + H(h2, 1) + 3
    second = H(hermite(3), 0) * H(h1, 1) * Fraction(2, 5) + H(h1, 0) * H(h1, 1) * 2
    assert v == (first, second)


def test_modified_pseudo_inverse_two_variables():
    """Component two matches the printed vector; component one differs from it by H2(x1) + 3."""
    v = modified_pseudo_inverse(x("x1^3*x2^2"))
    H = lambda p, k: p.embed(2, k)  # noqa: E731
    printed_first = H(hermite(2), 0) * H(hermite(2), 1) * Fraction(3, 5) + H(hermite(2), 1) * Fraction(9, 5)
    printed_second = H(hermite(3), 0) * H(hermite(1), 1) * Fraction(2, 5) + H(hermite(1), 0) * H(hermite(1), 1) * Fraction(6, 5)
    assert v[1] == printed_second
    assert v[0] - printed_first == H(hermite(2), 0) + 3
    assert delta(v) == x("x1^3*x2^2")
    assert delta((printed_first, printed_second)) != x("x1^3*x2^2")


@given(polys(nvars=1, max_degree=8))
def test_modified_equals_standard_univariate(p):
    assert modified_pseudo_inverse(p) == pseudo_inverse(p)


@given(polys(max_degree=8))
@settings(max_examples=60)
def test_pseudo_inverse_contracts(p):
    e = expect(p)
    assert delta(pseudo_inverse(p)) == p - e
    assert delta(modified_pseudo_inverse(p)) == p - e


@given(polys(nvars=1, max_degree=10))
def test_univariate_routes_agree(p):
    assert pseudo_inverse(p) == pseudo_inverse_hermite(p)


@pytest.mark.parametrize("n", range(13))
def test_inverse_of_divergence(n):
    assert pseudo_inverse(delta((x("x") ** n,))) == (x("x") ** n,)


def test_constants_have_zero_pseudo_inverse():
    assert pseudo_inverse(Poly.const(2, 5)) == (Poly.zero(2), Poly.zero(2))
    assert modified_pseudo_inverse(Poly.const(3, 1)) == (Poly.zero(3),) * 3


@pytest.mark.parametrize("p, expected", [(hermite(4), hermite(4) * Fraction(-1, 4)), (x("1"), Poly.zero(1)), (x("x^2"), hermite(2) * Fraction(-1, 2))])
def test_ou_inverse(p, expected):
    assert ou_inverse(p) == expected


@pytest.mark.parametrize(
    "tgt, f, expected",
    [(H2, hermite(2), x("2*x^2")), (H3, hermite(3), x("3*(x^2-1)^2")), (H3, x("x"), x("3*x^2-3")), (H3, x("1"), Poly.zero(1))],
)
def test_gamma_examples(tgt, f, expected):
    assert gamma(tgt, f) == expected
    assert gamma(tgt, f, MODIFIED) == expected


@given(polys(nvars=1, max_degree=6), st.integers(-5, 5))
def test_gamma_ignores_constants_and_lands_in_ideal(f, c):
    g = gamma(H3, f)
    assert gamma(H3, f + c) == g
    from steinalg.chain import _divmod_univariate

    _, rem = _divmod_univariate(g, H3.grad[0])
    assert rem.is_zero()


def test_gamma_rejects_unknown_variant():
    with pytest.raises(ValueError):
        gamma(H2, x("x"), "other")


@pytest.mark.parametrize("tgt, r, expected", [(H3, 1, x("3*(x^2-1)^2")), (H3, 2, x("9*x^5-9*x")), (H2, 2, x("4*x^2")), (H2, 0, hermite(2))])
def test_gamma_malliavin_iter(tgt, r, expected):
    assert gamma_malliavin_iter(tgt, r) == expected


@pytest.mark.parametrize("tgt", [H2, H3, target("x^4-3"), target("x1*x2"), target("x1^2+x1*x2")])
@pytest.mark.parametrize("r", range(1, 5))
def test_cumulant_bridge(tgt, r):
    assert math.factorial(r) * expect(gamma_malliavin_iter(tgt, r)) == cumulant(tgt.h, r + 1)


@pytest.mark.parametrize("tgt", [H2, H3])
@pytest.mark.parametrize("t", range(1, 5))
@pytest.mark.parametrize("variant", [STANDARD, MODIFIED])
def test_composition_cumulant_normalization(tgt, t, variant):
    g = gamma_power(tgt, tgt.h, t, variant)
    assert expect(g) == cumulant(tgt.h, t + 1) / math.factorial(t)


def test_h2_sanity_values():
    assert expect(gamma(H2, H2.h)) == 2 == cumulant(H2.h, 2)
    assert expect(gamma_power(H2, H2.h, 2)) == 4 == cumulant(H2.h, 3) / 2


def _ibp(tgt, f, g, variant):
    gy = compose_target(g, tgt.h)
    dg = compose_target(g.partial(0), tgt.h)
    return expect(gy * f) == expect(gy) * expect(f) + expect(dg * gamma(tgt, f, variant))


@given(polys(nvars=2, max_degree=4), polys(nvars=1, max_degree=3), st.sampled_from(["x1^2-x2", "x1*x2", "x1^3+x2^2"]))
@settings(max_examples=40)
def test_integration_by_parts_two_variables(f, g, h):
    tgt = target(h)
    assert _ibp(tgt, f, g, STANDARD)
    assert _ibp(tgt, f, g, MODIFIED)


@given(polys(nvars=2, max_degree=4), st.sampled_from(["x1^2-x2", "x1*x2"]))
@settings(max_examples=30)
def test_gamma_variants_agree_on_y_pairings(f, h):
    tgt = target(h)
    a, b = gamma(tgt, f), gamma(tgt, f, MODIFIED)
    power = Poly.const(2, 1)
    for _ in range(9):
        assert expect(power * a) == expect(power * b)
        power = power * tgt.h
