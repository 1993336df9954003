import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
from hypothesis import given

from conftest import polys
from steinalg.hermite import (
    HermiteExpansion,
    cumulant,
    double_factorial,
    expect,
    expect_via_hermite,
    from_hermite,
    gaussian_moment,
    hermite,
    hermite_coeffs,
    hermite_multi,
    moments,
    to_hermite,
)
from steinalg.malliavin import delta
from steinalg.poly import Poly, parse_poly

x = parse_poly


@pytest.mark.parametrize("n, text", [(0, "1"), (1, "x"), (2, "x^2-1"), (3, "x^3-3*x"), (4, "x^4-6*x^2+3")])
def test_hermite_examples(n, text):
    assert hermite(n) == x(text)


@pytest.mark.parametrize("n", range(2, 16))
def test_hermite_recursion_and_divergence(n):
    assert hermite(n) == x("x") * hermite(n - 1) - hermite(n - 2) * (n - 1)
    assert delta((hermite(n - 1),)) == hermite(n)
    assert hermite(n).leading() == (n, 1)


@pytest.mark.parametrize("n", range(1, 13))
def test_hermite_derivative(n):
    assert hermite(n).partial(0) == hermite(n - 1) * n


def test_orthogonality_table():
    for m in range(13):
        for n in range(13):
            assert expect(hermite(m) * hermite(n)) == (math.factorial(n) if m == n else 0)


def _xn_hm(n, m):
    if n < m or (n - m) % 2:
        return 0
    return Fraction(math.factorial(n) * double_factorial(n - m - 1), math.factorial(n - m))


@pytest.mark.parametrize("n", range(11))
@pytest.mark.parametrize("m", range(11))
def test_monomial_hermite_pairing(n, m):
    assert expect(x("x") ** n * hermite(m)) == _xn_hm(n, m)


@pytest.mark.parametrize("n, value", [(0, 1), (4, 3), (6, 15), (7, 0), (8, 105)])
def test_gaussian_moment(n, value):
    assert gaussian_moment(n) == value


@pytest.mark.parametrize(
    "p, value",
    [(hermite(3) * hermite(3), 6), (x("x1^2*x2^2"), 1), (hermite(4), 0), (x("x1^2+x2^4"), 4)],
)
def test_expect_examples(p, value):
    assert expect(p) == value


def test_to_hermite_examples():
    assert to_hermite(x("x^2")) == HermiteExpansion(1, {(2,): 1, (0,): 1})
    p = x("x1^3*x2^2")
    expected = (hermite_multi((3, 0)) + hermite_multi((1, 0)) * 3) * (hermite_multi((0, 2)) + 1)
    assert from_hermite(to_hermite(p)) == p
    assert p == expected
    assert from_hermite(HermiteExpansion(1, {(4,): 1, (2,): 6, (0,): 3})) == x("x^4")


@given(polys(max_degree=15, max_terms=6))
def test_basis_round_trip(p):
    assert from_hermite(to_hermite(p)) == p


@given(polys(max_degree=8))
def test_expect_two_routes(p):
    assert expect(p) == expect_via_hermite(p)


@pytest.mark.parametrize("h, n, value", [(hermite(2), 2, 2), (hermite(2), 3, 8), (hermite(3), 2, 6), (x("x"), 4, 0)])
def test_cumulant_examples(h, n, value):
    assert cumulant(h, n) == value


def test_moments_prefix():
    assert moments(hermite(2), 3) == [1, 0, 2, 8]


def test_connection_table_concurrent_growth():
    with ThreadPoolExecutor(8) as pool:
        rows = list(pool.map(hermite_coeffs, [30, 25, 40, 35, 20, 45, 28, 33]))
    for n, row in zip([30, 25, 40, 35, 20, 45, 28, 33], rows):
        assert Poly.univariate(row) == hermite(n)
        assert len(row) == n + 1


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        hermite(-1)
    with pytest.raises(ValueError):
        cumulant(hermite(2), 0)
