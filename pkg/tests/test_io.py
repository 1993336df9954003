import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_operator
from steinalg.analytics import validate_operator
from steinalg.fixtures import FIXTURES
from steinalg.io import SCHEMA, DocumentError, OperatorDocument, expand_hermite_names, parse_target
from steinalg.poly import parse_poly


@pytest.mark.parametrize(
    "text, h",
    [
        ("H4", "x^4-6*x^2+3"),
        ("H1+H2", "x^2+x-1"),
        ("x^3", "x^3"),
        ("x^4-3", "x^4-3"),
        ("x^2", "x^2-1"),
    ],
)
def test_parse_target(text, h):
    assert parse_target(text).h == parse_poly(h)


def test_named_variables():
    assert parse_target("H2(x1)+H2(x2)").h == parse_poly("x1^2+x2^2-2")
    assert expand_hermite_names("H3") == "(x^3-3*x)"


def test_parse_target_shift():
    t = parse_target("x1^2*x2^2")
    assert t.centered_shift == 1 and t.d == 2


@pytest.mark.parametrize("name", [f.name for f in FIXTURES])
def test_fixture_documents_round_trip(name):
    op = fixture_operator(name)
    doc = OperatorDocument.from_operator(op.normalized(), "cy", verification=validate_operator(op) if op.T < 9 else {})
    text = doc.to_json()
    again = OperatorDocument.from_json(text)
    assert again == doc
    assert again.to_json() == text
    assert again.operator().coeffs == op.normalized().coeffs


@given(st.lists(st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=4), min_size=2, max_size=5))
@settings(max_examples=50)
def test_random_documents_round_trip(rows):
    from steinalg.chain import SteinOperator
    from steinalg.poly import Poly

    coeffs = [Poly.univariate(r) for r in rows]
    if coeffs[-1].is_zero() or all(p.is_zero() for p in coeffs):
        return
    op = SteinOperator(parse_target("H3"), tuple(coeffs))
    doc = OperatorDocument.from_operator(op, "cy", nullspace=[[1, "1/2"]])
    assert OperatorDocument.from_json(doc.to_json()) == doc


def _valid():
    return json.loads(OperatorDocument.from_operator(fixture_operator("H2_cy"), "cy").to_json())


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("coefficients"),
        lambda d: d.update(schema_version="stein-operator/0"),
        lambda d: d.update(extra=1),
        lambda d: d.update(T=5),
        lambda d: d.update(m=7),
        lambda d: d["coefficients"][0].append([1, "x"]),
        lambda d: d["coefficients"][0].append([-1, 3]),
        lambda d: d["target"].update(centered_shift="5"),
        lambda d: d["target"]["h"].append([[1, 2], "1"]),
        lambda d: d["target"].update(h="x^2"),
    ],
)
def test_malformed_documents(mutate):
    data = _valid()
    mutate(data)
    with pytest.raises(DocumentError):
        OperatorDocument.from_dict(data).operator()


def test_invalid_json_and_non_object():
    with pytest.raises(DocumentError):
        OperatorDocument.from_json("{not json")
    with pytest.raises(DocumentError):
        OperatorDocument.from_json("[1, 2]")


def test_document_layout():
    data = _valid()
    assert data["schema_version"] == SCHEMA
    assert data["coefficients"] == [[[1, 1]], [[0, -2], [1, -2]]]
    assert data["target"]["h"] == [[[0], "-1"], [[2], "1"]]
    assert data["timing"] is None


def test_non_integral_coefficients_rejected():
    from steinalg.chain import operator_from_strings

    op = operator_from_strings(parse_target("H1"), ["y/2", "-1/2"])
    with pytest.raises(DocumentError):
        OperatorDocument.from_operator(op)
