from __future__ import annotations

import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from steinalg.chain import operator_from_strings
from steinalg.fixtures import by_name
from steinalg.io import parse_target
from steinalg.poly import Poly

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def polys(draw, nvars: int | None = None, max_degree: int = 4, max_terms: int = 5, coeffs=small_fractions):
    d = nvars if nvars is not None else draw(st.integers(1, 3))
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        total = draw(st.integers(0, max_degree))
        mono = [0] * d
        for _ in range(total):
            mono[draw(st.integers(0, d - 1))] += 1
        terms[tuple(mono)] = draw(coeffs)
    return Poly(d, terms)


def fixture_operator(name: str, corrected: bool = True):
    fx = by_name(name)
    coeffs = fx.valid_coeffs if corrected else fx.coeffs
    return operator_from_strings(parse_target(fx.target), coeffs, fx.name)


@pytest.fixture
def op_of():
    return fixture_operator


def pytest_terminal_summary(terminalreporter):
    gate = sys.modules.get("test_acceptance")
    if gate is None or not gate.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in gate.summary_lines():
        terminalreporter.write_line(line)
