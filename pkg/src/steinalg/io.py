"""Targets from text and the JSON operator document."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

from .chain import SteinOperator
from .hermite import hermite
from .malliavin import TargetSpec
from .poly import Poly, format_poly, parse_poly

SCHEMA = "stein-operator/1"

_HERMITE = re.compile(r"H(\d+)(?:\((x\d*)\))?")


class DocumentError(ValueError):
    """Malformed operator document."""


def expand_hermite_names(text: str) -> str:
    """Replace ``H<n>`` (optionally ``H<n>(x<k>)``) by the explicit polynomial."""

    def sub(match: re.Match) -> str:
        n = int(match.group(1))
        var = match.group(2) or "x"
        return "(" + format_poly(hermite(n), (var,)) + ")"

    return _HERMITE.sub(sub, text)


def parse_target(text: str) -> TargetSpec:
    """``"H4"``, ``"H1+H2"``, ``"x^3"`` or ``"x1^2*x2^2"`` as a centered target."""
    return TargetSpec.from_poly(parse_poly(expand_hermite_names(text)))


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _unfrac(s) -> Fraction:
    if isinstance(s, bool):
        raise DocumentError("boolean where a number was expected")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s)
        except ValueError as exc:
            raise DocumentError(f"bad rational {s!r}") from exc
    raise DocumentError(f"bad rational {s!r}")


def poly_terms(p: Poly) -> list:
    """Sorted ``[[exponents...], "coefficient"]`` pairs."""
    return [[list(m), _frac(c)] for m, c in sorted(p.terms.items())]


def poly_from_terms(nvars: int, terms) -> Poly:
    if not isinstance(terms, list):
        raise DocumentError("term list expected")
    out = {}
    for item in terms:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], list) and len(item[0]) == nvars):
            raise DocumentError(f"malformed term {item!r}")
        if not all(isinstance(e, int) and e >= 0 for e in item[0]):
            raise DocumentError(f"bad exponent in {item!r}")
        out[tuple(item[0])] = _unfrac(item[1])
    return Poly(nvars, out)


def _y_terms(p: Poly) -> list:
    if not p.is_integral():
        raise DocumentError("operator coefficients must be integers after normalization")
    return [[e, int(c)] for (e,), c in sorted(p.terms.items())]


def _y_from_terms(terms) -> Poly:
    if not isinstance(terms, list):
        raise DocumentError("coefficient term list expected")
    out = {}
    for item in terms:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], int) and isinstance(item[1], int)):
            raise DocumentError(f"malformed coefficient term {item!r}")
        if item[0] < 0 or isinstance(item[1], bool):
            raise DocumentError(f"malformed coefficient term {item!r}")
        out[(item[0],)] = item[1]
    return Poly(1, out)


@dataclass
class OperatorDocument:
    target: dict
    zero_order_mode: str
    T: int
    m: int
    coefficients: list
    solution_space: dict = field(default_factory=lambda: {"nullspace_dimension": 0, "basis": []})
    verification: dict = field(default_factory=dict)
    timing: float | None = None
    schema_version: str = SCHEMA

    @classmethod
    def from_operator(
        cls,
        op: SteinOperator,
        mode: str = "cy",
        nullspace: list | None = None,
        verification: dict | None = None,
        timing: float | None = None,
        horizon: int | None = None,
    ) -> "OperatorDocument":
        """``horizon`` is the solver's ``T`` when the canonical member has trailing zero blocks."""
        t = op.target
        raw = t.h + t.centered_shift
        return cls(
            target={"d": t.d, "h": poly_terms(raw), "centered_shift": _frac(t.centered_shift)},
            zero_order_mode=mode,
            T=op.T,
            m=op.m,
            coefficients=[_y_terms(p) for p in op.coeffs],
            solution_space={
                "horizon": op.T if horizon is None else horizon,
                "nullspace_dimension": len(nullspace or []),
                "basis": [[_frac(Fraction(x)) for x in v] for v in (nullspace or [])],
            },
            verification=dict(verification or {}),
            timing=timing,
        )

    def target_spec(self) -> TargetSpec:
        try:
            d = self.target["d"]
            raw = poly_from_terms(d, self.target["h"])
        except (KeyError, TypeError) as exc:
            raise DocumentError("target block is malformed") from exc
        target = TargetSpec.from_poly(raw)
        shift = _unfrac(self.target.get("centered_shift", "0"))
        if shift != target.centered_shift:
            raise DocumentError("centered_shift disagrees with the target polynomial")
        return target

    def operator(self) -> SteinOperator:
        coeffs = tuple(_y_from_terms(t) for t in self.coefficients)
        op = SteinOperator(self.target_spec(), coeffs, "document")
        if op.T != self.T:
            raise DocumentError(f"document says T = {self.T}, coefficients give {op.T}")
        if op.m != self.m:
            raise DocumentError(f"document says m = {self.m}, coefficients give {op.m}")
        return op

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Any) -> "OperatorDocument":
        if not isinstance(data, dict):
            raise DocumentError("document must be a JSON object")
        if data.get("schema_version") != SCHEMA:
            raise DocumentError(f"unsupported schema {data.get('schema_version')!r}")
        required = ("target", "zero_order_mode", "T", "m", "coefficients")
        missing = [k for k in required if k not in data]
        if missing:
            raise DocumentError(f"missing fields: {', '.join(missing)}")
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise DocumentError(f"unknown fields: {', '.join(sorted(extra))}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "OperatorDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)
