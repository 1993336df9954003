"""Exact sparse multivariate polynomials over the rationals.

A :class:`Poly` stores a mapping from exponent tuples (one entry per
variable) to nonzero :class:`~fractions.Fraction` coefficients.  Values are
immutable once built, so they can be hashed and shared freely.

Example (2 variables)::

    x1^2*x2 + 3  ->  {(2, 1): Fraction(2), (0, 0): Fraction(3)}

Univariate polynomials in the target variable ``y`` are ordinary ``Poly``
objects with ``nvars == 1``; only the printer distinguishes ``x`` from ``y``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Tuple, Union

MultiIndex = Tuple[int, ...]
Scalar = Union[int, Fraction]

# Degree of the zero polynomial.  Compares below every integer degree.
ZERO_DEGREE = float("-inf")


class Poly:
    """Immutable polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, Scalar] | None = None):
        if nvars < 1:
            raise ValueError(f"nvars must be positive, got {nvars}")
        self.nvars = nvars
        clean: dict[MultiIndex, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                mono = tuple(mono)
                if len(mono) != nvars or any(e < 0 for e in mono):
                    raise ValueError(f"bad exponent {mono} for {nvars} variables")
                c = Fraction(c)
                if c:
                    clean[mono] = clean.get(mono, Fraction(0)) + c
            clean = {m: c for m, c in clean.items() if c}
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[MultiIndex, Fraction]) -> "Poly":
        # Trusted constructor: keys valid, values nonzero Fractions.
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int = 1) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, value: Scalar) -> "Poly":
        value = Fraction(value)
        return cls._raw(nvars, {(0,) * nvars: value} if value else {})

    @classmethod
    def var(cls, nvars: int, k: int) -> "Poly":
        """The coordinate polynomial ``x_k`` (0-based ``k``)."""
        if not 0 <= k < nvars:
            raise IndexError(f"variable index {k} out of range for {nvars} variables")
        mono = [0] * nvars
        mono[k] = 1
        return cls._raw(nvars, {tuple(mono): Fraction(1)})

    @classmethod
    def monomial(cls, alpha: Sequence[int], coeff: Scalar = 1) -> "Poly":
        return cls(len(alpha), {tuple(alpha): coeff})

    @classmethod
    def univariate(cls, coeffs: Iterable[Scalar]) -> "Poly":
        """Build a one-variable polynomial from ascending coefficients."""
        terms = {}
        for i, c in enumerate(coeffs):
            c = Fraction(c)
            if c:
                terms[(i,)] = c
        return cls._raw(1, terms)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Mapping[MultiIndex, Fraction]:
        return self._terms

    def items(self) -> Iterator[tuple[MultiIndex, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int | float:
        if not self._terms:
            return ZERO_DEGREE
        return max(sum(m) for m in self._terms)

    def degree_in(self, k: int) -> int | float:
        if not self._terms:
            return ZERO_DEGREE
        return max(m[k] for m in self._terms)

    def coeff(self, mono: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(mono), Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def coeffs(self, length: int | None = None) -> list[Fraction]:
        """Dense ascending coefficient list of a univariate polynomial."""
        if self.nvars != 1:
            raise ValueError("dense coefficients only exist for univariate polynomials")
        deg = self.degree
        n = 0 if deg == ZERO_DEGREE else int(deg) + 1
        if length is not None:
            if length < n:
                raise ValueError(f"polynomial of degree {deg} does not fit in {length} slots")
            n = length
        out = [Fraction(0)] * n
        for (e,), c in self._terms.items():
            out[e] = c
        return out

    def leading(self) -> tuple[int, Fraction]:
        """(degree, coefficient) of the top term of a univariate polynomial."""
        if self.nvars != 1 or not self._terms:
            raise ValueError("leading term needs a nonzero univariate polynomial")
        e = max(m[0] for m in self._terms)
        return e, self._terms[(e,)]

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.nvars, other)
        return NotImplemented

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s += c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return Poly.zero(self.nvars)
            return Poly._raw(self.nvars, {m: c * other for m, c in self._terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        out: dict[MultiIndex, Fraction] = {}
        if self.nvars == 1:
            for (a,), ca in self._terms.items():
                for (b,), cb in other._terms.items():
                    k = (a + b,)
                    out[k] = out.get(k, 0) + ca * cb
        else:
            for ma, ca in self._terms.items():
                for mb, cb in other._terms.items():
                    k = tuple(i + j for i, j in zip(ma, mb))
                    out[k] = out.get(k, 0) + ca * cb
        return Poly._raw(self.nvars, {m: Fraction(c) for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "Poly":
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self * (1 / Fraction(other))

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Poly.const(self.nvars, other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    # -- calculus and substitution ---------------------------------------

    def partial(self, k: int) -> "Poly":
        """Formal partial derivative with respect to ``x_k`` (0-based)."""
        if not 0 <= k < self.nvars:
            raise IndexError(f"variable index {k} out of range for {self.nvars} variables")
        out = {}
        for m, c in self._terms.items():
            e = m[k]
            if e:
                m2 = m[:k] + (e - 1,) + m[k + 1:]
                out[m2] = c * e
        return Poly._raw(self.nvars, out)

    def gradient(self) -> tuple["Poly", ...]:
        return tuple(self.partial(k) for k in range(self.nvars))

    def __call__(self, *values):
        """Evaluate at a point; works for any ring that mixes with Fractions."""
        if len(values) != self.nvars:
            raise ValueError(f"expected {self.nvars} values, got {len(values)}")
        total = 0
        for m, c in self._terms.items():
            term = c
            for v, e in zip(values, m):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def embed(self, nvars: int, k: int = 0) -> "Poly":
        """Regard a univariate polynomial as a polynomial in ``x_k`` of ``nvars`` variables."""
        if self.nvars != 1:
            raise ValueError("embed expects a univariate polynomial")
        out = {}
        for (e,), c in self._terms.items():
            m = [0] * nvars
            m[k] = e
            out[tuple(m)] = c
        return Poly._raw(nvars, out)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self._terms.values())


PolyVector = Tuple[Poly, ...]


def arith(a: Poly, b: Poly, op: str) -> Poly:
    """Binary ring operation by name: ``add``, ``sub`` or ``mul``."""
    if a.nvars != b.nvars:
        raise ValueError(f"variable-count mismatch: {a.nvars} vs {b.nvars}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def dot(u: Sequence[Poly], v: Sequence[Poly]) -> Poly:
    """Euclidean pairing of two polynomial vectors."""
    if len(u) != len(v):
        raise ValueError("vector length mismatch")
    total = Poly.zero(u[0].nvars)
    for a, b in zip(u, v):
        if a and b:
            total = total + a * b
    return total


def compose_target(p: Poly, h: Poly) -> Poly:
    """Return ``p(h(x))`` for univariate ``p`` by Horner's rule."""
    if p.nvars != 1:
        raise ValueError("compose_target expects a univariate outer polynomial")
    coeffs = p.coeffs()
    acc = Poly.zero(h.nvars)
    for c in reversed(coeffs):
        acc = acc * h
        if c:
            acc = acc + c
    return acc


def content_normalize(coeffs: Sequence[Poly]) -> tuple[list[Poly], Fraction]:
    """Scale a family of polynomials to primitive integer form.

    The same rational factor multiplies every polynomial so that all
    coefficients become integers with overall gcd 1.  The sign is fixed by the
    first nonzero coefficient in (polynomial index, ascending exponent) order,
    which is made positive.
    """
    first = None
    dens = 1
    nums = 0
    for p in coeffs:
        for m in sorted(p.terms):
            c = p.terms[m]
            if first is None:
                first = c
            dens = dens * c.denominator // math.gcd(dens, c.denominator)
    if first is None:
        raise ValueError("cannot normalize an all-zero family")
    for p in coeffs:
        for c in p.terms.values():
            nums = math.gcd(nums, (c * dens).numerator)
    scale = Fraction(dens, nums)
    if first < 0:
        scale = -scale
    return [p * scale for p in coeffs], scale


# -- text I/O --------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


class PolySyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolySyntaxError(f"unexpected character at {pos}: {text[pos:pos + 8]!r}")
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok == "**":
            tok = "^"
        out.append(tok)
        pos = m.end()
        # Reject float literals like 1.5 early.
        if pos < len(text) and text[pos] == ".":
            raise PolySyntaxError("floating-point literals are not accepted")
    return out


def default_names(nvars: int) -> tuple[str, ...]:
    return ("x",) if nvars == 1 else tuple(f"x{i + 1}" for i in range(nvars))


def parse_poly(text: str, nvars: int | None = None, names: Sequence[str] | None = None) -> Poly:
    """Parse an exact polynomial expression.

    Accepts integers, rational literals written as ``a/b``, variables
    ``x`` (when univariate), ``x1..xd`` and ``y``, and the operators
    ``+ - * / ^`` with parentheses.  Division is only allowed by constants.
    ``y`` is read as the single variable of a univariate polynomial.
    """
    toks = _tokenize(text)
    if not toks:
        raise PolySyntaxError("empty expression")
    if names is None:
        idents = {t for t in toks if t[0].isalpha() or t[0] == "_"}
        if nvars is None:
            nums = [int(t[1:]) for t in idents if re.fullmatch(r"x\d+", t)]
            nvars = max(nums) if nums else 1
        names = default_names(nvars)
        alias = {"y": 0} if nvars == 1 else {}
        if nvars == 1:
            alias["x1"] = 0
        lookup = {n: i for i, n in enumerate(names)} | alias
    else:
        nvars = len(names)
        lookup = {n: i for i, n in enumerate(names)}

    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        return tok

    def expr() -> Poly:
        node = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term() -> Poly:
        node = unary()
        while peek() in ("*", "/"):
            op = take()
            rhs = unary()
            if op == "*":
                node = node * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    raise PolySyntaxError("division only by nonzero constants")
                node = node / rhs.constant_term()
        return node

    def unary() -> Poly:
        if peek() == "-":
            take()
            return -unary()
        if peek() == "+":
            take()
            return unary()
        return power()

    def power() -> Poly:
        base = atom()
        if peek() == "^":
            take()
            if peek() == "-":
                raise PolySyntaxError("negative exponents are not polynomials")
            tok = take() if peek() is not None else None
            if tok is None or not tok.isdigit():
                raise PolySyntaxError("exponent must be a non-negative integer")
            base = base ** int(tok)
        return base

    def atom() -> Poly:
        tok = peek()
        if tok is None:
            raise PolySyntaxError("unexpected end of expression")
        take()
        if tok.isdigit():
            return Poly.const(nvars, int(tok))
        if tok == "(":
            node = expr()
            if peek() != ")":
                raise PolySyntaxError("missing closing parenthesis")
            take()
            return node
        if tok in lookup:
            return Poly.var(nvars, lookup[tok])
        raise PolySyntaxError(f"unknown symbol {tok!r}")

    result = expr()
    if pos != len(toks):
        raise PolySyntaxError(f"trailing input at token {toks[pos]!r}")
    return result


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly, names: Sequence[str] | None = None, style: str = "plain") -> str:
    """Render a polynomial as text.

    ``plain`` gives ``x^4-6*x^2+3`` (re-parsable by :func:`parse_poly`),
    ``latex`` gives ``x^{4} - 6\\,x^{2} + 3``.  Terms are in descending
    graded-lex order.
    """
    names = tuple(names) if names is not None else default_names(p.nvars)
    if not p.terms:
        return "0"
    keys = sorted(p.terms, key=lambda m: (sum(m), m), reverse=True)
    parts = []
    for i, m in enumerate(keys):
        c = p.terms[m]
        neg = c < 0
        a = -c if neg else c
        if style == "latex":
            factors = [n if e == 1 else f"{n}^{{{e}}}" for n, e in zip(names, m) if e]
            mono = " ".join(factors)
            if not mono:
                body = _latex_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_latex_coeff(a)}\\,{mono}"
            sep = ("-" if neg else "") if i == 0 else (" - " if neg else " + ")
        else:
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e]
            mono = "*".join(factors)
            if not mono:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(a)}*{mono}"
            sep = ("-" if neg else "") if i == 0 else ("-" if neg else "+")
        parts.append(sep + body)
    return "".join(parts)


def _latex_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
