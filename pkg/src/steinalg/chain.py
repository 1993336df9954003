"""Stein operators and their validation by forward and backward chains."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .hermite import expect, hermite_coeffs, moments
from .malliavin import STANDARD, TargetSpec, gamma
from .poly import Poly, compose_target, content_normalize, format_poly


@dataclass(frozen=True)
class SteinOperator:
    """``S f(y) = sum_t p_t(y) f^{(t)}(y)`` for the target ``Y = h(X)``."""

    target: TargetSpec
    coeffs: tuple[Poly, ...]
    provenance: str = "user"

    def __post_init__(self):
        coeffs = list(self.coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        if not coeffs:
            raise ValueError("a Stein operator needs a nonzero coefficient")
        for p in coeffs:
            if p.nvars != 1:
                raise ValueError("operator coefficients must be univariate polynomials in y")
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def T(self) -> int:
        return len(self.coeffs) - 1

    @property
    def m(self) -> int:
        return max(int(p.degree) for p in self.coeffs if p)

    def normalized(self) -> "SteinOperator":
        scaled, _ = content_normalize(self.coeffs)
        return SteinOperator(self.target, tuple(scaled), self.provenance)

    def scaled(self, c) -> "SteinOperator":
        return SteinOperator(self.target, tuple(p * c for p in self.coeffs), self.provenance)

    def __add__(self, other: "SteinOperator") -> "SteinOperator":
        n = max(len(self.coeffs), len(other.coeffs))
        zero = Poly.zero(1)
        a = list(self.coeffs) + [zero] * (n - len(self.coeffs))
        b = list(other.coeffs) + [zero] * (n - len(other.coeffs))
        return SteinOperator(self.target, tuple(x + y for x, y in zip(a, b)), self.provenance)

    def symbolic(self) -> str:
        """MATLAB-style string, highest derivative first: ``(...)*D^3+...+y``."""
        parts = []
        for t in range(self.T, -1, -1):
            p = self.coeffs[t]
            if p.is_zero():
                continue
            body = format_poly(p, ("y",))
            if t == 0:
                parts.append(body)
                continue
            deriv = "D" if t == 1 else f"D^{t}"
            if body == "1":
                term = deriv
            elif body == "-1":
                term = "-" + deriv
            elif len(p) == 1 and "+" not in body[1:] and "-" not in body[1:]:
                term = f"{body}*{deriv}"
            else:
                term = f"({body})*{deriv}"
            parts.append(term)
        out = parts[0]
        for s in parts[1:]:
            out += s if s.startswith("-") else "+" + s
        return out

    def latex(self) -> str:
        """LaTeX in the layout of the printed operator tables, ascending derivative order."""
        pieces = []
        for t, p in enumerate(self.coeffs):
            if p.is_zero():
                continue
            body = format_poly(p, ("y",), style="latex")
            deriv = "" if t == 0 else ("\\partial" if t == 1 else f"\\partial^{{{t}}}")
            if not deriv:
                pieces.append((False, body))
                continue
            if len(p) == 1:
                neg = body.startswith("-")
                mag = body[1:] if neg else body
                if mag == "1":
                    mag = ""
                pieces.append((neg, f"{mag}{deriv}" if not mag else f"{mag}{deriv}"))
            else:
                # A leading minus is pulled out of the group, as in "y - (2\,y + 2)\partial".
                lead_neg = body.startswith("-")
                if lead_neg:
                    inner = format_poly(-p, ("y",), style="latex")
                    pieces.append((True, f"({inner}){deriv}"))
                else:
                    pieces.append((False, f"({body}){deriv}"))
        out = ""
        for i, (neg, s) in enumerate(pieces):
            if i == 0:
                out = ("-" + s) if neg and not s.startswith("-") else s
            else:
                if s.startswith("-"):
                    out += " - " + s[1:]
                else:
                    out += (" - " if neg else " + ") + s
        return out

    def __str__(self) -> str:
        return self.symbolic()


@dataclass(frozen=True)
class ChainTrace:
    g: list[Poly]
    residual: Poly
    moment_defects: list[Fraction]

    @property
    def is_algebraic(self) -> bool:
        return self.residual.is_zero() and not any(self.moment_defects)


def forward_replay(op: SteinOperator, variant: str = STANDARD) -> ChainTrace:
    """Replay ``g_t = Gamma_Y(g_{t-1} + p_{t-1}(Y))`` from ``g_0 = 0``."""
    target = op.target
    h = target.h
    g = [Poly.zero(target.d)]
    lifted = [compose_target(p, h) for p in op.coeffs]
    for t in range(1, op.T + 1):
        g.append(gamma(target, g[-1] + lifted[t - 1], variant))
    defects = [expect(gt) + expect(pt) for gt, pt in zip(g, lifted)]
    residual = g[-1] + lifted[-1]
    return ChainTrace(g, residual, defects)


def _falling(s: int, t: int) -> int:
    return math.perm(s, t)


def moment_conditions(op: SteinOperator, s_max: int) -> list[Fraction]:
    """``sum_t s!/(s-t)! E[Y^{s-t} p_t(Y)]`` for ``s = 0..s_max`` via the moment sequence of ``Y``."""
    deg = max(op.m, 0)
    mom = moments(op.target.h, s_max + deg)
    out = []
    for s in range(s_max + 1):
        total = Fraction(0)
        for t, p in enumerate(op.coeffs):
            if t > s:
                break
            ff = _falling(s, t)
            for (i,), c in p.items():
                total += ff * c * mom[s - t + i]
        out.append(total)
    return out


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failed_stage: int | None = None
    reconstructed: list[Poly] = field(default_factory=list)
    message: str = ""


def _divmod_univariate(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Exact long division in ``Q[x]``."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    db, lb = b.leading()
    rem = a.coeffs()
    bc = b.coeffs()
    quot = [Fraction(0)] * max(len(rem) - db, 1)
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k]
        if not c:
            continue
        f = c / lb
        quot[k - db] = f
        for i, w in enumerate(bc):
            if w:
                rem[k - db + i] -= f * w
    return Poly.univariate(quot), Poly.univariate(rem[:db] if db else [])


def _delta1(q: Poly) -> Poly:
    return Poly.var(1, 0) * q - q.partial(0)


def _ky_part(r: Poly, h: Poly, hp: Poly, max_degree: int) -> Poly | None:
    """Lowest-degree ``P`` with ``r - P(h)`` divisible by ``h'``, or ``None``."""
    from .linalg import Unsolvable, solve_exact

    _, target = _divmod_univariate(r, hp)
    width = max(int(hp.degree), 1)
    cols = []
    power = Poly.const(1, 1)
    for _ in range(max_degree + 1):
        _, red = _divmod_univariate(power, hp)
        cols.append(red.coeffs(width))
        power = power * h
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(width)]
    try:
        sol = solve_exact(rows, target.coeffs(width), backend="python")
    except Unsolvable:
        return None
    return Poly.univariate(sol.particular)


def backward_validate(op: SteinOperator) -> ValidationReport:
    """Backward chain for a univariate target.

    Stage 0 divides ``-p_T(h)`` by ``h'``.  Each later stage checks that
    ``delta q`` splits as ``<h'> + K[Y]``, records the lowest-degree ``K[Y]``
    part, and continues with the operator's own coefficient.  Success means the
    last ``delta q`` equals ``p_0(h)``.
    """
    target = op.target
    if target.d != 1:
        raise ValueError("backward validation is only defined for univariate targets")
    h = target.h
    hp = target.grad[0]
    lifted = [compose_target(p, h) for p in op.coeffs]
    T = op.T
    q, rem = _divmod_univariate(-lifted[T], hp)
    if not rem.is_zero():
        return ValidationReport(False, 0, [], "p_T(h) is not divisible by h'")
    rebuilt = []
    bound = max(op.m, 1) + 1
    for stage, t in enumerate(range(T, 1, -1), start=1):
        dq = _delta1(q)
        guess = _ky_part(dq, h, hp, bound)
        if guess is None:
            return ValidationReport(False, stage, rebuilt, "delta q is not in <h'> + K[Y]")
        rebuilt.append(guess)
        q, rem = _divmod_univariate(dq - lifted[t - 1], hp)
        if not rem.is_zero():
            return ValidationReport(False, stage, rebuilt, f"p_{t - 1} is inconsistent with the chain")
    dq = _delta1(q)
    if dq != lifted[0]:
        return ValidationReport(False, T, rebuilt, "final delta q differs from p_0(h)")
    rebuilt.append(dq)
    return ValidationReport(True, None, rebuilt, "ok")


@dataclass(frozen=True)
class TopCoefficientReport:
    ok: bool
    degree: int
    bound: int
    critical_values: list[float]
    max_relative_value: float
    divisor: Poly | None
    divisible: bool | None


def degree_lower_bound(p: int) -> int:
    """Minimal degree of the leading coefficient for ``Y = H_p(X)``."""
    return p // 2 if p % 2 == 0 else p - 1


def critical_value_polynomial(p: int) -> Poly:
    """Square-free ``t(y)`` vanishing at the critical values of ``H_p``, via a resultant."""
    import sympy

    x, y = sympy.symbols("x y")
    hp = sum(c * x**i for i, c in enumerate(hermite_coeffs(p)))
    res = sympy.resultant(sympy.diff(hp, x), y - hp, x)
    sq = sympy.Poly(sympy.sqf_part(res), y)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(sq.all_coeffs())]
    lead = coeffs[-1]
    return Poly.univariate([c / lead for c in coeffs])


def top_coefficient_check(op: SteinOperator, p: int, tol: float = 1e-9, exact_up_to: int = 6) -> TopCoefficientReport:
    """Structure checks on ``p_T`` for a Hermite target ``H_p``."""
    if p < 2:
        raise ValueError("needs p >= 2")
    top = op.coeffs[-1]
    deg = int(top.degree)
    bound = degree_lower_bound(p)
    crit = np.polynomial.hermite_e.hermeroots([0] * (p - 1) + [1])
    hvals = np.polynomial.polynomial.polyval(crit, [float(c) for c in hermite_coeffs(p)])
    coeffs = [float(c) for c in top.coeffs()]
    worst = 0.0
    for y in hvals:
        val = abs(np.polynomial.polynomial.polyval(y, coeffs))
        scale = sum(abs(c) * abs(y) ** i for i, c in enumerate(coeffs)) or 1.0
        worst = max(worst, val / scale)
    divisor = None
    divisible = None
    if p <= exact_up_to:
        divisor = critical_value_polynomial(p)
        _, rem = _divmod_univariate(top, divisor)
        divisible = rem.is_zero()
    ok = deg >= bound and worst <= tol and divisible is not False
    return TopCoefficientReport(ok, deg, bound, sorted(set(np.round(hvals, 9).tolist())), worst, divisor, divisible)


def operator_from_strings(target: TargetSpec, coeffs: Sequence[str], provenance: str = "user", raw: bool = False) -> SteinOperator:
    """Parse coefficients in ``y``.

    With ``raw=True`` the coefficients refer to the uncentered variable
    ``h(X) + centered_shift`` and are rewritten for the centered target.
    """
    from .poly import parse_poly

    polys = [parse_poly(c, names=("y",)) for c in coeffs]
    if raw and target.centered_shift:
        shift = Poly.univariate([target.centered_shift, 1])
        polys = [compose_target(p, shift) for p in polys]
    return SteinOperator(target, tuple(polys), provenance)
