"""Probabilists' Hermite polynomials, basis changes and Gaussian expectations."""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Mapping

from .poly import MultiIndex, Poly, Scalar


class _ConnectionTable:
    """Triangular tables linking monomials and Hermite polynomials.

    ``herm[n][k]`` is the coefficient of ``x^k`` in ``H_n`` and ``mono[n][k]``
    the coefficient of ``H_k`` in ``x^n``.  Rows are integers; the table grows
    on demand under a lock and is read without one.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.herm: list[list[int]] = [[1], [0, 1]]
        self.mono: list[list[int]] = [[1], [0, 1]]

    def ensure(self, n: int) -> None:
        if n < len(self.herm):
            return
        with self._lock:
            herm = list(self.herm)
            mono = list(self.mono)
            while len(herm) <= n:
                k = len(herm)
                prev, prev2 = herm[k - 1], herm[k - 2]
                # H_k = x H_{k-1} - (k-1) H_{k-2}
                row = [0] + prev
                for i, c in enumerate(prev2):
                    row[i] -= (k - 1) * c
                herm.append(row)
                # x^k = x * x^{k-1};  x H_j = H_{j+1} + j H_{j-1}
                prevm = mono[k - 1]
                rowm = [0] * (k + 1)
                for j, c in enumerate(prevm):
                    if c:
                        rowm[j + 1] += c
                        if j:
                            rowm[j - 1] += j * c
                mono.append(rowm)
            self.mono = mono
            self.herm = herm


_TABLE = _ConnectionTable()


def hermite_coeffs(n: int) -> list[int]:
    """Ascending integer coefficients of ``H_n``."""
    if n < 0:
        raise ValueError("Hermite index must be non-negative")
    _TABLE.ensure(n)
    return _TABLE.herm[n]


def monomial_in_hermite(n: int) -> list[int]:
    """Coefficients of ``x^n`` in the basis ``H_0..H_n``."""
    _TABLE.ensure(n)
    return _TABLE.mono[n]


def hermite(n: int) -> Poly:
    """The monic probabilists' Hermite polynomial ``H_n(x)``."""
    return Poly.univariate(hermite_coeffs(n))


def hermite_multi(alpha: MultiIndex) -> Poly:
    """Product Hermite polynomial ``prod_k H_{alpha_k}(x_k)``."""
    d = len(alpha)
    out = Poly.const(d, 1)
    for k, a in enumerate(alpha):
        if a:
            out = out * hermite(a).embed(d, k)
    return out


class HermiteExpansion:
    """A polynomial written in the product-Hermite basis ``H_alpha``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, Scalar] | None = None):
        self.nvars = nvars
        self.terms: dict[MultiIndex, Fraction] = {}
        for a, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[tuple(a)] = c

    def __eq__(self, other) -> bool:
        if not isinstance(other, HermiteExpansion):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*H{list(a)}" for a, c in sorted(self.terms.items()))
        return f"HermiteExpansion({self.nvars}, {body or '0'})"

    def coeff(self, alpha) -> Fraction:
        return self.terms.get(tuple(alpha), Fraction(0))


def to_hermite(p: Poly) -> HermiteExpansion:
    """Expand ``p`` in the Hermite basis, one variable at a time."""
    d = p.nvars
    out: dict[MultiIndex, Fraction] = {}
    for m, c in p.items():
        # Tensor product of the per-variable monomial expansions.
        partial = {(): c}
        for e in m:
            row = monomial_in_hermite(e)
            nxt = {}
            for a, v in partial.items():
                for j, w in enumerate(row):
                    if w:
                        nxt[a + (j,)] = v * w
            partial = nxt
        for a, v in partial.items():
            out[a] = out.get(a, 0) + v
    return HermiteExpansion(d, out)


def from_hermite(e: HermiteExpansion) -> Poly:
    d = e.nvars
    out: dict[MultiIndex, Fraction] = {}
    for a, c in e.terms.items():
        partial = {(): c}
        for n in a:
            row = hermite_coeffs(n)
            nxt = {}
            for m, v in partial.items():
                for j, w in enumerate(row):
                    if w:
                        nxt[m + (j,)] = v * w
            partial = nxt
        for m, v in partial.items():
            out[m] = out.get(m, 0) + v
    return Poly(d, out)


def double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def gaussian_moment(n: int) -> int:
    """``E[X^n]`` for a standard normal ``X``."""
    if n < 0:
        raise ValueError("moment order must be non-negative")
    return 0 if n % 2 else double_factorial(n - 1)


def expect(p: Poly) -> Fraction:
    """Exact expectation of ``p(X)`` for ``X`` standard normal in ``p.nvars`` dimensions."""
    total = Fraction(0)
    for m, c in p.items():
        if any(e % 2 for e in m):
            continue
        w = 1
        for e in m:
            w *= double_factorial(e - 1)
        total += c * w
    return total


def expect_via_hermite(p: Poly) -> Fraction:
    """Same as :func:`expect`, read off as the ``H_0`` coefficient."""
    return to_hermite(p).coeff((0,) * p.nvars)


def moments(h: Poly, n: int) -> list[Fraction]:
    """``[E[h^0], ..., E[h^n]]``."""
    out = [Fraction(1)]
    power = Poly.const(h.nvars, 1)
    for _ in range(n):
        power = power * h
        out.append(expect(power))
    return out


def cumulants_from_moments(m: list[Fraction]) -> list[Fraction]:
    """Cumulants ``kappa_1..kappa_n`` from raw moments ``m_0..m_n`` (index 0 unused)."""
    n = len(m) - 1
    kappa = [Fraction(0)] * (n + 1)
    for k in range(1, n + 1):
        s = m[k]
        for j in range(1, k):
            s -= math.comb(k - 1, j - 1) * kappa[j] * m[k - j]
        kappa[k] = s
    return kappa


def cumulant(h: Poly, n: int) -> Fraction:
    """n-th cumulant of ``h(X)`` from exact moments."""
    if n < 1:
        raise ValueError("cumulant order must be positive")
    return cumulants_from_moments(moments(h, n))[n]
