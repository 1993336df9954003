"""Malliavin operators on polynomial rings.

Divergence, the two pseudo-inverses of the divergence, the inverse
Ornstein-Uhlenbeck operator and the Gamma operators built from them.
Vectors of polynomials are plain tuples of :class:`Poly`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .hermite import HermiteExpansion, expect, from_hermite, gaussian_moment, to_hermite
from .poly import Poly, PolyVector, dot

STANDARD = "standard"
MODIFIED = "modified"


@dataclass(frozen=True)
class TargetSpec:
    """A centered Gaussian polynomial target ``Y = h(X_1..X_d)``.

    ``centered_shift`` is the constant removed from the raw polynomial so that
    ``E[h(X)] = 0``.
    """

    h: Poly
    d: int
    centered_shift: Fraction
    grad: PolyVector

    @classmethod
    def from_poly(cls, raw: Poly) -> "TargetSpec":
        shift = expect(raw)
        h = raw - shift
        if h.is_constant():
            raise ValueError("degenerate target: h is constant")
        return cls(h=h, d=h.nvars, centered_shift=shift, grad=h.gradient())

    @property
    def degree(self) -> int:
        return int(self.h.degree)


def delta(f: PolyVector) -> Poly:
    """Divergence ``sum_k (x_k f_k - d f_k / d x_k)``."""
    d = len(f)
    out = Poly.zero(f[0].nvars)
    for k, fk in enumerate(f):
        if fk.nvars != d:
            raise ValueError(f"component {k} has {fk.nvars} variables, expected {d}")
        if fk:
            out = out + Poly.var(d, k) * fk - fk.partial(k)
    return out


@lru_cache(maxsize=None)
def _pinv_monomial_row(n: int) -> tuple[int, ...]:
    # delta^{-1} x^n = x^{n-1} + (n-1) delta^{-1} x^{n-2}, integer coefficients.
    if n == 0:
        return ()
    if n == 1:
        return (1,)
    prev = _pinv_monomial_row(n - 2)
    row = [0] * n
    row[n - 1] = 1
    for i, c in enumerate(prev):
        row[i] += (n - 1) * c
    return tuple(row)


def pinv_monomial_coeffs(n: int) -> tuple[int, ...]:
    """Ascending coefficients of the univariate ``delta^{-1} x^n``."""
    return _pinv_monomial_row(n)


def _pinv_univariate(p: Poly) -> Poly:
    out: dict[int, Fraction] = {}
    for (e,), c in p.items():
        for i, w in enumerate(_pinv_monomial_row(e)):
            if w:
                out[i] = out.get(i, 0) + c * w
    return Poly(1, {(i,): c for i, c in out.items()})


def _pinv_hermite(p: Poly) -> PolyVector:
    d = p.nvars
    comps: list[dict] = [{} for _ in range(d)]
    for alpha, c in to_hermite(p).terms.items():
        size = sum(alpha)
        if not size:
            continue
        for k, a in enumerate(alpha):
            if a:
                beta = alpha[:k] + (a - 1,) + alpha[k + 1:]
                comps[k][beta] = comps[k].get(beta, 0) + c * Fraction(a, size)
    return tuple(from_hermite(HermiteExpansion(d, comp)) for comp in comps)


def pseudo_inverse(p: Poly) -> PolyVector:
    """The pseudo-inverse ``-D L^{-1}`` of the divergence.

    Univariate input uses the monomial recursion; otherwise the Hermite
    expansion is scaled termwise.
    """
    if p.nvars == 1:
        return (_pinv_univariate(p),)
    return _pinv_hermite(p)


def pseudo_inverse_hermite(p: Poly) -> PolyVector:
    """Hermite-route pseudo-inverse, also for ``d = 1`` (cross-check path)."""
    return _pinv_hermite(p)


def modified_pseudo_inverse(p: Poly) -> PolyVector:
    """Pseudo-inverse built monomial by monomial from centered coordinate powers.

    Each monomial ``x^alpha`` is split as a product of ``(x_k^a - E X^a) + E X^a``
    and expanded over nonempty subsets ``A`` of the coordinates; on the
    centered block over ``A`` the ``k``-th component is
    ``alpha_k / |alpha_A|`` times the product of the other centered factors
    times the univariate pseudo-inverse of ``x_k^{alpha_k}``.
    """
    d = p.nvars
    if d == 1:
        return pseudo_inverse(p)
    out = [Poly.zero(d) for _ in range(d)]
    for alpha, c in p.items():
        support = [k for k, a in enumerate(alpha) if a]
        if not support:
            continue
        centered = {k: Poly.monomial(_unit(d, k, alpha[k])) - gaussian_moment(alpha[k]) for k in support}
        pinv = {k: _pinv_univariate(Poly.univariate([0] * alpha[k] + [1])).embed(d, k) for k in support}
        for r in range(1, len(support) + 1):
            for subset in itertools.combinations(support, r):
                weight = Fraction(c)
                for k in support:
                    if k not in subset:
                        weight *= gaussian_moment(alpha[k])
                if not weight:
                    continue
                size = sum(alpha[k] for k in subset)
                for k in subset:
                    term = pinv[k] * (weight * Fraction(alpha[k], size))
                    for j in subset:
                        if j != k:
                            term = term * centered[j]
                    out[k] = out[k] + term
    return tuple(out)


def _unit(d: int, k: int, e: int) -> tuple[int, ...]:
    m = [0] * d
    m[k] = e
    return tuple(m)


def ou_inverse(p: Poly) -> Poly:
    """Inverse Ornstein-Uhlenbeck operator: ``H_alpha -> -H_alpha / |alpha|``, constants to 0."""
    e = to_hermite(p)
    scaled = {a: -c / sum(a) for a, c in e.terms.items() if sum(a)}
    return from_hermite(HermiteExpansion(p.nvars, scaled))


def gamma(target: TargetSpec, f: Poly, variant: str = STANDARD) -> Poly:
    """``Gamma_Y(f) = <grad h, delta^{-1} f>`` with the chosen pseudo-inverse."""
    if f.nvars != target.d:
        raise ValueError(f"f has {f.nvars} variables, target has {target.d}")
    if variant == STANDARD:
        v = pseudo_inverse(f)
    elif variant == MODIFIED:
        v = modified_pseudo_inverse(f)
    else:
        raise ValueError(f"unknown Gamma variant {variant!r}")
    return dot(target.grad, v)


def gamma_power(target: TargetSpec, f: Poly, t: int, variant: str = STANDARD) -> Poly:
    """``Gamma_Y`` applied ``t`` times."""
    for _ in range(t):
        f = gamma(target, f, variant)
    return f


def gamma_malliavin_iter(target: TargetSpec, r: int) -> Poly:
    """Iterated Malliavin Gamma: ``Gamma_0 = h``, ``Gamma_r = <Dh, -D L^{-1} Gamma_{r-1}>``.

    Computed through :func:`ou_inverse` rather than :func:`gamma` so the two
    routes stay independent.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    g = target.h
    for _ in range(r):
        w = -ou_inverse(g)
        g = dot(target.grad, w.gradient())
    return g
