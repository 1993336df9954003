"""Null-controllability search for algebraic polynomial Stein operators.

The state of the control system is the Gaussian polynomial ``g_t``; the
evolution operator is ``Gamma_Y`` and the input operator is
``Lambda = Gamma_Y o Theta``, where ``Theta`` embeds ``p(y)`` as ``p(h(x))``.
A chain of length ``T`` is algebraic exactly when ``g_T + p_T(h) = 0``.  Since
``Gamma_Y`` kills only constants, that is equivalent to the linear system

    sum_{s=1..T} Gamma^{T-s} Lambda p_s = -Gamma^T Lambda p_0

in the non-constant coefficients, followed by a choice of constant terms
that enforces ``E[p_s(Y)] = -E[g_s]``.  Columns of the system are the
iterates ``Gamma^i(h^j)``; they are cached per target so horizon and degree
searches share the work.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .chain import SteinOperator
from .hermite import expect, gaussian_moment
from .linalg import EchelonBasis, RationalMatrix, _backend, _integer_row, _primitive, rank, solve_exact
from .malliavin import MODIFIED, STANDARD, TargetSpec, gamma
from .poly import Poly, compose_target

try:  # pragma: no cover
    import flint
except ImportError:  # pragma: no cover
    flint = None

CY = "cy"
GENERIC = "generic"

ZeroOrder = Union[str, int, Poly]


class NotReachable(Exception):
    """No horizon up to ``T_max`` admits a null control with degree cap ``m``."""

    def __init__(self, T_max: int, m: int, mode: str = CY):
        super().__init__(f"no algebraic Stein chain with T <= {T_max}, m = {m} (zero order {mode})")
        self.T_max = T_max
        self.m = m
        self.mode = mode


class DimensionError(ValueError):
    """A state would not fit in the requested truncation (dimension audit)."""


# -- bounds and bases --------------------------------------------------------


def state_bound(target: TargetSpec, m: int, t: int) -> int:
    """Degree bound for every state up to stage ``t`` with coefficient degree ``m``."""
    if m < 0 or t < 0:
        raise ValueError("m and t must be non-negative")
    p = target.degree
    if target.d == 1:
        return p * m + (p - 2) * t
    return p * (m + t)


def monomial_basis(d: int, N: int) -> list[tuple[int, ...]]:
    """Exponents of total degree ``<= N``, graded, lexicographically descending within a degree."""
    out = []
    for deg in range(N + 1):
        for combo in itertools.combinations_with_replacement(range(d), deg):
            e = [0] * d
            for k in combo:
                e[k] += 1
            out.append(tuple(e))
    return out


def _to_vector(p: Poly, index: dict, N: int) -> list[Fraction]:
    vec = [Fraction(0)] * len(index)
    for mono, c in p.items():
        if sum(mono) > N:
            raise DimensionError(f"degree {sum(mono)} exceeds the bound {N}")
        vec[index[mono]] = c
    return vec


def to_state_vector(p: Poly, N: int) -> list[Fraction]:
    basis = monomial_basis(p.nvars, N)
    return _to_vector(p, {m: i for i, m in enumerate(basis)}, N)


def from_state_vector(vec: Sequence, d: int, N: int) -> Poly:
    basis = monomial_basis(d, N)
    if len(vec) != len(basis):
        raise DimensionError("state vector length does not match the basis")
    return Poly(d, {m: c for m, c in zip(basis, vec) if c})


def gamma_matrix(target: TargetSpec, N: int, variant: str = STANDARD, rows_bound: int | None = None) -> RationalMatrix:
    """Matrix of ``Gamma_Y`` from ``K_N`` into ``K_{N + deg h - 2}`` (or ``rows_bound``)."""
    d = target.d
    out_bound = N + max(target.degree - 2, 0) if rows_bound is None else rows_bound
    rows_index = {m: i for i, m in enumerate(monomial_basis(d, out_bound))}
    cols = [_to_vector(gamma(target, Poly.monomial(a), variant), rows_index, out_bound) for a in monomial_basis(d, N)]
    return RationalMatrix.from_columns(cols, len(rows_index))


def lambda_matrix(target: TargetSpec, m: int, N: int, variant: str = STANDARD) -> RationalMatrix:
    """Columns ``Gamma_Y(h^k)``, ``k = 0..m``, in the basis of ``K_N``."""
    index = {mono: i for i, mono in enumerate(monomial_basis(target.d, N))}
    cols = []
    power = Poly.const(target.d, 1)
    for _ in range(m + 1):
        cols.append(_to_vector(gamma(target, power, variant), index, N))
        power = power * target.h
    return RationalMatrix.from_columns(cols, len(index))


# -- state engines -----------------------------------------------------------


def _num(c: Fraction):
    return c.numerator if c.denominator == 1 else c


class _DenseEngine:
    """Univariate states as ascending coefficient lists.

    ``delta^{-1}`` is computed by the downward recursion
    ``u_{k-1} = f_k + (k+1) u_{k+1}``, which inverts ``delta u = x u - u'`` on
    centered input in linear time.
    """

    def __init__(self, target: TargetSpec):
        self.target = target
        self.h = [_num(c) for c in target.h.coeffs()]
        self.hp = [_num(c) for c in target.grad[0].coeffs()]
        self._iter: dict[int, list[list]] = {}
        self._powers: list[list] = [[1]]

    @staticmethod
    def _trim(v: list) -> list:
        while v and not v[-1]:
            v.pop()
        return v

    def _mul(self, a: list, b: list) -> list:
        if not a or not b:
            return []
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] += x * y
        return self._trim(out)

    def gamma(self, f: list) -> list:
        n = len(f) - 1
        if n <= 0:
            return []
        u = [0] * n
        for k in range(n, 0, -1):
            u[k - 1] = f[k] + ((k + 1) * u[k + 1] if k + 1 < n else 0)
        return self._mul(self.hp, self._trim(u))

    def power(self, j: int) -> list:
        while len(self._powers) <= j:
            self._powers.append(self._mul(self._powers[-1], self.h))
        return self._powers[j]

    def iterate(self, j: int, i: int) -> list:
        """``Gamma^i(h^j)``, memoized."""
        seq = self._iter.setdefault(j, [self.power(j)])
        while len(seq) <= i:
            seq.append(self.gamma(seq[-1]))
        return seq[i]

    def lift(self, p: Poly) -> list:
        acc: list = []
        for c in reversed(p.coeffs()):
            acc = self._mul(acc, self.h)
            if c:
                acc = (acc or [0])
                acc[0] += _num(c)
                acc = self._trim(acc)
        return acc

    def add(self, a: list, b: list) -> list:
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return self._trim(out)

    def scale(self, a: list, c) -> list:
        return self._trim([x * c for x in a]) if c else []

    def expect(self, f: list) -> Fraction:
        return Fraction(sum(c * gaussian_moment(k) for k, c in enumerate(f) if c and not k % 2))

    def degree(self, f: list) -> int:
        return len(f) - 1

    def vectors(self, states: Sequence[list]) -> list[list]:
        width = max((len(s) for s in states), default=0)
        return [list(s) + [0] * (width - len(s)) for s in states]


class _SparseEngine:
    """Multivariate states as :class:`Poly`, using the library Gamma operator."""

    def __init__(self, target: TargetSpec, variant: str):
        self.target = target
        self.variant = variant
        self._iter: dict[int, list[Poly]] = {}
        self._powers = [Poly.const(target.d, 1)]

    def gamma(self, f: Poly) -> Poly:
        return gamma(self.target, f, self.variant)

    def power(self, j: int) -> Poly:
        while len(self._powers) <= j:
            self._powers.append(self._powers[-1] * self.target.h)
        return self._powers[j]

    def iterate(self, j: int, i: int) -> Poly:
        seq = self._iter.setdefault(j, [self.power(j)])
        while len(seq) <= i:
            seq.append(self.gamma(seq[-1]))
        return seq[i]

    def lift(self, p: Poly) -> Poly:
        return compose_target(p, self.target.h)

    def add(self, a: Poly, b: Poly) -> Poly:
        return a + b

    def scale(self, a: Poly, c) -> Poly:
        return a * c

    def expect(self, f: Poly) -> Fraction:
        return expect(f)

    def degree(self, f: Poly) -> int:
        return int(f.degree) if f else -1

    def vectors(self, states: Sequence[Poly]) -> list[list]:
        N = max((self.degree(s) for s in states), default=0)
        basis = monomial_basis(self.target.d, max(N, 0))
        index = {m: i for i, m in enumerate(basis)}
        return [_to_vector(s, index, N) for s in states]


_ENGINES: dict = {}


def _engine(target: TargetSpec, variant: str):
    if variant not in (STANDARD, MODIFIED):
        raise ValueError(f"unknown Gamma variant {variant!r}")
    # The two pseudo-inverses agree in one variable.
    key = (target.h, STANDARD if target.d == 1 else variant)
    eng = _ENGINES.get(key)
    if eng is None:
        eng = _DenseEngine(target) if target.d == 1 else _SparseEngine(target, variant)
        if len(_ENGINES) > 64:
            _ENGINES.clear()
        _ENGINES[key] = eng
    return eng


# -- feasibility ---------------------------------------------------------------


def _primitive_columns(vectors: Sequence[Sequence]) -> list[list[int]]:
    return [_primitive(_integer_row(v)) for v in vectors]


def _rank_int(rows: list[list[int]], backend: str) -> int:
    if not rows or not rows[0]:
        return 0
    if backend == "flint":
        return flint.fmpz_mat(rows).rank()
    return rank(rows, backend="python")


def _transpose(cols: list[list]) -> list[list]:
    if not cols:
        return []
    return [list(r) for r in zip(*cols)]


def _padded(cols: list[list], width: int) -> list[list]:
    return [list(c) + [0] * (width - len(c)) for c in cols]


def _column_rank(cols: list[list[int]], backend: str) -> int:
    width = max((len(c) for c in cols), default=0)
    if not cols or not width:
        return 0
    # Natural orientation (one row per monomial) with each row made
    # primitive: rank is unchanged and fraction-free elimination is far
    # cheaper than on the transpose.
    rows = [_primitive(list(r)) for r in zip(*_padded(cols, width))]
    rows = [r for r in rows if any(r)]
    return _rank_int(rows, backend) if rows else 0


def _columns(eng, t: int, m: int) -> list:
    """States for blocks ``p_1..p_t`` (ascending ``y`` degree inside each block)."""
    return [eng.iterate(j, t - s + 1) for s in range(1, t + 1) for j in range(1, m + 1)]


def _lifted_iterate(eng, p0: Poly, i: int, cache: dict):
    seq = cache.setdefault("p0", [eng.lift(p0)])
    while len(seq) <= i:
        seq.append(eng.gamma(seq[-1]))
    return seq[i]


# -- solutions -----------------------------------------------------------------


@dataclass
class ControlSolution:
    """Affine set of null controls at the first feasible horizon.

    ``particular`` and each entry of ``nullspace_basis`` are stacked vectors
    ``(p_1, ..., p_T)``, each block holding ``m + 1`` ascending coefficients
    with the constant already moment-corrected.  Nullspace directions pair
    with a zero ``p_0``.
    """

    target: TargetSpec
    T: int
    m: int
    zero_order: Poly
    particular: list[Fraction]
    nullspace_basis: list[list[Fraction]]
    mode: str = CY
    variant: str = STANDARD
    reduced: bool | None = None

    def blocks(self, vec: Sequence[Fraction]) -> list[Poly]:
        w = self.m + 1
        return [Poly.univariate(vec[s * w:(s + 1) * w]) for s in range(self.T)]

    def coefficients(self) -> list[Poly]:
        return [self.zero_order] + self.blocks(self.particular)

    def operator(self, provenance: str = "solver") -> SteinOperator:
        """Canonical representative: free variables zero, then content-normalized."""
        return SteinOperator(self.target, tuple(self.coefficients()), provenance).normalized()

    def direction(self, k: int) -> list[Poly]:
        return [Poly.zero(1)] + self.blocks(self.nullspace_basis[k])

    def member(self, weights: Sequence) -> list[Poly]:
        """``particular + sum_k w_k nullspace_basis[k]`` as ``[p_0, ..., p_T]``."""
        vec = list(self.particular)
        for w, nv in zip(weights, self.nullspace_basis):
            vec = [a + w * b for a, b in zip(vec, nv)]
        return [self.zero_order] + self.blocks(vec)

    @property
    def nullity(self) -> int:
        return len(self.nullspace_basis)


def _moment_correct(eng, p0: Poly, ps: list[Poly], mom: list[Fraction]) -> list[Poly]:
    """Fix the constant of each ``p_tau`` so that ``E[p_tau(Y)] = -E[g_tau]``."""
    out = []
    g = None
    prev = p0
    for p in ps:
        state = eng.lift(prev)
        if g is not None:
            state = eng.add(g, state)
        g = eng.gamma(state)
        target_mean = -eng.expect(g)
        mean = sum((c * mom[i] for (i,), c in p.items() if i), Fraction(0))
        fixed = p - p.constant_term() + (target_mean - mean)
        out.append(fixed)
        prev = fixed
    return out


def _moments(eng, k: int) -> list[Fraction]:
    return [eng.expect(eng.power(j)) for j in range(k + 1)]


def resolve_zero_order(target: TargetSpec, zero_order: ZeroOrder) -> tuple[Poly, str]:
    """The centered ``p_0`` for a zero-order mode, plus a label."""
    if isinstance(zero_order, str):
        if zero_order == CY:
            return Poly.var(1, 0), CY
        if zero_order.startswith("y^"):
            zero_order = int(zero_order[2:])
        elif zero_order == "y":
            zero_order = 1
        else:
            raise ValueError(f"unknown zero-order mode {zero_order!r}")
    if isinstance(zero_order, int):
        if zero_order < 1:
            raise ValueError("monomial zero order needs k >= 1")
        p = Poly.monomial((zero_order,))
        label = f"y^{zero_order}"
    elif isinstance(zero_order, Poly):
        if zero_order.nvars != 1:
            raise ValueError("zero-order polynomial must be univariate in y")
        p = zero_order
        label = "poly"
    else:
        raise TypeError(f"unsupported zero order {zero_order!r}")
    shift = expect(compose_target(p, target.h))
    p = p - shift
    if p.is_zero():
        raise ValueError("zero-order coefficient vanishes after centering")
    return p, label


def _assemble(eng, target, t, m, cols, rhs, p0, backend, mode, variant) -> ControlSolution:
    """Solve the stacked system at horizon ``t`` and moment-correct every member."""
    width = max([len(v) for v in eng.vectors(cols + [rhs])] or [0])
    vecs = [v + [0] * (width - len(v)) for v in eng.vectors(cols + [rhs])]
    col_vecs, b = vecs[:-1], [-x for x in vecs[-1]]
    scales = []
    scaled = []
    for c in col_vecs:
        ci = _primitive(_integer_row(c))
        nz = next(i for i, x in enumerate(c) if x)
        scales.append(Fraction(c[nz]) / ci[nz])
        scaled.append(ci)
    A = _transpose(scaled)
    sol = solve_exact(A, b, backend)
    u = [x / s for x, s in zip(sol.particular, scales)]
    null = []
    for v, f in zip(sol.nullspace, [j for j in range(len(cols)) if j not in set(sol.pivots)]):
        w = [x / s for x, s in zip(v, scales)]
        null.append([x / w[f] for x in w])
    mom = _moments(eng, m)
    def expand(vec, zero):
        blocks = [Poly.univariate([0] + list(vec[s * m:(s + 1) * m])) for s in range(t)]
        fixed = _moment_correct(eng, zero, blocks, mom)
        out = []
        for p in fixed:
            out.extend(p.coeffs(m + 1))
        return out
    particular = expand(u, p0)
    basis = [expand(v, Poly.zero(1)) for v in null]
    return ControlSolution(target, t, m, p0, particular, basis, mode, variant)


def _feasible_at(eng, t: int, m: int, rhs, backend: str) -> bool:
    cols = _primitive_columns(eng.vectors(_columns(eng, t, m)))
    if not rhs:
        return True
    rvec = _primitive(_integer_row(eng.vectors([rhs])[0]))
    r_a = _column_rank(cols, backend)
    return _column_rank(cols + [rvec], backend) == r_a


def find_null_control(
    target: TargetSpec,
    T_max: int,
    m: int,
    zero_order: ZeroOrder = CY,
    variant: str = STANDARD,
    backend: str | None = None,
    T_min: int = 1,
) -> ControlSolution:
    """Shortest algebraic Stein chain with coefficient degree ``<= m``.

    Raises :class:`NotReachable` when no horizon ``T_min <= t <= T_max`` works.
    """
    if m < 1:
        raise ValueError("degree cap m must be at least 1")
    if T_max < 1:
        raise ValueError("T_max must be at least 1")
    p0, label = resolve_zero_order(target, zero_order)
    for sol in _horizons(target, T_max, m, p0, label, variant, backend, T_min, first_only=True):
        return sol
    raise NotReachable(T_max, m, label)


def all_null_controls(
    target: TargetSpec,
    T_max: int,
    m: int,
    zero_order: ZeroOrder = CY,
    variant: str = STANDARD,
    backend: str | None = None,
) -> list[ControlSolution]:
    """The full affine solution set at every feasible horizon up to ``T_max``."""
    p0, label = resolve_zero_order(target, zero_order)
    return list(_horizons(target, T_max, m, p0, label, variant, backend, 1, first_only=False))


def _horizons(target, T_max, m, p0, label, variant, backend, T_min, first_only):
    backend = _backend(backend)
    eng = _engine(target, variant)
    cache: dict = {}
    incremental = EchelonBasis(0) if backend == "python" else None
    for t in range(1, T_max + 1):
        rhs = _lifted_iterate(eng, p0, t + 1, cache)
        if incremental is not None:
            new = _primitive_columns(eng.vectors([eng.iterate(j, t) for j in range(1, m + 1)]))
            for c in new:
                incremental.add(c)
            if t < T_min:
                continue
            ok = incremental.contains(_integer_row(eng.vectors([rhs])[0])) if rhs else True
        else:
            if t < T_min:
                continue
            ok = _feasible_at(eng, t, m, rhs, backend)
        if ok:
            cols = _columns(eng, t, m)
            yield _assemble(eng, target, t, m, cols, rhs, p0, backend, label, variant)
            if first_only:
                return


def feasible(target: TargetSpec, T: int, m: int, zero_order: ZeroOrder = CY, variant: str = STANDARD, backend: str | None = None) -> bool:
    """Is there an algebraic chain of length exactly ``T`` (equivalently ``<= T``) with degree ``<= m``?"""
    backend = _backend(backend)
    eng = _engine(target, variant)
    if zero_order == GENERIC:
        return _generic_feasible(eng, T, m, m, backend)
    p0, _ = resolve_zero_order(target, zero_order)
    rhs = _lifted_iterate(eng, p0, T + 1, {})
    return _feasible_at(eng, T, m, rhs, backend)


# -- generic zero order ----------------------------------------------------------


def _generic_columns(eng, t: int, m0: int) -> list:
    return [eng.iterate(k, t + 1) for k in range(1, m0 + 1)]


def _generic_feasible(eng, t: int, m: int, m0: int, backend: str) -> bool:
    pcols = _primitive_columns(eng.vectors(_columns(eng, t, m)))
    ccols = _primitive_columns(eng.vectors(_generic_columns(eng, t, m0)))
    width = max(len(c) for c in pcols + ccols)
    pcols, ccols = _padded(pcols, width), _padded(ccols, width)
    return _column_rank(pcols + ccols, backend) < _column_rank(pcols, backend) + m0


def combine_generic_zero_order(
    target: TargetSpec,
    m0: int,
    T_max: int,
    m: int,
    variant: str = STANDARD,
    backend: str | None = None,
) -> ControlSolution:
    """Best combination of the monomial zero-order runs ``p_0 = y^k - E[h^k]``.

    A combination ``sum_k c_k S^(k)`` is itself a chain once its surplus
    top blocks cancel, so the search over combinations is the kernel of the
    stacked matrix ``[P | C]``: ``P`` holds the ``p_1..p_t`` input columns and
    ``C`` the columns ``Gamma^{t+1}(h^k)``.  The first horizon whose kernel
    has a direction with ``c != 0`` is returned.  ``reduced`` records whether
    that horizon beats every single run.
    """
    if m0 < 1:
        raise ValueError("m0 must be at least 1")
    backend = _backend(backend)
    eng = _engine(target, variant)
    mom = _moments(eng, max(m, m0))
    for t in range(1, T_max + 1):
        if not _generic_feasible(eng, t, m, m0, backend):
            continue
        sol = _generic_solution(eng, target, t, m, m0, backend, variant, mom)
        single = any(_feasible_at(eng, t, m, eng.iterate(k, t + 1), backend) for k in range(1, m0 + 1))
        sol.reduced = not single
        return sol
    raise NotReachable(T_max, m, GENERIC)


def _generic_solution(eng, target, t, m, m0, backend, variant, mom) -> ControlSolution:
    pstates = _columns(eng, t, m)
    cstates = _generic_columns(eng, t, m0)
    vecs = eng.vectors(pstates + cstates)
    width = max(len(v) for v in vecs)
    raw = [list(v) + [0] * (width - len(v)) for v in vecs]
    scaled, scales = [], []
    for c in raw:
        ci = _primitive(_integer_row(c))
        nz = next(i for i, x in enumerate(c) if x)
        scales.append(Fraction(c[nz]) / ci[nz])
        scaled.append(ci)
    A = _transpose(scaled)
    null = solve_exact(A, [0] * width, backend).nullspace
    npc = len(pstates)
    kernel = []
    for v in null:
        w = [x / s for x, s in zip(v, scales)]
        kernel.append(w)
    # Directions with a nonzero zero-order part; the lowest free zero-order
    # column gives the canonical one.
    with_c = [w for w in kernel if any(w[npc:])]
    if not with_c:
        raise NotReachable(t, m, GENERIC)
    chosen = with_c[0]
    pivot = next(i for i in range(len(chosen) - 1, npc - 1, -1) if chosen[i])
    chosen = [x / chosen[pivot] for x in chosen]
    c = chosen[npc:]
    p0 = Poly.univariate([0] + c)
    p0 = p0 - sum((ck * mom[k + 1] for k, ck in enumerate(c)), Fraction(0))
    blocks = [Poly.univariate([0] + chosen[s * m:(s + 1) * m]) for s in range(t)]
    fixed = _moment_correct(eng, p0, blocks, mom)
    particular = []
    for p in fixed:
        particular.extend(p.coeffs(m + 1))
    basis = []
    for w in kernel:
        if w is with_c[0] or any(w[npc:]):
            continue
        bl = [Poly.univariate([0] + w[s * m:(s + 1) * m]) for s in range(t)]
        vec = []
        for p in _moment_correct(eng, Poly.zero(1), bl, mom):
            vec.extend(p.coeffs(m + 1))
        basis.append(vec)
    return ControlSolution(target, t, m, p0, particular, basis, GENERIC, STANDARD if target.d == 1 else variant)


# -- (T, m) searches ---------------------------------------------------------------


def _is_feasible(target, T, m, mode, variant, backend) -> bool:
    eng = _engine(target, variant)
    if mode == GENERIC:
        return _generic_feasible(eng, T, m, m, backend)
    p0, _ = resolve_zero_order(target, mode)
    return _feasible_at(eng, T, m, _lifted_iterate(eng, p0, T + 1, {}), backend)


def min_order_search(
    target: TargetSpec,
    mode: str = CY,
    m_cap: int | None = None,
    T_cap: int = 60,
    variant: str = STANDARD,
    backend: str | None = None,
) -> tuple[int, int]:
    """Smallest order ``T`` over all ``m <= m_cap``, then the smallest ``m`` at that order.

    Feasibility at a fixed order is monotone in ``m``, so the degree is found
    by bisection once the order is known.
    """
    backend = _backend(backend)
    if m_cap is None:
        m_cap = 5 * target.degree
    for T in range(1, T_cap + 1):
        if not _is_feasible(target, T, m_cap, mode, variant, backend):
            continue
        lo, hi = 1, m_cap
        while lo < hi:
            mid = (lo + hi) // 2
            if _is_feasible(target, T, mid, mode, variant, backend):
                hi = mid
            else:
                lo = mid + 1
        return T, lo
    raise NotReachable(T_cap, m_cap, mode)


def min_degree_search(
    target: TargetSpec,
    mode: str = CY,
    m_start: int = 1,
    m_cap: int | None = None,
    T_cap: int = 60,
    variant: str = STANDARD,
    backend: str | None = None,
) -> tuple[int, int]:
    """Smallest degree ``m`` reachable within ``T_cap``, then the shortest order for it."""
    backend = _backend(backend)
    if m_cap is None:
        m_cap = 5 * target.degree
    for m in range(m_start, m_cap + 1):
        if not _is_feasible(target, T_cap, m, mode, variant, backend):
            continue
        lo, hi = 1, T_cap
        while lo < hi:
            mid = (lo + hi) // 2
            if _is_feasible(target, mid, m, mode, variant, backend):
                hi = mid
            else:
                lo = mid + 1
        return lo, m
    raise NotReachable(T_cap, m_cap, mode)
