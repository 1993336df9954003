"""Exact linear algebra over the rationals.

Systems are cleared of denominators row by row and eliminated fraction-free
(Bareiss).  Pivots are chosen leftmost-column first, then smallest row index,
so the reduced echelon form and the "free variables zero" particular solution
are deterministic.  The reduced row echelon form of a matrix is unique, so the
optional FLINT backend returns bit-identical answers; it is only faster.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

try:  # pragma: no cover - exercised when the wheel is present
    import flint
except ImportError:  # pragma: no cover
    flint = None


class Unsolvable(ArithmeticError):
    """``A u = b`` has no solution: ``rank(A) < rank([A | b])``."""


@dataclass(frozen=True)
class RationalMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        ent = tuple(tuple(Fraction(x) for x in r) for r in rows)
        ncols = len(ent[0]) if ent else 0
        if any(len(r) != ncols for r in ent):
            raise ValueError("ragged matrix")
        return cls(len(ent), ncols, ent)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int | None = None) -> "RationalMatrix":
        if nrows is None:
            nrows = len(cols[0]) if cols else 0
        for c in cols:
            if len(c) != nrows:
                raise ValueError("column length mismatch")
        ent = tuple(tuple(Fraction(cols[j][i]) for j in range(len(cols))) for i in range(nrows))
        return cls(nrows, len(cols), ent)

    def column(self, j: int) -> list[Fraction]:
        return [r[j] for r in self.entries]

    def matvec(self, u: Sequence) -> list[Fraction]:
        if len(u) != self.cols:
            raise ValueError("dimension mismatch")
        return [sum((a * x for a, x in zip(r, u) if a and x), Fraction(0)) for r in self.entries]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


@dataclass(frozen=True)
class SolveResult:
    """Affine solution set ``particular + span(nullspace)``."""

    particular: list[Fraction]
    nullspace: list[list[Fraction]]
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _backend(name: str | None) -> str:
    name = name or os.environ.get("STEINALG_LINALG", "auto")
    if name == "auto":
        return "flint" if flint is not None else "python"
    if name == "flint" and flint is None:
        raise RuntimeError("python-flint is not installed")
    if name not in ("python", "flint"):
        raise ValueError(f"unknown backend {name!r}")
    return name


def _integer_row(row: Sequence) -> list[int]:
    den = 1
    for x in row:
        if isinstance(x, Fraction) and x.denominator != 1:
            den = den * x.denominator // math.gcd(den, x.denominator)
    if den == 1:
        return [int(x) for x in row]
    return [int(x * den) for x in row]


def _augmented(A: RationalMatrix | Sequence[Sequence], b: Sequence | None) -> tuple[list[list[int]], int]:
    rows = A.entries if isinstance(A, RationalMatrix) else A
    ncols = len(rows[0]) if rows else 0
    out = []
    for i, r in enumerate(rows):
        full = list(r) + ([b[i]] if b is not None else [])
        out.append(_integer_row(full))
    return out, ncols


def bareiss_echelon(M: list[list[int]], ncols: int) -> list[tuple[int, int]]:
    """In-place fraction-free forward elimination.

    Only the first ``ncols`` columns are eligible as pivots (trailing columns
    ride along, e.g. a right-hand side).  Returns the ``(row, col)`` pivots.
    """
    nrows = len(M)
    width = len(M[0]) if M else 0
    pivots = []
    r = 0
    prev = 1
    for c in range(ncols):
        if r == nrows:
            break
        sel = next((i for i in range(r, nrows) if M[i][c]), None)
        if sel is None:
            continue
        if sel != r:
            M[r], M[sel] = M[sel], M[r]
        piv = M[r][c]
        prow = M[r]
        for i in range(r + 1, nrows):
            row = M[i]
            f = row[c]
            if f:
                for j in range(c + 1, width):
                    row[j] = (piv * row[j] - f * prow[j]) // prev
            else:
                for j in range(c + 1, width):
                    if row[j]:
                        row[j] = (piv * row[j]) // prev
            row[c] = 0
        pivots.append((r, c))
        prev = piv
        r += 1
    return pivots


def _back_substitute(M, pivots, ncols, rhs_col, free_values) -> list[Fraction]:
    x = [Fraction(0)] * ncols
    for j, v in free_values.items():
        x[j] = Fraction(v)
    for r, c in reversed(pivots):
        row = M[r]
        s = Fraction(row[rhs_col]) if rhs_col is not None else Fraction(0)
        for j in range(c + 1, ncols):
            if row[j] and x[j]:
                s -= row[j] * x[j]
        x[c] = s / row[c]
    return x


def _solve_python(A, b) -> SolveResult:
    M, ncols = _augmented(A, b)
    pivots = bareiss_echelon(M, ncols)
    rank = len(pivots)
    for i in range(rank, len(M)):
        if M[i][ncols]:
            raise Unsolvable(f"inconsistent system (rank {rank})")
    pivot_cols = {c for _, c in pivots}
    free = [j for j in range(ncols) if j not in pivot_cols]
    particular = _back_substitute(M, pivots, ncols, ncols, {})
    null = []
    for f in free:
        # Homogeneous system: the rhs column is ignored.
        null.append(_back_substitute(M, pivots, ncols, None, {f: 1}))
    return SolveResult(particular, null, tuple(c for _, c in pivots))


def _solve_flint(A, b) -> SolveResult:
    M, ncols = _augmented(A, b)
    if not M:
        return SolveResult([Fraction(0)] * ncols, [], ())
    R, den, rank = flint.fmpz_mat(M).rref()
    den = int(den)
    rows = R.tolist()
    pivots = []
    for i in range(rank):
        row = rows[i]
        c = next(j for j, v in enumerate(row) if v)
        if c == ncols:
            raise Unsolvable(f"inconsistent system (rank {i})")
        pivots.append(c)
    pivot_set = set(pivots)
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = Fraction(int(rows[i][ncols]), int(rows[i][c]))
    null = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            if rows[i][f]:
                v[c] = -Fraction(int(rows[i][f]), int(rows[i][c]))
        null.append(v)
    del den
    return SolveResult(x, null, tuple(pivots))


def solve_exact(A: RationalMatrix | Sequence[Sequence], b: Sequence, backend: str | None = None) -> SolveResult:
    """Solve ``A u = b`` exactly.

    Returns the particular solution with every free variable set to zero and
    a nullspace basis with one vector per free column (that column set to 1).
    Raises :class:`Unsolvable` when the system is inconsistent.
    """
    nrows = A.rows if isinstance(A, RationalMatrix) else len(A)
    if len(b) != nrows:
        raise ValueError(f"rhs has length {len(b)}, matrix has {nrows} rows")
    if _backend(backend) == "flint":
        return _solve_flint(A, b)
    return _solve_python(A, b)


def nullspace(A: RationalMatrix | Sequence[Sequence], backend: str | None = None) -> list[list[Fraction]]:
    nrows = A.rows if isinstance(A, RationalMatrix) else len(A)
    return solve_exact(A, [0] * nrows, backend).nullspace


def rank(A: RationalMatrix | Sequence[Sequence], backend: str | None = None) -> int:
    M, ncols = _augmented(A, None)
    if not M or not ncols:
        return 0
    if _backend(backend) == "flint":
        return flint.fmpz_mat(M).rank()
    return len(bareiss_echelon(M, ncols))


def is_consistent(A, b, backend: str | None = None) -> bool:
    """Exact test of ``rank(A) == rank([A | b])``."""
    if _backend(backend) == "flint":
        M, ncols = _augmented(A, b)
        Mf = flint.fmpz_mat(M)
        full = Mf.rank()
        cols_only = flint.fmpz_mat([r[:ncols] for r in M]).rank() if ncols else 0
        return full == cols_only
    try:
        _solve_python(A, b)
    except Unsolvable:
        return False
    return True


class EchelonBasis:
    """Incrementally grown basis of a column space, kept in echelon form.

    Vectors are integer lists; each stored vector has a distinct leading
    position.  Reduction is fraction-free with content removal, so adding a
    column costs one pass over the current basis instead of a fresh
    elimination.
    """

    def __init__(self, length: int = 0):
        self.length = length
        self._rows: dict[int, list[int]] = {}

    def __len__(self) -> int:
        return len(self._rows)

    def _grow(self, length: int) -> None:
        # Vectors may lengthen as states grow in degree; pad with zeros.
        if length > self.length:
            for lead, row in self._rows.items():
                row.extend([0] * (length - len(row)))
            self.length = length

    def _reduce(self, v: list[int]) -> list[int]:
        self._grow(len(v))
        v = list(v) + [0] * (self.length - len(v))
        for lead in sorted(self._rows):
            x = v[lead]
            if not x:
                continue
            b = self._rows[lead]
            bl = b[lead]
            g = math.gcd(x, bl)
            fa, fb = bl // g, x // g
            v = [fa * vi - fb * bi for vi, bi in zip(v, b)]
            v = _primitive(v)
        return v

    def add(self, v: Sequence) -> bool:
        """Insert ``v``; returns ``False`` when it was already in the span."""
        w = self._reduce(_integer_row(v))
        lead = next((i for i, x in enumerate(w) if x), None)
        if lead is None:
            return False
        self._rows[lead] = w
        return True

    def contains(self, v: Sequence) -> bool:
        return not any(self._reduce(_integer_row(v)))


def _primitive(v: list[int]) -> list[int]:
    g = 0
    for x in v:
        if x:
            g = math.gcd(g, x)
            if g == 1:
                return v
    if g > 1:
        return [x // g for x in v]
    return v
