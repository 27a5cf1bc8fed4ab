"""Exact rational dense linear algebra.

Elimination is fraction-free (Bareiss): each row is first scaled to integers
by the lcm of its denominators, then eliminated using exact integer division
by the previous pivot, so intermediate values stay polynomial in size.  Only
back substitution touches :class:`~fractions.Fraction`.

A floating mode (:func:`rank_float`) exists for speed comparisons.  It is
never used to make a rank or positivity decision elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import RationalLike, format_rational, parse_rational
from .errors import DimensionMismatchError, NotSymmetricError, SingularMatrixError

Vector = tuple[Fraction, ...]

FLOAT_RANK_RTOL = 1e-9


@dataclass(frozen=True)
class RationalMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(parse_rational(x) for x in row) for row in self.entries)
        if not rows or not rows[0]:
            raise DimensionMismatchError("matrices must have at least one row and one column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionMismatchError("ragged rows")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[RationalLike]]) -> "RationalMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(tuple((Fraction(0),) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @classmethod
    def outer(cls, u: Sequence[Fraction], v: Sequence[Fraction]) -> "RationalMatrix":
        return cls(tuple(tuple(a * b for b in v) for a in u))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.entries)

    def columns(self, idx: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(row[j] for j in idx) for row in self.entries))

    def submatrix(self, idx: Sequence[int]) -> "RationalMatrix":
        """Principal submatrix on the given index set."""
        return RationalMatrix(tuple(tuple(self.entries[i][j] for j in idx) for i in idx))

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.entries)))

    def is_symmetric(self) -> bool:
        n = self.rows
        return n == self.cols and all(self.entries[i][j] == self.entries[j][i] for i in range(n) for j in range(i))

    def is_zero(self) -> bool:
        return not any(x for row in self.entries for x in row)

    def _check_same(self, other: "RationalMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionMismatchError(f"shapes differ: {self.shape} vs {other.shape}")

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_same(other)
        return RationalMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_same(other)
        return RationalMatrix(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def scaled(self, c: RationalLike) -> "RationalMatrix":
        c = parse_rational(c)
        return RationalMatrix(tuple(tuple(c * a for a in r) for r in self.entries))

    def matvec(self, x: Sequence[Fraction]) -> Vector:
        if len(x) != self.cols:
            raise DimensionMismatchError(f"vector of length {len(x)} vs {self.cols} columns")
        return tuple(sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in self.entries)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.T.entries
        return RationalMatrix(
            tuple(tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols) for row in self.entries)
        )

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self.entries]


def _as_matrix(A) -> RationalMatrix:
    return A if isinstance(A, RationalMatrix) else RationalMatrix.from_rows(A)


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        scale = lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * scale) for x in row])
    return out


def _bareiss_echelon(rows: list[list[int]], ncols: int) -> list[int]:
    """In-place fraction-free row echelon form on integer rows; returns pivot columns.

    Only the first ``ncols`` columns are pivoted on (extra columns ride along,
    e.g. an augmented right-hand side).  Pivot choice is the nonzero entry of
    smallest magnitude in the column, which keeps Bareiss quotients small.
    """
    m = len(rows)
    width = len(rows[0]) if rows else 0
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == m:
            break
        best = None
        for i in range(r, m):
            v = rows[i][c]
            if v and (best is None or abs(v) < abs(rows[best][c])):
                best = i
        if best is None:
            continue
        if best != r:
            rows[r], rows[best] = rows[best], rows[r]
        piv = rows[r][c]
        prow = rows[r]
        for i in range(r + 1, m):
            row = rows[i]
            f = row[c]
            if f:
                for j in range(c + 1, width):
                    row[j] = (piv * row[j] - f * prow[j]) // prev
            else:
                for j in range(c + 1, width):
                    row[j] = (piv * row[j]) // prev
            row[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def _echelon(A: RationalMatrix, rhs: Optional[Sequence[Fraction]] = None) -> tuple[list[list[int]], list[int]]:
    rows = [list(row) + ([rhs[i]] if rhs is not None else []) for i, row in enumerate(A.entries)]
    irows = _integer_rows(rows)
    pivots = _bareiss_echelon(irows, A.cols)
    return irows, pivots


def rank(A) -> int:
    """Exact rank."""
    A = _as_matrix(A)
    _, pivots = _echelon(A)
    return len(pivots)


def _back_substitute(ech: list[list[int]], pivots: list[int], ncols: int, free_values: dict[int, Fraction], rhs: bool) -> list[Fraction]:
    x = [Fraction(0)] * ncols
    for j, v in free_values.items():
        x[j] = v
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        row = ech[r]
        s = Fraction(row[ncols]) if rhs else Fraction(0)
        for j in range(c + 1, ncols):
            if row[j] and x[j]:
                s -= row[j] * x[j]
        x[c] = s / row[c]
    return x


def kernel_basis(A) -> list[Vector]:
    """Basis of the null space; one vector per free column, with that column set to 1."""
    A = _as_matrix(A)
    ech, pivots = _echelon(A)
    free = [j for j in range(A.cols) if j not in set(pivots)]
    basis = []
    for j in free:
        vec = _back_substitute(ech, pivots, A.cols, {j: Fraction(1)}, rhs=False)
        basis.append(tuple(vec))
    return basis


def solve_consistent(A, b: Sequence[RationalLike]) -> Optional[Vector]:
    """Some x with A x = b, or None when b is not in the range of A."""
    A = _as_matrix(A)
    b = [parse_rational(v) for v in b]
    if len(b) != A.rows:
        raise DimensionMismatchError(f"right-hand side of length {len(b)} vs {A.rows} rows")
    ech, pivots = _echelon(A, b)
    for r in range(len(pivots), A.rows):
        if ech[r][A.cols]:
            return None
    return tuple(_back_substitute(ech, pivots, A.cols, {}, rhs=True))


def in_range(A, b: Sequence[RationalLike]) -> bool:
    return solve_consistent(A, b) is not None


def deflation_gauge(A, b: Sequence[RationalLike]) -> Optional[Fraction]:
    """b^T x for any solution of A x = b (None if b is not in the range).

    For symmetric A the value equals b^T A^+ b and does not depend on the
    witness, because b lies in ran A = (ker A)^perp.
    """
    x = solve_consistent(A, b)
    if x is None:
        return None
    return sum((parse_rational(u) * v for u, v in zip(b, x)), Fraction(0))


def solve_square(A, b: Sequence[RationalLike]) -> Vector:
    """Unique solution of a square invertible system."""
    A = _as_matrix(A)
    if A.rows != A.cols:
        raise DimensionMismatchError(f"square system expected, got {A.shape}")
    b = [parse_rational(v) for v in b]
    if len(b) != A.rows:
        raise DimensionMismatchError(f"right-hand side of length {len(b)} vs {A.rows} rows")
    ech, pivots = _echelon(A, b)
    if len(pivots) < A.cols:
        raise SingularMatrixError(f"matrix of size {A.rows} has rank {len(pivots)}")
    return tuple(_back_substitute(ech, pivots, A.cols, {}, rhs=True))


def determinant(A) -> Fraction:
    A = _as_matrix(A)
    if A.rows != A.cols:
        raise DimensionMismatchError(f"square matrix expected, got {A.shape}")
    rows = [list(r) for r in A.entries]
    scales = [lcm(*(x.denominator for x in row)) for row in rows]
    irows = [[int(x * s) for x in row] for row, s in zip(rows, scales)]
    # track row swaps for the sign; rerun the pivot search here to count them
    n = A.rows
    sign = 1
    prev = 1
    for c in range(n):
        best = None
        for i in range(c, n):
            v = irows[i][c]
            if v and (best is None or abs(v) < abs(irows[best][c])):
                best = i
        if best is None:
            return Fraction(0)
        if best != c:
            irows[c], irows[best] = irows[best], irows[c]
            sign = -sign
        piv = irows[c][c]
        for i in range(c + 1, n):
            f = irows[i][c]
            for j in range(c + 1, n):
                irows[i][j] = (piv * irows[i][j] - f * irows[c][j]) // prev
            irows[i][c] = 0
        prev = piv
    denom = 1
    for s in scales:
        denom *= s
    return Fraction(sign * irows[n - 1][n - 1], denom)


@dataclass(frozen=True)
class PsdResult:
    psd: bool
    pivots: tuple[Fraction, ...]
    # principal index set (original labels) exhibiting the failure, if any
    witness: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.psd


def psd_decompose(A) -> PsdResult:
    """Symmetrically pivoted LDL^T positivity test with a failure witness.

    At each step the largest remaining diagonal is the pivot.  A negative
    pivot means not PSD.  A zero largest pivot means the rest must vanish
    identically.
    """
    A = _as_matrix(A)
    if not A.is_symmetric():
        raise NotSymmetricError("positivity test needs a symmetric matrix")
    n = A.rows
    S = [list(r) for r in A.entries]
    order = list(range(n))
    pivots: list[Fraction] = []
    for k in range(n):
        j = max(range(k, n), key=lambda t: S[t][t])
        if j != k:
            S[k], S[j] = S[j], S[k]
            for row in S:
                row[k], row[j] = row[j], row[k]
            order[k], order[j] = order[j], order[k]
        p = S[k][k]
        if p < 0:
            return PsdResult(False, tuple(pivots), (order[k],), "negative diagonal pivot")
        if p == 0:
            for a in range(k, n):
                for b in range(k, n):
                    if S[a][b]:
                        return PsdResult(False, tuple(pivots), tuple(sorted(set(order[:k] + [order[a], order[b]]))),
                                         "zero pivot with nonzero remaining row")
            return PsdResult(True, tuple(pivots) + (Fraction(0),) * (n - k))
        pivots.append(p)
        for a in range(k + 1, n):
            f = S[a][k] / p
            if f:
                for b in range(k + 1, n):
                    S[a][b] -= f * S[k][b]
            S[a][k] = Fraction(0)
        for b in range(k + 1, n):
            S[k][b] = Fraction(0)
    return PsdResult(True, tuple(pivots))


def psd_check(A) -> bool:
    return psd_decompose(A).psd


def rank_float(A, rtol: float = FLOAT_RANK_RTOL) -> int:
    """Numerical rank: singular values below rtol * max(sigma_max, 1 if zero) count as zero."""
    M = A.to_float() if isinstance(A, RationalMatrix) else np.asarray(A, dtype=float)
    s = np.linalg.svd(M, compute_uv=False)
    top = s[0] if s.size and s[0] > 0 else 1.0
    return int(np.sum(s > rtol * top))
