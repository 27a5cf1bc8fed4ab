"""Moment matrices, column relations, point vectors and variety membership."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .core import (
    KernelPolynomial,
    MomentSequence,
    MultiIndex,
    Point,
    RationalLike,
    add_indices,
    as_point,
    eval_poly,
    monomial_basis,
    monomial_name,
    monomial_value,
)
from .errors import DimensionMismatchError, DuplicatePointsError, OddDegreeError
from .linalg import RationalMatrix


@dataclass(frozen=True)
class VarietyReport:
    polynomials: tuple[KernelPolynomial, ...]
    rank: int
    corank: int


@dataclass(frozen=True)
class MomentMatrix:
    """M_d(n) with rows and columns labelled by monomials of degree <= n."""

    dimension: int
    order: int
    matrix: RationalMatrix

    def __post_init__(self) -> None:
        size = len(monomial_basis(self.dimension, self.order))
        if self.matrix.shape != (size, size):
            raise DimensionMismatchError(f"M_{self.dimension}({self.order}) must be {size}x{size}, got {self.matrix.shape}")

    @property
    def labels(self) -> list[MultiIndex]:
        return monomial_basis(self.dimension, self.order)

    @property
    def size(self) -> int:
        return self.matrix.rows

    @cached_property
    def rank(self) -> int:
        return linalg.rank(self.matrix)

    @cached_property
    def relations(self) -> VarietyReport:
        return column_relations(self)

    def is_invertible(self) -> bool:
        return self.rank == self.size

    def __add__(self, other: "MomentMatrix") -> "MomentMatrix":
        return MomentMatrix(self.dimension, self.order, self.matrix + other.matrix)

    def __sub__(self, other: "MomentMatrix") -> "MomentMatrix":
        return MomentMatrix(self.dimension, self.order, self.matrix - other.matrix)

    def scaled(self, c: RationalLike) -> "MomentMatrix":
        return MomentMatrix(self.dimension, self.order, self.matrix.scaled(c))

    def sequence(self) -> MomentSequence:
        """Recover beta^(2n) from the matrix (first row/column plus the bottom-right block)."""
        labels = self.labels
        entries: dict[MultiIndex, Fraction] = {}
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                entries.setdefault(add_indices(la, lb), self.matrix[a, b])
        return MomentSequence(self.dimension, 2 * self.order, entries)

    def table(self) -> str:
        names = [monomial_name(label, "X") for label in self.labels]
        cells = [[str(x) for x in row] for row in self.matrix.entries]
        width = max([len(n) for n in names] + [len(c) for row in cells for c in row])
        head = " " * (width + 1) + " ".join(n.rjust(width) for n in names)
        body = [n.rjust(width) + " " + " ".join(c.rjust(width) for c in row) for n, row in zip(names, cells)]
        return "\n".join([head] + body)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "order": self.order,
            "labels": [list(lab) for lab in self.labels],
            "matrix": self.matrix.to_json(),
        }


def build_moment_matrix(beta: MomentSequence) -> MomentMatrix:
    if beta.degree % 2:
        raise OddDegreeError(f"moment matrix needs even degree, got {beta.degree}; complete the sequence first")
    n = beta.degree // 2
    labels = monomial_basis(beta.dimension, n)
    rows = tuple(tuple(beta.entries[add_indices(a, b)] for b in labels) for a in labels)
    return MomentMatrix(beta.dimension, n, RationalMatrix(rows))


def point_vector(w: Sequence[RationalLike], n: int) -> tuple[Fraction, ...]:
    """v(w): the monomials of w of degree <= n in degree-lex order."""
    w = as_point(w)
    return tuple(monomial_value(w, i) for i in monomial_basis(len(w), n))


def rank_one(w: Sequence[RationalLike], n: int) -> MomentMatrix:
    """P(w) = v(w) v(w)^T, the moment matrix of the unit mass at w."""
    w = as_point(w)
    v = point_vector(w, n)
    return MomentMatrix(len(w), n, RationalMatrix.outer(v, v))


def column_relations(M: MomentMatrix) -> VarietyReport:
    """Kernel vectors of M read as polynomials, normalised so the highest label has coefficient 1."""
    labels = M.labels
    polys = []
    for vec in linalg.kernel_basis(M.matrix):
        last = max(k for k, c in enumerate(vec) if c)
        lead = vec[last]
        polys.append(KernelPolynomial.from_vector(M.dimension, labels, [c / lead for c in vec]))
    return VarietyReport(tuple(polys), M.rank, M.size - M.rank)


def linear_relations(M: MomentMatrix) -> list[KernelPolynomial]:
    """Basis of the degree <= 1 polynomials in the kernel of M.

    These are exactly the kernel vectors supported on the labels 1, X1..Xd, so
    they come from the kernel of that column block.
    """
    if M.order < 1:
        return []
    d = M.dimension
    block = M.matrix.columns(range(d + 1))
    labels = M.labels[: d + 1]
    polys = []
    for vec in linalg.kernel_basis(block):
        last = max(k for k, c in enumerate(vec) if c)
        lead = vec[last]
        polys.append(KernelPolynomial.from_vector(d, labels, [c / lead for c in vec]))
    return polys


def variety_contains_by_relations(M: MomentMatrix, w: Sequence[RationalLike]) -> bool:
    _check_point(M, w)
    return all(eval_poly(p, w) == 0 for p in M.relations.polynomials)


def range_contains_point(M: MomentMatrix, w: Sequence[RationalLike]) -> bool:
    _check_point(M, w)
    return linalg.in_range(M.matrix, point_vector(w, M.order))


def variety_contains(M: MomentMatrix, w: Sequence[RationalLike]) -> bool:
    """Whether w lies on every column-relation polynomial of M.

    Computed both by polynomial evaluation and as range membership of v(w);
    the two must agree (checked by assert).
    """
    on_variety = variety_contains_by_relations(M, w)
    assert on_variety == range_contains_point(M, w), f"variety/range disagreement at {tuple(w)}"
    return on_variety


def _check_point(M: MomentMatrix, w: Sequence[RationalLike]) -> None:
    if len(w) != M.dimension:
        raise DimensionMismatchError(f"point of length {len(w)} for a {M.dimension}-dimensional moment matrix")


def vandermonde(points: Sequence[Point], d: int, m: int) -> RationalMatrix:
    """Rows are monomials of degree <= m, columns are points (entry w_k^i)."""
    labels = monomial_basis(d, m)
    return RationalMatrix(tuple(tuple(monomial_value(p, i) for p in points) for i in labels))


def _distinct_points(points: Sequence[Sequence[RationalLike]], d: int) -> list[Point]:
    pts = [as_point(p) for p in points]
    for p in pts:
        if len(p) != d:
            raise DimensionMismatchError(f"point {p} does not have dimension {d}")
    if len(set(pts)) != len(pts):
        raise DuplicatePointsError("support points must be pairwise distinct")
    return pts


def finite_consistency(beta: MomentSequence, points: Sequence[Sequence[RationalLike]]) -> Optional[tuple[Fraction, ...]]:
    """Densities alpha with sum(alpha_k w_k^i) = beta_i for all |i| <= m, if any exist."""
    pts = _distinct_points(points, beta.dimension)
    if not pts:
        return () if not any(beta.values()) else None
    V = vandermonde(pts, beta.dimension, beta.degree)
    return linalg.solve_consistent(V, beta.values())


def finite_consistency_float(beta: MomentSequence, points: Sequence[Sequence[RationalLike]]) -> tuple[np.ndarray, float]:
    """Least-squares densities and the residual norm, in binary floating point."""
    pts = _distinct_points(points, beta.dimension)
    V = vandermonde(pts, beta.dimension, beta.degree).to_float()
    b = np.array([float(x) for x in beta.values()])
    alpha, *_ = np.linalg.lstsq(V, b, rcond=None)
    return alpha, float(np.linalg.norm(V @ alpha - b))
