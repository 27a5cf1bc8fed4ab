"""One-dimensional layer: Hankel positivity, quadrature from moments, separable products.

Quadrature rules are built by flat extension: the trailing moment beta_2n is
chosen so that the (n+1)x(n+1) Hankel matrix keeps rank n, which is a single
linear solve ``H_n c = (beta_n, ..., beta_{2n-1})``.  The resulting column
relation ``T^n = c_0 + c_1 T + ... + c_{n-1} T^{n-1}`` has the nodes as roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import linalg
from .core import (
    MomentSequence,
    RationalLike,
    SignedMeasure,
    format_rational,
    parse_rational,
)
from .errors import (
    ComplexRootsError,
    DimensionMismatchError,
    InsufficientDegreeError,
    MomentError,
    SingularLeadingHankelError,
    SingularMatrixError,
)
from .linalg import RationalMatrix
from .solver import SolveConfig, complete_sequence, solve_direct

Moments1D = Union[MomentSequence, Sequence[RationalLike]]


def _values(beta: Moments1D) -> list[Fraction]:
    if isinstance(beta, MomentSequence):
        if beta.dimension != 1:
            raise DimensionMismatchError(f"one-dimensional sequence expected, got d={beta.dimension}")
        return beta.values()
    return [parse_rational(v) for v in beta]


def hankel(beta: Moments1D, shift: int, size: int) -> RationalMatrix:
    """The size x size matrix [beta_{i+j+shift}]."""
    vals = _values(beta)
    if shift not in (0, 1):
        raise MomentError("shift must be 0 or 1")
    if size < 1 or len(vals) - 1 < 2 * (size - 1) + shift:
        raise InsufficientDegreeError(f"{len(vals)} moments are too few for a shift-{shift} Hankel of size {size}")
    return RationalMatrix(tuple(tuple(vals[i + j + shift] for j in range(size)) for i in range(size)))


def hamburger_check(beta: Moments1D, level: Optional[int] = None) -> bool:
    """PSD test of [beta_{i+j}]_{i,j<=k}; k defaults to the largest feasible level."""
    m = len(_values(beta)) - 1
    k = m // 2 if level is None else level
    return linalg.psd_check(hankel(beta, 0, k + 1))


def stieltjes_check(beta: Moments1D, level: Optional[int] = None) -> bool:
    """PSD test of both [beta_{i+j}] and [beta_{i+j+1}] at level k."""
    m = len(_values(beta)) - 1
    if level is None:
        if m < 1:
            raise InsufficientDegreeError("the half-line test needs at least beta_0 and beta_1")
        level = (m - 1) // 2
    return linalg.psd_check(hankel(beta, 0, level + 1)) and linalg.psd_check(hankel(beta, 1, level + 1))


def legendre_moments(k: int) -> MomentSequence:
    """Moments of Lebesgue measure on [-1, 1] up to degree k."""
    if k < 0:
        raise MomentError("degree must be nonnegative")
    return MomentSequence.from_values(1, k, [Fraction(2, j + 1) if j % 2 == 0 else Fraction(0) for j in range(k + 1)])


@dataclass(frozen=True, eq=False)
class QuadraticSurd:
    """a + b*sqrt(r) with rational a, b and a fixed positive non-square rational r."""

    a: Fraction
    b: Fraction
    r: Fraction

    def _lift(self, other) -> "QuadraticSurd":
        if isinstance(other, QuadraticSurd):
            return other
        return QuadraticSurd(Fraction(other), Fraction(0), self.r)

    def __add__(self, other):
        o = self._lift(other)
        return QuadraticSurd(self.a + o.a, self.b + o.b, self.r)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.r)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return QuadraticSurd(self.a * o.a + self.b * o.b * self.r, self.a * o.b + self.b * o.a, self.r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        norm = o.a * o.a - o.b * o.b * self.r
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        conj = QuadraticSurd(o.a / norm, -o.b / norm, self.r)
        return self * conj

    def __pow__(self, k: int):
        out = QuadraticSurd(Fraction(1), Fraction(0), self.r)
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadraticSurd):
            return self.a == other.a and self.b == other.b and (self.b == 0 or self.r == other.r)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.a) if self.b == 0 else hash((self.a, self.b, self.r))

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.r)

    def is_rational(self) -> bool:
        return self.b == 0


def _solve_field(A: list[list], b: list) -> list:
    """Gaussian elimination over any exact field (Fractions or surds)."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            raise SingularMatrixError("Vandermonde system is singular")
        M[c], M[piv] = M[piv], M[c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            if f:
                for j in range(c, n + 1):
                    M[i][j] = M[i][j] - f * M[c][j]
    x = [None] * n
    for i in range(n - 1, -1, -1):
        s = M[i][n]
        for j in range(i + 1, n):
            s = s - M[i][j] * x[j]
        x[i] = s / M[i][i]
    return x


def _eval(coeffs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _deflate_root(coeffs: list[Fraction], t: Fraction) -> list[Fraction]:
    """Divide by (x - t); coefficients are low-to-high."""
    n = len(coeffs) - 1
    out = [Fraction(0)] * n
    carry = Fraction(0)
    for k in range(n, 0, -1):
        carry = coeffs[k] + carry * t
        out[k - 1] = carry
    return out


def _float_roots(coeffs: Sequence[Fraction]) -> np.ndarray:
    # np.roots wants high-to-low and builds the companion matrix
    return np.roots([float(c) for c in reversed(coeffs)])


def _polish(coeffs: Sequence[Fraction], x: float, steps: int = 3) -> float:
    fc = [float(c) for c in coeffs]
    dc = [k * fc[k] for k in range(1, len(fc))]
    for _ in range(steps):
        p = np.polyval(fc[::-1], x)
        dp = np.polyval(dc[::-1], x)
        if dp == 0:
            break
        x = x - p / dp
    return float(x)


def _real_or_raise(z: complex) -> float:
    if abs(z.imag) > 1e-8 * max(1.0, abs(z)):
        raise ComplexRootsError(f"node polynomial has a non-real root {z}")
    return float(z.real)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    precision: int
    size: int
    node_polynomial: tuple[Fraction, ...]  # monic, low-to-high
    flat_extension_value: Fraction
    rational_nodes: tuple[Fraction, ...] = ()
    quadratic_factor: Optional[tuple[Fraction, Fraction, Fraction]] = None  # (c0, c1, c2) low-to-high
    exact_nodes: tuple = ()  # Fraction, QuadraticSurd or None per node
    exact_weights: Optional[tuple] = None  # Fractions or QuadraticSurd, aligned with nodes

    @property
    def discriminant(self) -> Optional[Fraction]:
        if self.quadratic_factor is None:
            return None
        c0, c1, c2 = self.quadratic_factor
        return c1 * c1 - 4 * c0 * c2

    def integrate_monomial(self, k: int) -> float:
        return float(sum(w * t**k for t, w in zip(self.nodes, self.weights)))

    def to_json(self) -> dict:
        exact = {
            "node_polynomial": [format_rational(c) for c in self.node_polynomial],
            "flat_extension_value": format_rational(self.flat_extension_value),
            "rational_nodes": [format_rational(t) for t in self.rational_nodes],
        }
        if self.quadratic_factor is not None:
            exact["quadratic_factor"] = [format_rational(c) for c in self.quadratic_factor]
            exact["discriminant"] = format_rational(self.discriminant)
        if self.exact_weights is not None:
            exact["weights"] = [_surd_json(w) for w in self.exact_weights]
        return {
            "nodes": list(self.nodes),
            "weights": list(self.weights),
            "precision": self.precision,
            "size": self.size,
            "exact": exact,
        }


def _surd_json(w) -> Union[str, dict]:
    if isinstance(w, QuadraticSurd):
        if w.is_rational():
            return format_rational(w.a)
        return {"rational": format_rational(w.a), "sqrt_coefficient": format_rational(w.b), "radicand": format_rational(w.r)}
    return format_rational(w)


def quadrature_from_moments(moments: Moments1D, n: int) -> QuadratureRule:
    """Size-n rule from beta_0..beta_{2n-1} via the flat extension of the Hankel matrix."""
    vals = _values(moments)
    if n < 1:
        raise MomentError("rule size must be >= 1")
    if len(vals) < 2 * n:
        raise InsufficientDegreeError(f"a size-{n} rule needs {2 * n} moments, got {len(vals)}")
    H = hankel(vals, 0, n)
    try:
        c = linalg.solve_square(H, vals[n : 2 * n])
    except SingularMatrixError as exc:
        raise SingularLeadingHankelError(f"leading {n}x{n} Hankel matrix is singular") from exc
    flat_value = sum((cj * vals[n + j] for j, cj in enumerate(c)), Fraction(0))
    poly = [-cj for cj in c] + [Fraction(1)]

    rational: list[Fraction] = []
    residual = list(poly)
    for z in _float_roots(poly):
        if len(residual) <= 1:
            break
        if abs(z.imag) > 1e-6 * max(1.0, abs(z)):
            continue
        lead = residual[-1]
        scale = math.lcm(*(x.denominator for x in residual))
        bound = max(1, abs(int(lead * scale)))
        guess = Fraction(float(z.real)).limit_denominator(bound)
        if _eval(residual, guess) == 0:
            if guess in rational:
                raise MomentError(f"repeated node {guess}")
            rational.append(guess)
            residual = _deflate_root(residual, guess)

    quad = None
    node_list: list[tuple[float, object]] = []
    deg = len(residual) - 1
    if deg == 1:
        t = -residual[0] / residual[1]
        if t in rational:
            raise MomentError(f"repeated node {t}")
        rational.append(t)
    elif deg == 2:
        c0, c1, c2 = quad = (residual[0], residual[1], residual[2])
        disc = c1 * c1 - 4 * c0 * c2
        if disc < 0:
            raise ComplexRootsError(f"node polynomial has a non-real quadratic factor (discriminant {disc})")
        for sign in (-1, 1):
            root = QuadraticSurd(-c1 / (2 * c2), sign / (2 * c2), disc)
            node_list.append((float(root), root))
    elif deg > 2:
        roots = [_real_or_raise(z) for z in _float_roots(residual)]
        node_list.extend((_polish(residual, r), None) for r in roots)
    node_list.extend((float(t), t) for t in rational)
    node_list.sort(key=lambda item: item[0])
    floats = [t for t, _ in node_list]
    if len(set(floats)) != len(floats):
        raise MomentError("node polynomial has repeated roots")

    exact_weights = None
    if all(e is not None for _, e in node_list):
        exacts = [e for _, e in node_list]
        V = [[t**k for t in exacts] for k in range(n)]
        if quad is not None:
            r = quad[1] ** 2 - 4 * quad[0] * quad[2]
            V = [[x if isinstance(x, QuadraticSurd) else QuadraticSurd(Fraction(x), Fraction(0), r) for x in row] for row in V]
        exact_weights = tuple(
            w.a if isinstance(w, QuadraticSurd) and w.is_rational() else w for w in _solve_field(V, list(vals[:n]))
        )
        weights = tuple(float(w) for w in exact_weights)
    else:
        V = np.vander(np.array(floats), n, increasing=True).T
        weights = tuple(float(w) for w in np.linalg.solve(V, np.array([float(v) for v in vals[:n]])))

    return QuadratureRule(
        nodes=tuple(floats),
        weights=weights,
        precision=2 * n - 1,
        size=n,
        node_polynomial=tuple(poly),
        flat_extension_value=flat_value,
        rational_nodes=tuple(sorted(rational)),
        quadratic_factor=quad,
        exact_nodes=tuple(e for _, e in node_list),
        exact_weights=exact_weights,
    )


# --- separable bivariate sequences -----------------------------------------

Grid = list[list[Fraction]]


def sequence_grid(beta: MomentSequence) -> Grid:
    """The largest square grid [beta_ij], i, j <= floor(m/2), inside a 2-D sequence."""
    if beta.dimension != 2:
        raise DimensionMismatchError("grids need a two-dimensional sequence")
    k = beta.degree // 2
    return [[beta[(i, j)] for j in range(k + 1)] for i in range(k + 1)]


def separable_factor(grid: Sequence[Sequence[RationalLike]]) -> Optional[tuple[list[Fraction], list[Fraction]]]:
    """Write beta_ij = u_i v_j when the grid has rank <= 1, else None.

    Normalisation: take the first row i0 with a nonzero entry and its first
    nonzero column j0; v_j = beta_{i0 j} and u_i = beta_{i j0} / beta_{i0 j0}.
    """
    G = [[parse_rational(x) for x in row] for row in grid]
    rows, cols = len(G), len(G[0])
    if any(len(r) != cols for r in G):
        raise DimensionMismatchError("ragged grid")
    if linalg.rank(G) > 1:
        return None
    nonzero = [(i, j) for i in range(rows) for j in range(cols) if G[i][j]]
    if not nonzero:
        return [Fraction(0)] * rows, [Fraction(0)] * cols
    i0, j0 = nonzero[0]
    v = list(G[i0])
    u = [G[i][j0] / G[i0][j0] for i in range(rows)]
    return u, v


def product_measure(mu: SignedMeasure, nu: SignedMeasure) -> SignedMeasure:
    """mu x nu on the plane; density at (x, y) is mu({x}) * nu({y})."""
    if mu.dimension != 1 or nu.dimension != 1:
        raise DimensionMismatchError("product_measure takes two one-dimensional measures")
    atoms = tuple(((x[0], y[0]), a * b) for x, a in mu.atoms for y, b in nu.atoms)
    return SignedMeasure(2, atoms)


def grid_moments(tau: SignedMeasure, rows: int, cols: int) -> Grid:
    """[sum tau_k x_k^i y_k^j] for i < rows, j < cols."""
    if tau.dimension != 2:
        raise DimensionMismatchError("grid moments need a two-dimensional measure")
    return [
        [sum((a * p[0] ** i * p[1] ** j for p, a in tau.atoms), Fraction(0)) for j in range(cols)]
        for i in range(rows)
    ]


def _measure_for(values: list[Fraction], cfg: SolveConfig) -> SignedMeasure:
    seq = MomentSequence.from_values(1, len(values) - 1, values)
    return solve_direct(complete_sequence(seq, cfg).sequence, cfg).measure


def separable_measure(grid: Sequence[Sequence[RationalLike]], cfg: SolveConfig = SolveConfig()) -> Optional[SignedMeasure]:
    """A signed product measure reproducing a rank-one grid exactly, or None."""
    factors = separable_factor(grid)
    if factors is None:
        return None
    u, v = factors
    return product_measure(_measure_for(u, cfg), _measure_for(v, cfg))
