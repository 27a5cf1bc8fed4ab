"""Interpolating-measure engines.

Three routes, all returning an exactly verified :class:`SolveReport`:

* ``direct``: square generalized Vandermonde on randomly sampled nodes.
* ``perturbation``: add unit point masses off the variety until the moment
  matrix is invertible, solve the invertible problem, subtract the masses.
* ``minimal-linear``: rank-one deflation along a hyperplane contained in the
  variety, giving ``rank M`` atoms when it succeeds.

Random nodes come from :class:`random.Random` (Mersenne Twister) seeded with
``SolveConfig.seed``; each coordinate is ``i / 2**16`` with ``i`` uniform in
``[-B * 2**16, B * 2**16]``.  One generator is created per call, so results
depend only on the inputs and the seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from . import linalg
from .core import (
    MomentSequence,
    MultiIndex,
    PartialMomentSequence,
    Point,
    RationalLike,
    SignedMeasure,
    basis_size,
    format_rational,
    moments_of_measure,
    monomial_basis,
    parse_rational,
)
from .errors import (
    DimensionMismatchError,
    MomentError,
    NoLinearRelationError,
    NotInVarietyError,
    OddDegreeError,
    SamplingExhaustedError,
    SingularAfterRetriesError,
    SingularMatrixError,
    ZeroGaugeError,
)
from .momat import (
    MomentMatrix,
    build_moment_matrix,
    linear_relations,
    point_vector,
    rank_one,
    vandermonde,
    variety_contains,
)

NODE_DENOMINATOR = 2**16
STRATEGIES = ("direct", "perturbation", "minimal-linear")


@dataclass(frozen=True)
class SolveConfig:
    strategy: str = "direct"
    seed: int = 0
    node_box: Fraction = Fraction(10)
    max_retries: int = 32

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise MomentError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not 0 <= self.seed < 2**64:
            raise MomentError("seed must be a 64-bit unsigned integer")
        box = parse_rational(self.node_box)
        if box <= 0:
            raise MomentError("node_box must be positive")
        object.__setattr__(self, "node_box", box)
        if self.max_retries < 1:
            raise MomentError("max_retries must be >= 1")


class NodeSampler:
    """Seeded source of rational coordinates on the grid 2^-16 Z inside [-B, B]."""

    def __init__(self, seed: int, box: Fraction) -> None:
        self._rng = random.Random(seed)
        self._limit = math.floor(box * NODE_DENOMINATOR)

    def coordinate(self) -> Fraction:
        return Fraction(self._rng.randint(-self._limit, self._limit), NODE_DENOMINATOR)

    def point(self, d: int) -> Point:
        return tuple(self.coordinate() for _ in range(d))

    def distinct_points(self, d: int, count: int) -> list[Point]:
        if count > (2 * self._limit + 1) ** d:
            raise SamplingExhaustedError(f"the node box holds fewer than {count} distinct grid points")
        seen: set[Point] = set()
        out = []
        while len(out) < count:
            p = self.point(d)
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    deltas: dict[MultiIndex, Fraction]
    max_abs_delta: float
    scalar: str = "rational"

    def nonzero(self) -> dict[MultiIndex, Fraction]:
        return {i: v for i, v in self.deltas.items() if v}

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "scalar": self.scalar,
            "max_abs_delta": self.max_abs_delta,
            "deltas": [{"index": list(i), "delta": format_rational(v)} for i, v in self.deltas.items()],
        }


FLOAT_VERIFY_TOL = 1e-9


def verify(beta: MomentSequence, mu: SignedMeasure, scalar: str = "rational") -> VerifyReport:
    """Compare the moments of ``mu`` with ``beta``; deltas are (moment of mu) - beta_i.

    In rational mode the check is exact.  In float mode the moments are
    evaluated in binary floating point and pass when max |delta| < 1e-9.
    """
    if beta.dimension != mu.dimension:
        raise DimensionMismatchError(f"sequence dimension {beta.dimension} != measure dimension {mu.dimension}")
    if scalar == "float":
        labels = beta.labels()
        deltas = {}
        for i in labels:
            total = 0.0
            for p, a in mu.atoms:
                term = float(a)
                for c, e in zip(p, i):
                    term *= float(c) ** e
                total += term
            deltas[i] = Fraction(total - float(beta[i]))
        worst = max((abs(float(v)) for v in deltas.values()), default=0.0)
        return VerifyReport(worst < FLOAT_VERIFY_TOL, deltas, worst, "float")
    got = moments_of_measure(mu, beta.degree)
    deltas = {i: got.entries[i] - beta.entries[i] for i in beta.labels()}
    worst = max((abs(float(v)) for v in deltas.values()), default=0.0)
    return VerifyReport(not any(deltas.values()), deltas, worst, "rational")


@dataclass(frozen=True)
class SolveReport:
    measure: SignedMeasure
    strategy: str
    added_points: tuple[Point, ...] = ()
    rank_trace: tuple[int, ...] = ()
    oracle_verified: bool = False
    notes: tuple[str, ...] = field(default=())

    def to_json(self, scalar: str = "rational") -> dict:
        fmt = format_rational if scalar == "rational" else float
        return {
            "strategy": self.strategy,
            "measure": self.measure.to_json(scalar),
            "added_points": [[fmt(c) for c in p] for p in self.added_points],
            "rank_trace": list(self.rank_trace),
            "verified": self.oracle_verified,
            "notes": list(self.notes),
        }


def _require_even(beta: MomentSequence) -> None:
    if beta.degree % 2:
        raise OddDegreeError(f"degree {beta.degree} is odd; run complete_sequence first")


def _direct_measure(beta: MomentSequence, sampler: NodeSampler, max_retries: int) -> SignedMeasure:
    d, m = beta.dimension, beta.degree
    count = basis_size(d, m)
    rhs = beta.values()
    for _ in range(max_retries):
        points = sampler.distinct_points(d, count)
        try:
            alpha = linalg.solve_square(vandermonde(points, d, m), rhs)
        except SingularMatrixError:
            continue
        return SignedMeasure(d, tuple(zip(points, alpha)))
    raise SingularAfterRetriesError(f"Vandermonde singular on {max_retries} node samples")


def _checked(beta: MomentSequence, report: SolveReport) -> SolveReport:
    result = verify(beta, report.measure)
    if not result.passed:
        raise MomentError(f"{report.strategy} solve failed the moment oracle: {result.nonzero()}")
    return SolveReport(report.measure, report.strategy, report.added_points, report.rank_trace, True, report.notes)


def solve_direct(beta: MomentSequence, cfg: SolveConfig = SolveConfig()) -> SolveReport:
    """Match all C(m+d, d) moments with as many randomly placed atoms."""
    _require_even(beta)
    sampler = NodeSampler(cfg.seed, cfg.node_box)
    mu = _direct_measure(beta, sampler, cfg.max_retries)
    return _checked(beta, SolveReport(mu, "direct"))


class Perturbation(NamedTuple):
    matrix: MomentMatrix
    points: tuple[Point, ...]
    rank_trace: tuple[int, ...]


def _perturb(M: MomentMatrix, sampler: NodeSampler, max_retries: int) -> Perturbation:
    current = M
    points: list[Point] = []
    trace = [current.rank]
    while not current.is_invertible():
        for _ in range(max_retries):
            w = sampler.point(M.dimension)
            if not variety_contains(current, w):
                break
        else:
            raise SamplingExhaustedError(f"{max_retries} consecutive samples fell inside the variety")
        nxt = current + rank_one(w, M.order)
        if nxt.rank != current.rank + 1:
            raise MomentError(f"rank went {current.rank} -> {nxt.rank} after adding a point off the variety")
        current = nxt
        points.append(w)
        trace.append(current.rank)
    return Perturbation(current, tuple(points), tuple(trace))


def perturb_to_invertible(M: MomentMatrix, cfg: SolveConfig = SolveConfig()) -> Perturbation:
    """Add P(w) for sampled w off the variety until M is invertible.

    Every accepted point raises the rank by exactly one, so the loop ends
    after corank(M) points.
    """
    return _perturb(M, NodeSampler(cfg.seed, cfg.node_box), cfg.max_retries)


def solve_perturbation(beta: MomentSequence, cfg: SolveConfig = SolveConfig()) -> SolveReport:
    _require_even(beta)
    sampler = NodeSampler(cfg.seed, cfg.node_box)
    pert = _perturb(build_moment_matrix(beta), sampler, cfg.max_retries)
    tilde = _direct_measure(pert.matrix.sequence(), sampler, cfg.max_retries)
    added = SignedMeasure(beta.dimension, tuple((w, Fraction(1)) for w in pert.points))
    return _checked(beta, SolveReport(tilde - added, "perturbation", pert.points, pert.rank_trace))


class Completion(NamedTuple):
    sequence: MomentSequence
    invertible: bool
    filled: tuple[MultiIndex, ...]


def complete_sequence(partial, cfg: SolveConfig = SolveConfig()) -> Completion:
    """Fill undefined entries (up to degree 2*ceil(m/2)) with seeded random rationals.

    Up to ``max_retries`` fills are tried to make the moment matrix
    invertible; the last fill is returned either way.  Given entries,
    including a zero beta_0, are never altered.
    """
    if isinstance(partial, MomentSequence):
        if partial.degree % 2 == 0:
            return Completion(partial, build_moment_matrix(partial).is_invertible(), ())
        partial = PartialMomentSequence(partial.dimension, partial.degree, partial.entries)
    d = partial.dimension
    target = 2 * math.ceil(partial.degree / 2)
    given = dict(partial.entries)
    missing = tuple(i for i in monomial_basis(d, target) if i not in given)
    sampler = NodeSampler(cfg.seed, cfg.node_box)
    seq = None
    invertible = False
    for _ in range(cfg.max_retries):
        entries = dict(given)
        for i in missing:
            entries[i] = sampler.coordinate()
        seq = MomentSequence(d, target, entries)
        invertible = build_moment_matrix(seq).is_invertible()
        if invertible or not missing:
            break
    return Completion(seq, invertible, missing)


def deflate_atom(M: MomentMatrix, w: Sequence[RationalLike]) -> tuple[Fraction, MomentMatrix]:
    """Split off u * P(w) so that M - u P(w) has rank one less.

    ``u = 1 / g`` where ``g = v(w)^T x`` for any x with ``M x = v(w)``.
    """
    if not variety_contains(M, w):
        raise NotInVarietyError(f"{tuple(w)} is not on the variety of M")
    v = point_vector(w, M.order)
    g = linalg.deflation_gauge(M.matrix, v)
    if not g:
        raise ZeroGaugeError(f"v(w)^T M^+ v(w) vanishes at {tuple(w)}")
    u = 1 / g
    rest = M - rank_one(w, M.order).scaled(u)
    if rest.rank != M.rank - 1:
        raise MomentError(f"deflation at {tuple(w)} left rank {rest.rank} (from {M.rank})")
    return u, rest


def _affine_sample(M: MomentMatrix, sampler: NodeSampler) -> Optional[Point]:
    """A random point on the common zero set of the degree-1 relations of M."""
    lin = linear_relations(M)
    d = M.dimension
    zero = (0,) * d
    axes = [tuple(int(k == j) for k in range(d)) for j in range(d)]
    L = [[p.terms.get(axis, Fraction(0)) for axis in axes] for p in lin]
    rhs = [-p.terms.get(zero, Fraction(0)) for p in lin]
    if not lin:
        return sampler.point(d)
    x0 = linalg.solve_consistent(L, rhs)
    if x0 is None:
        return None
    w = list(x0)
    for direction in linalg.kernel_basis(L):
        t = sampler.coordinate()
        w = [a + t * b for a, b in zip(w, direction)]
    return tuple(w)


def solve_minimal_linear_variety(beta: MomentSequence, cfg: SolveConfig = SolveConfig()) -> Optional[SolveReport]:
    """Greedy deflation along the hyperplanes the variety lies in.

    Returns a measure with exactly rank(M) atoms, all on the zero set of the
    degree-1 column relations, or None if deflation stalls.
    """
    _require_even(beta)
    M = build_moment_matrix(beta)
    if not linear_relations(M):
        raise NoLinearRelationError("the moment matrix has no degree-1 column relation")
    sampler = NodeSampler(cfg.seed, cfg.node_box)
    current = M
    atoms: list[tuple[Point, Fraction]] = []
    trace = [current.rank]
    while current.rank > 0:
        for _ in range(cfg.max_retries):
            w = _affine_sample(current, sampler)
            if w is None:
                return None
            try:
                u, current = deflate_atom(current, w)
            except (NotInVarietyError, ZeroGaugeError):
                continue
            atoms.append((w, u))
            trace.append(current.rank)
            break
        else:
            return None
    mu = SignedMeasure.merged(beta.dimension, atoms)
    return _checked(beta, SolveReport(mu, "minimal-linear", (), tuple(trace)))


def solve(beta: MomentSequence, cfg: SolveConfig = SolveConfig()) -> Optional[SolveReport]:
    if cfg.strategy == "direct":
        return solve_direct(beta, cfg)
    if cfg.strategy == "perturbation":
        return solve_perturbation(beta, cfg)
    return solve_minimal_linear_variety(beta, cfg)
