"""Domain types, degree-lex ordering, the Riesz functional and the moment oracle.

Every numeric value in this module is a :class:`fractions.Fraction`.  Decimal
strings such as ``"5.995"`` are parsed exactly, so ``"0.1"`` is ``1/10`` and
not the nearest binary double.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import DegreeMismatchError, DimensionMismatchError, DuplicatePointsError, MomentError

MultiIndex = tuple[int, ...]
Point = tuple[Fraction, ...]
RationalLike = Union[Fraction, int, str, float]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``"p/q"``, integer or decimal strings (and JSON numbers) exactly.

    Floats are routed through their shortest ``repr`` so that a JSON ``0.01``
    becomes ``1/100`` rather than the binary expansion of the double.
    """
    if isinstance(value, bool):
        raise MomentError(f"not a rational value: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MomentError(f"not a rational value: {value!r}") from exc
    raise MomentError(f"not a rational value: {value!r}")


def format_rational(value: Fraction) -> str:
    return str(value)


def as_point(coords: Iterable[RationalLike]) -> Point:
    return tuple(parse_rational(c) for c in coords)


def total_degree(index: MultiIndex) -> int:
    return sum(index)


def monomial_basis(d: int, k: int) -> list[MultiIndex]:
    """All exponents with total degree <= k in graded lex order (x1 > x2 > ... > xd).

    >>> monomial_basis(2, 2)
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    """
    if d < 1 or k < 0:
        raise MomentError(f"monomial_basis needs d >= 1 and k >= 0, got d={d}, k={k}")
    out: list[MultiIndex] = []
    for deg in range(k + 1):
        out.extend(_exponents_of_degree(d, deg))
    return out


def _exponents_of_degree(d: int, deg: int) -> Iterator[MultiIndex]:
    # lexicographically descending, so x1^deg comes first
    if d == 1:
        yield (deg,)
        return
    for first in range(deg, -1, -1):
        for rest in _exponents_of_degree(d - 1, deg - first):
            yield (first,) + rest


def basis_size(d: int, k: int) -> int:
    return comb(k + d, d)


def add_indices(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def monomial_value(point: Sequence[Fraction], index: MultiIndex) -> Fraction:
    value = Fraction(1)
    for coord, power in zip(point, index):
        if power:
            value *= coord**power
    return value


@dataclass(frozen=True)
class MomentSequence:
    """Values beta_i for every multi-index with |i| <= degree."""

    dimension: int
    degree: int
    entries: Mapping[MultiIndex, Fraction]

    def __post_init__(self) -> None:
        if self.dimension < 1 or self.degree < 0:
            raise MomentError("dimension must be >= 1 and degree >= 0")
        expected = set(monomial_basis(self.dimension, self.degree))
        clean = {}
        for index, value in self.entries.items():
            index = tuple(int(i) for i in index)
            if index not in expected:
                raise MomentError(f"index {index} is outside degree {self.degree} / dimension {self.dimension}")
            clean[index] = parse_rational(value)
        missing = expected - clean.keys()
        if missing:
            raise MomentError(f"missing entries for {sorted(missing)[:5]}")
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_values(cls, dimension: int, degree: int, values: Sequence[RationalLike]) -> "MomentSequence":
        """Build from values listed in degree-lex order."""
        labels = monomial_basis(dimension, degree)
        if len(values) != len(labels):
            raise MomentError(f"expected {len(labels)} values, got {len(values)}")
        return cls(dimension, degree, dict(zip(labels, (parse_rational(v) for v in values))))

    def __getitem__(self, index: MultiIndex) -> Fraction:
        return self.entries[tuple(index)]

    def labels(self) -> list[MultiIndex]:
        return monomial_basis(self.dimension, self.degree)

    def values(self) -> list[Fraction]:
        return [self.entries[i] for i in self.labels()]

    def scaled(self, c: RationalLike) -> "MomentSequence":
        c = parse_rational(c)
        return MomentSequence(self.dimension, self.degree, {i: c * v for i, v in self.entries.items()})

    def __add__(self, other: "MomentSequence") -> "MomentSequence":
        _check_same_shape(self, other)
        return MomentSequence(self.dimension, self.degree, {i: v + other.entries[i] for i, v in self.entries.items()})

    def __sub__(self, other: "MomentSequence") -> "MomentSequence":
        return self + other.scaled(-1)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "degree": self.degree,
            "entries": [{"index": list(i), "value": format_rational(self.entries[i])} for i in self.labels()],
        }


def _check_same_shape(a: MomentSequence, b: MomentSequence) -> None:
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"dimensions differ: {a.dimension} vs {b.dimension}")
    if a.degree != b.degree:
        raise DegreeMismatchError(f"degrees differ: {a.degree} vs {b.degree}")


@dataclass(frozen=True)
class PartialMomentSequence:
    """A sequence of nominal degree ``degree`` with some entries not given."""

    dimension: int
    degree: int
    entries: Mapping[MultiIndex, Fraction]

    def __post_init__(self) -> None:
        allowed = set(monomial_basis(self.dimension, self.degree))
        clean = {}
        for index, value in self.entries.items():
            index = tuple(int(i) for i in index)
            if index not in allowed:
                raise MomentError(f"index {index} is outside degree {self.degree} / dimension {self.dimension}")
            clean[index] = parse_rational(value)
        object.__setattr__(self, "entries", clean)

    def missing(self) -> list[MultiIndex]:
        return [i for i in monomial_basis(self.dimension, self.degree) if i not in self.entries]

    def is_complete(self) -> bool:
        return not self.missing()

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "degree": self.degree,
            "entries": [
                {"index": list(i), "value": format_rational(self.entries[i])}
                for i in monomial_basis(self.dimension, self.degree)
                if i in self.entries
            ],
        }


@dataclass(frozen=True)
class KernelPolynomial:
    """Sparse polynomial sum(a_i x^i); zero coefficients are never stored."""

    dimension: int
    terms: Mapping[MultiIndex, Fraction]

    def __post_init__(self) -> None:
        clean = {}
        for index, coeff in self.terms.items():
            index = tuple(int(i) for i in index)
            if len(index) != self.dimension:
                raise DimensionMismatchError(f"exponent {index} does not have length {self.dimension}")
            coeff = parse_rational(coeff)
            if coeff:
                clean[index] = clean.get(index, Fraction(0)) + coeff
        object.__setattr__(self, "terms", {i: c for i, c in clean.items() if c})

    @property
    def degree(self) -> int:
        # the zero polynomial is given degree -1
        return max((total_degree(i) for i in self.terms), default=-1)

    @classmethod
    def from_vector(cls, dimension: int, labels: Sequence[MultiIndex], coeffs: Sequence[Fraction]) -> "KernelPolynomial":
        return cls(dimension, {label: c for label, c in zip(labels, coeffs) if c})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        order = {lab: pos for pos, lab in enumerate(monomial_basis(self.dimension, self.degree))}
        parts = []
        for index in sorted(self.terms, key=order.__getitem__, reverse=True):
            parts.append(_format_term(self.terms[index], index))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "terms": [{"index": list(i), "coefficient": format_rational(c)} for i, c in self.terms.items()],
        }


def monomial_name(index: MultiIndex, symbol: str = "x") -> str:
    factors = []
    for var, power in enumerate(index, start=1):
        if power == 1:
            factors.append(f"{symbol}{var}")
        elif power > 1:
            factors.append(f"{symbol}{var}^{power}")
    return "*".join(factors) if factors else "1"


def _format_term(coeff: Fraction, index: MultiIndex) -> str:
    if not any(index):
        return str(coeff)
    name = monomial_name(index)
    if coeff == 1:
        return name
    if coeff == -1:
        return "-" + name
    return f"{coeff}*{name}"


@dataclass(frozen=True)
class SignedMeasure:
    """Finitely atomic signed measure sum(alpha_k delta_{w_k}).

    Zero densities are dropped on construction; repeated points are rejected.
    Use :meth:`merged` to combine repeated points by adding their densities.
    """

    dimension: int
    atoms: tuple[tuple[Point, Fraction], ...] = field(default=())

    def __post_init__(self) -> None:
        clean = []
        seen = set()
        for point, density in self.atoms:
            point = as_point(point)
            if len(point) != self.dimension:
                raise DimensionMismatchError(f"point {point} does not have dimension {self.dimension}")
            if point in seen:
                raise DuplicatePointsError(f"repeated atom at {point}")
            seen.add(point)
            density = parse_rational(density)
            if density:
                clean.append((point, density))
        object.__setattr__(self, "atoms", tuple(clean))

    @classmethod
    def merged(cls, dimension: int, atoms: Iterable[tuple[Sequence[RationalLike], RationalLike]]) -> "SignedMeasure":
        total: dict[Point, Fraction] = {}
        for point, density in atoms:
            point = as_point(point)
            total[point] = total.get(point, Fraction(0)) + parse_rational(density)
        return cls(dimension, tuple(total.items()))

    @property
    def points(self) -> list[Point]:
        return [p for p, _ in self.atoms]

    @property
    def densities(self) -> list[Fraction]:
        return [a for _, a in self.atoms]

    def __len__(self) -> int:
        return len(self.atoms)

    def density_at(self, point: Sequence[RationalLike]) -> Fraction:
        point = as_point(point)
        for p, a in self.atoms:
            if p == point:
                return a
        return Fraction(0)

    def scaled(self, c: RationalLike) -> "SignedMeasure":
        c = parse_rational(c)
        return SignedMeasure(self.dimension, tuple((p, c * a) for p, a in self.atoms))

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        if self.dimension != other.dimension:
            raise DimensionMismatchError(f"dimensions differ: {self.dimension} vs {other.dimension}")
        return SignedMeasure.merged(self.dimension, itertools.chain(self.atoms, other.atoms))

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        return self + other.scaled(-1)

    def __neg__(self) -> "SignedMeasure":
        return self.scaled(-1)

    def same_atoms(self, other: "SignedMeasure") -> bool:
        """Equality as measures, ignoring atom order."""
        return self.dimension == other.dimension and dict(self.atoms) == dict(other.atoms)

    def to_json(self, scalar: str = "rational") -> dict:
        fmt = format_rational if scalar == "rational" else float
        return {
            "dimension": self.dimension,
            "atoms": [{"point": [fmt(c) for c in p], "density": fmt(a)} for p, a in self.atoms],
        }


def dirac(point: Sequence[RationalLike], density: RationalLike = 1) -> SignedMeasure:
    point = as_point(point)
    return SignedMeasure(len(point), ((point, parse_rational(density)),))


def riesz(beta: MomentSequence, p: KernelPolynomial) -> Fraction:
    """Apply the Riesz functional: sum(a_i x^i) -> sum(a_i beta_i)."""
    if p.dimension != beta.dimension:
        raise DimensionMismatchError(f"polynomial dimension {p.dimension} != sequence dimension {beta.dimension}")
    if p.degree > beta.degree:
        raise DegreeMismatchError(f"polynomial degree {p.degree} exceeds sequence degree {beta.degree}")
    return sum((c * beta.entries[i] for i, c in p.terms.items()), Fraction(0))


def moments_of_measure(mu: SignedMeasure, m: int) -> MomentSequence:
    """Exact moments beta_i = sum(alpha_k w_k^i) for |i| <= m."""
    labels = monomial_basis(mu.dimension, m)
    entries = {i: Fraction(0) for i in labels}
    for point, density in mu.atoms:
        for i in labels:
            entries[i] += density * monomial_value(point, i)
    return MomentSequence(mu.dimension, m, entries)


def eval_poly(p: KernelPolynomial, w: Sequence[RationalLike]) -> Fraction:
    w = as_point(w)
    if len(w) != p.dimension:
        raise DimensionMismatchError(f"point {w} does not have dimension {p.dimension}")
    return sum((c * monomial_value(w, i) for i, c in p.terms.items()), Fraction(0))


def jordan_split(mu: SignedMeasure) -> tuple[SignedMeasure, SignedMeasure]:
    """Return (mu_plus, mu_minus), both with positive densities, mu = mu_plus - mu_minus."""
    plus = tuple((p, a) for p, a in mu.atoms if a > 0)
    minus = tuple((p, -a) for p, a in mu.atoms if a < 0)
    return SignedMeasure(mu.dimension, plus), SignedMeasure(mu.dimension, minus)


# --- JSON ingestion --------------------------------------------------------


def sequence_from_json(data: Mapping) -> Union[MomentSequence, PartialMomentSequence]:
    """Parse the sequence schema; incomplete entry sets come back as partial sequences."""
    try:
        dimension = int(data["dimension"])
        raw = data["entries"]
        entries = {}
        for item in raw:
            index = tuple(int(i) for i in item["index"])
            if len(index) != dimension:
                raise DimensionMismatchError(f"index {index} does not have length {dimension}")
            if index in entries:
                raise MomentError(f"duplicate entry for index {index}")
            entries[index] = parse_rational(item["value"])
        degree = int(data["degree"]) if "degree" in data else max((sum(i) for i in entries), default=0)
    except (KeyError, TypeError) as exc:
        raise MomentError(f"malformed moment sequence: {exc}") from exc
    partial = PartialMomentSequence(dimension, degree, entries)
    if partial.is_complete():
        return MomentSequence(dimension, degree, entries)
    return partial


def measure_from_json(data: Mapping) -> SignedMeasure:
    try:
        dimension = int(data["dimension"])
        atoms = [(as_point(a["point"]), parse_rational(a["density"])) for a in data["atoms"]]
    except (KeyError, TypeError) as exc:
        raise MomentError(f"malformed measure: {exc}") from exc
    return SignedMeasure(dimension, tuple(atoms))


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"
