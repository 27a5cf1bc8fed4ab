from fractions import Fraction as F
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signedmoments.core import (
    KernelPolynomial,
    MomentSequence,
    PartialMomentSequence,
    SignedMeasure,
    dirac,
    eval_poly,
    jordan_split,
    measure_from_json,
    moments_of_measure,
    monomial_basis,
    parse_rational,
    riesz,
    sequence_from_json,
)
from signedmoments.errors import DegreeMismatchError, DimensionMismatchError, DuplicatePointsError, MomentError

from conftest import TWO_ATOM_EXACT, FIB_VALUES

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=9)


def test_monomial_basis_examples():
    assert monomial_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert monomial_basis(1, 3) == [(0,), (1,), (2,), (3,)]
    assert monomial_basis(3, 1) == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_monomial_basis_size_and_order(d, k):
    basis = monomial_basis(d, k)
    assert len(basis) == comb(k + d, d)
    keys = [(sum(i), tuple(-x for x in i)) for i in basis]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)


def test_parse_rational_is_exact():
    assert parse_rational("5.995") == F(1199, 200)
    assert parse_rational("-0.01") == F(-1, 100)
    assert parse_rational("7/3") == F(7, 3)
    assert parse_rational("12") == 12
    assert parse_rational(0.1) == F(1, 10)
    with pytest.raises(MomentError):
        parse_rational("abc")
    with pytest.raises(MomentError):
        parse_rational(True)


def test_riesz_examples(fib, rank2_line):
    assert riesz(fib, KernelPolynomial(2, {(1, 0): 1, (0, 1): 1})) == 3
    assert riesz(fib, KernelPolynomial(2, {(0, 0): 1})) == 1
    # x2 + 4/3 - x1/3 annihilates the rank-2 sequence: -4 + (4/3)(-1) - (1/3)(-16) = 0
    p = KernelPolynomial(2, {(0, 1): 1, (0, 0): F(4, 3), (1, 0): F(-1, 3)})
    assert riesz(rank2_line, p) == 0


def test_riesz_errors(fib):
    with pytest.raises(DegreeMismatchError):
        riesz(fib, KernelPolynomial(2, {(3, 0): 1}))
    with pytest.raises(DimensionMismatchError):
        riesz(fib, KernelPolynomial(1, {(1,): 1}))


def test_moments_of_fibonacci_measure(fib_measure):
    assert moments_of_measure(fib_measure, 2).values() == FIB_VALUES


def test_moments_of_two_atom_measure():
    mu = SignedMeasure(2, (((-1, 4), 2), ((2, 3), 4)))
    assert moments_of_measure(mu, 4).values() == TWO_ATOM_EXACT


def test_moments_of_empty_measure():
    assert moments_of_measure(SignedMeasure(3), 2).values() == [0] * 10


def test_eval_poly():
    p = KernelPolynomial(2, {(0, 1): 1, (0, 0): F(4, 3), (1, 0): F(-1, 3)})
    assert eval_poly(p, (4, 0)) == 0
    assert eval_poly(KernelPolynomial(2, {(0, 0): 1}), (5, -7)) == 1
    assert eval_poly(KernelPolynomial(1, {(2,): 1}), (3,)) == 9
    with pytest.raises(DimensionMismatchError):
        eval_poly(p, (1,))


def test_jordan_split_two_atom(two_atom_measure):
    plus, minus = jordan_split(two_atom_measure)
    assert plus.same_atoms(SignedMeasure(2, (((-1, 4), 2), ((2, 3), 4))))
    assert minus.same_atoms(SignedMeasure(2, ((("0.5", "0.2"), "0.01"),)))


def test_jordan_split_trivial_cases():
    pos = SignedMeasure(1, (((1,), 2), ((3,), 1)))
    assert jordan_split(pos) == (pos, SignedMeasure(1))
    plus, minus = jordan_split(dirac((0,), -3))
    assert len(plus) == 0 and minus.same_atoms(dirac((0,), 3))


def test_measure_invariants():
    assert len(SignedMeasure(1, (((1,), 0), ((2,), 1)))) == 1
    with pytest.raises(DuplicatePointsError):
        SignedMeasure(1, (((1,), 1), ((1,), -1)))
    with pytest.raises(DimensionMismatchError):
        SignedMeasure(2, (((1,), 1),))
    assert len(dirac((1,)) - dirac((1,))) == 0


def test_sequence_invariants():
    with pytest.raises(MomentError):
        MomentSequence(1, 2, {(0,): 1, (1,): 2})
    with pytest.raises(MomentError):
        MomentSequence(1, 1, {(0,): 1, (1,): 2, (2,): 3})


def test_kernel_polynomial_drops_zeros():
    p = KernelPolynomial(2, {(0, 0): 0, (1, 0): 2})
    assert p.terms == {(1, 0): 2}
    assert p.degree == 1
    assert str(KernelPolynomial(2, {(0, 1): 1, (0, 0): F(4, 3), (1, 0): F(-1, 3)})) == "x2 - 1/3*x1 + 4/3"


def test_json_round_trip(fib, two_atom_measure):
    assert sequence_from_json(fib.to_json()) == fib
    assert measure_from_json(two_atom_measure.to_json()).same_atoms(two_atom_measure)


def test_json_partial_and_decimals():
    data = {"dimension": 1, "degree": 2, "entries": [{"index": [0], "value": "0.5"}, {"index": [1], "value": 2}]}
    seq = sequence_from_json(data)
    assert isinstance(seq, PartialMomentSequence)
    assert seq.missing() == [(2,)]
    assert seq.entries[(0,)] == F(1, 2)


@st.composite
def measures(draw, d=None):
    d = d or draw(st.integers(1, 3))
    pts = draw(st.lists(st.tuples(*[rationals] * d), min_size=0, max_size=4, unique=True))
    dens = draw(st.lists(rationals.filter(bool), min_size=len(pts), max_size=len(pts)))
    return SignedMeasure(d, tuple(zip(pts, dens)))


@st.composite
def polynomials(draw, d, m):
    labels = monomial_basis(d, m)
    chosen = draw(st.lists(st.sampled_from(labels), max_size=5, unique=True))
    return KernelPolynomial(d, {i: draw(rationals) for i in chosen})


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_oracle_consistency(data):
    mu = data.draw(measures())
    m = data.draw(st.integers(0, 3))
    p = data.draw(polynomials(mu.dimension, m))
    beta = moments_of_measure(mu, m)
    assert riesz(beta, p) == sum((a * eval_poly(p, w) for w, a in mu.atoms), F(0))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_riesz_linearity_and_monomials(data):
    d = data.draw(st.integers(1, 3))
    m = data.draw(st.integers(0, 3))
    labels = monomial_basis(d, m)
    beta = MomentSequence.from_values(d, m, data.draw(st.lists(rationals, min_size=len(labels), max_size=len(labels))))
    p, q = data.draw(polynomials(d, m)), data.draw(polynomials(d, m))
    a, b = data.draw(rationals), data.draw(rationals)
    combo = {}
    for poly, c in ((p, a), (q, b)):
        for i, v in poly.terms.items():
            combo[i] = combo.get(i, F(0)) + c * v
    assert riesz(beta, KernelPolynomial(d, combo)) == a * riesz(beta, p) + b * riesz(beta, q)
    for i in labels:
        assert riesz(beta, KernelPolynomial(d, {i: 1})) == beta[i]


@settings(max_examples=60, deadline=None)
@given(measures())
def test_jordan_round_trip(mu):
    plus, minus = jordan_split(mu)
    assert all(a > 0 for a in plus.densities + minus.densities)
    assert not set(plus.points) & set(minus.points)
    assert (plus - minus).same_atoms(mu)
