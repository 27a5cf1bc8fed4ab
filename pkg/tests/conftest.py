from __future__ import annotations

import random
from fractions import Fraction as F
from pathlib import Path

import pytest

from signedmoments.core import MomentSequence, SignedMeasure

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


FIB_VALUES = [1, 1, 2, 3, 5, 8]
RANK2_LINE_VALUES = [-1, -16, -4, -94, -10, 2]
TWO_ATOM_EXACT = [6, 6, 20, 18, 16, 68, 30, 56, 40, 236, 66, 88, 176, 88, 836]
TWO_ATOM_PERTURBED = [
    "5.990000", "5.995000", "19.998000", "17.997500", "15.999000", "67.999600",
    "29.998750", "55.999500", "39.999800", "235.999920",
    "65.999375", "87.999750", "175.999900", "87.999960", "835.999984",
]


@pytest.fixture
def fib() -> MomentSequence:
    return MomentSequence.from_values(2, 2, FIB_VALUES)


@pytest.fixture
def fib_measure() -> SignedMeasure:
    return SignedMeasure(2, (((F(1, 2), 1), 1), ((F(9, 2), 7), F(1, 7)), ((1, 0), F(-1, 7))))


@pytest.fixture
def rank2_line() -> MomentSequence:
    return MomentSequence.from_values(2, 2, RANK2_LINE_VALUES)


@pytest.fixture
def two_atom_exact() -> MomentSequence:
    return MomentSequence.from_values(2, 4, TWO_ATOM_EXACT)


@pytest.fixture
def two_atom_perturbed() -> MomentSequence:
    return MomentSequence.from_values(2, 4, TWO_ATOM_PERTURBED)


@pytest.fixture
def two_atom_measure() -> SignedMeasure:
    return SignedMeasure(2, ((("0.5", "0.2"), "-0.01"), ((-1, 4), 2), ((2, 3), 4)))


def random_rational(rng: random.Random, bound: int = 10, max_den: int = 12) -> F:
    q = rng.randint(1, max_den)
    return F(rng.randint(-bound * q, bound * q), q)


def random_measure(rng: random.Random, d: int, atoms: int, coord: int = 4) -> SignedMeasure:
    seen = set()
    out = []
    while len(out) < atoms:
        p = tuple(F(rng.randint(-coord * 2, coord * 2), 2) for _ in range(d))
        if p in seen:
            continue
        seen.add(p)
        a = random_rational(rng, 5, 6)
        if a:
            out.append((p, a))
    return SignedMeasure(d, tuple(out))
