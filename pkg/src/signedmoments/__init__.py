"""Signed (interpolating) atomic measures for finite multi-index moment sequences."""

from .core import (
    KernelPolynomial,
    MomentSequence,
    PartialMomentSequence,
    SignedMeasure,
    dirac,
    eval_poly,
    jordan_split,
    moments_of_measure,
    monomial_basis,
    parse_rational,
    riesz,
)
from .hankel1d import (
    QuadratureRule,
    hamburger_check,
    hankel,
    legendre_moments,
    product_measure,
    quadrature_from_moments,
    separable_factor,
    separable_measure,
    stieltjes_check,
)
from .linalg import RationalMatrix, kernel_basis, psd_check, rank, solve_consistent, solve_square
from .momat import (
    MomentMatrix,
    build_moment_matrix,
    column_relations,
    finite_consistency,
    point_vector,
    rank_one,
    variety_contains,
)
from .solver import (
    SolveConfig,
    SolveReport,
    complete_sequence,
    deflate_atom,
    perturb_to_invertible,
    solve_direct,
    solve_minimal_linear_variety,
    solve_perturbation,
    verify,
)

__version__ = "0.1.0"
