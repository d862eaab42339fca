"""Exact integer / rational linear algebra: matrices, normal forms,
lattices and finite abelian groups."""

from .forms import exact_signature, is_positive_definite, leading_minors
from .groups import FinAbGroup
from .lattice import (
    ZLattice,
    congruence_sublattice,
    dual_lattice,
    integer_kernel,
    integer_points,
    intersection,
    lattice_quotient,
    preimage,
    quotient_with_generators,
    reduce_mod,
    saturate,
    solutions_mod,
)
from .matrix import IntegerMatrix, RationalMatrix, as_fraction, nullspace, row_space, rref
from .normalforms import hnf, hnf_basis, invariant_factors, snf

__all__ = [
    "FinAbGroup", "IntegerMatrix", "RationalMatrix", "ZLattice", "as_fraction",
    "congruence_sublattice", "dual_lattice", "exact_signature", "hnf", "hnf_basis",
    "integer_kernel", "integer_points", "intersection", "invariant_factors",
    "is_positive_definite", "lattice_quotient", "leading_minors", "nullspace",
    "preimage", "quotient_with_generators", "reduce_mod", "row_space", "rref",
    "saturate", "snf", "solutions_mod",
]
