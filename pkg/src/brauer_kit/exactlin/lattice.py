"""Finite-rank Z-lattices in Q^n given by row bases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from ..errors import DegeneratePairing, NotASublattice
from .groups import FinAbGroup
from .matrix import IntegerMatrix, RationalMatrix, _Matrix, as_fraction, rref
from .normalforms import hnf_basis, snf


@dataclass(frozen=True, eq=False)
class ZLattice:
    """Z-span of the (linearly independent) rows of ``basis`` inside Q^n."""

    basis: RationalMatrix
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        b = self.basis.to_rational()
        object.__setattr__(self, "basis", b)
        if self.ambient_dim < 0:
            object.__setattr__(self, "ambient_dim", b.ncols)
        elif b.nrows and b.ncols != self.ambient_dim:
            raise ValueError("basis width differs from ambient dimension")
        if b.nrows and len(rref(b)[1]) != b.nrows:
            raise ValueError("lattice basis rows are linearly dependent")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_generators(cls, gens: _Matrix | Sequence[Sequence], ambient_dim: int | None = None):
        """Lattice generated by arbitrary (possibly dependent) vectors."""
        if not isinstance(gens, _Matrix):
            gens = RationalMatrix(gens, ncols=ambient_dim)
        n = gens.ncols if ambient_dim is None else ambient_dim
        if gens.nrows == 0:
            return cls(RationalMatrix([], ncols=n), n)
        d = gens.denominator()
        h = hnf_basis((gens * d).to_integer())
        return cls(RationalMatrix(h.rows, ncols=n) * Fraction(1, d), n)

    @classmethod
    def standard(cls, n: int):
        return cls(RationalMatrix.identity(n), n)

    @classmethod
    def zero(cls, n: int):
        return cls(RationalMatrix([], ncols=n), n)

    # -- basic data ---------------------------------------------------
    @property
    def rank(self) -> int:
        return self.basis.nrows

    def is_integral(self) -> bool:
        return self.basis.is_integral()

    @cached_property
    def hnf(self) -> RationalMatrix:
        """Canonical basis: HNF of the denominator-cleared basis, rescaled."""
        if self.rank == 0:
            return self.basis
        d = self.basis.denominator()
        h = hnf_basis((self.basis * d).to_integer())
        return RationalMatrix(h.rows, ncols=self.ambient_dim) * Fraction(1, d)

    def __eq__(self, other):
        if not isinstance(other, ZLattice):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.hnf == other.hnf

    def __hash__(self):
        return hash((self.ambient_dim, self.hnf))

    def __repr__(self):
        return f"ZLattice(rank={self.rank}, ambient_dim={self.ambient_dim}, basis={self.basis.tolist()})"

    @cached_property
    def _solver(self):
        red, pivots = rref(self.basis)
        sub = self.basis.submatrix(range(self.rank), pivots)
        return pivots, sub.inverse()

    def coordinates(self, v: Sequence) -> tuple[Fraction, ...] | None:
        """Rational coordinates of ``v`` in the basis, or None if ``v`` is
        outside the Q-span."""
        v = tuple(as_fraction(x) for x in v)
        if self.rank == 0:
            return () if all(x == 0 for x in v) else None
        pivots, inv = self._solver
        c = inv.rapply([v[p] for p in pivots])
        if self.basis.rapply(c) != v:
            return None
        return c

    def contains(self, v: Sequence) -> bool:
        c = self.coordinates(v)
        return c is not None and all(x.denominator == 1 for x in c)

    __contains__ = contains

    def contains_lattice(self, other: "ZLattice") -> bool:
        return all(self.contains(r) for r in other.basis.rows)

    def coordinate_matrix(self, other: "ZLattice") -> IntegerMatrix:
        """Rows: coordinates of ``other``'s basis in this basis."""
        rows = []
        for r in other.basis.rows:
            c = self.coordinates(r)
            if c is None or any(x.denominator != 1 for x in c):
                raise NotASublattice(f"{r} is not in the lattice")
            rows.append([int(x) for x in c])
        return IntegerMatrix(rows, ncols=self.rank)

    def span_matrix(self) -> RationalMatrix:
        return self.basis

    def __add__(self, other: "ZLattice") -> "ZLattice":
        return ZLattice.from_generators(self.basis.stack(other.basis), self.ambient_dim)

    def scale(self, c) -> "ZLattice":
        c = as_fraction(c)
        if c == 0:
            return ZLattice.zero(self.ambient_dim)
        return ZLattice(self.basis * c, self.ambient_dim)

    def transform(self, m: _Matrix) -> "ZLattice":
        """Image under the linear map v -> v @ m (m must be injective on the span)."""
        return ZLattice.from_generators(self.basis @ m.to_rational(), m.ncols)

    def element(self, coeffs: Sequence[int]) -> tuple[Fraction, ...]:
        return self.basis.rapply(coeffs)


def _column_lattice_mod(m: IntegerMatrix, modulus: int) -> IntegerMatrix:
    """Basis (as rows) of the column lattice of m plus modulus * Z^r."""
    r = m.nrows
    gens = [[x % modulus for x in col] for col in zip(*m.rows)] if m.ncols else []
    gens += [[modulus if i == j else 0 for j in range(r)] for i in range(r)]
    return hnf_basis(IntegerMatrix(gens, ncols=r))


def solutions_mod(m: IntegerMatrix, modulus: int) -> IntegerMatrix:
    """Basis (rows) of {c in Z^r : c @ m = 0 mod modulus}, r = m.nrows."""
    r = m.nrows
    if r == 0:
        return IntegerMatrix([], ncols=0)
    h = _column_lattice_mod(m, modulus)  # rows span the column lattice
    sol = h.T.inverse() * modulus
    return sol.to_integer()


def integer_points(span: _Matrix, ambient_dim: int | None = None) -> ZLattice:
    """The lattice (Q-span of the rows of ``span``) intersected with Z^n."""
    n = span.ncols if ambient_dim is None else ambient_dim
    red, pivots = rref(span)
    r = len(pivots)
    if r == 0:
        return ZLattice.zero(n)
    d = red.denominator()
    if d == 1:
        return ZLattice(red, n)
    scaled = (red * d).to_integer()
    coeffs = solutions_mod(scaled, d)
    # each solution c gives the integral vector (c @ red); pivot entries are c itself
    basis = coeffs.to_rational() @ red
    return ZLattice(basis, n)


def saturate(l: ZLattice) -> ZLattice:
    """Integer points of the Q-span of ``l`` (only meaningful when l is integral)."""
    return integer_points(l.basis, l.ambient_dim)


def integer_kernel(m: _Matrix) -> ZLattice:
    """Saturated lattice {x in Z^n : m x = 0}."""
    from .matrix import nullspace

    return integer_points(nullspace(m), m.ncols)


def congruence_sublattice(l: ZLattice, conditions: _Matrix, modulus: int) -> ZLattice:
    """{v in l : conditions @ v = 0 mod modulus}; the conditions must be
    integral on l (i.e. l.basis @ conditions.T integral)."""
    if l.rank == 0:
        return l
    vals = l.basis @ conditions.to_rational().T
    if not vals.is_integral():
        raise ValueError("congruence conditions are not integral on the lattice")
    coeffs = solutions_mod(vals.to_integer(), modulus)
    return ZLattice(coeffs.to_rational() @ l.basis, l.ambient_dim)


def intersection(a: ZLattice, b: ZLattice) -> ZLattice:
    """a ∩ b, via the integer kernel of [A; -B]."""
    if a.rank == 0 or b.rank == 0:
        return ZLattice.zero(a.ambient_dim)
    stacked = a.basis.stack(-b.basis)
    d = stacked.denominator()
    # left kernel of the stacked matrix
    kern = integer_kernel((stacked * d).T)
    if kern.rank == 0:
        return ZLattice.zero(a.ambient_dim)
    coeffs = kern.basis.submatrix(range(kern.rank), range(a.rank))
    return ZLattice.from_generators(coeffs @ a.basis, a.ambient_dim)


def preimage(l_map: _Matrix, target: ZLattice, source_rank: int | None = None) -> ZLattice:
    """{c in Z^k : c @ l_map in target} where l_map is k x n."""
    k = l_map.nrows if source_rank is None else source_rank
    if target.rank == 0:
        return integer_kernel(l_map.T)
    stacked = l_map.to_rational().stack(-target.basis)
    d = stacked.denominator()
    kern = integer_kernel((stacked * d).T)
    if kern.rank == 0:
        return ZLattice.zero(k)
    coeffs = kern.basis.submatrix(range(kern.rank), range(k))
    return ZLattice.from_generators(coeffs, k)


def lattice_quotient(sub: ZLattice, sup: ZLattice) -> FinAbGroup:
    """Invariant factors of sup/sub (free part when the ranks differ)."""
    return quotient_with_generators(sub, sup)[0]


def quotient_with_generators(sub: ZLattice, sup: ZLattice):
    """``(group, gens)`` where ``gens[i]`` is an element of ``sup`` whose
    class generates the i-th cyclic factor (finite factors first, in
    invariant-factor order, then free generators)."""
    if sub.ambient_dim != sup.ambient_dim:
        raise NotASublattice("ambient dimensions differ")
    x = sup.coordinate_matrix(sub)
    k = sup.rank
    if sub.rank == 0:
        gens = [tuple(r) for r in sup.basis.rows]
        return FinAbGroup((), k), gens
    u, d, v = snf(x)
    # new sup basis rows = v^{-1} @ sup.basis; sub = rows of d times those
    vinv = v.inverse().to_integer()
    newbasis = vinv.to_rational() @ sup.basis
    finite, finite_gens, free_gens = [], [], []
    for i in range(k):
        di = d[i, i] if i < min(d.shape) else 0
        if di == 1:
            continue
        if di == 0:
            free_gens.append(newbasis.row(i))
        else:
            finite.append(di)
            finite_gens.append(newbasis.row(i))
    if sub.rank > sum(1 for i in range(min(d.shape)) if d[i, i]):
        raise NotASublattice("sub-lattice basis is dependent")
    return FinAbGroup(tuple(finite), len(free_gens)), finite_gens + free_gens


def dual_lattice(l: ZLattice, pairing: _Matrix) -> ZLattice:
    """{v in Q-span(l) : v @ pairing @ x in Z for all x in l}."""
    if l.rank == 0:
        return l
    b = l.basis
    gram = b @ pairing.to_rational() @ b.T
    if gram.det() == 0:
        raise DegeneratePairing("pairing is degenerate on the span of the lattice")
    return ZLattice(gram.inverse().T @ b, l.ambient_dim)


def reduce_mod(v: Sequence, l: ZLattice) -> tuple[Fraction, ...]:
    """Canonical representative of v + l.

    Reduces against the echelon (HNF) basis so that each pivot coordinate
    lands in (-p/2, p/2]; two vectors in the same coset reduce to the same
    representative.
    """
    v = [as_fraction(x) for x in v]
    h = l.hnf
    for row in h.rows:
        p = next(j for j, x in enumerate(row) if x != 0)
        piv = row[p]
        q = v[p] / piv
        k = _round_half_down(q)
        if k:
            v = [a - k * b for a, b in zip(v, row)]
    return tuple(v)


def _round_half_down(q: Fraction) -> int:
    # integer k with q - k in (-1/2, 1/2]
    return math.ceil(q - Fraction(1, 2))
