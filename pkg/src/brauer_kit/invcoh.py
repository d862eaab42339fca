"""Tate cohomology of an involution acting on a free Z-module of finite rank.

Elements are column vectors; ``sigma`` acts as ``x -> sigma @ x``.  For
M = Z^r with an involution s::

    H^0(M) = M^s / (1+s)M        H^1(M) = M^{-s} / (1-s)M

Both groups are killed by 2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cyclotomic import conjugation_matrix, euler_phi, is_prime, zeta_power
from .errors import NotAnInvolution, NotEquivariant
from .exactlin import (
    FinAbGroup,
    IntegerMatrix,
    ZLattice,
    integer_kernel,
    lattice_quotient,
    preimage,
)


@dataclass(frozen=True)
class InvolutionModule:
    sigma: IntegerMatrix

    def __post_init__(self):
        s = self.sigma
        if not isinstance(s, IntegerMatrix):
            s = IntegerMatrix(s) if not hasattr(s, "to_integer") else s.to_integer()
            object.__setattr__(self, "sigma", s)
        if not s.is_square() or s @ s != IntegerMatrix.identity(s.nrows):
            raise NotAnInvolution("sigma^2 is not the identity")

    @property
    def rank(self) -> int:
        return self.sigma.nrows

    @classmethod
    def trivial(cls, rank: int) -> "InvolutionModule":
        return cls(IntegerMatrix.identity(rank))

    @classmethod
    def sign(cls, rank: int = 1) -> "InvolutionModule":
        return cls(-IntegerMatrix.identity(rank))

    @classmethod
    def regular(cls) -> "InvolutionModule":
        return cls(IntegerMatrix([[0, 1], [1, 0]]))

    def direct_sum(self, other: "InvolutionModule") -> "InvolutionModule":
        return InvolutionModule(IntegerMatrix.block_diag(self.sigma, other.sigma))

    __add__ = direct_sum

    # sub-lattices of Z^r used by both cohomology groups
    def fixed(self, sign: int = 1) -> ZLattice:
        """{x : sigma x = sign * x} (saturated by construction)."""
        return integer_kernel(self.sigma - IntegerMatrix.identity(self.rank) * sign)

    def norm_image(self, sign: int = 1) -> ZLattice:
        """(1 + sign*sigma) M, generated by the columns of that matrix."""
        m = IntegerMatrix.identity(self.rank) + self.sigma * sign
        return ZLattice.from_generators(m.T, self.rank)


def tate_h0(m: InvolutionModule) -> FinAbGroup:
    return lattice_quotient(m.norm_image(1), m.fixed(1))


def h1(m: InvolutionModule) -> FinAbGroup:
    return lattice_quotient(m.norm_image(-1), m.fixed(-1))


def is_free_over_involution(m: InvolutionModule) -> bool:
    # a Z[Z/2]-lattice is a sum of trivial, sign and regular pieces; the
    # first two are detected by H^0 and H^1 respectively
    return tate_h0(m).is_trivial() and h1(m).is_trivial()


@dataclass(frozen=True)
class EquivariantMap:
    """x -> matrix @ x from source (rank k) to target (rank n); matrix is n x k."""

    source: InvolutionModule
    target: InvolutionModule
    matrix: IntegerMatrix

    def __post_init__(self):
        a = self.matrix
        if a.shape != (self.target.rank, self.source.rank):
            raise NotEquivariant(f"matrix shape {a.shape} does not match the modules")
        if a @ self.source.sigma != self.target.sigma @ a:
            raise NotEquivariant("matrix does not intertwine the involutions")


def _h1_kernel_lattice(f: EquivariantMap) -> ZLattice:
    # cocycles z of the source whose image is a coboundary of the target;
    # membership of f(z) in (1 - s)N does not depend on the lift z
    z = f.source.fixed(-1)
    if z.rank == 0:
        return z
    images = z.basis @ f.matrix.T.to_rational()
    coeffs = preimage(images, f.target.norm_image(-1))
    return ZLattice.from_generators(coeffs.basis @ z.basis, f.source.rank)


def h1_induced_kernel(f: EquivariantMap) -> FinAbGroup:
    """Kernel of H^1(source) -> H^1(target)."""
    return lattice_quotient(f.source.norm_image(-1), _h1_kernel_lattice(f))


def h1_induced_image(f: EquivariantMap) -> FinAbGroup:
    """Image of H^1(source) in H^1(target), as the cokernel of ker -> H^1(source)."""
    return lattice_quotient(_h1_kernel_lattice(f), f.source.fixed(-1))


# -- cyclotomic integers ---------------------------------------------------

def cyclotomic_module(n: int) -> InvolutionModule:
    """Z[zeta_n] in the power basis with complex conjugation."""
    return InvolutionModule(IntegerMatrix(conjugation_matrix(n)).T)


@dataclass(frozen=True)
class FreeBasisCertificate:
    p: int
    r: int
    S: tuple[int, ...]
    S_bar: tuple[int, ...]
    change_of_basis_det: int
    swapped_by_conjugation: bool

    @property
    def ok(self) -> bool:
        return abs(self.change_of_basis_det) == 1 and self.swapped_by_conjugation


def cyclotomic_free_basis(p: int, r: int) -> FreeBasisCertificate:
    """Exponent sets S, S_bar for which {zeta^j : j in S u S_bar} is a Z-basis
    of Z[zeta_{p^r}] with conjugation exchanging zeta^j (j in S) and
    zeta^{n-j} (in S_bar); this exhibits Z[zeta] as free over Z[Z/2]."""
    if not is_prime(p) or p == 2:
        raise ValueError("p must be an odd prime")
    if r < 1:
        raise ValueError("r must be positive")
    n = p ** r
    half = p ** (r - 1) * (p - 1) // 2
    s = tuple(range(1, half + 1))
    s_bar = tuple(range(p ** (r - 1) * (p + 1) // 2, n))
    exps = s + s_bar
    assert len(exps) == euler_phi(n)
    change = IntegerMatrix([zeta_power(j, n) for j in exps])
    swapped = {n - j for j in s} == set(s_bar)
    return FreeBasisCertificate(p, r, s, s_bar, int(change.det()), swapped)


# -- the real elliptic curve y^2 = x^3 - x, A = E x E -----------------------
# Galois (complex conjugation) acts on End(E) = Z[i] by conjugation and on
# NS(E) trivially; Hom(A, A^dual) = Mat_2(Z[i]) with entrywise conjugation.

def gaussian_integers() -> InvolutionModule:
    """Z[i] on the basis (1, i) with conjugation."""
    return InvolutionModule(IntegerMatrix([[1, 0], [0, -1]]))


def ns_of_square() -> InvolutionModule:
    """NS = Z + Z + Z[i]: (a, b, x + iy) <-> [[a, x+iy], [x-iy, b]]."""
    return InvolutionModule(IntegerMatrix.diag([1, 1, 1, -1]))


def mat2_gaussian() -> InvolutionModule:
    """Mat_2(Z[i]), coordinates (Re, Im) of entries 11, 12, 21, 22."""
    return InvolutionModule(IntegerMatrix.diag([1, -1] * 4))


def ns_inclusion() -> EquivariantMap:
    # a -> entry 11, b -> entry 22, x+iy -> 12 = x+iy, 21 = x-iy
    m = IntegerMatrix([
        [1, 0, 0, 0],
        [0, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
        [0, 0, 0, -1],
        [0, 1, 0, 0],
        [0, 0, 0, 0],
    ])
    return EquivariantMap(ns_of_square(), mat2_gaussian(), m)


def ns_complement() -> IntegerMatrix:
    """Columns: upper-triangular matrices with purely imaginary diagonal
    (i on 11, i on 22, 1 on 12, i on 12); together with the image of NS they
    form a Z-basis of Mat_2(Z[i])."""
    cols = [
        [0, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 1],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0],
    ]
    return IntegerMatrix(cols).T
