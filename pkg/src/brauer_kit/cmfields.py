"""Étale Q-algebras with an involution, trace-dual lattices and the
Brauer group of CM lattices.

Elements are row vectors of coordinates in the algebra basis.  For a
lattice Λ in a CM algebra K with conjugation ι:

    D(Λ) = {α : tr(α x ι(y)) ∈ Z for all x, y in Λ}
    Br   = {α in D : ι(α) = α, tr(α x ι(x)) even on Λ} / (1 + ι) D
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache, cached_property
from typing import Sequence

from .cyclotomic import cyclotomic_poly, euler_phi, prime_factors, zeta_power
from .errors import (
    InvalidAlgebra,
    InvalidDiscriminants,
    NotAConjugationStableSubring,
    NotAnIdeal,
)
from .exactlin import (
    FinAbGroup,
    IntegerMatrix,
    RationalMatrix,
    ZLattice,
    congruence_sublattice,
    dual_lattice,
    integer_kernel,
    quotient_with_generators,
    reduce_mod,
)
from .exactlin.matrix import _Matrix, as_fraction

Elem = tuple  # tuple of Fractions


class EtaleAlgebra:
    """Commutative Q-algebra given by structure constants, with involution.

    ``mult_table[i][j]`` is the coordinate vector of e_i * e_j; ``conjugation``
    has rows ι(e_i), so ι(x) = x @ conjugation.
    """

    def __init__(self, mult_table, one, conjugation, names: Sequence[str] | None = None,
                 check: bool = True):
        self.dim = len(mult_table)
        self.mult_table = tuple(tuple(tuple(as_fraction(c) for c in v) for v in row)
                                for row in mult_table)
        self.one = tuple(as_fraction(c) for c in one)
        conj = conjugation if isinstance(conjugation, _Matrix) else RationalMatrix(conjugation)
        self.conjugation = conj.to_rational()
        self.names = tuple(names) if names else tuple(f"e{i}" for i in range(self.dim))
        # sparse structure constants (i, j, k, c): e_i e_j has coefficient c on e_k
        self._sparse = [[[(k, c) for k, c in enumerate(v) if c] for v in row]
                        for row in self.mult_table]
        # the same constants scaled to integers, for the multiplication loop
        self._table_den = math.lcm(*(c.denominator for row in self.mult_table for v in row for c in v))
        self._isparse = [[[(k, int(c * self._table_den)) for k, c in cell] for cell in row]
                         for row in self._sparse]
        self._basis_traces = tuple(sum((self.mult_table[i][j][j] for j in range(self.dim)), Fraction(0))
                                   for i in range(self.dim))
        self._gram = None
        if check:
            self.validate()

    def __repr__(self):
        return f"EtaleAlgebra(dim={self.dim}, basis={self.names})"

    # -- arithmetic --------------------------------------------------------
    def elem(self, coords: Sequence) -> Elem:
        if len(coords) != self.dim:
            raise ValueError("wrong number of coordinates")
        return tuple(as_fraction(c) for c in coords)

    def mul(self, x: Sequence, y: Sequence) -> Elem:
        xs, dx = _integer_scaled(self.elem(x))
        ys, dy = _integer_scaled(self.elem(y))
        out = [0] * self.dim
        for i, a in enumerate(xs):
            if not a:
                continue
            row = self._isparse[i]
            for j, b in enumerate(ys):
                if b:
                    ab = a * b
                    for k, c in row[j]:
                        out[k] += ab * c
        den = dx * dy * self._table_den
        return tuple(Fraction(v, den) for v in out)

    def mult_matrix(self, x: Sequence) -> RationalMatrix:
        """M_x with rows x * e_j, so that x * y = y @ M_x."""
        x = self.elem(x)
        return RationalMatrix([self.mul(x, self.basis_vector(j)) for j in range(self.dim)],
                              ncols=self.dim)

    def add(self, x, y) -> Elem:
        return tuple(a + b for a, b in zip(self.elem(x), self.elem(y)))

    def sub(self, x, y) -> Elem:
        return tuple(a - b for a, b in zip(self.elem(x), self.elem(y)))

    def scale(self, x, c) -> Elem:
        c = as_fraction(c)
        return tuple(a * c for a in self.elem(x))

    def conj(self, x: Sequence) -> Elem:
        return self.conjugation.rapply(self.elem(x))

    def trace(self, x: Sequence) -> Fraction:
        # the trace is linear, so only the traces of basis vectors are needed
        return sum((a * t for a, t in zip(self.elem(x), self._basis_traces) if a), Fraction(0))

    def inverse(self, x: Sequence) -> Elem:
        m = self.mult_matrix(x)
        if m.det() == 0:
            raise ZeroDivisionError("element is not invertible")
        return m.inverse().rapply(self.one)

    def basis_vector(self, i: int) -> Elem:
        return tuple(Fraction(int(i == j)) for j in range(self.dim))

    def trace_gram(self) -> RationalMatrix:
        if self._gram is None:
            t = self._basis_traces
            self._gram = RationalMatrix([[sum((c * t[k] for k, c in self._sparse[i][j]), Fraction(0))
                                          for j in range(self.dim)] for i in range(self.dim)])
        return self._gram

    # -- validation -----------------------------------------------------------
    def validate(self) -> None:
        n = self.dim
        if any(len(r) != n or any(len(v) != n for v in r) for r in self.mult_table):
            raise InvalidAlgebra("multiplication table has the wrong shape")
        if self.conjugation.shape != (n, n) or len(self.one) != n:
            raise InvalidAlgebra("conjugation or unit has the wrong size")
        e = [self.basis_vector(i) for i in range(n)]
        for i in range(n):
            if self.mul(self.one, e[i]) != e[i]:
                raise InvalidAlgebra("'one' is not a unit")
            for j in range(n):
                if self.mult_table[i][j] != self.mult_table[j][i]:
                    raise InvalidAlgebra("multiplication is not commutative")
                for k in range(n):
                    if self.mul(self.mul(e[i], e[j]), e[k]) != self.mul(e[i], self.mul(e[j], e[k])):
                        raise InvalidAlgebra("multiplication is not associative")
        c = self.conjugation
        if c @ c != RationalMatrix.identity(n):
            raise InvalidAlgebra("conjugation is not an involution")
        if self.conj(self.one) != self.one:
            raise InvalidAlgebra("conjugation does not fix 1")
        for i in range(n):
            for j in range(n):
                if self.conj(self.mul(e[i], e[j])) != self.mul(self.conj(e[i]), self.conj(e[j])):
                    raise InvalidAlgebra("conjugation is not multiplicative")
        if self.trace_gram().det() == 0:
            raise InvalidAlgebra("trace form is degenerate (algebra is not étale)")

    def format(self, x: Sequence) -> str:
        terms = []
        for c, nm in zip(self.elem(x), self.names):
            if c:
                terms.append(_q(c) if nm == "1" else f"{_q(c)}*{nm}")
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "mult_table": [[[_q(c) for c in v] for v in r] for r in self.mult_table],
                "one": [_q(c) for c in self.one],
                "conjugation": [[_q(c) for c in r] for r in self.conjugation.rows],
                "names": list(self.names)}

    @classmethod
    def from_json(cls, d: dict) -> "EtaleAlgebra":
        return cls(d["mult_table"], d["one"], RationalMatrix(d["conjugation"]), d.get("names"))


def _integer_scaled(v: Sequence[Fraction]) -> tuple[list[int], int]:
    """(w, d) with v = w / d and w integral."""
    d = math.lcm(*(a.denominator for a in v)) if v else 1
    return [a.numerator * (d // a.denominator) for a in v], d


def _q(x) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, eq=False)
class AlgebraLattice:
    algebra: EtaleAlgebra
    basis: RationalMatrix

    def __post_init__(self):
        b = self.basis if isinstance(self.basis, _Matrix) else RationalMatrix(self.basis)
        b = b.to_rational()
        object.__setattr__(self, "basis", b)
        if b.shape != (self.algebra.dim, self.algebra.dim) or b.det() == 0:
            raise InvalidAlgebra("lattice must have full rank in the algebra")

    @classmethod
    def from_generators(cls, algebra: EtaleAlgebra, gens) -> "AlgebraLattice":
        lat = ZLattice.from_generators(RationalMatrix(gens, ncols=algebra.dim), algebra.dim)
        return cls(algebra, lat.basis)

    @cached_property
    def lattice(self) -> ZLattice:
        return ZLattice(self.basis, self.algebra.dim)

    def __eq__(self, other):
        if not isinstance(other, AlgebraLattice):
            return NotImplemented
        same_algebra = self.algebra is other.algebra or self.algebra.to_json() == other.algebra.to_json()
        return same_algebra and self.lattice == other.lattice

    __hash__ = None

    def __contains__(self, x) -> bool:
        return self.lattice.contains(x)

    def elements(self) -> list[Elem]:
        return [tuple(r) for r in self.basis.rows]

    def scale(self, c) -> "AlgebraLattice":
        return AlgebraLattice(self.algebra, self.basis * as_fraction(c))

    def multiply(self, x) -> "AlgebraLattice":
        """x * Λ"""
        return AlgebraLattice(self.algebra, self.basis @ self.algebra.mult_matrix(x))

    def sublattice(self, c: _Matrix) -> "AlgebraLattice":
        """Lattice with basis rows c @ basis (index |det c|)."""
        return AlgebraLattice(self.algebra, c.to_rational() @ self.basis)

    def is_conjugation_stable(self) -> bool:
        return all(self.algebra.conj(x) in self for x in self.elements())

    def is_subring(self) -> bool:
        a = self.algebra
        if a.one not in self:
            return False
        es = self.elements()
        return all(a.mul(x, y) in self for x in es for y in es)

    def to_json(self) -> dict:
        return {"algebra": self.algebra.to_json(),
                "basis": [[_q(c) for c in r] for r in self.basis.rows]}

    @classmethod
    def from_json(cls, d: dict) -> "AlgebraLattice":
        return cls(EtaleAlgebra.from_json(d["algebra"]), RationalMatrix(d["basis"]))


def trace(k: EtaleAlgebra, x: Sequence) -> Fraction:
    return k.trace(x)


def _pair_products(l: AlgebraLattice) -> list[Elem]:
    a = l.algebra
    es = l.elements()
    return [a.mul(x, a.conj(y)) for x in es for y in es]


def dual_module(l: AlgebraLattice) -> AlgebraLattice:
    """{α : tr(α x ι(y)) ∈ Z for all x, y in Λ}: the trace dual of the
    lattice spanned by the products x ι(y)."""
    a = l.algebra
    w = ZLattice.from_generators(RationalMatrix(_pair_products(l), ncols=a.dim), a.dim)
    return AlgebraLattice(a, dual_lattice(w, a.trace_gram()).basis)


def dual_module_subring(l: AlgebraLattice) -> AlgebraLattice:
    """Trace dual {α : tr(α x) ∈ Z for x in Λ}; valid when Λ is a
    conjugation-stable subring."""
    if not (l.is_subring() and l.is_conjugation_stable()):
        raise NotAConjugationStableSubring("lattice is not a conjugation-stable subring")
    return AlgebraLattice(l.algebra, dual_lattice(l.lattice, l.algebra.trace_gram()).basis)


@dataclass
class CMBrauer:
    group: FinAbGroup
    generators: list[Elem]
    dual: AlgebraLattice
    symmetric_even: ZLattice
    norms: ZLattice

    def same_class(self, x: Sequence, y: Sequence) -> bool:
        return tuple(as_fraction(a) - as_fraction(b) for a, b in zip(x, y)) in self.norms


def brauer_cm(l: AlgebraLattice) -> CMBrauer:
    """D^{ι,even} / (1+ι)D with generators reduced modulo (1+ι)D."""
    a = l.algebra
    d = dual_module(l)
    db = d.basis
    k = a.dim
    ident = RationalMatrix.identity(k)
    # ι-fixed part, in D-coordinates
    fixed = integer_kernel((db @ (a.conjugation - ident)).T)
    gram = a.trace_gram()
    # B_α(b, b) = tr(α b ι(b)) = α T w_b
    conds = RationalMatrix([(db @ gram).apply(a.mul(b, a.conj(b))) for b in l.elements()], ncols=k)
    sym_even_c = congruence_sublattice(fixed, conds, 2) if fixed.rank else fixed
    sym_even = ZLattice(sym_even_c.basis @ db, k) if sym_even_c.rank else ZLattice.zero(k)
    norms = ZLattice.from_generators(db @ (ident + a.conjugation), k)
    grp, gens = quotient_with_generators(norms, sym_even)
    gens = [reduce_mod(g, norms) for g in gens]
    return CMBrauer(grp, gens, d, sym_even, norms)


# -- bridge to the torus module ------------------------------------------------

def form_gram(l: AlgebraLattice, alpha: Sequence) -> RationalMatrix:
    """Gram matrix of B_α(x, y) = tr(α x ι(y)) on the lattice basis."""
    a = l.algebra
    es = l.elements()
    return RationalMatrix([[a.trace(a.mul(alpha, a.mul(x, a.conj(y)))) for y in es] for x in es])


def form_lattice(l: AlgebraLattice):
    """{B_α : α in D(Λ)} as a FormLattice."""
    from .torus import FormLattice

    d = dual_module(l)
    return FormLattice(l.algebra.dim, [form_gram(l, alpha).to_integer() for alpha in d.elements()])


def multiplication_on_lattice(l: AlgebraLattice, x: Sequence) -> RationalMatrix:
    """Matrix of y -> x y in lattice coordinates (column convention)."""
    bm = l.basis
    return (bm @ l.algebra.mult_matrix(x) @ bm.inverse()).T


def cm_torus(l: AlgebraLattice, theta: Sequence):
    """RationalTorus with J = multiplication by a purely imaginary θ whose
    square is (negative) rational on each simple factor."""
    from .torus import RationalTorus

    a = l.algebra
    if a.conj(theta) != a.scale(theta, -1):
        raise InvalidAlgebra("θ must satisfy ι(θ) = -θ")
    return RationalTorus(multiplication_on_lattice(l, theta))


# -- cyclotomic fields -------------------------------------------------------------

@cache
def cyclotomic_algebra(n: int) -> tuple[EtaleAlgebra, AlgebraLattice]:
    """Q(ζ_n) on the power basis, with O_K = Z[ζ_n]."""
    if n < 3:
        raise ValueError("n must be at least 3")
    deg = len(cyclotomic_poly(n)) - 1
    table = [[zeta_power(i + j, n) for j in range(deg)] for i in range(deg)]
    conj = [zeta_power(-j, n) for j in range(deg)]
    names = ["1"] + [f"z^{j}" if j > 1 else "z" for j in range(1, deg)]
    alg = EtaleAlgebra(table, zeta_power(0, n), RationalMatrix(conj), names, check=deg <= 8)
    return alg, AlgebraLattice(alg, RationalMatrix.identity(deg))


def cyclotomic_different(n: int) -> Elem:
    """Generator of the different of Q(ζ_n):
    n ∏_{p | n} 1/(ζ_p - ζ_p^-1) for odd n, (n/2) ∏_{odd p | n} 1/(ζ_p - ζ_p^-1) for even n."""
    alg, _ = cyclotomic_algebra(n)
    g = alg.scale(alg.one, n if n % 2 else Fraction(n, 2))
    for p in prime_factors(n):
        if p == 2:
            continue
        zp = zeta_power(n // p, n)
        g = alg.mul(g, alg.inverse(alg.sub(zp, alg.conj(zp))))
    return g


def inverse_different(n: int) -> AlgebraLattice:
    """generator^-1 * O_K for the closed-form generator."""
    alg, ok = cyclotomic_algebra(n)
    return ok.multiply(alg.inverse(cyclotomic_different(n)))


def cyclotomic_brauer(n: int) -> CMBrauer:
    _, ok = cyclotomic_algebra(n)
    return brauer_cm(ok)


def ideal_span(n: int, gens: Sequence[Sequence]) -> AlgebraLattice:
    """O_K-ideal generated by ``gens`` in Z[ζ_n]."""
    alg, _ = cyclotomic_algebra(n)
    deg = alg.dim
    zs = [alg.basis_vector(j) for j in range(deg)]
    prods = [alg.mul(z, g) for g in gens for z in zs]
    return AlgebraLattice.from_generators(alg, prods)


def ideal_lattice_brauer(n: int, ideal_gens: Sequence[Sequence]) -> CMBrauer:
    """Brauer group of K_R / I for the lattice I spanned over Z by ``ideal_gens``."""
    alg, _ = cyclotomic_algebra(n)
    try:
        lat = AlgebraLattice.from_generators(alg, [alg.elem(g) for g in ideal_gens])
    except InvalidAlgebra:
        raise NotAnIdeal("generators do not span a full-rank lattice") from None
    zeta = alg.basis_vector(1) if alg.dim > 1 else None
    if zeta is None or any(alg.mul(zeta, x) not in lat for x in lat.elements()):
        raise NotAnIdeal("lattice is not closed under multiplication by ζ")
    return brauer_cm(lat)


# -- quadratic pieces and the explicit surfaces -------------------------------------

def _squarefree(d: int) -> bool:
    d = abs(d)
    p = 2
    while p * p <= d:
        if d % (p * p) == 0:
            return False
        p += 1
    return d >= 1


def quadratic_pair_algebra(d1: int, d2: int) -> EtaleAlgebra:
    """Q(√d1) + Q(√d2) on the basis (1,0), (√d1,0), (0,1), (0,√d2)."""
    z = [0, 0, 0, 0]

    def v(*c):
        return list(c)

    table = [
        [v(1, 0, 0, 0), v(0, 1, 0, 0), z, z],
        [v(0, 1, 0, 0), v(d1, 0, 0, 0), z, z],
        [z, z, v(0, 0, 1, 0), v(0, 0, 0, 1)],
        [z, z, v(0, 0, 0, 1), v(0, 0, d2, 0)],
    ]
    return EtaleAlgebra(table, [1, 0, 1, 0], RationalMatrix.diag([1, -1, 1, -1]),
                        ["(1,0)", f"(sqrt({d1}),0)", "(0,1)", f"(0,sqrt({d2}))"])


def _check_discriminants(d1: int, d2: int) -> None:
    for d in (d1, d2):
        if d >= 0 or not _squarefree(d):
            raise InvalidDiscriminants(f"{d} is not a negative square-free integer")
        if d % 2 == 0:
            raise InvalidDiscriminants(f"{d} is even; the construction needs odd d")
    if d1 == d2:
        raise InvalidDiscriminants("d1 and d2 must differ")
    if (d1 - d2) % 4:
        raise InvalidDiscriminants("d1 and d2 must be congruent mod 4")


def build_nonsimple_cm_surface(d1: int, d2: int) -> AlgebraLattice:
    """{(x1, x2) in Z[√d1] + Z[√d2] : x1 = x2 in F_2[x]/(x^2)}, generated by
    (2,0), (1,1), (2√d1,0), (√d1,√d2)."""
    _check_discriminants(d1, d2)
    alg = quadratic_pair_algebra(d1, d2)
    gens = [[2, 0, 0, 0], [1, 0, 1, 0], [0, 2, 0, 0], [0, 1, 0, 1]]
    return AlgebraLattice(alg, RationalMatrix(gens))


def build_product_cm_surface(d1: int, d2: int) -> AlgebraLattice:
    """Z[√d1] + Z[√d2]: the product of the two elliptic curves."""
    _check_discriminants(d1, d2)
    alg = quadratic_pair_algebra(d1, d2)
    return AlgebraLattice(alg, RationalMatrix.identity(4))


def surface_e2(d1: int, d2: int) -> Elem:
    """(1/4, -1/4)"""
    return (Fraction(1, 4), Fraction(0), Fraction(-1, 4), Fraction(0))


def surface_polarisation_element(d1: int, d2: int) -> Elem:
    """(1/(4√d1), 1/(4√d2)) = (√d1/(4 d1), √d2/(4 d2))."""
    return (Fraction(0), Fraction(1, 4 * d1), Fraction(0), Fraction(1, 4 * d2))


def surface_theta(d1: int, d2: int) -> Elem:
    """(√d1, √d2): its square is rational on each factor."""
    return (Fraction(0), Fraction(1), Fraction(0), Fraction(1))


def format_pair(x: Sequence, d1: int, d2: int) -> str:
    """Render an element of Q(√d1) + Q(√d2) as '(a + b*sqrt(d1), c + e*sqrt(d2))'."""
    def comp(a, b, d):
        a, b = as_fraction(a), as_fraction(b)
        if b == 0:
            return _q(a)
        s = f"{_q(b)}*sqrt({d})"
        return s if a == 0 else f"{_q(a)} + {s}"

    return f"({comp(x[0], x[1], d1)}, {comp(x[2], x[3], d2)})"


QUARTIC_D = 5
QUARTIC_DELTA = (-30, 8)  # δ = -30 + 8√5


def quartic_algebra() -> EtaleAlgebra:
    """K = Q(√5)(√δ) on the basis 1, s = √5, t = √δ, st."""
    a, b = QUARTIC_DELTA
    table = [
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        [[0, 1, 0, 0], [5, 0, 0, 0], [0, 0, 0, 1], [0, 0, 5, 0]],
        [[0, 0, 1, 0], [0, 0, 0, 1], [a, b, 0, 0], [5 * b, a, 0, 0]],
        [[0, 0, 0, 1], [0, 0, 5, 0], [5 * b, a, 0, 0], [5 * a, 5 * b, 0, 0]],
    ]
    return EtaleAlgebra(table, [1, 0, 0, 0], RationalMatrix.diag([1, 1, -1, -1]),
                        ["1", "sqrt(5)", "sqrt(delta)", "sqrt(5)*sqrt(delta)"])


def build_quartic_cm() -> AlgebraLattice:
    """Λ = Z[√5] + Z[√5]√δ.

    δ = 2(-15 + 4√5) and -15 + 4√5 is a square of a 2-adic unit, so
    Z_2[√5]√δ = Z_2[√5]√2 and Λ ⊗ Z_2 = Z_2 + Z_2√5 + Z_2√e + Z_2√(5e)
    with e = 2.  The Brauer quotient is 2-primary, so this global lattice
    gives the same group as any lattice with that 2-adic completion.
    """
    return AlgebraLattice(quartic_algebra(), RationalMatrix.identity(4))


def quartic_generator() -> Elem:
    """1/(4√5) = √5/20."""
    return (Fraction(0), Fraction(1, 20), Fraction(0), Fraction(0))


def quartic_field_facts() -> dict:
    """Checks that K is CM, not biquadratic, but biquadratic over Q_2."""
    a, b = QUARTIC_DELTA
    d = QUARTIC_D
    norm = a * a - b * b * d
    # both real embeddings of δ negative: a ± b√d < 0  <=>  a < 0 and a^2 > b^2 d
    totally_negative = a < 0 and a * a > b * b * d
    # δ = 2 u with u = -15 + 4√5; (2 + √5)^2 = 9 + 4√5; u - (9 + 4√5) = -24 ≡ 0 mod 8
    u = (a // 2, b // 2)
    sq = (2 * 2 + d, 2 * 2)
    hensel = (u[0] - sq[0]) % 8 == 0 and (u[1] - sq[1]) % 8 == 0
    return {
        "norm_delta": norm,
        "norm_is_square": math.isqrt(norm) ** 2 == norm if norm >= 0 else False,
        "totally_negative": totally_negative,
        "delta_over_2": list(u),
        "delta_over_2_is_square_mod_8": hensel,
    }
