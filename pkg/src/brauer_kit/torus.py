"""Complex tori Λ_R/Λ with Λ = Z^n (n = 2g) and a rational complex structure.

Conventions: lattice vectors are columns, J acts by x -> J x, and a bilinear
form is its Gram matrix G with B(x, y) = x^T G y.  τ is transposition of
forms.  The invariant Brauer group is computed three independent ways:

* ``invariant_brauer``      symmetric even forms modulo (1 + τ)
* ``brauer_via_h1``         kernel of H^1(L) -> H^1(all forms), σ = -τ
* ``brauer_mod4_oracle``    enumeration of L/2 and L/4

A rational matrix can only square to -1 if the torus is "rational"; to cover
CM tori such as Q(√d1) + Q(√d2) we also accept J whose square is -(positive
rational) on each of its eigenspaces.  The actual complex structure is then
J (-J^2)^(-1/2), which is generally irrational; see ``RationalTorus``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EvenIndex,
    InstanceTooLarge,
    NoNondegenerateForm,
    NotAComplexStructure,
    NotSaturated,
    NotTauStable,
    TableViolation,
)
from .exactlin import (
    FinAbGroup,
    IntegerMatrix,
    RationalMatrix,
    ZLattice,
    congruence_sublattice,
    integer_kernel,
    integer_points,
    is_positive_definite,
    nullspace,
    quotient_with_generators,
)
from .exactlin.matrix import _Matrix, as_fraction
from .invcoh import EquivariantMap, InvolutionModule, h1_induced_kernel


def _squarefree_part(q: Fraction) -> int:
    """Squarefree integer s with q = s * (rational)^2, q > 0."""
    m = q.numerator * q.denominator
    s, p = 1, 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
        if m % p == 0:
            s *= p
            m //= p
        p += 1
    return s * m


def _rational_sqrt(q: Fraction) -> Fraction:
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a != q.numerator or b * b != q.denominator:
        raise ValueError(f"{q} is not a rational square")
    return Fraction(a, b)


def _rational_eigenvalues(a: RationalMatrix) -> list[Fraction]:
    """Distinct eigenvalues of a diagonalisable matrix with rational spectrum.

    Candidates come from a floating point solve and are then certified
    exactly: prod (a - λ) must vanish.  Raises ValueError otherwise.
    """
    n = a.nrows
    approx = np.linalg.eigvals(np.array([[float(x) for x in r] for r in a.rows]))
    cands = []
    for z in approx:
        if abs(z.imag) > 1e-6:
            raise ValueError("non-real eigenvalue")
        q = Fraction(z.real).limit_denominator(10 ** 6)
        if q not in cands:
            cands.append(q)
    ident = RationalMatrix.identity(n)
    prod = ident
    for q in cands:
        prod = prod @ (a - ident * q)
    if not prod.is_zero():
        raise ValueError("spectrum is not rational or matrix is not diagonalisable")
    return sorted(cands)


@dataclass(frozen=True, eq=False)
class RationalTorus:
    """Torus on Λ = Z^(2g) with complex-structure data J.

    J must satisfy J^2 = -I, or more generally -J^2 diagonalisable with
    positive rational eigenvalues λ_k.  In the latter case the complex
    structure is J_true = Σ_k J P_k / √λ_k (P_k the eigenprojections).
    Grouping the λ_k by square class c gives rational operators
    R_c = Σ_{k in c} J P_k √(λ_c/λ_k) with J_true = Σ_c R_c / √λ_c, and
    since the √λ_c are Q-linearly independent, a rational form or
    endomorphism is compatible with J_true iff it is compatible with every
    R_c.
    """

    J: RationalMatrix
    g: int = field(default=-1)

    def __post_init__(self):
        j = self.J
        if not isinstance(j, _Matrix):
            j = RationalMatrix(j)
        j = j.to_rational()
        object.__setattr__(self, "J", j)
        if not j.is_square() or j.nrows % 2:
            raise NotAComplexStructure("J must be a square matrix of even size")
        if self.g < 0:
            object.__setattr__(self, "g", j.nrows // 2)
        elif 2 * self.g != j.nrows:
            raise NotAComplexStructure("J has the wrong size for g")
        object.__setattr__(self, "_structures", self._compute_structures())

    def _compute_structures(self) -> tuple[RationalMatrix, ...]:
        j = self.J
        n = j.nrows
        ident = RationalMatrix.identity(n)
        a = -(j @ j)
        if a == ident:
            return (j,)
        try:
            lams = _rational_eigenvalues(a)
        except ValueError as exc:
            raise NotAComplexStructure(f"-J^2 is not rational semisimple: {exc}") from None
        if any(l <= 0 for l in lams):
            raise NotAComplexStructure("-J^2 has a non-positive eigenvalue")
        projs = []
        for k, lk in enumerate(lams):
            p = ident
            for l, ll in enumerate(lams):
                if l != k:
                    p = p @ (a - ident * ll) * (1 / (lk - ll))
            projs.append(p)
        classes: dict[int, list[int]] = {}
        for k, lk in enumerate(lams):
            classes.setdefault(_squarefree_part(lk), []).append(k)
        out = []
        for _, ks in sorted(classes.items()):
            lc = lams[ks[0]]
            r = RationalMatrix.zeros(n)
            for k in ks:
                r = r + j @ projs[k] * _rational_sqrt(lc / lams[k])
            out.append(r)
        return tuple(out)

    @property
    def n(self) -> int:
        return self.J.nrows

    @property
    def structures(self) -> tuple[RationalMatrix, ...]:
        """The rational operators R_c (a single one, J itself, when J^2 = -1)."""
        return self._structures

    def is_standard(self) -> bool:
        return len(self.structures) == 1 and self.structures[0] == self.J and \
            self.J @ self.J == -RationalMatrix.identity(self.n)

    @classmethod
    def standard(cls, g: int = 1) -> "RationalTorus":
        j = IntegerMatrix([[0, -1], [1, 0]])
        return cls(IntegerMatrix.block_diag(*([j] * g)).to_rational())

    def to_json(self) -> dict:
        return {"g": self.g, "J": [[_q(x) for x in r] for r in self.J.rows]}

    @classmethod
    def from_json(cls, d: dict) -> "RationalTorus":
        return cls(RationalMatrix(d["J"]), int(d.get("g", -1)))


def _q(x) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _vec(m: _Matrix) -> tuple:
    return m.flat()


def _unvec(v: Sequence, n: int) -> IntegerMatrix:
    return IntegerMatrix.from_flat([int(x) for x in v], n, n)


# -- form lattices -----------------------------------------------------------

class FormLattice:
    """A τ-stable lattice of integral bilinear forms on Z^n, saturated in
    the integral points of its Q-span.

    ``forms`` is a Z-basis.  Use ``FormLattice.from_span`` to saturate
    arbitrary generators first.
    """

    def __init__(self, n: int, forms: Iterable, check: bool = True):
        self.n = int(n)
        fs = []
        for f in forms:
            f = f if isinstance(f, _Matrix) else IntegerMatrix(f)
            if f.shape != (self.n, self.n) or not f.is_integral():
                raise ValueError("forms must be integral n x n matrices")
            fs.append(f.to_integer())
        self.forms: tuple[IntegerMatrix, ...] = tuple(fs)
        self.lattice = ZLattice(RationalMatrix([_vec(f) for f in fs], ncols=self.n ** 2), self.n ** 2)
        if check:
            self.tau_matrix()
            if not self.is_saturated():
                raise NotSaturated("form lattice is not saturated in its rational span")

    @classmethod
    def from_span(cls, n: int, forms: Iterable) -> "FormLattice":
        """Integral points of the Q-span of the given forms and their transposes."""
        fs = [f if isinstance(f, _Matrix) else RationalMatrix(f) for f in forms]
        gens = [_vec(f) for f in fs] + [_vec(f.T) for f in fs]
        if not gens:
            return cls(n, [])
        lat = integer_points(RationalMatrix(gens, ncols=n * n), n * n)
        return cls(n, [_unvec(r, n) for r in lat.basis.rows])

    @property
    def rank(self) -> int:
        return len(self.forms)

    def __repr__(self):
        return f"FormLattice(n={self.n}, rank={self.rank})"

    def coordinates(self, g: _Matrix) -> tuple[int, ...] | None:
        c = self.lattice.coordinates(_vec(g))
        if c is None or any(x.denominator != 1 for x in c):
            return None
        return tuple(int(x) for x in c)

    def __contains__(self, g: _Matrix) -> bool:
        return g.shape == (self.n, self.n) and self.coordinates(g) is not None

    def tau_matrix(self) -> IntegerMatrix:
        """Row i holds the coordinates of forms[i]^T."""
        rows = []
        for f in self.forms:
            c = self.coordinates(f.T)
            if c is None:
                raise NotTauStable("transpose of a basis form leaves the lattice")
            rows.append(c)
        return IntegerMatrix(rows, ncols=self.rank)

    def is_saturated(self) -> bool:
        if self.rank == 0:
            return True
        return integer_points(self.lattice.basis, self.n ** 2) == self.lattice

    def form(self, coeffs: Sequence[int]) -> IntegerMatrix:
        out = IntegerMatrix.zeros(self.n)
        for c, f in zip(coeffs, self.forms):
            if c:
                out = out + f * int(c)
        return out

    def to_json(self) -> dict:
        return {"n": self.n, "forms": [f.tolist() for f in self.forms]}

    @classmethod
    def from_json(cls, d: dict) -> "FormLattice":
        return cls(int(d["n"]), [IntegerMatrix(f) for f in d["forms"]])

    def direct_sum(self, other: "FormLattice") -> "FormLattice":
        """Forms of a product torus that are block diagonal (no cross terms)."""
        n1, n2 = self.n, other.n
        z2, z1 = IntegerMatrix.zeros(n2), IntegerMatrix.zeros(n1)
        fs = [IntegerMatrix.block_diag(f, z2) for f in self.forms]
        fs += [IntegerMatrix.block_diag(z1, f) for f in other.forms]
        return FormLattice(n1 + n2, fs)


def _compat_rows(r: RationalMatrix, forms: bool) -> list[list[Fraction]]:
    """Linear equations on vec(X) for R^T X + X R = 0 (forms) or
    X R - R X = 0 (endomorphisms)."""
    n = r.nrows
    rows = []
    for i in range(n):
        for j in range(n):
            eq = [Fraction(0)] * (n * n)
            # (X R)_ij = Σ_k X_ik R_kj
            for k in range(n):
                if r[k, j]:
                    eq[i * n + k] += r[k, j]
            if forms:
                # (R^T X)_ij = Σ_k R_ki X_kj
                for k in range(n):
                    if r[k, i]:
                        eq[k * n + j] += r[k, i]
            else:
                # -(R X)_ij = -Σ_k R_ik X_kj
                for k in range(n):
                    if r[i, k]:
                        eq[k * n + j] -= r[i, k]
            rows.append(eq)
    return rows


def _solve_compatible(t: RationalTorus, forms: bool) -> ZLattice:
    rows = []
    for r in t.structures:
        rows += _compat_rows(r, forms)
    sol = nullspace(RationalMatrix(rows, ncols=t.n ** 2))
    return integer_points(sol, t.n ** 2)


def bilinear_forms(t: RationalTorus) -> FormLattice:
    """All integral G with J^T G = -G J (for every structure operator)."""
    lat = _solve_compatible(t, forms=True)
    return FormLattice(t.n, [_unvec(r, t.n) for r in lat.basis.rows], check=False)


def endomorphisms(t: RationalTorus) -> ZLattice:
    """Integer matrices commuting with J, vectorised row-major."""
    return _solve_compatible(t, forms=False)


def end_rank(t: RationalTorus) -> int:
    return endomorphisms(t).rank


def ns_sublattice(f: FormLattice) -> ZLattice:
    """Alternating forms in f (vectorised)."""
    if f.rank == 0:
        return ZLattice.zero(f.n ** 2)
    # c with Σ c_i (F_i + F_i^T) = 0
    cols = RationalMatrix([_vec(x + x.T) for x in f.forms], ncols=f.n ** 2).T
    coeffs = integer_kernel(cols)
    return ZLattice.from_generators(coeffs.basis @ f.lattice.basis, f.n ** 2) \
        if coeffs.rank else ZLattice.zero(f.n ** 2)


def ns_forms(f: FormLattice) -> list[IntegerMatrix]:
    return [_unvec(r, f.n) for r in ns_sublattice(f).basis.rows]


def ns_rank(f: FormLattice) -> int:
    return ns_sublattice(f).rank


# -- nondegeneracy witness ----------------------------------------------------

@dataclass
class BiEndsReport:
    forms_rank: int
    end_rank: int
    witness: IntegerMatrix | None

    @property
    def equal(self) -> bool:
        return self.forms_rank == self.end_rank


def nondegenerate_witness(forms: Sequence[IntegerMatrix], seed: int = 0,
                          random_trials: int = 32, grid_limit: int = 200_000):
    """An integral combination of ``forms`` with nonzero determinant, or None.

    Random combinations settle almost every case.  If they all vanish, the
    grid {0..n}^k is searched when it is small enough: det(Σ t_i F_i) has
    degree at most n in each t_i, so a nonzero polynomial cannot vanish on
    the whole grid.  Returns None only after the exhaustive grid, and raises
    ``InstanceTooLarge`` if the grid is too big to certify a negative.
    """
    if not forms:
        return None
    n = forms[0].nrows
    rng = random.Random(seed)

    def combo(ts):
        out = IntegerMatrix.zeros(n)
        for t, f in zip(ts, forms):
            if t:
                out = out + f * t
        return out

    for _ in range(random_trials):
        ts = [rng.randint(-10 ** 6, 10 ** 6) for _ in forms]
        m = combo(ts)
        if m.det() != 0:
            return m
    k = len(forms)
    if (n + 1) ** k > grid_limit:
        raise InstanceTooLarge(
            f"no nondegenerate form in {random_trials} random trials and grid (n+1)^k = "
            f"{(n + 1) ** k} is too large to certify")
    for ts in itertools.product(range(n + 1), repeat=k):
        m = combo(ts)
        if m.det() != 0:
            return m
    return None


def check_bi_ends(t: RationalTorus, forms: FormLattice | None = None) -> BiEndsReport:
    """Compare rk(forms) with rk(End) when some form is nondegenerate.

    ``forms`` overrides the computed form lattice (useful for checking the
    hypothesis on lattices that no rational J produces).
    """
    f = bilinear_forms(t) if forms is None else forms
    w = nondegenerate_witness(f.forms)
    if w is None:
        raise NoNondegenerateForm("every form in the lattice is degenerate")
    return BiEndsReport(f.rank, end_rank(t), w)


# -- the three Brauer computations --------------------------------------------

def _sym_even_and_norms(f: FormLattice) -> tuple[ZLattice, ZLattice]:
    """Coordinates (in Z^k) of the symmetric even forms and of (1+τ)f."""
    k, n = f.rank, f.n
    tau = f.tau_matrix()
    # symmetric: c (T - I) = 0 in row convention
    sym = integer_kernel((tau - IntegerMatrix.identity(k)).T)
    if sym.rank:
        diag = RationalMatrix([[f.forms[i][d, d] for i in range(k)] for d in range(n)], ncols=k)
        sym_even = congruence_sublattice(sym, diag, 2)
    else:
        sym_even = sym
    norms = ZLattice.from_generators(tau + IntegerMatrix.identity(k), k)
    return sym_even, norms


def invariant_brauer(f: FormLattice) -> FinAbGroup:
    """Symmetric forms with even diagonal modulo (1+τ)f."""
    return brauer_with_generators(f)[0]


def brauer_with_generators(f: FormLattice) -> tuple[FinAbGroup, list[IntegerMatrix]]:
    if f.rank == 0:
        return FinAbGroup(), []
    sym_even, norms = _sym_even_and_norms(f)
    grp, gens = quotient_with_generators(norms, sym_even)
    return grp, [f.form([int(x) for x in g]) for g in gens]


def _transpose_perm(n: int) -> IntegerMatrix:
    p = [[0] * (n * n) for _ in range(n * n)]
    for i in range(n):
        for j in range(n):
            p[j * n + i][i * n + j] = 1
    return IntegerMatrix(p)


def brauer_via_h1(f: FormLattice) -> FinAbGroup:
    """Kernel of H^1(f) -> H^1(all integral forms) for σ(B) = -B^T."""
    if f.rank == 0:
        return FinAbGroup()
    n, k = f.n, f.rank
    # column convention: coordinates c map to Σ c_i F_i; σ on coordinates is -T^T
    src = InvolutionModule(-f.tau_matrix().T)
    tgt = InvolutionModule(-_transpose_perm(n))
    inclusion = IntegerMatrix([_vec(x) for x in f.forms], ncols=n * n).T
    return h1_induced_kernel(EquivariantMap(src, tgt, inclusion))


MOD4_RANK_LIMIT = 12


def brauer_mod4_oracle(f: FormLattice) -> FinAbGroup:
    """(L/2 ∩ alt mod 2) / image of (L/4 ∩ alt mod 4), by enumeration.

    Mod 2, "alternating" means symmetric with even diagonal; mod 4 it means
    x = -x^T with diagonal divisible by 4.
    """
    k, n = f.rank, f.n
    if k > MOD4_RANK_LIMIT:
        raise InstanceTooLarge(f"rank {k} > {MOD4_RANK_LIMIT}")
    if k == 0:
        return FinAbGroup()
    forms = np.array([np.array(x.tolist(), dtype=np.int64) for x in f.forms])
    iu = np.triu_indices(n, 1)
    di = np.arange(n)
    # linear functionals in the coordinates: off-diagonal x_ij + x_ji, diagonal x_ii
    off = (forms + forms.transpose(0, 2, 1))[:, iu[0], iu[1]]   # k x m1
    dia = forms[:, di, di]                                       # k x n
    cond = np.concatenate([off, dia], axis=1) % 4                # k x m

    mod2 = np.array(list(itertools.product(range(2), repeat=k)), dtype=np.int64)
    ok2 = ~((mod2 @ cond) % 2).any(axis=1)
    n2 = int(ok2.sum())
    # mod 4: only lifts c = a + 2b of mod 2 solutions a can qualify
    a = mod2[ok2]
    images = set()
    weights = 1 << np.arange(k, dtype=np.int64)
    step = max(1, (1 << 18) // len(mod2))
    for start in range(0, len(a), step):
        chunk = a[start:start + step]
        c = (chunk[:, None, :] + 2 * mod2[None, :, :]).reshape(-1, k)
        good = ~((c @ cond) % 4).any(axis=1)
        if good.any():
            images.update(int(x) for x in np.unique((c[good] % 2) @ weights))
    d2 = len(images)
    dim = round(math.log2(n2)) - round(math.log2(d2))
    return FinAbGroup.elementary_2(dim)


# -- bounds --------------------------------------------------------------------

@dataclass
class BoundReport:
    brauer_dim: int
    forms_rank: int
    ns_rank: int

    @property
    def bound(self) -> int:
        return self.forms_rank - self.ns_rank

    @property
    def holds(self) -> bool:
        return self.brauer_dim <= self.bound


def upper_bound_check(f: FormLattice) -> BoundReport:
    """dim_F2 Br against rk forms - rk NS; callers read ``holds``."""
    return BoundReport(invariant_brauer(f).f2_dim, f.rank, ns_rank(f))


_ALBERT = {
    # type: (max dim D as a multiple of dim A_i, dim D^- as a fraction of dim D)
    "I": (1, Fraction(0)),
    "II": (2, Fraction(1, 4)),
    "III": (1, Fraction(3, 4)),
    "IV": (2, Fraction(1, 2)),
}


@dataclass
class AlbertReport:
    value: int
    bound: int
    dim: int

    @property
    def holds(self) -> bool:
        return self.value <= self.bound


def albert_bound(factors: Sequence[tuple]) -> AlbertReport:
    """factors: (dim A_i, n_i, type, dim_Q D_i, dim_Q D_i^-) per isotypic part."""
    value, dim, nmax = 0, 0, 0
    for dim_a, n_i, typ, dim_d, dim_dm in factors:
        typ = str(typ).upper()
        if typ not in _ALBERT:
            raise TableViolation(f"unknown Albert type {typ!r}")
        mult, frac = _ALBERT[typ]
        if dim_a < 1 or n_i < 1 or dim_d < 1:
            raise TableViolation("dimensions and multiplicities must be positive")
        if dim_d > mult * dim_a:
            raise TableViolation(f"type {typ}: dim D = {dim_d} exceeds {mult} * {dim_a}")
        if Fraction(dim_dm) != frac * dim_d:
            raise TableViolation(f"type {typ}: dim D^- must be {frac * dim_d}, got {dim_dm}")
        value += n_i * (n_i - 1) // 2 * dim_d + n_i * dim_dm
        dim += n_i * dim_a
        nmax = max(nmax, n_i)
    return AlbertReport(value, nmax * dim, dim)


# -- products, isogenies, polarisations -----------------------------------------

def product(t1: RationalTorus, t2: RationalTorus) -> RationalTorus:
    return RationalTorus(RationalMatrix.block_diag(t1.J, t2.J))


def odd_index_sublattice_brauer(f: FormLattice, basis_change: _Matrix) -> FinAbGroup:
    """Brauer group of the torus on the sublattice C Z^n (|det C| odd).

    Forms pull back to C^T G C; the result is re-saturated because the
    sublattice carries more integral forms than the pulled-back ones.
    """
    c = basis_change.to_integer()
    d = c.det()
    if d == 0:
        raise EvenIndex("basis change is singular")
    if d % 2 == 0:
        raise EvenIndex(f"index {abs(d)} is even")
    return invariant_brauer(transport_forms(f, c))


def transport_forms(f: FormLattice, c: IntegerMatrix) -> FormLattice:
    if f.rank == 0:
        return FormLattice(f.n, [])
    ct = c.T
    return FormLattice.from_span(f.n, [ct @ g @ c for g in f.forms])


def transport_torus(t: RationalTorus, c: IntegerMatrix) -> RationalTorus:
    """J expressed on the sublattice C Z^n."""
    return RationalTorus(c.to_rational().inverse() @ t.J @ c.to_rational())


def hermitian_gram(e: _Matrix, t: RationalTorus) -> RationalMatrix:
    """Σ_c R_c^T E; positive definite iff E(J_true x, y) is."""
    e = e.to_rational()
    out = RationalMatrix.zeros(t.n)
    for r in t.structures:
        out = out + r.T @ e
    return out


def is_polarisation(e: _Matrix, t: RationalTorus) -> bool:
    if e.shape != (t.n, t.n) or not e.is_integral() or not e.is_alternating():
        return False
    for r in t.structures:
        if r.T @ e.to_rational() != -(e.to_rational() @ r):
            return False
    h = hermitian_gram(e, t)
    return h.is_symmetric() and is_positive_definite(h)


@dataclass
class PolarisationSearch:
    status: str  # "found", "non-algebraisable", "none-found"
    form: IntegerMatrix | None = None


def find_polarisation(t: RationalTorus, coeff_bound: int = 2,
                      forms: FormLattice | None = None) -> PolarisationSearch:
    """Search small combinations of the NS basis for a polarisation.

    NS of rank 0 is a definitive negative; otherwise "none-found" says
    nothing beyond the searched box.
    """
    f = bilinear_forms(t) if forms is None else forms
    basis = ns_forms(f)
    if not basis:
        return PolarisationSearch("non-algebraisable")
    # small sup-norm first
    for b in range(1, coeff_bound + 1):
        for cs in itertools.product(range(-b, b + 1), repeat=len(basis)):
            if max(abs(x) for x in cs) != b:
                continue
            e = IntegerMatrix.zeros(t.n)
            for c, x in zip(cs, basis):
                if c:
                    e = e + x * c
            if is_polarisation(e, t):
                return PolarisationSearch("found", e)
    return PolarisationSearch("none-found")
