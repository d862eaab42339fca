import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from brauer_kit.errors import NotAnInvolution, NotEquivariant
from brauer_kit.exactlin import FinAbGroup, IntegerMatrix, ZLattice
from brauer_kit.invcoh import (
    EquivariantMap,
    InvolutionModule,
    cyclotomic_free_basis,
    cyclotomic_module,
    gaussian_integers,
    h1,
    h1_induced_image,
    h1_induced_kernel,
    is_free_over_involution,
    mat2_gaussian,
    ns_complement,
    ns_inclusion,
    ns_of_square,
    tate_h0,
)
from conftest import random_unimodular


def f2_rank(rows):
    rows = [[x % 2 for x in r] for r in rows]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                rows[i] = [(a + b) % 2 for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def decomposition_oracle(sigma: IntegerMatrix):
    """(a, b, c) with M = a trivial + b sign + c regular, read off from the
    rank r, the trace t, and the F_2-rank of sigma - 1 (which is c)."""
    r = sigma.nrows
    t = sigma.trace()
    c = f2_rank((sigma - IntegerMatrix.identity(r)).tolist())
    return (r - 2 * c + t) // 2, (r - 2 * c - t) // 2, c


@st.composite
def involution_modules(draw):
    a, b, c = draw(st.integers(0, 3)), draw(st.integers(0, 3)), draw(st.integers(0, 2))
    if a + b + c == 0:
        a = 1
    blocks = [IntegerMatrix([[1]])] * a + [IntegerMatrix([[-1]])] * b + \
        [IntegerMatrix([[0, 1], [1, 0]])] * c
    s = IntegerMatrix.block_diag(*blocks)
    p = random_unimodular(random.Random(draw(st.integers(0, 10 ** 6))), s.nrows)
    pinv = p.inverse().to_integer()
    return InvolutionModule(p @ s @ pinv), (a, b, c)


def test_basic_modules():
    assert tate_h0(InvolutionModule.trivial(3)) == FinAbGroup.elementary_2(3)
    assert h1(InvolutionModule.trivial(3)).is_trivial()
    assert tate_h0(InvolutionModule.sign(2)).is_trivial()
    assert h1(InvolutionModule.sign(2)) == FinAbGroup.elementary_2(2)
    reg = InvolutionModule.regular()
    assert tate_h0(reg).is_trivial() and h1(reg).is_trivial()
    assert is_free_over_involution(reg)


def test_rejects_non_involution():
    with pytest.raises(NotAnInvolution):
        InvolutionModule(IntegerMatrix([[0, -1], [1, 0]]))
    with pytest.raises(NotAnInvolution):
        InvolutionModule(IntegerMatrix([[1, 1], [0, 1]]))


@given(involution_modules())
def test_cohomology_matches_decomposition(mod_abc):
    m, (a, b, c) = mod_abc
    assert decomposition_oracle(m.sigma) == (a, b, c)
    assert tate_h0(m) == FinAbGroup.elementary_2(a)
    assert h1(m) == FinAbGroup.elementary_2(b)
    assert is_free_over_involution(m) == (a == 0 and b == 0)


@given(involution_modules(), involution_modules())
def test_cohomology_is_additive(x, y):
    m1, m2 = x[0], y[0]
    s = m1 + m2
    assert tate_h0(s) == tate_h0(m1) + tate_h0(m2)
    assert h1(s) == h1(m1) + h1(m2)


@given(involution_modules())
def test_cohomology_is_killed_by_two(mod_abc):
    m, _ = mod_abc
    assert tate_h0(m).is_elementary_2() and h1(m).is_elementary_2()


def test_equivariant_map_checks():
    with pytest.raises(NotEquivariant):
        EquivariantMap(InvolutionModule.trivial(1), InvolutionModule.sign(1), IntegerMatrix([[1]]))
    with pytest.raises(NotEquivariant):
        EquivariantMap(InvolutionModule.trivial(1), InvolutionModule.trivial(2), IntegerMatrix([[1]]))


@given(involution_modules(), involution_modules())
def test_kernel_and_image_split_h1(x, y):
    # inclusion of the first summand and projection onto it
    m1, m2 = x[0], y[0]
    s = m1 + m2
    k1, k2 = m1.rank, m2.rank
    inc = IntegerMatrix([[int(i == j) for j in range(k1)] for i in range(k1 + k2)])
    f = EquivariantMap(m1, s, inc)
    assert h1_induced_kernel(f).is_trivial()
    assert h1_induced_image(f) == h1(m1)
    proj = IntegerMatrix([[int(i == j) for j in range(k1 + k2)] for i in range(k1)])
    g = EquivariantMap(s, m1, proj)
    assert h1_induced_kernel(g) == h1(m2)
    assert (h1_induced_kernel(g).order * h1_induced_image(g).order) == h1(s).order


def test_multiplication_by_two_kills_h1():
    m = InvolutionModule.sign(2)
    f = EquivariantMap(m, m, IntegerMatrix.identity(2) * 2)
    assert h1_induced_kernel(f) == h1(m)
    assert h1_induced_image(f).is_trivial()


# -- cyclotomic -------------------------------------------------------------------

@pytest.mark.parametrize("n", range(3, 25))
def test_cyclotomic_free_iff_not_two_power(n):
    m = cyclotomic_module(n)
    two_power = n in (4, 8, 16)
    assert is_free_over_involution(m) == (not two_power)
    if two_power:
        assert tate_h0(m) == FinAbGroup((2,))
        assert h1(m) == FinAbGroup((2,))


@pytest.mark.parametrize("p,r", [(3, 1), (5, 1), (3, 2), (7, 1), (5, 2), (11, 1)])
def test_free_basis_certificate(p, r):
    cert = cyclotomic_free_basis(p, r)
    assert cert.ok
    assert abs(cert.change_of_basis_det) == 1
    assert len(cert.S) == len(cert.S_bar)


def test_free_basis_rejects_bad_input():
    with pytest.raises(ValueError):
        cyclotomic_free_basis(2, 3)
    with pytest.raises(ValueError):
        cyclotomic_free_basis(9, 1)


# -- E x E for y^2 = x^3 - x over R ---------------------------------------------------

def test_gaussian_integers():
    # H^1 of Z[i] with complex conjugation is Z/2
    assert h1(gaussian_integers()) == FinAbGroup((2,))
    assert tate_h0(gaussian_integers()) == FinAbGroup((2,))


def test_example_end_chain():
    f = ns_inclusion()
    assert h1(ns_of_square()) == FinAbGroup((2,))
    assert h1(mat2_gaussian()) == FinAbGroup.elementary_2(4)
    assert h1_induced_kernel(f).is_trivial()
    assert h1_induced_image(f) == FinAbGroup((2,))


def test_ns_is_a_direct_summand():
    inc = ns_inclusion().matrix
    comp = ns_complement()
    full = IntegerMatrix([list(inc.row(i)) + list(comp.row(i)) for i in range(8)])
    assert abs(full.det()) == 1
    # the complement is Galois-stable: sigma maps its span into itself
    sigma = mat2_gaussian().sigma
    image = sigma @ comp
    span = ZLattice.from_generators(comp.T)
    assert all(span.contains(image.col(j)) for j in range(comp.ncols))


def test_conjugate_transpose_is_not_the_galois_action():
    # (Re, Im) of entries 11, 12, 21, 22; X -> conj(X)^T swaps 12 and 21 and negates Im
    ct = [[0] * 8 for _ in range(8)]
    for src, dst in [(0, 0), (1, 1), (2, 4), (3, 5), (4, 2), (5, 3), (6, 6), (7, 7)]:
        ct[dst][src] = -1 if src % 2 else 1
    with pytest.raises(NotEquivariant):
        EquivariantMap(ns_of_square(), InvolutionModule(IntegerMatrix(ct)), ns_inclusion().matrix)
