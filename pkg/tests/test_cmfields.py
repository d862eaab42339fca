import json
import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brauer_kit import cmfields as cm
from brauer_kit.errors import (
    InvalidAlgebra,
    InvalidDiscriminants,
    NotAConjugationStableSubring,
    NotAnIdeal,
)
from brauer_kit.exactlin import FinAbGroup, IntegerMatrix, RationalMatrix, ZLattice
from brauer_kit.golden import ODD_INDEX_CHANGES
from brauer_kit.torus import (
    bilinear_forms,
    brauer_mod4_oracle,
    brauer_via_h1,
    end_rank,
    invariant_brauer,
    is_polarisation,
    odd_index_sublattice_brauer,
)
from conftest import random_unimodular

PAIRS = [(-3, -7), (-7, -11), (-3, -11), (-1, -5)]


# -- algebras -----------------------------------------------------------------------

def test_algebra_validation():
    q = RationalMatrix.identity(1)
    with pytest.raises(InvalidAlgebra):
        cm.EtaleAlgebra([[[1, 0], [0, 1]], [[0, 1], [0, 0]]], [1, 0], RationalMatrix.diag([1, -1]))  # Q[x]/x^2
    with pytest.raises(InvalidAlgebra):
        cm.EtaleAlgebra([[[1]]], [2], q)
    with pytest.raises(InvalidAlgebra):
        cm.EtaleAlgebra([[[1, 0], [0, 1]], [[0, 1], [-1, 0]]], [1, 0], RationalMatrix([[1, 1], [0, -1]]))
    with pytest.raises(InvalidAlgebra):
        cm.EtaleAlgebra([[[1, 0], [0, 1]], [[0, 1], [-1, 0]]], [1, 0], RationalMatrix.diag([-1, 1]))
    gauss = cm.EtaleAlgebra([[[1, 0], [0, 1]], [[0, 1], [-1, 0]]], [1, 0], RationalMatrix.diag([1, -1]))
    with pytest.raises(InvalidAlgebra):
        cm.AlgebraLattice(gauss, RationalMatrix([[1, 0], [2, 0]]))


@pytest.mark.parametrize("d1,d2", PAIRS)
def test_pair_algebra_arithmetic(d1, d2):
    a = cm.quadratic_pair_algebra(d1, d2)
    s = (0, 1, 0, 1)
    assert a.mul(s, s) == (d1, 0, d2, 0)
    assert a.trace(a.one) == 4
    x = (1, 2, 3, 4)
    assert a.mul(x, a.inverse(x)) == a.one


def test_algebra_json_roundtrip():
    l = cm.build_nonsimple_cm_surface(-3, -7)
    doc = json.loads(json.dumps(l.to_json()))
    assert cm.AlgebraLattice.from_json(doc) == l


# -- the non-simple CM surfaces -----------------------------------------------------

@pytest.mark.parametrize("d1,d2", PAIRS)
def test_surface_dual_module(d1, d2):
    # basis of D for the fiber-product lattice
    expected = RationalMatrix([
        [Fr(1, 2), 0, 0, 0],
        [Fr(1, 4), 0, Fr(-1, 4), 0],
        [0, Fr(1, 2 * d1), 0, 0],
        [0, Fr(1, 4 * d1), 0, Fr(-1, 4 * d2)],
    ])
    l = cm.build_nonsimple_cm_surface(d1, d2)
    d = cm.dual_module(l)
    assert d.lattice == ZLattice(expected, 4)


@pytest.mark.parametrize("d1,d2", PAIRS)
def test_surface_brauer(d1, d2):
    l = cm.build_nonsimple_cm_surface(d1, d2)
    br = cm.brauer_cm(l)
    e1 = (Fr(1, 2), 0, 0, 0)
    e2 = cm.surface_e2(d1, d2)
    assert br.symmetric_even == ZLattice.from_generators(RationalMatrix([[2 * c for c in e1], e2]), 4)
    assert br.norms == ZLattice.from_generators(RationalMatrix([[2 * c for c in e1], [2 * c for c in e2]]), 4)
    assert br.group == FinAbGroup((2,))
    assert br.same_class(br.generators[0], e2)
    assert cm.format_pair(br.generators[0], d1, d2) == "(1/4, -1/4)"


@pytest.mark.parametrize("d1,d2", PAIRS)
def test_product_surface_is_trivial(d1, d2):
    assert cm.brauer_cm(cm.build_product_cm_surface(d1, d2)).group.is_trivial()


@pytest.mark.parametrize("d1,d2", [(-3, -3), (-2, -7), (-3, -5), (3, -7), (-9, -7), (-1, -7)])
def test_discriminant_preconditions(d1, d2):
    with pytest.raises(InvalidDiscriminants):
        cm.build_nonsimple_cm_surface(d1, d2)


@pytest.mark.parametrize("d1,d2", PAIRS)
def test_surface_torus_bridge(d1, d2):
    l = cm.build_nonsimple_cm_surface(d1, d2)
    t = cm.cm_torus(l, cm.surface_theta(d1, d2))
    fl = cm.form_lattice(l)
    assert end_rank(t) == 4
    assert bilinear_forms(t).lattice == fl.lattice
    g = invariant_brauer(fl)
    assert g == brauer_via_h1(fl) == brauer_mod4_oracle(fl) == cm.brauer_cm(l).group
    pol = cm.form_gram(l, cm.surface_polarisation_element(d1, d2))
    assert pol.is_integral() and is_polarisation(pol.to_integer(), t)


def test_cm_torus_needs_imaginary_theta():
    l = cm.build_nonsimple_cm_surface(-3, -7)
    with pytest.raises(InvalidAlgebra):
        cm.cm_torus(l, (1, 0, 0, 0))


@pytest.mark.parametrize("c", ODD_INDEX_CHANGES, ids=lambda c: f"index{c.det()}")
def test_odd_index_sublattices_keep_the_class(c):
    l = cm.build_nonsimple_cm_surface(-3, -7)
    assert cm.brauer_cm(l.sublattice(c)).group == FinAbGroup((2,))
    assert odd_index_sublattice_brauer(cm.form_lattice(l), c) == FinAbGroup((2,))


# -- quartic and cyclotomic ---------------------------------------------------------

def test_quartic():
    l = cm.build_quartic_cm()
    br = cm.brauer_cm(l)
    assert br.group == FinAbGroup((2,))
    assert br.same_class(br.generators[0], cm.quartic_generator())
    assert l.algebra.format(cm.quartic_generator()) == "1/20*sqrt(5)"
    facts = cm.quartic_field_facts()
    # N(-30 + 8 sqrt 5) = 900 - 320 = 580, not a square
    assert facts["norm_delta"] == 580 and not facts["norm_is_square"]
    assert facts["totally_negative"] and facts["delta_over_2_is_square_mod_8"]
    fl = cm.form_lattice(l)
    assert invariant_brauer(fl) == brauer_via_h1(fl) == brauer_mod4_oracle(fl) == br.group


@pytest.mark.parametrize("n", range(3, 25))
def test_cyclotomic_brauer_vanishes(n):
    assert cm.cyclotomic_brauer(n).group.is_trivial()


@pytest.mark.parametrize("n", [3, 4, 5, 7, 8, 9, 12])
def test_cyclotomic_routes_agree(n):
    _, ok = cm.cyclotomic_algebra(n)
    fl = cm.form_lattice(ok)
    assert invariant_brauer(fl).is_trivial() and brauer_via_h1(fl).is_trivial()


@pytest.mark.parametrize("n", range(3, 25))
def test_different(n):
    alg, ok = cm.cyclotomic_algebra(n)
    assert cm.inverse_different(n) == cm.dual_module_subring(ok)
    # independent check: |N(different)| = |disc Z[zeta_n]| = |det trace form|
    norm = alg.mult_matrix(cm.cyclotomic_different(n)).det()
    assert abs(norm) == abs(alg.trace_gram().det())


def test_dual_module_subring_precondition():
    _, ok = cm.cyclotomic_algebra(5)
    with pytest.raises(NotAConjugationStableSubring):
        cm.dual_module_subring(ok.scale(2))


def test_ideal_lattices():
    alg, ok = cm.cyclotomic_algebra(5)
    z = alg.basis_vector(1)
    one_plus_z = alg.add(alg.one, z)
    i = cm.ideal_span(5, [one_plus_z])
    assert i == ok.multiply(one_plus_z)
    assert cm.ideal_lattice_brauer(5, i.elements()).group.is_trivial()
    p2 = cm.ideal_span(7, [[2, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0]])
    assert cm.ideal_lattice_brauer(7, p2.elements()).group == cm.brauer_cm(p2).group
    with pytest.raises(NotAnIdeal):
        cm.ideal_lattice_brauer(5, [[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    with pytest.raises(NotAnIdeal):
        cm.ideal_lattice_brauer(5, [[1, 0, 0, 0]])


# -- properties ----------------------------------------------------------------------

@settings(max_examples=25)
@given(st.sampled_from(PAIRS), st.fractions(min_value=Fr(1, 6), max_value=6).filter(bool))
def test_scaling_preserves_brauer(pair, c):
    l = cm.build_nonsimple_cm_surface(*pair)
    assert cm.brauer_cm(l.scale(c)).group == cm.brauer_cm(l).group


@st.composite
def sublattice_changes(draw):
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    diag = [draw(st.integers(1, 4)) for _ in range(4)]
    u = random_unimodular(rng, 4)
    return u @ IntegerMatrix.diag(diag)


@settings(max_examples=30)
@given(st.sampled_from(PAIRS + [(0, 0)]), sublattice_changes())
def test_cm_route_matches_torus_routes(pair, c):
    l = cm.build_quartic_cm() if pair == (0, 0) else cm.build_nonsimple_cm_surface(*pair)
    sub = l.sublattice(c)
    fl = cm.form_lattice(sub)
    g = cm.brauer_cm(sub).group
    assert g.is_elementary_2()
    assert g == invariant_brauer(fl) == brauer_via_h1(fl) == brauer_mod4_oracle(fl)
    if c.det() % 2:
        assert g == cm.brauer_cm(l).group
