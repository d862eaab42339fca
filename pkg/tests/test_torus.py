import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brauer_kit.constructions import build_even_form
from brauer_kit.errors import (
    EvenIndex,
    InstanceTooLarge,
    NoNondegenerateForm,
    NotAComplexStructure,
    NotSaturated,
    NotTauStable,
    TableViolation,
)
from brauer_kit.exactlin import FinAbGroup, IntegerMatrix, RationalMatrix
from brauer_kit.torus import (
    FormLattice,
    RationalTorus,
    albert_bound,
    bilinear_forms,
    brauer_mod4_oracle,
    brauer_via_h1,
    brauer_with_generators,
    check_bi_ends,
    end_rank,
    endomorphisms,
    find_polarisation,
    hermitian_gram,
    invariant_brauer,
    is_polarisation,
    ns_forms,
    ns_rank,
    nondegenerate_witness,
    odd_index_sublattice_brauer,
    product,
    transport_forms,
    transport_torus,
    upper_bound_check,
)
from conftest import random_unimodular, tau_stable_lattices

J1 = [[0, -1], [1, 0]]


def routes(f):
    return invariant_brauer(f), brauer_via_h1(f), brauer_mod4_oracle(f)


# -- tori -------------------------------------------------------------------------

def test_standard_torus():
    t = RationalTorus.standard(1)
    f = bilinear_forms(t)
    assert f.lattice == FormLattice(2, [IntegerMatrix.identity(2), IntegerMatrix([[0, 1], [-1, 0]])]).lattice
    assert end_rank(t) == 2
    assert ns_rank(f) == 1
    assert all(g.is_trivial() for g in routes(f))
    pol = find_polarisation(t)
    assert pol.status == "found"
    assert pol.form == IntegerMatrix([[0, -1], [1, 0]])


def test_standard_g2_bi_ends():
    t = RationalTorus.standard(2)
    rep = check_bi_ends(t)
    assert rep.forms_rank == 8 and rep.end_rank == 8 and rep.equal
    assert rep.witness.det() != 0


def test_complex_structure_validation():
    with pytest.raises(NotAComplexStructure):
        RationalTorus(RationalMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
    with pytest.raises(NotAComplexStructure):
        RationalTorus(RationalMatrix([[0, -1], [1, 1]]))  # -J^2 has complex eigenvalues
    with pytest.raises(NotAComplexStructure):
        RationalTorus(RationalMatrix([[1, 0], [0, 1]]))  # -J^2 = -1
    with pytest.raises(NotAComplexStructure):
        RationalTorus(RationalMatrix(J1), g=2)


def test_scaled_complex_structure():
    # a non-integral J that still squares to -1
    t = RationalTorus(RationalMatrix([[0, -2], [Fraction(1, 2), 0]]))
    assert t.is_standard()
    f = bilinear_forms(t)
    assert IntegerMatrix([[1, 0], [0, 4]]) in f
    # J^2 = -2: the true structure is J / sqrt 2
    t2 = RationalTorus(RationalMatrix([[0, -2], [1, 0]]))
    assert not t2.is_standard()
    f2 = bilinear_forms(t2)
    assert f2.rank == 2
    assert IntegerMatrix([[1, 0], [0, 2]]) in f2
    assert invariant_brauer(f2).is_trivial()


def test_mixed_square_classes():
    # -J^2 with eigenvalues 1 and 2 on two blocks: no forms mix the blocks
    j = RationalMatrix.block_diag(RationalMatrix(J1), RationalMatrix([[0, -2], [1, 0]]))
    t = RationalTorus(j)
    assert len(t.structures) == 2
    f = bilinear_forms(t)
    assert f.rank == 4
    assert end_rank(t) == 4


@given(st.integers(0, 10 ** 6))
def test_transported_torus_forms(seed):
    c = random_unimodular(random.Random(seed), 4)
    t = RationalTorus.standard(2)
    assert bilinear_forms(transport_torus(t, c)).lattice == transport_forms(bilinear_forms(t), c).lattice


@given(st.integers(0, 10 ** 6))
def test_torus_json_roundtrip(seed):
    rng = random.Random(seed)
    c = random_unimodular(rng, 2).to_rational() * Fraction(rng.randint(1, 5), rng.randint(1, 5))
    j = c.inverse() @ RationalMatrix(J1) @ c
    t = RationalTorus(j)
    doc = json.loads(json.dumps(t.to_json()))
    assert all(isinstance(x, str) for r in doc["J"] for x in r)
    assert RationalTorus.from_json(doc).J == t.J


# -- form lattices -----------------------------------------------------------------

def test_form_lattice_validation():
    with pytest.raises(NotTauStable):
        FormLattice(2, [IntegerMatrix([[0, 1], [0, 0]])])
    with pytest.raises(NotSaturated):
        FormLattice(2, [IntegerMatrix.identity(2) * 2])
    with pytest.raises(ValueError):
        FormLattice(2, [IntegerMatrix.identity(3)])
    f = FormLattice.from_span(2, [IntegerMatrix([[0, 1], [0, 0]])])
    assert f.rank == 2


@given(tau_stable_lattices())
def test_form_lattice_json_roundtrip(f):
    doc = json.loads(json.dumps(f.to_json()))
    assert FormLattice.from_json(doc).lattice == f.lattice


def test_golden_brauer_values():
    # 2 I_2 + H + H (g = 3) carries Z/2
    s = build_even_form(3).S
    f = FormLattice(6, [s])
    assert all(g == FinAbGroup((2,)) for g in routes(f))
    rep = upper_bound_check(f)
    assert (rep.brauer_dim, rep.forms_rank, rep.ns_rank) == (1, 1, 0)
    # an odd diagonal entry kills the class
    f_odd = FormLattice(2, [IntegerMatrix.diag([1, 2])])
    assert all(g.is_trivial() for g in routes(f_odd))


def test_brauer_generators_are_symmetric_even():
    f = FormLattice(6, [build_even_form(3).S])
    grp, gens = brauer_with_generators(f)
    assert len(gens) == 1
    g = gens[0]
    assert g.is_symmetric() and all(g[i, i] % 2 == 0 for i in range(6))


def test_rank_zero():
    f = FormLattice(3, [])
    assert all(g.is_trivial() for g in routes(f))


def test_mod4_rank_limit():
    f = bilinear_forms(RationalTorus.standard(3))
    assert f.rank == 18
    with pytest.raises(InstanceTooLarge):
        brauer_mod4_oracle(f)
    assert invariant_brauer(f) == brauer_via_h1(f)


@settings(max_examples=60)
@given(tau_stable_lattices())
def test_three_routes_agree(f):
    a, b, c = routes(f)
    assert a == b == c


@settings(max_examples=60)
@given(tau_stable_lattices())
def test_brauer_is_elementary_and_bounded(f):
    g = invariant_brauer(f)
    assert g.is_elementary_2()
    assert g.f2_dim <= f.rank - ns_rank(f)


@settings(max_examples=40)
@given(tau_stable_lattices(max_rank=4, max_n=5), st.integers(0, 10 ** 6))
def test_brauer_invariant_under_change_of_basis(f, seed):
    c = random_unimodular(random.Random(seed), f.n)
    assert invariant_brauer(transport_forms(f, c)) == invariant_brauer(f)


@settings(max_examples=30)
@given(tau_stable_lattices(max_rank=3, max_n=4), tau_stable_lattices(max_rank=3, max_n=4))
def test_direct_sum_adds(f1, f2):
    assert invariant_brauer(f1.direct_sum(f2)) == invariant_brauer(f1) + invariant_brauer(f2)


def test_products_of_elliptic_curves():
    t = product(RationalTorus.standard(1), RationalTorus(RationalMatrix([[0, -2], [1, 0]])))
    f = bilinear_forms(t)
    assert f.rank == 4 and end_rank(t) == 4
    assert invariant_brauer(f).is_trivial()
    # E x E shares all the Hom(E, E) forms
    f2 = bilinear_forms(RationalTorus.standard(2))
    assert f2.rank == 8
    assert invariant_brauer(f2) == brauer_via_h1(f2) == brauer_mod4_oracle(f2)


def test_odd_index_requires_odd():
    f = bilinear_forms(RationalTorus.standard(1))
    with pytest.raises(EvenIndex):
        odd_index_sublattice_brauer(f, IntegerMatrix.diag([1, 2]))
    with pytest.raises(EvenIndex):
        odd_index_sublattice_brauer(f, IntegerMatrix.diag([1, 0]))
    assert odd_index_sublattice_brauer(f, IntegerMatrix.diag([1, 3])).is_trivial()


# -- witnesses, bounds, polarisations ---------------------------------------------

def test_nondegenerate_witness():
    assert nondegenerate_witness([]) is None
    assert nondegenerate_witness([IntegerMatrix([[1, 0], [0, 0]])]) is None
    w = nondegenerate_witness([IntegerMatrix([[1, 0], [0, 0]]), IntegerMatrix([[0, 0], [0, 1]])])
    assert w.det() != 0
    # six degenerate 8 x 8 forms: the certifying grid 9^6 is too big
    z = [[0] * 8 for _ in range(8)]
    forms = []
    for i in range(6):
        m = [r[:] for r in z]
        m[i][i] = 1
        forms.append(IntegerMatrix(m))
    with pytest.raises(InstanceTooLarge):
        nondegenerate_witness(forms)


def test_check_bi_ends_needs_a_nondegenerate_form():
    t = RationalTorus.standard(1)
    degenerate = FormLattice(2, [IntegerMatrix([[1, 0], [0, 0]])])
    with pytest.raises(NoNondegenerateForm):
        check_bi_ends(t, degenerate)


def test_albert_bound():
    a = albert_bound([(1, 2, "IV", 2, 1)])
    assert (a.value, a.bound) == (4, 4)
    b = albert_bound([(1, 2, "I", 1, 0)])
    assert b.value == 1 and b.holds
    with pytest.raises(TableViolation):
        albert_bound([(1, 1, "V", 1, 0)])
    with pytest.raises(TableViolation):
        albert_bound([(1, 1, "I", 2, 0)])
    with pytest.raises(TableViolation):
        albert_bound([(1, 1, "IV", 2, 0)])


def test_polarisation_checks():
    t = RationalTorus.standard(1)
    e = IntegerMatrix([[0, -1], [1, 0]])
    assert is_polarisation(e, t)
    assert not is_polarisation(-e, t)
    assert not is_polarisation(IntegerMatrix.identity(2), t)
    assert hermitian_gram(e, t) == RationalMatrix.identity(2)


def test_polarisation_search_statuses():
    s = build_even_form(3).S
    t = RationalTorus.standard(3)
    assert find_polarisation(t, forms=FormLattice(6, [s])).status == "non-algebraisable"
    # a lattice spanned by -E still finds a positive polarisation
    neg = FormLattice(2, [IntegerMatrix([[0, 1], [-1, 0]])])
    assert find_polarisation(RationalTorus.standard(1), coeff_bound=1, forms=neg).status == "found"
    assert ns_forms(neg) == [IntegerMatrix([[0, 1], [-1, 0]])]


def test_endomorphisms_commute():
    t = RationalTorus(RationalMatrix([[0, -2], [1, 0]]))
    j = t.J
    for v in endomorphisms(t).basis.rows:
        u = RationalMatrix.from_flat(list(v), 2, 2)
        assert u @ j == j @ u


def test_polarisation_none_found_for_indefinite_ns():
    e = IntegerMatrix.block_diag(IntegerMatrix([[0, -1], [1, 0]]), IntegerMatrix([[0, 1], [-1, 0]]))
    f = FormLattice(4, [e])
    assert ns_rank(f) == 1
    assert find_polarisation(RationalTorus.standard(2), forms=f).status == "none-found"
