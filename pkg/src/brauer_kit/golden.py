"""Golden expectations: every exact value the package is built to reproduce.

Each check returns a list of ``Item``s; ``run_golden`` runs selected groups
(optionally on a thread pool) and ``snf_fault`` corrupts the Smith normal
form so that the suite can be seen to fail.
"""

from __future__ import annotations

import contextlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from unittest import mock

from . import cmfields as cm
from . import constructions as cons
from . import invcoh
from . import torus as tor
from .exactlin import IntegerMatrix, RationalMatrix
from .exactlin import lattice as _lattice_mod
from .exactlin import normalforms as _nf

SURFACE_PAIRS = [(-3, -7), (-7, -11), (-3, -11)]
CYCLOTOMIC_RANGE = range(3, 25)
CONSTRUCTION_GENERA = range(3, 7)


@dataclass
class Item:
    group: str
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{tag}  {self.group}: {self.name}{extra}"


def three_routes(f: tor.FormLattice) -> dict:
    """Invariant factors from each Brauer route that the rank permits."""
    routes = {
        "calc": list(tor.invariant_brauer(f).invariant_factors),
        "duo": list(tor.brauer_via_h1(f).invariant_factors),
    }
    if f.rank <= tor.MOD4_RANK_LIMIT:
        routes["uno"] = list(tor.brauer_mod4_oracle(f).invariant_factors)
    return routes


def _agree(routes: dict) -> bool:
    vals = list(routes.values())
    return all(v == vals[0] for v in vals)


def check_cm_surfaces() -> list[Item]:
    out = []
    for d1, d2 in SURFACE_PAIRS:
        l = cm.build_nonsimple_cm_surface(d1, d2)
        br = cm.brauer_cm(l)
        e2 = cm.surface_e2(d1, d2)
        ok = br.group.invariant_factors == (2,) and br.same_class(br.generators[0], e2)
        shown = cm.format_pair(br.generators[0], d1, d2)
        out.append(Item("cm-surface", f"d=({d1},{d2}) gives Z/2 generated by (1/4, -1/4)", ok,
                        f"{br.group}, generator {shown}"))
        routes = three_routes(cm.form_lattice(l))
        routes["cm"] = list(br.group.invariant_factors)
        out.append(Item("cm-surface", f"d=({d1},{d2}) route agreement", _agree(routes), str(routes)))
        prod = cm.brauer_cm(cm.build_product_cm_surface(d1, d2))
        out.append(Item("cm-surface", f"d=({d1},{d2}) product lattice gives 0",
                        prod.group.is_trivial(), str(prod.group)))
    return out


def check_quartic() -> list[Item]:
    l = cm.build_quartic_cm()
    br = cm.brauer_cm(l)
    facts = cm.quartic_field_facts()
    ok = br.group.invariant_factors == (2,) and br.same_class(br.generators[0], cm.quartic_generator())
    fields_ok = (not facts["norm_is_square"] and facts["totally_negative"]
                 and facts["delta_over_2_is_square_mod_8"])
    routes = three_routes(cm.form_lattice(l))
    routes["cm"] = list(br.group.invariant_factors)
    return [
        Item("quartic-cm", "Z/2 generated by 1/(4 sqrt 5)", ok,
             f"{br.group}, generator {l.algebra.format(br.generators[0])}"),
        Item("quartic-cm", "field is CM, not biquadratic, biquadratic over Q_2", fields_ok, str(facts)),
        Item("quartic-cm", "route agreement", _agree(routes), str(routes)),
    ]


def check_cyclotomic() -> list[Item]:
    bad = [n for n in CYCLOTOMIC_RANGE if not cm.cyclotomic_brauer(n).group.is_trivial()]
    return [Item("cyclotomic", "Br = 0 for n = 3..24", not bad, f"nonzero for {bad}" if bad else "")]


def check_different() -> list[Item]:
    bad = []
    for n in CYCLOTOMIC_RANGE:
        _, ok_ = cm.cyclotomic_algebra(n)
        if cm.inverse_different(n) != cm.dual_module_subring(ok_):
            bad.append(n)
    return [Item("different", "closed-form generator matches trace dual for n = 3..24", not bad,
                 f"mismatch for {bad}" if bad else "")]


def check_constructions() -> list[Item]:
    out = []
    for g in CONSTRUCTION_GENERA:
        d_even = cons.build_even_form(g)
        c_even = cons.even_form_checks(d_even)
        b_even = tor.invariant_brauer(tor.FormLattice(d_even.n, [d_even.S]))
        out.append(Item("constructions", f"g={g} even form of signature 2g mod 4",
                        all(v for k, v in c_even.items() if k != "signature") and b_even.invariant_factors == (2,),
                        f"signature {c_even['signature']}, Br {b_even}"))
        d_pair = cons.build_gaussian_pair(g)
        c_pair = cons.gaussian_pair_checks(d_pair)
        b_s = tor.invariant_brauer(tor.FormLattice(d_pair.n, [d_pair.S]))
        b_se = tor.invariant_brauer(d_pair.form_lattice())
        failed = [k for k, v in c_pair.items() if not v]
        out.append(Item("constructions", f"g={g} J0, E identities and ZS+ZE saturation", not failed,
                        f"failed: {failed}" if failed else ""))
        out.append(Item("constructions", f"g={g} Br of {{S}} and {{S,E}} is Z/2",
                        b_s.invariant_factors == (2,) and b_se.invariant_factors == (2,),
                        f"{b_s}, {b_se}"))
    return out


def _surface_forms(d1=-3, d2=-7) -> tor.FormLattice:
    return cm.form_lattice(cm.build_nonsimple_cm_surface(d1, d2))


def check_product() -> list[Item]:
    fl = _surface_forms()
    prod = cm.form_lattice(cm.build_product_cm_surface(-3, -7))
    out = [Item("product", "fiber-product lattice Z/2, full product 0",
                tor.invariant_brauer(fl).invariant_factors == (2,) and tor.invariant_brauer(prod).is_trivial())]
    # Br of a product of tori with no common isogeny factor: the block
    # diagonal forms are everything, and Br is the sum of the pieces
    t1 = tor.RationalTorus.standard(1)
    t2 = tor.RationalTorus(RationalMatrix([[0, -2], [1, 0]]))
    f12 = tor.bilinear_forms(tor.product(t1, t2))
    ok = tor.invariant_brauer(f12) == tor.invariant_brauer(tor.bilinear_forms(t1)) + \
        tor.invariant_brauer(tor.bilinear_forms(t2))
    out.append(Item("product", "product of two elliptic curves: Br adds up", ok, f"forms rank {f12.rank}"))
    return out


ODD_INDEX_CHANGES = [
    IntegerMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 3]]),
    IntegerMatrix([[5, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
    IntegerMatrix([[3, 0, 0, 0], [0, 3, 0, 0], [0, 1, 1, 0], [0, 0, 2, 1]]),
    IntegerMatrix([[1, 2, 0, 0], [0, 3, 0, 0], [0, 0, 5, 1], [0, 0, 0, 1]]),
]


def check_isogeny() -> list[Item]:
    fl = _surface_forms()
    res = {int(c.det()): tor.odd_index_sublattice_brauer(fl, c) for c in ODD_INDEX_CHANGES}
    ok = all(g.invariant_factors == (2,) for g in res.values())
    return [Item("isogeny", "odd-index sublattices of the (-3,-7) surface keep Z/2", ok,
                 ", ".join(f"index {k}: {v}" for k, v in res.items()))]


def check_bounds() -> list[Item]:
    out = []
    lattices = {
        "surface (-3,-7)": _surface_forms(),
        "quartic": cm.form_lattice(cm.build_quartic_cm()),
        "g=3 S": tor.FormLattice(6, [cons.build_even_form(3).S]),
        "g=3 S,E": cons.build_gaussian_pair(3).form_lattice(),
        "standard g=1": tor.bilinear_forms(tor.RationalTorus.standard(1)),
    }
    for name, f in lattices.items():
        rep = tor.upper_bound_check(f)
        out.append(Item("bound", f"{name}: dim Br <= rk forms - rk NS", rep.holds,
                        f"{rep.brauer_dim} <= {rep.forms_rank} - {rep.ns_rank}"))
    a = tor.albert_bound([(1, 2, "IV", 2, 1)])
    out.append(Item("bound", "E x E with E CM: Albert count 4 <= 2 dim", a.holds and a.value == 4,
                    f"{a.value} <= {a.bound}"))
    return out


def check_cohomology() -> list[Item]:
    zi = invcoh.gaussian_integers()
    inc = invcoh.ns_inclusion()
    ok_end = (invcoh.h1(zi).invariant_factors == (2,)
              and invcoh.h1(inc.source).invariant_factors == (2,)
              and invcoh.h1_induced_kernel(inc).is_trivial()
              and invcoh.h1_induced_image(inc).invariant_factors == (2,))
    free = {n: invcoh.is_free_over_involution(invcoh.cyclotomic_module(n)) for n in CYCLOTOMIC_RANGE}
    two_powers = {4, 8, 16}
    ok_free = all(free[n] == (n not in two_powers) for n in free)
    ok_h0 = all(invcoh.tate_h0(invcoh.cyclotomic_module(n)).invariant_factors == (2,) for n in two_powers)
    return [
        Item("cohomology", "H1(Z[i]) = Z/2 and H1(NS) injects into H1(Mat2(Z[i]))", ok_end),
        Item("cohomology", "Z[zeta_n] free over Z/2 iff n is not a power of 2", ok_free),
        Item("cohomology", "H0 = Z/2 for n = 4, 8, 16", ok_h0),
    ]


def check_oracles() -> list[Item]:
    lattices = {
        "standard g=1": tor.bilinear_forms(tor.RationalTorus.standard(1)),
        "surface (-3,-7)": _surface_forms(),
        "quartic": cm.form_lattice(cm.build_quartic_cm()),
        "g=3 S": tor.FormLattice(6, [cons.build_even_form(3).S]),
        "g=3 S,E": cons.build_gaussian_pair(3).form_lattice(),
    }
    out = []
    for name, f in lattices.items():
        routes = three_routes(f)
        out.append(Item("oracles", f"{name}: three routes agree", _agree(routes), str(routes)))
    return out


GROUPS = {
    "cm-surface": check_cm_surfaces,
    "quartic-cm": check_quartic,
    "cyclotomic": check_cyclotomic,
    "different": check_different,
    "constructions": check_constructions,
    "product": check_product,
    "isogeny": check_isogeny,
    "bound": check_bounds,
    "cohomology": check_cohomology,
    "oracles": check_oracles,
}


def _run_group(name: str) -> list[Item]:
    t = time.perf_counter()
    try:
        items = GROUPS[name]()
    except Exception as exc:  # a crash is a failure of the group, not of the runner
        items = [Item(name, "crashed", False, f"{type(exc).__name__}: {exc}")]
    dt = time.perf_counter() - t
    for it in items:
        it.seconds = dt
    return items


def run_golden(only=None, threads: int | None = None) -> list[Item]:
    names = list(GROUPS) if not only else list(only)
    unknown = [n for n in names if n not in GROUPS]
    if unknown:
        raise KeyError(f"unknown golden groups: {unknown}")
    if threads is None:
        threads = int(os.environ.get("BRAUER_KIT_THREADS", "1") or 1)
    if threads <= 1:
        results = [_run_group(n) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_group, names))
    return [it for r in results for it in r]


@contextlib.contextmanager
def snf_fault():
    """Double the last nonzero Smith invariant; every quotient goes wrong."""
    real = _nf.snf

    def broken(m):
        u, d, v = real(m)
        rows = [list(r) for r in d.rows]
        k = max((i for i in range(min(d.shape)) if rows[i][i]), default=None)
        if k is not None:
            rows[k][k] *= 2
        return u, IntegerMatrix(rows, ncols=d.ncols), v

    with mock.patch.object(_lattice_mod, "snf", broken):
        yield


__all__ = ["GROUPS", "Item", "run_golden", "snf_fault", "three_routes"]
