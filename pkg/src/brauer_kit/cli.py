"""brauer-kit command line: JSON in, JSON out.

Every command prints {"result", "diagnostics", "oracle_agreement"} on
stdout and a one-line summary on stderr.  Exit codes: 0 success, 1 invalid
input, 2 a mathematical precondition fails, 3 a heuristic search gave up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import Inconclusive, PreconditionViolation
from .exactlin import FinAbGroup, IntegerMatrix, RationalMatrix, as_fraction

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_INCONCLUSIVE = 0, 1, 2, 3
KINDS = ["even-form", "gaussian-pair"]


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


# -- JSON helpers ------------------------------------------------------------------

def q(x) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def qvec(v) -> list[str]:
    return [q(x) for x in v]


def qmat(m) -> list[list[str]]:
    return [qvec(r) for r in m.rows]


def group_json(g: FinAbGroup) -> dict:
    return {"invariant_factors": list(g.invariant_factors), "free_rank": g.free_rank,
            "order": g.order, "description": str(g)}


def load_json(text: str):
    """Inline JSON, or a path to a JSON file."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        p = Path(text)
        if not p.is_file():
            raise InputError(f"invalid JSON and not a file: {exc}") from None
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {p}: {exc}") from None


def validate(doc, schema_name: str):
    import jsonschema
    from referencing import Registry, Resource

    pkg = resources.files("brauer_kit") / "schemas"
    docs = {f.name: json.loads(f.read_text()) for f in pkg.iterdir() if f.name.endswith(".json")}
    registry = Registry().with_resources(
        (d["$id"], Resource.from_contents(d)) for d in docs.values())
    schema = docs[schema_name + ".json"]
    try:
        jsonschema.validate(doc, schema, registry=registry)
    except jsonschema.ValidationError as exc:
        raise InputError(f"{schema_name}: {exc.message}") from None
    return doc


def _matrix_arg(text: str, schema="integer_matrix"):
    return validate(load_json(text), schema)


def _parse_rational(s) -> Fraction:
    try:
        return as_fraction(s)
    except (ValueError, ZeroDivisionError, TypeError):
        raise InputError(f"not a rational: {s!r}") from None


# -- shared pieces --------------------------------------------------------------------

def oracle_block(f, extra: dict | None = None) -> dict:
    from . import torus as tor
    from .golden import three_routes

    routes = three_routes(f)
    skipped = {}
    if "uno" not in routes:
        skipped["uno"] = f"form lattice rank {f.rank} exceeds {tor.MOD4_RANK_LIMIT}"
    if extra:
        routes.update(extra)
    vals = list(routes.values())
    out = {"routes": routes, "agree": all(v == vals[0] for v in vals)}
    if skipped:
        out["skipped"] = skipped
    return out


def _forms_input(args):
    from . import torus as tor

    if args.forms is not None:
        return tor.FormLattice.from_json(validate(load_json(args.forms), "form_lattice")), None
    if args.torus is not None:
        t = _torus(args.torus)
        return tor.bilinear_forms(t), t
    raise InputError("give --forms or --torus")


def _torus(text: str):
    from .torus import RationalTorus

    doc = validate(load_json(text), "rational_torus")
    return RationalTorus(RationalMatrix([[_parse_rational(x) for x in r] for r in doc["J"]]),
                         int(doc.get("g", -1)))


def _brauer_result(f) -> dict:
    from . import torus as tor

    grp, gens = tor.brauer_with_generators(f)
    rep = tor.upper_bound_check(f)
    return {**group_json(grp), "generators": [g.tolist() for g in gens],
            "bound": {"brauer_dim": rep.brauer_dim, "forms_rank": rep.forms_rank,
                      "ns_rank": rep.ns_rank, "holds": rep.holds}}


def _cm_result(br, fmt) -> dict:
    return {"invariant_factors": list(br.group.invariant_factors),
            "generators": [fmt(g) for g in br.generators],
            "generator_coordinates": [qvec(g) for g in br.generators]}


def _dk_label(verified: bool, how: str) -> dict:
    if verified:
        return {"value_label": "Brauer group", "end_equals_K": f"verified ({how})"}
    return {"value_label": "formal trace-dual value", "end_equals_K": f"not verified ({how})"}


# -- commands ---------------------------------------------------------------------------

def cmd_forms(args):
    from . import torus as tor

    t = _torus(args.torus)
    f = tor.bilinear_forms(t)
    ns = tor.ns_forms(f)
    res = {"forms": f.to_json(), "forms_rank": f.rank, "end_rank": tor.end_rank(t),
           "ns_rank": len(ns), "ns_forms": [x.tolist() for x in ns]}
    diag = {"g": t.g, "rational_structures": len(t.structures)}
    try:
        rep = tor.check_bi_ends(t, f)
        diag["bi_ends"] = {"equal": rep.equal, "witness": rep.witness.tolist()}
    except PreconditionViolation as exc:
        diag["bi_ends"] = {"skipped": str(exc)}
    return res, diag, None, f"forms rank {f.rank}, End rank {res['end_rank']}, NS rank {len(ns)}"


def cmd_brauer(args):
    f, t = _forms_input(args)
    res = _brauer_result(f)
    diag = {"forms_rank": f.rank, "n": f.n}
    return res, diag, oracle_block(f), f"Br = {res['description']}"


def cmd_cohomology(args):
    from . import invcoh

    if args.example == "end":
        inc = invcoh.ns_inclusion()
        res = {
            "H1_gaussian_integers": group_json(invcoh.h1(invcoh.gaussian_integers())),
            "H1_ns": group_json(invcoh.h1(inc.source)),
            "H1_mat2": group_json(invcoh.h1(inc.target)),
            "kernel": group_json(invcoh.h1_induced_kernel(inc)),
            "image": group_json(invcoh.h1_induced_image(inc)),
        }
        res["injective"] = res["kernel"]["order"] == 1
        return res, {"galois_action_on_mat2": "entrywise complex conjugation"}, None, \
            f"H1(NS) -> H1(Mat2) kernel {res['kernel']['description']}, image {res['image']['description']}"
    if args.cyclotomic is not None:
        m = invcoh.cyclotomic_module(args.cyclotomic)
    elif args.sigma is not None:
        m = invcoh.InvolutionModule(IntegerMatrix(_matrix_arg(args.sigma)))
    else:
        raise InputError("give --sigma, --cyclotomic or --example end")
    h0, h1 = invcoh.tate_h0(m), invcoh.h1(m)
    res = {"H0": group_json(h0), "H1": group_json(h1), "free": invcoh.is_free_over_involution(m)}
    return res, {"rank": m.rank}, None, f"H0 = {h0}, H1 = {h1}"


def cmd_cm_surface(args):
    from . import cmfields as cm
    from . import torus as tor

    d1, d2 = args.d1, args.d2
    l = cm.build_product_cm_surface(d1, d2) if args.product else cm.build_nonsimple_cm_surface(d1, d2)
    br = cm.brauer_cm(l)
    res = {"invariant_factors": list(br.group.invariant_factors)}
    if br.generators:
        res["generator"] = cm.format_pair(br.generators[0], d1, d2)
    t = cm.cm_torus(l, cm.surface_theta(d1, d2))
    f = cm.form_lattice(l)
    end_ok = tor.end_rank(t) == 4 and tor.bilinear_forms(t).lattice == f.lattice
    diag = {"lattice_basis": qmat(l.basis), "dual_basis": qmat(br.dual.basis),
            "generator_coordinates": [qvec(g) for g in br.generators],
            "same_class_as_e2": bool(br.generators) and br.same_class(br.generators[0], cm.surface_e2(d1, d2)),
            **_dk_label(end_ok, "End rank of the torus with J = multiplication by (sqrt d1, sqrt d2)")}
    pol = cm.form_gram(l, cm.surface_polarisation_element(d1, d2))
    diag["polarisation_from_1/(4 sqrt d)"] = tor.is_polarisation(pol, t) if pol.is_integral() else False
    ob = oracle_block(f, {"cm": list(br.group.invariant_factors)})
    return res, diag, ob, f"Br = {br.group}" + (f" generated by {res['generator']}" if br.generators else "")


def cmd_quartic_cm(args):
    from . import cmfields as cm

    l = cm.build_quartic_cm()
    br = cm.brauer_cm(l)
    res = {"invariant_factors": list(br.group.invariant_factors)}
    if br.generators:
        res["generator"] = l.algebra.format(br.generators[0])
    diag = {"field_facts": cm.quartic_field_facts(),
            "same_class_as_1/(4 sqrt 5)": bool(br.generators) and br.same_class(br.generators[0], cm.quartic_generator()),
            "generator_coordinates": [qvec(g) for g in br.generators],
            **_dk_label(False, "no purely imaginary element with rational square to build J from")}
    ob = oracle_block(cm.form_lattice(l), {"cm": list(br.group.invariant_factors)})
    return res, diag, ob, f"Br = {br.group}" + (f" generated by {res['generator']}" if br.generators else "")


def cmd_cyclotomic(args):
    from . import cmfields as cm

    br = cm.cyclotomic_brauer(args.n)
    alg = br.dual.algebra
    res = _cm_result(br, alg.format)
    diag = {"degree": alg.dim, **_dk_label(False, "CM type not checked")}
    if not br.generators:
        del res["generators"], res["generator_coordinates"]
    ob = None
    if alg.dim <= args.oracle_max_degree:
        ob = oracle_block(cm.form_lattice(cm.cyclotomic_algebra(args.n)[1]),
                          {"cm": list(br.group.invariant_factors)})
    else:
        diag["oracle_skipped"] = f"degree {alg.dim} exceeds --oracle-max-degree {args.oracle_max_degree}"
    return res, diag, ob, f"Br(Q(zeta_{args.n})) = {br.group}"


def cmd_different(args):
    from . import cmfields as cm

    alg, ok = cm.cyclotomic_algebra(args.n)
    gen = cm.cyclotomic_different(args.n)
    inv = cm.inverse_different(args.n)
    dual = cm.dual_module_subring(ok)
    equal = inv == dual
    res = {"generator": alg.format(gen), "generator_coordinates": qvec(gen),
           "inverse_different_basis": qmat(inv.lattice.hnf), "equals_trace_dual": equal}
    return res, {"degree": alg.dim, "trace_dual_basis": qmat(dual.lattice.hnf)}, None, \
        f"closed form {'matches' if equal else 'DOES NOT match'} the trace dual"


def cmd_ideal(args):
    from . import cmfields as cm

    gens = validate(load_json(args.gens), "rational_vectors")
    gens = [[_parse_rational(x) for x in g] for g in gens]
    if args.generated:
        lat = cm.ideal_span(args.n, gens)
        gens = [list(r) for r in lat.basis.rows]
    br = cm.ideal_lattice_brauer(args.n, gens)
    alg = br.dual.algebra
    res = _cm_result(br, alg.format)
    return res, {"lattice_basis": [qvec(g) for g in gens], **_dk_label(False, "CM type not checked")}, \
        None, f"Br = {br.group}"


def cmd_construct(args):
    from . import constructions as cons
    from . import torus as tor

    if args.kind == "even-form":
        data = cons.build_even_form(args.g)
        checks = cons.even_form_checks(data)
        f = tor.FormLattice(data.n, [data.S])
    else:
        data = cons.build_gaussian_pair(args.g)
        checks = cons.gaussian_pair_checks(data)
        f = data.form_lattice()
    res = {"data": data.to_json(), "checks": checks, "brauer": group_json(tor.invariant_brauer(f))}
    if args.kind == "gaussian-pair":
        res["brauer_S_only"] = group_json(tor.invariant_brauer(tor.FormLattice(data.n, [data.S])))
    ok = all(v for k, v in checks.items() if k != "signature")
    summary = f"construction g={args.g}: checks {'pass' if ok else 'FAIL'}, Br = {res['brauer']['description']}"
    return res, {"all_checks_pass": ok}, oracle_block(f), summary


def cmd_search_j(args):
    from . import constructions as cons

    data = cons.build_even_form(args.g) if args.kind == "even-form" else cons.build_gaussian_pair(args.g)
    r = cons.numeric_j_search(data, seed=args.seed, tolerance=args.tolerance, max_iters=args.max_iters,
                              generic=not args.warm_start_only)
    res = r.to_json()
    diag = {"evidence_only": True}
    if args.screen_bound is not None:
        scr = cons.screen_small_endomorphisms(r.J, args.screen_bound, seed=args.seed)
        diag["endomorphism_screen"] = scr.to_json()
    worst = max(r.residuals.values())
    return res, diag, None, f"found J with max residual {worst:.2e} (evidence, not a certificate)"


def cmd_bound(args):
    from . import torus as tor

    if args.albert is not None:
        factors = validate(load_json(args.albert), "albert_factors")
        a = tor.albert_bound([tuple(x) for x in factors])
        return {"value": a.value, "bound": a.bound, "dim": a.dim, "holds": a.holds}, {}, None, \
            f"Albert count {a.value} <= {a.bound}"
    f, _ = _forms_input(args)
    rep = tor.upper_bound_check(f)
    res = {"brauer_dim": rep.brauer_dim, "forms_rank": rep.forms_rank, "ns_rank": rep.ns_rank,
           "bound": rep.bound, "holds": rep.holds}
    rel = "<=" if rep.holds else "VIOLATES <="
    return res, {}, None, f"dim Br = {rep.brauer_dim} {rel} {rep.bound}"


def cmd_product(args):
    from . import torus as tor

    t1, t2 = _torus(args.torus1), _torus(args.torus2)
    tp = tor.product(t1, t2)
    f1, f2, fp = tor.bilinear_forms(t1), tor.bilinear_forms(t2), tor.bilinear_forms(tp)
    b1, b2, bp = tor.invariant_brauer(f1), tor.invariant_brauer(f2), tor.invariant_brauer(fp)
    res = {"brauer_product": group_json(bp), "brauer_factors": [group_json(b1), group_json(b2)],
           "forms_ranks": [f1.rank, f2.rank, fp.rank],
           "no_cross_forms": fp.rank == f1.rank + f2.rank,
           "additive": bp == b1 + b2}
    return res, {}, oracle_block(fp), f"Br(product) = {bp}; factors {b1}, {b2}"


def cmd_isogeny_check(args):
    from . import cmfields as cm
    from . import torus as tor

    if args.forms is None and args.torus is None:
        f = cm.form_lattice(cm.build_nonsimple_cm_surface(args.d1, args.d2))
    else:
        f, _ = _forms_input(args)
    c = IntegerMatrix(_matrix_arg(args.basis_change))
    before = tor.invariant_brauer(f)
    after = tor.odd_index_sublattice_brauer(f, c)
    sub = tor.transport_forms(f, c)
    res = {"index": abs(int(c.det())), "brauer_before": group_json(before),
           "brauer_after": group_json(after), "equal": before == after}
    return res, {}, oracle_block(sub), f"index {res['index']}: {before} -> {after}"


def cmd_reproduce(args):
    from .golden import run_golden, snf_fault

    threads = int(os.environ.get("BRAUER_KIT_THREADS", "1") or 1)
    if args.inject_fault == "snf":
        with snf_fault():
            items = run_golden(args.only, threads=1)
    else:
        items = run_golden(args.only, threads=threads)
    for it in items:
        print(it.line(), file=sys.stderr)
    failed = [it for it in items if not it.ok]
    res = {"items": [{"group": it.group, "name": it.name, "ok": it.ok, "detail": it.detail} for it in items],
           "passed": len(items) - len(failed), "failed": len(failed)}
    diag = {"fault_injected": args.inject_fault, "threads": threads}
    return res, diag, None, f"{len(items) - len(failed)}/{len(items)} PASS", (1 if failed else 0)


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="brauer-kit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def forms_opts(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--forms", help="FormLattice JSON (inline or path)")
        g.add_argument("--torus", help="RationalTorus JSON (inline or path)")

    sp = sub.add_parser("forms", help="J-invariant forms, End and NS of a torus")
    sp.add_argument("--torus", required=True)
    sp.set_defaults(func=cmd_forms)

    sp = sub.add_parser("brauer", help="invariant Brauer group of a form lattice")
    forms_opts(sp)
    sp.set_defaults(func=cmd_brauer)

    sp = sub.add_parser("cohomology", help="Tate cohomology of an involution module")
    sp.add_argument("--sigma", help="integer involution matrix (columns act)")
    sp.add_argument("--cyclotomic", type=int, help="Z[zeta_n] with complex conjugation")
    sp.add_argument("--example", choices=["end"], help="E x E for y^2 = x^3 - x over R")
    sp.set_defaults(func=cmd_cohomology)

    sp = sub.add_parser("cm-surface", help="non-simple CM surface from two imaginary quadratic fields")
    sp.add_argument("--d1", type=int, required=True)
    sp.add_argument("--d2", type=int, required=True)
    sp.add_argument("--product", action="store_true", help="use the full product lattice instead")
    sp.set_defaults(func=cmd_cm_surface)

    sp = sub.add_parser("quartic-cm", help="simple CM surface over Q(sqrt 5)(sqrt(-30 + 8 sqrt 5))")
    sp.set_defaults(func=cmd_quartic_cm)

    sp = sub.add_parser("cyclotomic", help="Brauer group for the ring of integers of Q(zeta_n)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--oracle-max-degree", type=int, default=8,
                    help="run the form-lattice routes only up to this degree")
    sp.set_defaults(func=cmd_cyclotomic)

    sp = sub.add_parser("different", help="closed-form different of Q(zeta_n) against the trace dual")
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_different)

    sp = sub.add_parser("ideal", help="Brauer group for an ideal lattice in Q(zeta_n)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--gens", required=True, help="JSON list of power-basis coordinate vectors")
    sp.add_argument("--generated", action="store_true",
                    help="treat --gens as ideal generators rather than a Z-basis")
    sp.set_defaults(func=cmd_ideal)

    sp = sub.add_parser("construct", help="explicit forms with End = Z or End = Z[i]")
    sp.add_argument("--kind", choices=KINDS, required=True,
                    help="even-form: one even form (End = Z); gaussian-pair: S, E with J0 (End = Z[i])")
    sp.add_argument("--g", type=int, required=True)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("search-j", help="numeric search for a compatible complex structure")
    sp.add_argument("--kind", choices=KINDS, required=True)
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--tolerance", type=float, default=1e-8)
    sp.add_argument("--max-iters", type=int, default=1000)
    sp.add_argument("--warm-start-only", action="store_true")
    sp.add_argument("--screen-bound", type=int, help="also screen small integer endomorphisms")
    sp.set_defaults(func=cmd_search_j)

    sp = sub.add_parser("bound", help="dim Br <= rk forms - rk NS, or the Albert count")
    forms_opts(sp)
    sp.add_argument("--albert", help="JSON list of [dim A_i, n_i, type, dim D_i, dim D_i^-]")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("product", help="Brauer group of a product torus")
    sp.add_argument("--torus1", required=True)
    sp.add_argument("--torus2", required=True)
    sp.set_defaults(func=cmd_product)

    sp = sub.add_parser("isogeny-check", help="Brauer group after passing to an odd-index sublattice")
    forms_opts(sp)
    sp.add_argument("--d1", type=int, default=-3)
    sp.add_argument("--d2", type=int, default=-7)
    sp.add_argument("--basis-change", required=True, help="integer matrix C; the sublattice is C Z^n")
    sp.set_defaults(func=cmd_isogeny_check)

    sp = sub.add_parser("reproduce-paper", help="run every golden check")
    sp.add_argument("--only", action="append", help="restrict to a group (repeatable)")
    sp.add_argument("--inject-fault", choices=["snf"], help="corrupt the Smith normal form")
    sp.set_defaults(func=cmd_reproduce)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except InputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionViolation as exc:
        print(f"precondition violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Inconclusive as exc:
        print(f"inconclusive ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (ValueError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result, diagnostics, oracle, summary = out[:4]
    code = out[4] if len(out) > 4 else EXIT_OK
    doc = {"result": result, "diagnostics": diagnostics, "oracle_agreement": oracle}
    print(json.dumps(doc, separators=(",", ":"), sort_keys=False))
    print(summary, file=sys.stderr)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
