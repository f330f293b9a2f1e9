"""Command-line front end.

Exit codes: 0 all checks pass, 1 a verification failed, 2 input could not
be parsed, 3 input parsed but is invalid or inconsistent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import admissible, diagram, measure, representation, sfs
from .errors import CKBError, InputParseError
from .exact import format_number
from .jsonio import load_json, matrix_to_json, parse_int_matrix, parse_map, parse_matrix, parse_measure

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3
DEFAULT_DEPTH = 6
MAX_DEPTH = 12


class InvalidInput(CKBError):
    pass


def _num(x):
    return None if x is None else format_number(x)


def _names(table, word):
    if word is None:
        return None
    if isinstance(word, measure.Vertex):
        return [f"v{word.index + 1}"]
    return table.names(word)


def _depth(args) -> int:
    cap = MAX_DEPTH
    env = os.environ.get("CKB_MAX_DEPTH")
    if env:
        try:
            cap = min(cap, int(env))
        except ValueError:
            raise InvalidInput(f"CKB_MAX_DEPTH must be an integer, got {env!r}") from None
    if not 1 <= args.depth <= cap:
        raise InvalidInput(f"depth must be in [1, {cap}], got {args.depth}")
    return args.depth


def _table(path):
    return parse_matrix(load_json(path), str(path))


def _measure(path, table, args):
    data = load_json(path) if path else {"type": "invariant"}
    return parse_measure(data, table, exact=not args.float)


# ----------------------------------------------------------------- commands

def cmd_analyze(args) -> tuple[dict, int]:
    E = _table(args.file)
    A = E.matrix
    prim = diagram.is_primitive(A)
    G = diagram.coupled_graph(E)
    strong = diagram.is_strongly_connected(G)
    report = {
        "n": A.n,
        "edges": [{"id": e.name, "s": e.source + 1, "r": e.range + 1, "entry": E.entry_label(i)}
                  for i, e in enumerate(E.edges)],
        "primitive": prim.primitive,
        "exponent": prim.exponent,
        "wielandt_bound": prim.bound,
        "irreducible": prim.irreducible,
        "period": prim.period,
        "coupled_graph": {
            "vertices": len(E),
            "arrows": len(G.arrows),
            "strongly_connected": strong,
            "adjacency": [list(r) for r in G.adjacency],
        },
        # simplicity read as primitivity vs. as strong connectivity of the coupled graph
        "primitivity_matches_connectivity": prim.primitive == strong,
    }
    if prim.primitive:
        pd = measure.perron_data(A)
        if args.float:
            pd = measure.PerronData(float(pd.lam), tuple(map(float, pd.x)), False)
        report["perron"] = {"lambda": _num(pd.lam), "x": [_num(v) for v in pd.x], "exact": pd.exact}
    else:
        report["perron"] = None
        report["certificate"] = {"zero_entry_of_power": [v + 1 for v in prim.zero_entry],
                                 "power": prim.bound}
    return report, EXIT_OK


def cmd_coupled_graph(args) -> tuple[object, int]:
    E = _table(args.file)
    G = diagram.coupled_graph(E)
    if args.dot:
        return diagram.to_dot(G), EXIT_OK
    return {"vertices": E.names(range(len(E))),
            "arrows": [E.names(a) for a in G.arrows],
            "adjacency": [list(r) for r in G.adjacency]}, EXIT_OK


def cmd_find_admissible(args) -> tuple[dict, int]:
    E, E2 = _table(args.A), _table(args.A2)
    maps = admissible.find_admissible(E, E2, first=args.first)
    out = []
    for m in maps:
        record = m.to_json()
        record["verified"] = admissible.is_admissible(E, E2, m.images).ok
        record["inverse_admissible"] = admissible.is_admissible(E2, E, m.inverse().images).ok
        out.append(record)
    return {"count": len(out), "maps": out}, EXIT_OK


def cmd_reduce(args) -> tuple[dict, int]:
    F = parse_int_matrix(load_json(args.file), str(args.file))
    R = diagram.zero_one_reduction(F)
    report = matrix_to_json(R)
    report["edges"] = [{"from": v + 1, "to": w + 1, "copy": c + 1}
                       for v, w, c in diagram.reduction_edges(F)]
    return report, EXIT_OK


def cmd_measure_eval(args) -> tuple[dict, int]:
    E = _table(args.A)
    spec = _measure(args.m, E, args)
    k = _depth(args)
    words = diagram.path_words(E, k)
    values = [measure.cylinder_measure(spec, w) for w in words]
    total = sum(values, Fraction(0))
    return {
        "depth": k,
        "cylinders": [{"word": E.names(w), "measure": _num(v)} for w, v in zip(words, values)],
        "total": _num(total),
        "level_defect": _num(measure.level_consistency(spec, k)),
        "q": [_num(v) for v in measure.q_vectors(spec, k)],
    }, EXIT_OK


def verify_ck(args):
    E = _table(args.A)
    spec = _measure(args.measure, E, args)
    k = _depth(args)
    edge = representation.ck_verify_edge(E, spec, k)
    vertex = representation.ck_verify_vertex(E, spec, k)
    cross = representation.cross_terms_vanish(E, spec, k)
    ok = all(representation._zero(v) for v in (edge.residual, vertex.residual, cross))
    return {
        "depth": k,
        "checks": [
            {"check": "edge relations (coupled-graph matrix)", "residual": _num(edge.residual),
             "range_sum": _num(edge.range_sum), "domain": _num(edge.domain)},
            {"check": "vertex relations (matrix A)", "residual": _num(vertex.residual),
             "range_sum": _num(vertex.range_sum), "domain": _num(vertex.domain)},
            {"check": "cross terms", "residual": _num(cross)},
        ],
        "residual": _num(max(edge.residual, vertex.residual, cross)),
        "pass": ok,
    }, EXIT_OK if ok else EXIT_FAIL


def verify_equivalence(args):
    E = _table(args.A)
    E2 = _table(args.target) if args.target else E
    if not args.map:
        raise InvalidInput("verify equivalence needs --map")
    alpha = parse_map(load_json(args.map), E, E2)
    spec = _measure(args.measure, E, args)
    spec2 = _measure(args.target_measure or (args.measure if not args.target else None), E2, args)
    k = _depth(args)
    rep = representation.intertwiner(alpha, spec, spec2, k)
    pw = rep.predicate_witness
    if isinstance(pw, int):
        pw = E.name(pw)
    elif pw is not None:
        pw = E.names(pw)
    ok = rep.ok and rep.agrees
    return {
        "depth": k,
        "map": alpha.to_json()["map"],
        "checks": [
            {"check": "unitary", "pass": rep.unitary},
            {"check": "intertwines edge operators", "pass": rep.intertwines,
             "witness": None if rep.intertwine_witness is None else E.name(rep.intertwine_witness)},
            {"check": "commutes with inclusions", "pass": rep.inclusion_commutes,
             "witness": _names(E2, rep.inclusion_witness)},
        ],
        "predicate": {"name": rep.predicate, "holds": rep.predicate_holds, "witness": pw},
        "verdicts_agree": rep.agrees,
        "pass": ok,
    }, EXIT_OK if ok else EXIT_FAIL


def verify_monic(args):
    E = _table(args.A)
    spec = _measure(args.measure, E, args)
    k = _depth(args)
    ms = representation.monic_from_measure(E, spec)
    rep = representation.monic_operators(ms, k)
    report = {
        "depth": k,
        "verdict": rep.verdict,
        "dimension": rep.dimension,
        "span_dimension": rep.span_dimension,
        "projections": rep.projections_ok,
        "projection_witness": None if rep.projection_witness is None else [v + 1 for v in rep.projection_witness],
        "coefficients_exact": rep.coefficients_exact,
    }
    ok = rep.verdict == "monic"
    if args.other:
        other = representation.monic_from_measure(E, _measure(args.other, E, args))
        eq = representation.monic_equivalence(ms, other, k)
        vw = lambda w: None if w is None else [v + 1 for v in w]
        report["equivalence"] = {
            "verdict": eq.verdict,
            "h": [{"word": vw(C), "value": _num(v)} for C, v in eq.h.items()],
            "refinement_witness": vw(eq.refinement_witness),
            "identity_witness": vw(eq.identity_witness),
            "singular_witness": vw(eq.singular_witness),
        }
        ok = ok and eq.verdict == "equivalent"
    report["pass"] = ok
    return report, EXIT_OK if ok else EXIT_FAIL


def verify_refinement(args):
    E = _table(args.A)
    k = _depth(args)
    es, vs = sfs.edge_sfs(E), sfs.vertex_sfs(E)
    fail = sfs.refinement_check(es, vs, k)
    edge_report, vertex_report = sfs.sfs_report(es), sfs.sfs_report(vs)
    ok = fail is None and edge_report["witness"] is None and vertex_report["witness"] is None
    return {
        "depth": k,
        "edge_system": edge_report,
        "vertex_system": vertex_report,
        "refinement": None if fail is None else
        {"condition": fail.condition, "index": fail.index, "witness": E.names(fail.word)},
        "pass": ok,
    }, EXIT_OK if ok else EXIT_FAIL


def verify_quasi(args):
    E = _table(args.A)
    spec = _measure(args.measure, E, args)
    k = _depth(args)
    rep = measure.quasi_stationarity_check(spec, k)
    return {
        "depth": k,
        "verdict": rep.verdict,
        "tail_start": rep.start,
        "tail_period": rep.period,
        "failing_ratio": None if rep.failing is None else
        {"edge": E.name(rep.failing[0]), "level": rep.failing[1]},
        "witness": _names(E, rep.witness),
        "worst_path": _names(E, rep.worst_word),
        "worst_partial_products": [_num(v) for v in rep.worst_trace],
        "pass": rep.verdict == "pass",
    }, EXIT_OK if rep.verdict == "pass" else EXIT_FAIL


VERIFIERS = {
    "ck": verify_ck,
    "equivalence": verify_equivalence,
    "monic": verify_monic,
    "refinement": verify_refinement,
    "quasi": verify_quasi,
}


def cmd_verify(args):
    return VERIFIERS[args.check](args)


# ----------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message)
        sys.exit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ckb", description="Cuntz-Krieger operators of stationary 0-1 diagrams, checked exactly.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, depth=False):
        sp.add_argument("--float", action="store_true", help="floating point instead of exact rationals")
        if depth:
            sp.add_argument("--depth", "-k", type=int, default=DEFAULT_DEPTH)

    a = sub.add_parser("analyze", help="edge table, primitivity, Perron data, coupled graph")
    a.add_argument("file")
    common(a)
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("coupled-graph", help="coupled graph as JSON or DOT")
    g.add_argument("file")
    g.add_argument("--dot", action="store_true")
    g.set_defaults(func=cmd_coupled_graph)

    f = sub.add_parser("find-admissible", help="all admissible edge bijections between two diagrams")
    f.add_argument("A")
    f.add_argument("A2", metavar="A'")
    which = f.add_mutually_exclusive_group()
    which.add_argument("--all", action="store_true", default=True)
    which.add_argument("--first", action="store_true")
    f.set_defaults(func=cmd_find_admissible)

    m = sub.add_parser("measure", help="measure utilities")
    msub = m.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ev = msub.add_parser("eval", help="cylinder measures at one depth")
    ev.add_argument("A")
    ev.add_argument("m")
    common(ev, depth=True)
    ev.set_defaults(func=cmd_measure_eval)

    v = sub.add_parser("verify", help="run a verifier")
    v.add_argument("check", choices=sorted(VERIFIERS))
    v.add_argument("A")
    v.add_argument("--measure", help="measure file (default: invariant measure)")
    v.add_argument("--map", help="admissible map file (equivalence)")
    v.add_argument("--target", help="target diagram (equivalence; default: A)")
    v.add_argument("--target-measure", help="measure on the target (equivalence)")
    v.add_argument("--other", help="second measure for monic equivalence")
    common(v, depth=True)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", help="0-1 reduction of a nonnegative integer matrix")
    r.add_argument("file")
    r.set_defaults(func=cmd_reduce)
    return p


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out, code = args.func(args)
    except InputParseError as exc:
        _emit_error("parse", str(exc))
        return EXIT_PARSE
    except CKBError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_INVALID
    if isinstance(out, str):
        sys.stdout.write(out)
    else:
        sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
