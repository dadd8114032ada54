"""``flagforge`` command line: emits canonical JSON, exit 0 ok / 1 check failed / 2 usage error."""

from __future__ import annotations

import argparse
import json
import sys

from .flagcomb import (
    AdmissibleSequence,
    FlagType,
    characteristic_map,
    enumerate_sequences,
    parse_sequence,
    sequence_count,
)
from .flagmatrix import (
    block_lu_transition,
    localization_set,
    master_realization,
    master_ring,
    transition_map,
)
from .freealg import LiftConvention, commutatize, lift
from .serialize import (
    FormatError,
    dumps,
    envelope,
    localized_from_json,
    localized_to_json,
    matrix_display,
    matrix_to_json,
    minor_table_to_json,
    nc_to_json,
    permutation_to_json,
    polynomial_from_json,
)
from .softscheme import (
    InvalidInput,
    Unsupported,
    build_closed_subscheme,
    build_soft_scheme,
    hypersurface_ideals,
    plucker_pullback,
    plucker_registry,
    plucker_subsets,
    plucker_tuple,
    soften_union,
    softens,
    verify_soft_scheme,
)
from .sweep import check_cocycle, run_sweep, thread_cap


class UsageError(Exception):
    pass


def _flag_type(args) -> FlagType:
    try:
        d = tuple(int(x) for x in args.d.replace(" ", "").split(",") if x)
        return FlagType(d, args.n)
    except ValueError as exc:
        raise UsageError(f"bad flag type --d {args.d} --n {args.n}: {exc}") from exc


def _sequence(ft: FlagType, text: str, option: str) -> AdmissibleSequence:
    try:
        return parse_sequence(ft, text)
    except ValueError as exc:
        raise UsageError(f"{option} {text!r}: {exc}") from exc


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _element_json(e):
    return {"value": localized_to_json(e), "text": str(e)}


def _nc_json(a):
    return {"value": nc_to_json(a), "text": str(a)}


def cmd_atlas(ft, args):
    seqs = enumerate_sequences(ft)
    doc = envelope("atlas", ft, count=len(seqs), formula_count=sequence_count(ft),
                   dimension=ft.dimension(), sequences=[s.to_json() for s in seqs],
                   labels=[s.label() for s in seqs])
    return doc, 0


def cmd_transition(ft, args):
    src = _sequence(ft, getattr(args, "from"), "--from")
    dst = _sequence(ft, args.to, "--to")
    c, result = block_lu_transition(src, dst)
    tmap = transition_map(src, dst)
    doc = envelope("transition", ft, source=src.to_json(), target=dst.to_json(),
                   frame=matrix_to_json(c), frame_display=matrix_display(c),
                   result=matrix_to_json(result), result_display=matrix_display(result),
                   localization=localization_set(dst, src),
                   coordinate_map={v: _element_json(e) for v, e in tmap.items()})
    return doc, 0


def cmd_realize(ft, args):
    seq = _sequence(ft, args.chart, "--chart")
    m, gens = master_realization(seq)
    doc = envelope("realize", ft, chart=seq.to_json(), label=seq.label(),
                   characteristic_map=permutation_to_json(characteristic_map(seq)),
                   matrix=matrix_to_json(m), display=matrix_display(m),
                   generators=[_element_json(g) for g in gens])
    return doc, 0


def cmd_verify_cocycle(ft, args):
    res = check_cocycle(ft, exhaustive=args.exhaustive, workers=thread_cap())
    doc = envelope("verify-cocycle", ft, exhaustive=args.exhaustive, triples=res.cases,
                   passed=res.passed, failures=res.failures)
    return doc, 0 if res.passed else 1


def cmd_master_ring(ft, args):
    ring = master_ring(ft)
    doc = envelope("master-ring", ft, variables=list(ring.registry.names),
                   minors=minor_table_to_json(ring))
    return doc, 0


def _scheme(ft, convention):
    if convention == "union":
        return soften_union(*(build_soft_scheme(ft, c) for c in LiftConvention))
    return build_soft_scheme(ft, convention)


def _scheme_charts(s):
    return [{"chart": seq.label(), "generators": [_nc_json(g) for g in gens]} for seq, gens in s.charts.items()]


def cmd_soft_scheme(ft, args):
    s = _scheme(ft, args.convention)
    report = verify_soft_scheme(s)
    doc = envelope("soft-scheme", ft, conventions=list(s.conventions), charts=_scheme_charts(s),
                   report=report.to_json())
    return doc, 0 if report.ok else 1


def cmd_soften(ft, args):
    parts = [build_soft_scheme(ft, c) for c in LiftConvention]
    union = soften_union(*parts)
    report = verify_soft_scheme(union)
    softened = {p.conventions[0]: softens(union, p) for p in parts}
    ok = report.ok and all(softened.values())
    doc = envelope("soften", ft, conventions=list(union.conventions), softens=softened,
                   charts=_scheme_charts(union), report=report.to_json())
    return doc, 0 if ok else 1


def cmd_lift(ft, args):
    ring = master_ring(ft)
    e = localized_from_json(_read_json(args.expr), ring)
    a = lift(e, args.convention)
    back = commutatize(a)
    doc = envelope("lift", ft, convention=LiftConvention(args.convention).value,
                   input=_element_json(e), lift=_nc_json(a), section_ok=back == e)
    return doc, 0 if back == e else 1


def _grassmannian_poly(ft, path):
    if not ft.is_grassmannian:
        raise UsageError(f"{ft.label()} is not a Grassmannian; Pluecker data needs a single d")
    return polynomial_from_json(_read_json(path), plucker_registry(ft))


def cmd_plucker(ft, args):
    f = _grassmannian_poly(ft, args.poly)
    seq = _sequence(ft, args.chart, "--chart")
    tup = plucker_tuple(seq)
    names = plucker_registry(ft).names
    doc = envelope("plucker", ft, chart=seq.to_json(), polynomial=str(f),
                   coordinates=[{"name": y, "columns": list(cols), **_element_json(v)}
                                for y, cols, v in zip(names, plucker_subsets(ft), tup)],
                   pullback=_element_json(plucker_pullback(f, seq)))
    return doc, 0


def cmd_subscheme(ft, args):
    f = _grassmannian_poly(ft, args.hypersurface)
    s = build_soft_scheme(ft, args.convention)
    data = build_closed_subscheme(s, hypersurface_ideals(f, ft))
    report = data.verify()
    charts = [{"chart": seq.label(),
               "generators": [_element_json(g) for g in data.commutative[seq]],
               "lifted": [_nc_json(g) for g in data.lifted[seq]]} for seq in data.commutative]
    doc = envelope("subscheme", ft, polynomial=str(f), charts=charts, report=report.to_json())
    return doc, 0 if report.ok else 1


def cmd_verify(ft, args):
    results = run_sweep(ft, exhaustive=True)
    ok = all(r.passed for r in results)
    doc = envelope("verify", ft, passed=ok, checks=[r.to_json() for r in results])
    return doc, 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", default="2", help="comma-separated dimensions d1,...,dr (default 2)")
    common.add_argument("--n", type=int, default=4, help="ambient dimension (default 4)")
    common.add_argument("--output", help="write JSON here instead of standard output")

    parser = argparse.ArgumentParser(prog="flagforge", description="Exact charts of flag varieties and their noncommutative softenings.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("atlas", parents=[common], help="admissible sequences, count and dimension")
    p = sub.add_parser("transition", parents=[common], help="transition matrix and coordinate change")
    p.add_argument("--from", required=True, metavar="SEQ")
    p.add_argument("--to", required=True, metavar="SEQ")
    p = sub.add_parser("realize", parents=[common], help="master realization of a chart")
    p.add_argument("--chart", required=True, metavar="SEQ")
    p = sub.add_parser("verify-cocycle", parents=[common], help="check the cocycle condition")
    p.add_argument("--exhaustive", action="store_true", help="all ordered triples, not only those from the reference chart")
    sub.add_parser("master-ring", parents=[common], help="variables and minor table")
    conventions = [c.value for c in LiftConvention]
    p = sub.add_parser("soft-scheme", parents=[common], help="build and verify a soft scheme")
    p.add_argument("--convention", choices=conventions + ["union"], default=conventions[0])
    sub.add_parser("soften", parents=[common], help="union of both lift conventions")
    p = sub.add_parser("lift", parents=[common], help="lift a master-ring element")
    p.add_argument("--expr", required=True, metavar="FILE")
    p.add_argument("--convention", choices=conventions, default=conventions[0])
    p = sub.add_parser("plucker", parents=[common], help="pull a Pluecker polynomial back to a chart")
    p.add_argument("--chart", required=True, metavar="SEQ")
    p.add_argument("--poly", required=True, metavar="FILE")
    p = sub.add_parser("subscheme", parents=[common], help="lift a hypersurface section chartwise")
    p.add_argument("--hypersurface", required=True, metavar="FILE")
    p.add_argument("--convention", choices=conventions, default=conventions[0])
    p = sub.add_parser("verify", parents=[common], help="full invariant sweep")
    p.add_argument("--all", action="store_true", required=True, help="run every check")
    return parser


COMMANDS = {
    "atlas": cmd_atlas,
    "transition": cmd_transition,
    "realize": cmd_realize,
    "verify-cocycle": cmd_verify_cocycle,
    "master-ring": cmd_master_ring,
    "soft-scheme": cmd_soft_scheme,
    "soften": cmd_soften,
    "lift": cmd_lift,
    "plucker": cmd_plucker,
    "subscheme": cmd_subscheme,
    "verify": cmd_verify,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        ft = _flag_type(args)
        doc, code = COMMANDS[args.command](ft, args)
    except (UsageError, FormatError, InvalidInput, Unsupported, ValueError) as exc:
        print(f"flagforge {args.command}: {exc}", file=stderr)
        return 2
    text = dumps(doc)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"flagforge: cannot write {args.output}: {exc}", file=stderr)
            return 2
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
