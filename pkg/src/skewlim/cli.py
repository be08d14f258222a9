"""Command line entry point.

Exit status: 0 when the requested check passes (or a query is answered),
1 when a check fails, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import epfunc, periodic, rkorder, skewlimit, terms, ultrafilter
from .errors import (
    DiagramViolation, FormulaSyntaxError, MalformedInput, PeriodOverflow, SkewlimError, StageCapExceeded,
)
from .logic import FiniteStructure, lift_laws, linear_order, los_sweep, parse_formula
from .ordinal import parse_ordinal
from .periodic import period_cap_scope


class UsageError(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _report(doc) -> tuple:
    status = doc.get("status", "pass") if isinstance(doc, dict) else "pass"
    return (1 if status == "fail" else 0), _dump(doc)


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for {args.command}")
    return value


def _ultrafilter(args):
    return ultrafilter.parse_ultrafilter(args.u) if args.u else ultrafilter.profinite(args.point or 0)


def _load_structure(path):
    if path is None:
        return linear_order(2)
    with open(path) as fh:
        return FiniteStructure.from_json(json.load(fh))


# subcommands


def cmd_canon(args):
    text = _need(args, "set")
    try:
        a = periodic.parse_set(text)
        out = periodic.to_dsl(a)
    except MalformedInput:
        out = epfunc.to_dsl(epfunc.parse_function(text))
    return 0, out + "\n"


def cmd_member(args):
    a = periodic.parse_set(_need(args, "set"))
    u = ultrafilter.parse_ultrafilter(_need(args, "u"))
    return 0, ("true" if ultrafilter.uf_member(u, a) else "false") + "\n"


def cmd_los_check(args):
    formulas = [parse_formula(f) for f in args.items] or None
    doc = los_sweep(seed=args.seed, n_structures=args.samples or 200, max_index=args.k or 3, formulas=formulas)
    return _report(doc)


def cmd_lift_laws(args):
    return _report(lift_laws(seed=args.seed, trials=args.samples or 1000))


def _carrier(args):
    if args.carrier == "finite":
        n = args.k or 2
        point = args.point or 0
        return skewlimit.FiniteCarrier(_load_structure(args.items[0] if args.items else None), n, point)
    return skewlimit.OmegaCarrier(_ultrafilter(args))


def cmd_build(args):
    alpha = parse_ordinal(args.rank or "2")
    system = skewlimit.build_skew_system(_carrier(args), alpha)
    stages = system.stages(finite_span=3)
    rng = random.Random(args.seed)
    embeddings = []
    for beta, gamma in zip(stages, stages[1:]):
        for x in skewlimit.sample_payloads(system, beta, 3, rng)[-2:]:
            y = system.embed(beta, gamma, x)
            embeddings.append({"from": str(beta), "to": str(gamma), "payload": skewlimit._show(x),
                               "image": skewlimit._show(y)})
    triples = skewlimit._limit_crossing_triples(alpha, rng, 20)
    coherence = skewlimit.check_coherence(system, lambda s: skewlimit.sample_payloads(system, s, 12, rng), triples)
    doc = {
        "check": "build",
        "status": coherence["status"],
        "carrier": str(system.carrier),
        "rank": str(alpha),
        "stages": [str(s) for s in stages],
        "embeddings": embeddings,
        "coherence": {k: coherence[k] for k in ("status", "checked", "triples", "failures")},
    }
    return _report(doc)


def cmd_audit_system(args):
    doc = skewlimit.audit_system(_ultrafilter(args), samples=args.samples or 100, choices=args.choices or 3,
                                seed=args.seed)
    return _report(doc)


def cmd_verify_chain(args):
    if not args.items:
        raise UsageError("verify-chain needs a chain document path")
    with open(args.items[0]) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"chain document is not JSON: {exc}") from None
    try:
        doc = skewlimit.verify_chain(spec)
    except DiagramViolation as exc:
        doc = {"check": "verify-chain", "status": "fail", "diagram": exc.diagram, "witness": exc.witness}
    return _report(doc)


def cmd_witness_remark1(args):
    if args.carrier == "finite":
        return _report(skewlimit.remark1_witness(carrier=_carrier(args)))
    return _report(skewlimit.remark1_witness(_ultrafilter(args)))


def _looks_like_function(text):
    try:
        epfunc.parse_function(text)
        return True
    except MalformedInput:
        return False


def cmd_compare(args):
    items = args.items
    if len(items) == 2 and not any(_looks_like_function(x) for x in items):
        t, s = terms.parse_term(items[0]), terms.parse_term(items[1])
        k = args.k if args.k is not None else max(terms.term_rank(t), terms.term_rank(s), 0)
        return 0, str(terms.term_compare(t, s, _ultrafilter(args), k)) + "\n"
    if len(items) == 1 and _looks_like_function(items[0]):
        w = rkorder.rk_equiv_injective(epfunc.parse_function(items[0]), _ultrafilter(args), args.bound)
        doc = {"check": "rk-equivalence", "status": "pass" if w.verdict == "Equivalent" else "fail", **w.to_json()}
        return _report(doc)
    if len(items) == 3 and _looks_like_function(items[2]):
        u, v = ultrafilter.parse_ultrafilter(items[0]), ultrafilter.parse_ultrafilter(items[1])
        f = epfunc.parse_function(items[2])
        ok = rkorder.rk_le_check(u, v, f, args.bound)
        doc = {"check": "rk-le", "status": "pass" if ok else "fail", "u": str(u), "v": str(v),
               "f": epfunc.to_dsl(f), "bound": args.bound}
        return _report(doc)
    raise UsageError("compare takes two terms, one map (RK equivalence), or U V map (RK comparison)")


def cmd_order_export(args):
    ts = [terms.parse_term(x) for x in args.items]
    doc = rkorder.order_export(ts, _ultrafilter(args), args.format or "json", args.k)
    if isinstance(doc, str):
        return 0, doc
    return 0, _dump(doc)


def cmd_uf_axioms(args):
    u = _ultrafilter(args)
    return _report(ultrafilter.uf_axiom_sweep(u, seed=args.seed, n_random=args.samples or 200))


COMMANDS = {
    "canon": cmd_canon,
    "member": cmd_member,
    "los-check": cmd_los_check,
    "lift-laws": cmd_lift_laws,
    "build": cmd_build,
    "verify-def1": cmd_audit_system,
    "verify-chain": cmd_verify_chain,
    "witness-remark1": cmd_witness_remark1,
    "compare": cmd_compare,
    "order-export": cmd_order_export,
    "uf-axioms": cmd_uf_axioms,
}


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _natural(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a natural number")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewlim", description="Skew ultralimits over eventually periodic sets.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("items", nargs="*", help="terms, formulas, maps or a document path, per command")
    parser.add_argument("--set")
    parser.add_argument("--u")
    parser.add_argument("--point", type=_natural)
    parser.add_argument("--carrier", choices=["finite", "omega"], default="omega")
    parser.add_argument("--rank")
    parser.add_argument("--k", type=_natural)
    parser.add_argument("--samples", type=_positive)
    parser.add_argument("--choices", type=_positive)
    parser.add_argument("--seed", type=_natural, default=0)
    parser.add_argument("--bound", type=_positive, default=rkorder.DEFAULT_BOUND)
    parser.add_argument("--period-cap", type=_positive, default=periodic.DEFAULT_PERIOD_CAP)
    parser.add_argument("--format", choices=["json", "dot"])
    parser.add_argument("--out")
    return parser


def cmd_run(argv) -> tuple:
    """(exit status, output text, diagnostic text)."""
    parser = build_parser()
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), "", ""
    try:
        with period_cap_scope(args.period_cap):
            status, out = COMMANDS[args.command](args)
    except FormulaSyntaxError as exc:
        return 2, "", f"skewlim: syntax error at position {exc.position}: {exc}\n"
    except (UsageError, MalformedInput, StageCapExceeded, PeriodOverflow, OSError) as exc:
        return 2, "", f"skewlim: {exc}\n"
    except SkewlimError as exc:
        return 1, _dump({"check": args.command, "status": "fail", "error": type(exc).__name__,
                         "message": str(exc)}), ""
    return status, out, ""


def main(argv=None) -> int:
    status, out, err = cmd_run(sys.argv[1:] if argv is None else argv)
    if err:
        sys.stderr.write(err)
    if out:
        path = _out_path(sys.argv[1:] if argv is None else argv)
        if path:
            with open(path, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
    return status


def _out_path(argv):
    for i, a in enumerate(argv):
        if a == "--out" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--out="):
            return a.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
