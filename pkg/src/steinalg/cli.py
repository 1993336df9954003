"""Command-line front end.

Exit codes: 0 success, 1 resource limit hit, 2 parse or malformed input,
3 no operator reachable, 4 a validation check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import multiprocessing
import os
import re
import sys
import time

from . import analytics, chain, control
from .fixtures import FIXTURES, INFEASIBLE_PROBES, TABLE_PAIRS, by_name
from .hermite import cumulant, expect, hermite
from .io import DocumentError, OperatorDocument, expand_hermite_names, parse_target
from .malliavin import MODIFIED, STANDARD, TargetSpec, gamma_malliavin_iter, gamma_power
from .poly import PolySyntaxError, format_poly, parse_poly

EXIT_OK = 0
EXIT_RESOURCE = 1
EXIT_PARSE = 2
EXIT_UNREACHABLE = 3
EXIT_INVALID = 4

MEMORY_ENV = "STEINALG_MAX_MEMORY_MB"

_NAMED = re.compile(r"\s*H\d+(\s*\+\s*H\d+)*\s*")


class UsageError(ValueError):
    """Bad flag values; reported with exit code 2."""


def _apply_memory_cap() -> None:
    """Honour ``STEINALG_MAX_MEMORY_MB`` as an address-space limit."""
    raw = os.environ.get(MEMORY_ENV)
    if not raw:
        return
    try:
        limit = int(raw) * 1024 * 1024
    except ValueError as exc:
        raise UsageError(f"{MEMORY_ENV} must be an integer number of megabytes") from exc
    import resource

    resource.setrlimit(resource.RLIMIT_AS, (limit, limit))


# -- shared helpers ---------------------------------------------------------------


def _target_from_args(args) -> TargetSpec:
    if (args.target is None) == (args.poly is None):
        raise UsageError("give exactly one of --target and --poly")
    if args.target is not None:
        if not _NAMED.fullmatch(args.target):
            raise UsageError(f"--target expects H<n> or a sum like H1+H2, got {args.target!r}")
        return parse_target(args.target)
    return parse_target(args.poly)


def _zero_order(text: str):
    """``cy``, ``generic``, ``y^k`` or an explicit polynomial in ``y``."""
    if text in (control.CY, control.GENERIC) or re.fullmatch(r"y(\^\d+)?", text):
        return text
    return parse_poly(text, names=("y",))


def _document(op: chain.SteinOperator, mode: str, variant: str, nullspace, timing, horizon=None) -> OperatorDocument:
    report = analytics.validate_operator(op, variant)
    return OperatorDocument.from_operator(op, mode, nullspace, report, timing, horizon)


def _render(doc: OperatorDocument, op: chain.SteinOperator, fmt: str) -> str:
    if fmt == "json":
        return doc.to_json()
    if fmt == "latex":
        return op.latex()
    return op.symbolic()


def _load_document(args) -> OperatorDocument:
    if getattr(args, "fixture", None):
        try:
            fx = by_name(args.fixture)
        except KeyError as exc:
            raise UsageError(f"unknown fixture {args.fixture!r}") from exc
        op = chain.operator_from_strings(parse_target(fx.target), fx.coeffs, fx.name)
        return OperatorDocument.from_operator(op, fx.mode)
    if not args.file:
        raise UsageError("give a document path (or - for stdin) or --fixture")
    if args.file == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    return OperatorDocument.from_json(text)


# -- find -------------------------------------------------------------------------


def cmd_find(args) -> int:
    target = _target_from_args(args)
    zero = _zero_order(args.zero_order)
    start = time.perf_counter()
    outputs = []
    if zero == control.GENERIC:
        if target.d != 1:
            raise UsageError("the generic zero order is implemented for univariate targets")
        m0 = args.max_degree if args.m0 is None else args.m0
        sol = control.combine_generic_zero_order(target, m0, args.max_order, args.max_degree, args.variant)
        sols = [sol]
    elif args.all:
        sols = control.all_null_controls(target, args.max_order, args.max_degree, zero, args.variant)
        if not sols:
            raise control.NotReachable(args.max_order, args.max_degree, str(args.zero_order))
    else:
        sols = [control.find_null_control(target, args.max_order, args.max_degree, zero, args.variant)]
    elapsed = time.perf_counter() - start if args.timing else None
    status = EXIT_OK
    for sol in sols:
        op = sol.operator()
        doc = _document(op, sol.mode, args.variant, sol.nullspace_basis, elapsed, sol.T)
        if not analytics.validation_passed(doc.verification, op):
            status = EXIT_INVALID
        outputs.append((doc, op))
    if args.format == "json":
        if len(outputs) == 1:
            print(outputs[0][0].to_json())
        else:
            print(json.dumps([d.to_dict() for d, _ in outputs], indent=2, sort_keys=True))
    else:
        for doc, op in outputs:
            print(_render(doc, op, args.format))
    if status != EXIT_OK:
        print("validation failed on an emitted operator", file=sys.stderr)
    return status


# -- table ------------------------------------------------------------------------


def _cell(job):
    p, mode, objective = job
    target = TargetSpec.from_poly(hermite(p))
    start = time.perf_counter()
    if objective == "min_T":
        got = control.min_order_search(target, mode)
    else:
        expected = TABLE_PAIRS.get(p, {}).get(mode)
        T_cap = max(60, expected[1][0] + 4) if expected else 60
        got = control.min_degree_search(target, mode, T_cap=T_cap)
    return p, mode, objective, got, time.perf_counter() - start


def _probe(job):
    p, T, m = job
    target = TargetSpec.from_poly(hermite(p))
    start = time.perf_counter()
    try:
        control.find_null_control(target, T, m, control.CY)
        reached = True
    except control.NotReachable:
        reached = False
    return p, T, m, reached, time.perf_counter() - start


def _fmt_pair(pair) -> str:
    return "-" if pair is None else f"({pair[0]},{pair[1]})"


def cmd_table(args) -> int:
    if args.p_max < 1:
        raise UsageError("--p-max must be at least 1")
    if args.p_max > 8 and not args.heavy:
        raise UsageError("p > 8 is a stretch run; add --heavy")
    jobs = [(p, mode, obj) for p in range(1, args.p_max + 1) for mode in ("generic", "cy") for obj in ("min_T", "min_m")]
    workers = args.jobs or min(len(jobs), os.cpu_count() or 1)
    results = {}
    # Worker processes rather than threads: the search is CPU bound pure Python,
    # and a process that exceeds its budget can be terminated.
    with multiprocessing.get_context("spawn").Pool(workers) as pool:
        pending = {job: pool.apply_async(_cell, (job,)) for job in jobs}
        probes = [pool.apply_async(_probe, (pr,)) for pr in INFEASIBLE_PROBES if pr[0] <= max(args.p_max, 5)]
        deadline = time.monotonic() + args.cell_timeout * max(1, -(-len(jobs) // workers))
        for job, res in pending.items():
            try:
                results[job] = res.get(timeout=max(deadline - time.monotonic(), 0.1))
            except multiprocessing.TimeoutError:
                results[job] = None
            except control.NotReachable:
                results[job] = (*job, None, float("nan"))
        probe_rows = []
        for res in probes:
            try:
                probe_rows.append(res.get(timeout=max(deadline - time.monotonic(), 0.1)))
            except multiprocessing.TimeoutError:
                probe_rows.append(None)
        pool.terminate()
    mismatches = 0
    rows = []
    for job in jobs:
        p, mode, obj = job
        expected_pairs = TABLE_PAIRS.get(p, {}).get(mode)
        expected = None if expected_pairs is None else expected_pairs[0 if obj == "min_T" else 1]
        res = results[job]
        if res is None:
            got, secs, flag = None, None, "timeout"
        else:
            got, secs = res[3], res[4]
            if expected is None:
                flag = "no reference"
            elif got == expected:
                flag = "ok"
            else:
                flag = "MISMATCH"
                mismatches += 1
        rows.append({"p": p, "mode": mode, "objective": obj, "got": got, "expected": expected, "status": flag, "seconds": secs})
    if args.json:
        print(json.dumps({"cells": rows, "probes": [
            None if r is None else {"p": r[0], "T": r[1], "m": r[2], "reachable": r[3], "seconds": r[4]} for r in probe_rows
        ]}, indent=2, default=list))
    else:
        print(f"{'p':>3} {'mode':<8} {'objective':<6} {'got':>9} {'table':>9} {'seconds':>8}  status")
        for r in rows:
            secs = "-" if r["seconds"] is None else f"{r['seconds']:.2f}"
            print(f"{r['p']:>3} {r['mode']:<8} {r['objective']:<6} {_fmt_pair(r['got']):>9} {_fmt_pair(r['expected']):>9} {secs:>8}  {r['status']}")
        for r in probe_rows:
            if r is None:
                print("probe timed out")
                continue
            verdict = "NotReachable" if not r[3] else "REACHABLE (expected NotReachable)"
            print(f"probe H{r[0]} cy (T,m)=({r[1]},{r[2]}): {verdict} [{r[4]:.2f}s]")
    bad_probe = any(r is not None and r[3] for r in probe_rows)
    return EXIT_INVALID if mismatches or bad_probe else EXIT_OK


# -- verify / emit ----------------------------------------------------------------


def verification_report(op: chain.SteinOperator, variant: str = STANDARD) -> dict:
    trace = chain.forward_replay(op, variant)
    moments = chain.moment_conditions(op, op.T + 4)
    k = 2 * op.T + op.m + 4
    ident = analytics.stein_identity_check(op, k)
    report = {
        "T": op.T,
        "m": op.m,
        "replay_residual_zero": trace.residual.is_zero(),
        "residual_degree": None if trace.residual.is_zero() else int(trace.residual.degree),
        "chain_moment_defects": [str(v) for v in trace.moment_defects],
        "moment_defects": [str(v) for v in moments],
        "stein_identity_defects": [str(v) for v in ident],
    }
    if op.target.d == 1:
        back = chain.backward_validate(op)
        report["backward"] = {"ok": back.ok, "failed_stage": back.failed_stage, "message": back.message}
    else:
        report["backward"] = None
    report["ok"] = (
        report["replay_residual_zero"]
        and not any(trace.moment_defects)
        and not any(moments)
        and not any(ident)
        and (report["backward"] is None or report["backward"]["ok"])
    )
    return report


def cmd_verify(args) -> int:
    doc = _load_document(args)
    op = doc.operator()
    report = verification_report(op, args.variant)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if report["ok"] else EXIT_INVALID


def cmd_emit(args) -> int:
    doc = _load_document(args)
    op = doc.operator()
    if args.format == "json":
        print(doc.to_json())
    else:
        print(_render(doc, op, args.format))
    return EXIT_OK


# -- small utilities ----------------------------------------------------------------


def cmd_hermite(args) -> int:
    if args.n < 0:
        raise UsageError("n must be non-negative")
    print(format_poly(hermite(args.n), ("x",), style="latex" if args.latex else "plain"))
    return EXIT_OK


def cmd_gamma(args) -> int:
    """``Gamma_Y`` applied ``--iterate`` times to ``--apply`` (default: Y itself)."""
    target = parse_target(args.target)
    if args.iterate < 1:
        raise UsageError("--iterate must be at least 1")
    variant = MODIFIED if args.modified else STANDARD
    if args.malliavin:
        if args.apply is not None or args.modified:
            raise UsageError("--malliavin iterates Gamma_r on Y itself; drop --apply and --modified")
        g = gamma_malliavin_iter(target, args.iterate)
    else:
        f = target.h if args.apply is None else parse_poly(expand_hermite_names(args.apply), nvars=target.d)
        g = gamma_power(target, f, args.iterate, variant)
    print(format_poly(g))
    if args.cumulant:
        if args.apply is not None:
            raise UsageError("--cumulant compares against Y itself; drop --apply")
        r = args.iterate
        print(f"E = {expect(g)}  kappa_{r + 1}/{r}! = {cumulant(target.h, r + 1) / math.factorial(r)}")
    return EXIT_OK


def cmd_charode(args) -> int:
    doc = _load_document(args)
    op = doc.operator()
    ode = analytics.charfn_ode(op)
    print(ode.latex())
    if ode.order == 2:
        print(analytics.charfn_pole_classify(ode))
    else:
        print(f"pole classifier not applicable (order {ode.order})")
    if args.residual:
        if op.target.d != 1:
            raise UsageError("numeric residuals need a univariate target")
        ts = [0.1 + 1.9 * k / 19 for k in range(20)]
        print(analytics.charfn_residual(op, ts, args.quad_nodes))
    return EXIT_OK


def cmd_gammacheck(args) -> int:
    names = sorted(analytics.GAMMA_IDENTITIES) if args.which == "all" else [args.which]
    for name in names:
        if name not in analytics.GAMMA_IDENTITIES:
            raise UsageError(f"unknown identity {name!r}")
        res = analytics.gamma_characterization_check(name)
        print(f"{name}: {format_poly(res) if res else '0'}")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    for fx in FIXTURES:
        extra = "  [erratum]" if fx.corrected else ""
        print(f"{fx.name:<14} {fx.target:<12} {fx.mode:<8} T={fx.T}{extra}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steinalg", description="Algebraic polynomial Stein operators for Gaussian polynomials.")
    sub = parser.add_subparsers(dest="command", required=True)

    def target_flags(p):
        p.add_argument("--target", help="named target H<n> or a sum such as H1+H2")
        p.add_argument("--poly", help="explicit target polynomial in x or x1..xd")

    def doc_source(p):
        p.add_argument("file", nargs="?", help="operator JSON document, - for stdin")
        p.add_argument("--fixture", help="use a built-in fixture instead of a file")

    variant = dict(choices=(STANDARD, MODIFIED), default=STANDARD)

    p = sub.add_parser("find", help="search for a null control and emit the operator")
    target_flags(p)
    p.add_argument("--max-order", type=int, required=True, help="largest horizon T to try")
    p.add_argument("--max-degree", type=int, required=True, help="coefficient degree cap m")
    p.add_argument("--zero-order", default=control.CY, help="cy, generic, y^k or a polynomial in y")
    p.add_argument("--m0", type=int, help="largest monomial degree combined in generic mode (default: --max-degree)")
    p.add_argument("--all", action="store_true", help="emit the solution set at every feasible horizon")
    p.add_argument("--variant", **variant)
    p.add_argument("--format", choices=("json", "latex", "symbolic"), default="json")
    p.add_argument("--timing", action="store_true", help="record wall time in the document")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("table", help="reproduce the minimal (T, m) pairs for H_1..H_pmax")
    p.add_argument("--p-max", type=int, default=8)
    p.add_argument("--heavy", action="store_true", help="allow p > 8")
    p.add_argument("--jobs", type=int, default=0, help="worker processes (default: CPU count)")
    p.add_argument("--cell-timeout", type=float, default=120.0, help="seconds per cell")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="re-run every exact check on an operator document")
    doc_source(p)
    p.add_argument("--variant", **variant)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit", help="render an operator document")
    doc_source(p)
    p.add_argument("--format", choices=("json", "latex", "symbolic"), default="latex")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("hermite", help="print the probabilists' Hermite polynomial H_n")
    p.add_argument("n", type=int)
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=cmd_hermite)

    p = sub.add_parser("gamma", help="apply the Gamma operator of a target exactly")
    p.add_argument("--target", required=True, help="target polynomial, e.g. H3, H1+H2 or x1*x2")
    p.add_argument("--apply", help="polynomial in the target's variables (default: the target itself)")
    p.add_argument("--modified", action="store_true", help="use the modified pseudo-inverse")
    p.add_argument("--iterate", type=int, default=1, help="number of applications")
    p.add_argument("--malliavin", action="store_true", help="print the iterated Malliavin Gamma_r instead")
    p.add_argument("--cumulant", action="store_true", help="also compare the expectation with kappa_(r+1)/r!")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("charode", help="characteristic-function ODE and pole classification")
    doc_source(p)
    p.add_argument("--residual", action="store_true", help="numeric residual over t in [0.1, 2]")
    p.add_argument("--quad-nodes", type=int, default=200)
    p.set_defaults(func=cmd_charode)

    p = sub.add_parser("gammacheck", help="exact residual of a Gamma characterization identity")
    p.add_argument("which", help=f"one of {', '.join(sorted(analytics.GAMMA_IDENTITIES))} or all")
    p.set_defaults(func=cmd_gammacheck)

    p = sub.add_parser("fixtures", help="list the built-in golden fixtures")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        _apply_memory_cap()
        return args.func(args)
    except (UsageError, PolySyntaxError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except control.NotReachable as exc:
        print(f"not reachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except MemoryError:
        print(f"error: memory limit reached ({MEMORY_ENV})", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
