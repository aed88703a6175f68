"""Command-line surface: gen, measure, extract, build, balance, verify,
report.

Exit codes: 0 exact success, 2 bounded/inconclusive results, 1 user
error.  Identical invocations (including seed and limits) produce
byte-identical outputs; wall-clock limits (ms=) are the one knob that
can break that, so leave them unset when reproducibility matters.

Default search limits come from the CCLAB_LIMITS environment variable
(same syntax as --limits: node=..,ms=..,rects=..), overridden per flag.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .builder import (DIRECT_MAX, LIFT_EXTRACT, build_protocol,
                      theorem_report)
from .errors import CapacityError, InvariantError, ParseError, StructureError
from .limits import SearchLimits
from .matrix import (BoolFun, distinct_col_count, distinct_row_count,
                     format_bfn, make_family, rank, read_bfn, xor_power)
from .protocol import (balance, evaluate, exact_cc, tree_from_obj,
                       tree_to_obj, verify)
from .rectangles import EXACT, check_monochromatic, cover_number, read_rect
from .entropy import extract_rectangle

MEASURE_COLUMNS = ("name", "rows", "cols", "rank", "distinct_rows",
                   "distinct_cols", "D_lo", "D_hi", "D_status",
                   "C_lo", "C_hi", "C_status")
REPORT_COLUMNS = ("name", "rows", "cols", "rank", "D_lo", "D_hi", "n",
                  "C_lo", "C_hi", "logC", "rho", "degenerate", "leaves",
                  "balanced_depth")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="cclab", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True):
        if inputs:
            sp.add_argument("--in", dest="in_path", help="input .bfn matrix file")
            sp.add_argument("--family", choices=["xor", "and", "eq", "gt", "ip",
                                                 "random", "const"])
            sp.add_argument("--m", help="family size (report: comma list)")
            sp.add_argument("--seed", type=int, help="seed for random family")
            sp.add_argument("--value", type=int, choices=[0, 1],
                            help="bit for const family")
        sp.add_argument("--limits", help="node=..,ms=..,rects=..")
        sp.add_argument("--format", choices=["text", "csv", "json"],
                        default="text")
        sp.add_argument("--out", help="output path (default: stdout)")

    sp = sub.add_parser("gen", help="write a family matrix as .bfn")
    common(sp)

    sp = sub.add_parser("measure", help="rank, distinct rows/cols, D, C")
    common(sp)
    sp.add_argument("--mode", choices=["exact", "greedy"], default="exact")

    sp = sub.add_parser("extract", help="pull a base rectangle out of a lift rectangle")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--rect", required=True, help=".rect file over the lift")

    sp = sub.add_parser("build", help="build a protocol tree (rank-split recursion)")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--strategy", choices=[DIRECT_MAX, LIFT_EXTRACT],
                    default=DIRECT_MAX)
    sp.add_argument("--mode", choices=["exact", "greedy"], default="greedy",
                    help="exact: also compute C(f^(+n)) exactly to audit the trace")

    sp = sub.add_parser("balance", help="rebalance a protocol tree")
    common(sp, inputs=False)
    sp.add_argument("--in", dest="in_path", required=True, help="protocol json")

    sp = sub.add_parser("verify", help="check a protocol tree against a matrix")
    common(sp, inputs=False)
    sp.add_argument("--in", dest="in_path", required=True, help="protocol json")
    sp.add_argument("--matrix", required=True, help=".bfn matrix file")

    sp = sub.add_parser("report", help="lower-bound experiment rows across a family sweep")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--strategy", choices=[DIRECT_MAX, LIFT_EXTRACT],
                    default=DIRECT_MAX)
    sp.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    return p


def _limits(args) -> SearchLimits:
    base = SearchLimits()
    env = os.environ.get("CCLAB_LIMITS")
    if env:
        base = SearchLimits.parse(env, base)
    if getattr(args, "limits", None):
        base = SearchLimits.parse(args.limits, base)
    return base


def _load_input(args) -> BoolFun:
    if bool(args.in_path) == bool(args.family):
        raise ValueError("exactly one input source: --in or --family")
    if args.in_path:
        return read_bfn(args.in_path)
    if not args.m:
        raise ValueError("--family requires --m")
    return make_family(args.family, int(args.m), seed=args.seed,
                       const_value=args.value)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _render(rows, columns, fmt) -> str:
    if fmt == "json":
        return json.dumps(rows if len(rows) != 1 else rows[0],
                          sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        lines = ["#v1 " + ",".join(columns)]
        lines += [",".join(_fmt(r.get(c)) for c in columns) for r in rows]
        return "\n".join(lines) + "\n"
    blocks = []
    for r in rows:
        blocks.append("\n".join(f"{c}: {_fmt(r.get(c))}" for c in columns))
    return "\n\n".join(blocks) + "\n"


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    f = _load_input(args)
    _emit(format_bfn(f), args.out)
    return 0


def _cmd_measure(args) -> int:
    f = _load_input(args)
    limits = _limits(args)
    cc = exact_cc(f, limits)
    cov = cover_number(f, mode=args.mode, limits=limits)
    row = {
        "name": f.label or "f", "rows": f.rows, "cols": f.cols,
        "rank": rank(f), "distinct_rows": distinct_row_count(f),
        "distinct_cols": distinct_col_count(f),
        "D_lo": cc.lower, "D_hi": cc.upper, "D_status": cc.status,
        "C_lo": cov.lower, "C_hi": cov.upper, "C_status": cov.status,
    }
    _emit(_render([row], MEASURE_COLUMNS, args.format), args.out)
    return 0 if cc.status == "exact" and cov.status == EXACT else 2


def _cmd_extract(args) -> int:
    f = _load_input(args)
    rect = read_rect(args.rect)
    lift = xor_power(f, args.n)
    if check_monochromatic(lift.lifted, rect) is None:
        v0 = int(lift.lifted.sign[rect.row_set[0], rect.col_set[0]])
        for x in rect.row_set:
            for y in rect.col_set:
                if lift.lifted.sign[x, y] != v0:
                    raise ValueError(
                        f"rectangle is not monochromatic: cell ({x}, {y}) "
                        f"breaks the color of ({rect.row_set[0]}, {rect.col_set[0]})")
    t, ctx, cert = extract_rectangle(lift, rect)
    record = cert.as_record()
    record["T_rows"] = list(t.row_set)
    record["T_cols"] = list(t.col_set)
    k = math.log2(cert.r_size)
    guarantee = 2.0 ** (k / args.n - 2)
    if args.format == "json":
        record["guarantee"] = guarantee
        _emit(json.dumps(record, sort_keys=True, indent=2) + "\n", args.out)
    else:
        lines = [f"{key}: {_fmt(record[key])}" for key in
                 ("i", "x_prefix", "y_suffix", "u", "v", "R_size", "T_size",
                  "color", "T_rows", "T_cols", "check")]
        lines.append(f"guarantee: |T| >= 2^(k/n - 2) = {_fmt(guarantee)}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_build(args) -> int:
    f = _load_input(args)
    limits = _limits(args)
    cover_value = None
    audited = args.mode != "exact"  # greedy mode: nothing to audit
    if args.mode == "exact":
        lift = xor_power(f, args.n)
        cov = cover_number(lift.lifted, EXACT, limits)
        if cov.status == EXACT:
            cover_value = cov.upper
            audited = True
    tree, trace = build_protocol(f, args.n, strategy=args.strategy,
                                 cover_value=cover_value)
    if not verify(tree, f):
        raise InvariantError("built protocol failed verification")
    if not args.out:
        raise ValueError("build requires --out for the protocol file")
    _emit(json.dumps(tree_to_obj(tree), sort_keys=True, indent=2) + "\n",
          args.out)
    trace_obj = {
        "rank_steps": trace.rank_steps, "shrink_steps": trace.shrink_steps,
        "base_case": trace.base_case, "input_rank": trace.input_rank,
        "cover_value": trace.cover_value, "n": trace.n,
        "budgets_ok": trace.budgets_ok(),
        "leaves": tree.leaf_count, "depth": tree.depth,
        "steps": [{"kind": s.kind, "rows": s.rows, "cols": s.cols,
                   "rank": s.rank, "side": s.side, "rect_area": s.rect_area,
                   "removed_cells": s.removed_cells,
                   "area_check": s.area_check, "shrink_check": s.shrink_check}
                  for s in trace.steps],
    }
    _emit(json.dumps(trace_obj, sort_keys=True, indent=2) + "\n",
          args.out + ".trace.json")
    return 0 if audited else 2


def _cmd_balance(args) -> int:
    with open(args.in_path, "r", encoding="utf-8") as fh:
        tree = tree_from_obj(json.load(fh))
    out = balance(tree)
    _emit(json.dumps(tree_to_obj(out), sort_keys=True, indent=2) + "\n",
          args.out)
    return 0


def _cmd_verify(args) -> int:
    with open(args.in_path, "r", encoding="utf-8") as fh:
        tree = tree_from_obj(json.load(fh))
    f = read_bfn(args.matrix)
    if tree.n_rows != f.rows or tree.n_cols != f.cols:
        raise ValueError("tree and matrix dimensions differ")
    for x in range(f.rows):
        for y in range(f.cols):
            got = evaluate(tree, x, y)[0]
            if got != f.f_value(x, y):
                sys.stderr.write(
                    f"mismatch at ({x}, {y}): protocol {got}, function "
                    f"{f.f_value(x, y)}\n")
                return 1
    _emit(f"verified: {f.rows}x{f.cols}, {tree.leaf_count} leaves, "
          f"depth {tree.depth}\n", args.out)
    return 0


def _cmd_report(args) -> int:
    if not args.family or not args.m:
        raise ValueError("report requires --family and --m (comma list allowed)")
    limits = _limits(args)
    sizes = [int(tok) for tok in str(args.m).split(",") if tok.strip()]
    rows = []
    all_exact = True
    for m in sizes:
        f = make_family(args.family, m, seed=args.seed, const_value=args.value)
        rep = theorem_report(f, args.n, limits=limits, strategy=args.strategy)
        rows.append(rep.as_dict())
        all_exact = all_exact and rep.d_exact and rep.c_exact
    _emit(_render(rows, REPORT_COLUMNS, args.format), args.out)
    return 0 if all_exact else 2


_DISPATCH = {
    "gen": _cmd_gen, "measure": _cmd_measure, "extract": _cmd_extract,
    "build": _cmd_build, "balance": _cmd_balance, "verify": _cmd_verify,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except ParseError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except (ValueError, CapacityError, StructureError, OSError,
            json.JSONDecodeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
