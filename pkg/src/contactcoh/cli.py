"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 missing base data,
3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import List, Optional, Sequence

from .algebra import format_rational, parse_rational
from .charnum import (
    BaseStore,
    InvalidKey,
    MissingBaseData,
    ParseError,
    SchemaViolation,
    char_number,
    check_key,
    default_base,
    keys_of_degree,
    load_base,
    parse_base,
    try_char_number,
)
from .chow import ClassP2
from .contact import ring_presentation, verify_contact_associativity, verify_pde, verify_presentation
from .quantum import verify_quantum_associativity
from .report import key_list

EXIT_OK, EXIT_FAIL, EXIT_MISSING, EXIT_INVALID = 0, 1, 2, 3
NEEDS_BASE = "needs-base-data"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {n}")
    return n


def _nonnegative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {n}")
    return n


def _p2_class(text: str) -> ClassP2:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three coefficients c0,c1,c2")
    try:
        return ClassP2(*(parse_rational(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", metavar="FILE", help="base-data file merged over the shipped values")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--format", choices=("json", "csv", "text"))
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")

    parser = _Parser(prog="contactcoh", description="Characteristic numbers and contact products of plane curves.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("charnum", parents=[common], help="one characteristic number N_d(a,b,c)")
    for name in "dabc":
        p.add_argument(f"--{name}", type=int, required=True)

    p = sub.add_parser("table", parents=[common], help="all characteristic numbers up to a degree")
    p.add_argument("--max-d", type=_positive, required=True)
    p.add_argument("--c0-only", action="store_true", help="omit flag conditions (c > 0)")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("which", choices=("pde", "assoc", "quantum", "presentation"))
    p.add_argument("--order", type=_positive, help="truncation order (T-order for quantum)")
    p.add_argument("--delta", type=_p2_class, default=ClassP2(),
                   help="deformation class for quantum, as c0,c1,c2 (default 0,0,0)")
    p.add_argument("--slice", choices=("dfi", "km"), help="restrict the pde check to y3=y5=0 or y3=y4=y5=0")

    p = sub.add_parser("presentation", parents=[common], help="coefficients of the cubic relation for h")
    p.add_argument("--order", type=_nonnegative, default=1, help="order through which the output is exact")
    p.add_argument("--slice", choices=("quantum",), help="set y3=y4=y5=0")

    p = sub.add_parser("base", help="import or export base data")
    bsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = bsub.add_parser("export", parents=[common], help="write the effective base data")
    q.add_argument("--out", metavar="FILE")
    q = bsub.add_parser("import", parents=[common], help="validate a base file and merge it")
    q.add_argument("file")
    q.add_argument("--out", metavar="FILE")
    return parser


DEFAULT_ORDER = {"pde": 6, "assoc": 5, "quantum": 6, "presentation": 4}


# -- output helpers ------------------------------------------------------------------

def _emit_missing(keys, out) -> int:
    print(json.dumps({"status": "missing-base-data", "missing": key_list(keys)}), file=out)
    return EXIT_MISSING


def _rows_csv(header: Sequence[str], rows: List[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _rows_text(header: Sequence[str], rows: List[Sequence]) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


# -- commands ----------------------------------------------------------------------

def cmd_charnum(args, base: BaseStore, out) -> int:
    key = check_key((args.d, args.a, args.b, args.c))
    try:
        value = char_number(key, base)
    except MissingBaseData as exc:
        return _emit_missing(exc.keys, out)
    fmt = args.format or "text"
    if fmt == "json":
        print(json.dumps({**key.to_json(), "value": format_rational(value)}), file=out)
    elif fmt == "csv":
        print(_rows_csv(("d", "a", "b", "c", "value"), [[*key, format_rational(value)]]), file=out)
    else:
        print(format_rational(value), file=out)
    return EXIT_OK


def table_rows(max_d: int, base: BaseStore, c0_only: bool = False) -> List[list]:
    rows = []
    for d in range(1, max_d + 1):
        for key in keys_of_degree(d):
            if c0_only and key.c:
                continue
            value, _ = try_char_number(key, base)
            rows.append([*key, NEEDS_BASE if value is None else format_rational(value)])
    return rows


def cmd_table(args, base: BaseStore, out) -> int:
    rows = table_rows(args.max_d, base, args.c0_only)
    header = ("d", "a", "b", "c", "value")
    fmt = args.format or "csv"
    if fmt == "json":
        print(json.dumps([dict(zip(header, r)) for r in rows], indent=2), file=out)
    elif fmt == "csv":
        print(_rows_csv(header, rows), file=out)
    else:
        print(_rows_text(header, rows), file=out)
    return EXIT_OK


def cmd_verify(args, base: BaseStore, out) -> int:
    order = args.order or DEFAULT_ORDER[args.which]
    if args.which == "pde":
        report = verify_pde(order, base, determinable_only=True, specialize=args.slice)
    elif args.which == "assoc":
        report = verify_contact_associativity(order, base)
    elif args.which == "quantum":
        report = verify_quantum_associativity(order, args.delta)
    else:
        report = verify_presentation(order, base)
    fmt = args.format or "json"
    if fmt == "json":
        print(report.dumps(), file=out)
    else:
        lines = [f"{report.check}: {report.status} (order {report.order}, compared through "
                 f"{report.compared_order}; {report.checked} checked, {len(report.skipped)} skipped)"]
        for f in report.failures:
            lines.append(f"  FAIL {f['where']} at {f['monomial']}: {f['lhs']} != {f['rhs']}")
        if fmt == "csv":
            rows = [[f["where"], f["monomial"], f["lhs"], f["rhs"]] for f in report.failures]
            lines = [_rows_csv(("where", "monomial", "lhs", "rhs"), rows)]
        print("\n".join(lines), file=out)
    return report.exit_code()


def cmd_presentation(args, base: BaseStore, out) -> int:
    pres = ring_presentation(args.order + 3, base, determinable_only=True,
                             slice_quantum=args.slice == "quantum")
    if pres.undetermined:
        return _emit_missing(pres.missing_keys(), out)
    fmt = args.format or "json"
    names = ("xi0", "xi1", "xi2")
    if fmt == "json":
        doc = {"order": args.order, "xi": [str(x) for x in pres.xi],
               "terms": {n: x.to_json() for n, x in zip(names, pres.xi)}}
        print(json.dumps(doc, indent=2), file=out)
    elif fmt == "csv":
        rows = [[n, m, c] for n, x in zip(names, pres.xi) for m, c in x.to_json()["terms"]]
        print(_rows_csv(("coefficient", "monomial", "value"), rows), file=out)
    else:
        print("\n".join(f"{n} = {x}" for n, x in zip(names, pres.xi)), file=out)
    return EXIT_OK


def cmd_base(args, base: BaseStore, out) -> int:
    if args.action == "import":
        with open(args.file) as fh:
            base = parse_base(fh.read(), base)
    text = json.dumps(base.to_json(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)
    return EXIT_OK


COMMANDS = {
    "charnum": cmd_charnum,
    "table": cmd_table,
    "verify": cmd_verify,
    "presentation": cmd_presentation,
    "base": cmd_base,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        base = load_base(args.base) if getattr(args, "base", None) else default_base()
        return COMMANDS[args.command](args, base, out)
    except MissingBaseData as exc:
        return _emit_missing(exc.keys, out)
    except (InvalidKey, ParseError, SchemaViolation, OSError) as exc:
        print(f"contactcoh: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
