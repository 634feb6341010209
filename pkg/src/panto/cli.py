"""Command-line interface.

Exit codes: 0 success, 1 usage or parse error, 2 substitution rejected,
3 resource cap exceeded, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from contextlib import contextmanager
from fractions import Fraction

from .evaluator import DEFAULT_MAX_VALUES, ResourceLimitError, tabulate
from .moments import BoundaryData, compute_moments, form_discrepancy, unnormalize
from .numerics import format_rational, parse_rational, render_decimal
from .verifier import SUITES, SuiteConfig, depth_sweep, run_suites
from .words import (
    LETTERS,
    SHAPE_CONDITIONS,
    Substitution,
    SubstitutionError,
    SubstitutionRejected,
    SubstitutionSyntaxError,
    delta_level,
    parse_images,
    validate,
)

EXIT_OK, EXIT_USAGE, EXIT_REJECT, EXIT_RESOURCE, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _digits(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 50:
        raise argparse.ArgumentTypeError(f"digits must be in 1..50, got {value}")
    return value


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return _positive(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise UsageError(f"invalid {name}={raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="panto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--subst", required=True, help="substitution, e.g. a:ab,b:ba or {\"a\":\"ab\",\"b\":\"ba\"}")
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--digits", type=_digits, default=6, help="decimal digits (default 6)")

    sub.add_parser("validate", parents=[common], help="check the standing hypotheses")

    p = sub.add_parser("invariants", parents=[common], help="weighted occurrence counts per level")
    p.add_argument("--levels", type=_non_negative, default=2)

    boundary = _Parser(add_help=False)
    boundary.add_argument("--printed-lemma1", action="store_true", help="use the printed (inconsistent) moment relation")
    boundary.add_argument("--threads", type=_positive, default=None)
    boundary.add_argument("--max-values", type=_positive, default=None)

    p = sub.add_parser("moments", parents=[common, boundary], help="normalized moment table")
    p.add_argument("--f0", type=_rational, required=True)
    p.add_argument("--f1", type=_rational, required=True)
    p.add_argument("--levels", type=_non_negative, default=2)

    p = sub.add_parser("evaluate", parents=[common, boundary], help="exact values at λ-adic points")
    p.add_argument("--f0", type=_rational, required=True)
    p.add_argument("--f1", type=_rational, required=True)
    p.add_argument("--depth", type=_non_negative, required=True)
    p.add_argument("--extent", type=_positive, default=1)
    p.add_argument("--all-levels", action="store_true")

    p = sub.add_parser("verify", parents=[common, boundary], help="run oracle and property suites")
    p.add_argument("--f0", type=_rational, default=Fraction(0))
    p.add_argument("--f1", type=_rational, default=Fraction(1))
    p.add_argument("--depth", type=_positive, default=None, help="finest depth of the sweep (default: largest d with λ^d <= 1024)")
    p.add_argument("--suite", action="append", default=None, help=f"one of {', '.join(SUITES + ('all',))}; repeatable or comma-separated")
    p.add_argument("--seed", type=int, default=0)
    return parser


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _write_csv(stream, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    stream.write(buf.getvalue())


def _load_substitution(text: str) -> Substitution:
    return Substitution(*parse_images(text))


def cmd_validate(args) -> int:
    try:
        image_a, image_b = parse_images(args.subst)
    except SubstitutionSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = validate(image_a, image_b)
    with _output(args.out) as out:
        if args.json:
            out.write(json.dumps(report.as_dict(), indent=2) + "\n")
        else:
            out.write(f"substitution: a:{image_a},b:{image_b}\n")
            for label, value in (
                ("lambda", report.lam),
                ("lambda_a", report.lam_a),
                ("lambda_b", report.lam_b),
                ("delta1(a in sigma(a))", report.delta1_a_in_sigma_a),
                ("delta1(a in sigma(b))", report.delta1_a_in_sigma_b),
            ):
                if value is not None:
                    out.write(f"{label}: {value}\n")
            if report.prolongable:
                out.write(f"prolongable on: {', '.join(report.prolongable)}\n")
            out.write("accept\n" if report.accepted else f"reject: {report.reason}\n")
    if report.accepted:
        return EXIT_OK
    if report.failure in SHAPE_CONDITIONS:
        print(f"shape error: {report.reason}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_REJECT


def cmd_invariants(args, sub: Substitution) -> int:
    rows = []
    for ell in range(args.levels + 1):
        values = [delta_level(sub, alpha, beta, ell) for beta in LETTERS for alpha in LETTERS]
        rows.append((ell, values))
    names = ["a_in_sigma_a", "b_in_sigma_a", "a_in_sigma_b", "b_in_sigma_b"]
    with _output(args.out) as out:
        if args.json:
            data = [
                {"level": ell, **{n: format_rational(v) for n, v in zip(names, vals)}, **{f"{n}_decimal": render_decimal(v, args.digits) for n, v in zip(names, vals)}}
                for ell, vals in rows
            ]
            out.write(json.dumps(data, indent=2) + "\n")
        else:
            _write_csv(
                out,
                ["level", *names, *(f"{n}_decimal" for n in names)],
                [[ell, *map(format_rational, vals), *(render_decimal(v, args.digits) for v in vals)] for ell, vals in rows],
            )
    return EXIT_OK


def _form(args) -> str:
    return "printed" if args.printed_lemma1 else "derived"


def cmd_moments(args, sub: Substitution) -> int:
    boundary = BoundaryData(args.f0, args.f1)
    table = compute_moments(sub, boundary, args.levels, _form(args))
    if args.printed_lemma1:
        print(f"printed-lemma1: {form_discrepancy(sub, boundary, args.levels).describe()}", file=sys.stderr)
    rows = []
    for ell, (mt_a, mt_b) in enumerate(table.levels):
        rows.append((ell, [mt_a, mt_b, unnormalize(ell, mt_a, sub.lam), unnormalize(ell, mt_b, sub.lam)]))
    names = ["mt_a", "mt_b", "m_a", "m_b"]
    with _output(args.out) as out:
        if args.json:
            data = [
                {"level": ell, **{n: format_rational(v) for n, v in zip(names, vals)}, **{f"{n}_decimal": render_decimal(v, args.digits) for n, v in zip(names, vals)}}
                for ell, vals in rows
            ]
            out.write(json.dumps(data, indent=2) + "\n")
        else:
            _write_csv(
                out,
                ["level", *names, *(f"{n}_decimal" for n in names)],
                [[ell, *map(format_rational, vals), *(render_decimal(v, args.digits) for v in vals)] for ell, vals in rows],
            )
    return EXIT_OK


def _max_values(args) -> int:
    if args.max_values is not None:
        return args.max_values
    return _env_int("PANTO_MAX_VALUES", DEFAULT_MAX_VALUES)


def _threads(args) -> int:
    return args.threads or _env_int("PANTO_THREADS", 1)


def cmd_evaluate(args, sub: Substitution) -> int:
    boundary = BoundaryData(args.f0, args.f1)
    grid = tabulate(
        sub,
        boundary,
        args.depth,
        args.extent,
        form=_form(args),
        threads=_threads(args),
        max_values=_max_values(args),
    )
    lam = sub.lam
    levels = range(grid.depth + 1) if args.all_levels else [grid.depth]
    with _output(args.out) as out:
        if args.json:
            points = [
                {
                    "level": j,
                    "index": n,
                    "x": f"{n}/{lam}^{j}",
                    "value": format_rational(v),
                    "decimal": render_decimal(v, args.digits),
                }
                for j in levels
                for n, v in enumerate(grid.levels[j])
            ]
            doc = {
                "substitution": str(sub),
                "f0": format_rational(boundary.f0),
                "f1": format_rational(boundary.f1),
                "depth": grid.depth,
                "extent": grid.extent,
                "points": points,
            }
            out.write(json.dumps(doc, indent=2) + "\n")
        else:
            rows = [
                [j, n, f"{n}/{lam}^{j}", v.numerator, v.denominator, render_decimal(v, args.digits)]
                for j in levels
                for n, v in enumerate(grid.levels[j])
            ]
            _write_csv(out, ["level", "index", "x_exact", "value_num", "value_den", "value_decimal"], rows)
    return EXIT_OK


def default_depth(lam: int, budget: int = 1024) -> int:
    depth = 1
    while lam ** (depth + 1) <= budget:
        depth += 1
    return depth


def cmd_verify(args, sub: Substitution) -> int:
    names: list[str] = []
    for entry in args.suite or ["all"]:
        names.extend(x.strip() for x in entry.split(",") if x.strip())
    bad = [n for n in names if n not in SUITES and n != "all"]
    if bad:
        raise UsageError(f"unknown suite(s): {', '.join(bad)}")
    depth = args.depth or default_depth(sub.lam)
    cfg = SuiteConfig(
        depths=depth_sweep(depth),
        seed=args.seed,
        form=_form(args),
        threads=_threads(args),
        max_values=_max_values(args),
    )
    boundary = BoundaryData(args.f0, args.f1)
    report = run_suites(sub, names, cfg, boundary)
    with _output(args.out) as out:
        out.write(report.to_json() + "\n")
    if args.printed_lemma1:
        print(f"printed-lemma1: {form_discrepancy(sub, boundary, 3).describe()}", file=sys.stderr)
    failure = report.first_failure()
    if failure is not None:
        detail = f" ({failure.detail})" if failure.detail else ""
        print(f"first failing check: {failure.case}{detail}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "invariants": cmd_invariants,
    "moments": cmd_moments,
    "evaluate": cmd_evaluate,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        try:
            sub = _load_substitution(args.subst)
        except SubstitutionRejected as exc:
            print(f"rejected: {exc}", file=sys.stderr)
            return EXIT_REJECT
        except SubstitutionError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args, sub)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
