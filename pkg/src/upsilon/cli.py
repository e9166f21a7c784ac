"""Command-line interface.

Subcommands: normalize, build-grammar, fip, count, census, verify, density.
Exit codes: 0 success, 1 domain or usage error, 2 verification mismatch.
Output is plain CSV / line-oriented text, byte-stable across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import build, closed_form, oracle, series
from .fip import NonConservativeGrammarError, fip
from .grammar import (
    GrammarInvariantError,
    format_grammar,
    grammar_to_json,
    parse_pattern,
)
from .terms import Rule, StepLimitExceeded, TermSyntaxError, normalize, parse, show

_SYNTAX_NOTES = """\
term syntax:    index: 0 1 2 ...   abstraction: \\ t   application: t t
                closure: t[s]      slash: t/   lift: +(s)   shift: ^
pattern syntax: term syntax plus nonterminals T S N G0 G1 ... and succ
environment:    UPSILON_SERIES_ORDER overrides the default series order
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors; 2 is for mismatches
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _default_order() -> int:
    return int(os.environ.get("UPSILON_SERIES_ORDER", "800"))


def _build_parser() -> argparse.ArgumentParser:
    top = _Parser(
        prog="upsilon",
        description="Normal-order upsilon-reduction toolkit: reduction engine, "
        "step-count grammars, exact series and asymptotic densities.",
        epilog=_SYNTAX_NOTES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="reduce a term to its normal form")
    p.add_argument("term", help="term in concrete syntax, e.g. '0[+(^)]'")
    p.add_argument("--trace", action="store_true", help="print every step")
    p.add_argument("--step-limit", type=_positive, default=None)

    p = sub.add_parser("build-grammar", help="emit the level-K grammar")
    p.add_argument("-k", type=int, required=True, metavar="K")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument(
        "--no-fvar-merge",
        action="store_true",
        help="keep one production per full-spine split instead of 0[Gn/]",
    )
    p.add_argument("-o", dest="output", default=None, metavar="FILE")

    p = sub.add_parser("fip", help="finite intersection partition of two patterns")
    p.add_argument("alpha")
    p.add_argument("beta")
    p.add_argument("-k", type=int, default=0, metavar="LEVEL", help="grammar level (default 0)")
    p.add_argument("--no-fvar-merge", action="store_true")

    p = sub.add_parser("count", help="exact counts of terms normalizing in K steps")
    p.add_argument("-k", type=int, required=True, metavar="K")
    p.add_argument("-n", type=_positive, required=True, metavar="N", help="largest size")
    p.add_argument("--no-fvar-merge", action="store_true")

    p = sub.add_parser("census", help="normalize every term up to a size, tabulate steps")
    p.add_argument("--max-size", type=_positive, required=True)
    p.add_argument("--max-steps", type=_positive, default=64)
    p.add_argument("--csv", default=None, metavar="FILE")
    p.add_argument("--jobs", type=_positive, default=1)

    p = sub.add_parser(
        "verify",
        help="cross-check census, grammar membership and series counts (exit 2 on mismatch)",
    )
    p.add_argument("--max-size", type=_positive, required=True)
    p.add_argument("--max-steps", type=_positive, default=64)
    p.add_argument("-k", type=int, default=None, metavar="LEVEL", help="single level (default 0..4)")
    p.add_argument("--no-fvar-merge", action="store_true")

    p = sub.add_parser("density", help="asymptotic density of K-step terms")
    p.add_argument("-k", type=int, required=True, metavar="K")
    p.add_argument("--method", choices=("exact", "numeric"), default="exact")
    p.add_argument("--digits", type=_positive, default=5, help="decimal places (default 5)")
    p.add_argument("--order", type=_positive, default=None, help="series order for numeric")
    p.add_argument("--no-fvar-merge", action="store_true")
    return top


def _hierarchy(k: int, args) -> build.ReductionGrammar:
    if k < 0:
        raise GrammarInvariantError("level must be non-negative")
    merge = not getattr(args, "no_fvar_merge", False)
    return build.build_hierarchy(k, fvar_merge=merge)[k]


def _cmd_normalize(args) -> int:
    t = parse(args.term)
    res = normalize(t, step_limit=args.step_limit, keep_trace=args.trace)
    if args.trace and res.trace:
        for i, (term, rule) in enumerate(res.trace, start=1):
            print(f"step {i} ({rule.value}): {show(term)}")
    print(f"normal form: {show(res.nf)}")
    print(f"steps: {res.steps}")
    return 0


def _cmd_build_grammar(args) -> int:
    g = _hierarchy(args.k, args)
    if args.format == "json":
        text = json.dumps(grammar_to_json(g), indent=2) + "\n"
    else:
        text = format_grammar(g)
    if args.output:
        with open(args.output, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_fip(args) -> int:
    g = _hierarchy(args.k, args)
    alpha = parse_pattern(args.alpha)
    beta = parse_pattern(args.beta)
    from .grammar import show_pattern

    for part in fip(alpha, beta, g):
        print(show_pattern(part))
    return 0


def _cmd_count(args) -> int:
    g = _hierarchy(args.k, args)
    coeffs = series.grammar_series(g, args.n)
    print("n,count")
    for n in range(1, args.n + 1):
        print(f"{n},{coeffs[n]}")
    return 0


def _cmd_census(args) -> int:
    table = oracle.census(args.max_size, args.max_steps, jobs=args.jobs)
    lines = ["size,steps,count"]
    lines.extend(",".join(row) for row in table.csv_rows())
    text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify(args) -> int:
    levels = [args.k] if args.k is not None else list(range(0, 5))
    top = max(levels)
    merge = not args.no_fvar_merge
    hierarchy = build.build_hierarchy(top, fvar_merge=merge)
    table = oracle.census(args.max_size, args.max_steps)
    failed = False
    for k in levels:
        g = hierarchy[k]
        coeffs = series.level_series(g, args.max_size)[k]
        report = oracle.verify_grammar(
            g, args.max_size, table=table, series_coefficients=list(coeffs.coeffs)
        )
        status = "ok" if report.ok else "MISMATCH"
        print(f"level {k}: {status}")
        if not report.ok:
            failed = True
            for n, census_count, member_count, series_count in report.rows:
                if census_count != member_count or (
                    series_count is not None and series_count != census_count
                ):
                    print(
                        f"  size {n}: census {census_count}, member {member_count}, "
                        f"series {series_count}"
                    )
            if report.first_mismatch:
                n, term = report.first_mismatch
                print(f"  first differing term (size {n}): {term}")
    return 2 if failed else 0


def _cmd_density(args) -> int:
    g = _hierarchy(max(args.k, 1), args)
    if args.method == "exact":
        result = closed_form.density_exact(args.k, g, digits=max(args.digits + 10, 40))
        print(result.rounded(args.digits))
    else:
        order = args.order or _default_order()
        value = series.density_numeric(args.k, order, g)
        print(f"{value:.{args.digits}f}")
    return 0


_COMMANDS = {
    "normalize": _cmd_normalize,
    "build-grammar": _cmd_build_grammar,
    "fip": _cmd_fip,
    "count": _cmd_count,
    "census": _cmd_census,
    "verify": _cmd_verify,
    "density": _cmd_density,
}


def main(argv: Optional[list[str]] = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (
        TermSyntaxError,
        GrammarInvariantError,
        NonConservativeGrammarError,
        StepLimitExceeded,
        closed_form.PoleAtSingularityError,
        ValueError,
        OSError,
    ) as exc:
        print(f"upsilon: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
