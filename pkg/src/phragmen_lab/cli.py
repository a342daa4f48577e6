"""Command-line interface: ``phragmen-lab <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import axioms, bounds, euclidean, harness
from .election import (
    Election,
    ElectionError,
    committee_labels,
    parse_election,
    random_election,
    serialize_election,
)
from .functions import as_fraction
from .phragmen import PhragmenError, TieRule, run_phragmen
from .rules import RuleSyntaxError, parse_rule
from .thiele import InstanceTooLarge, lambda_score

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this CLI reserves 2 for runtime errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_election(path: str) -> Election:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_election(text)


def _tie(text: str) -> TieRule:
    if text == "lex":
        return TieRule.lex()
    head, _, rest = text.partition(":")
    if head != "fixed" or not rest:
        raise UsageError(f"bad tie rule {text!r}; use 'lex' or 'fixed:3,1,2'")
    try:
        return TieRule.fixed([int(x) - 1 for x in rest.split(",")])
    except ValueError:
        raise UsageError(f"bad tie order {rest!r}") from None


def _ints(text: str, count: int, name: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",")]
    except ValueError:
        values = []
    if len(values) != count:
        raise UsageError(f"--{name} expects {count} comma-separated integers")
    return values


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    try:
        e = _read_election(args.file)
    except (ElectionError, OSError) as err:
        print(err)
        return EXIT_RUNTIME
    print(f"OK (n={e.n}, m={e.m}, k={e.k})")
    return EXIT_OK


def cmd_run(args) -> int:
    e = _read_election(args.election)
    if args.k is not None:
        e = e.with_k(args.k)
    rule = parse_rule(args.rule)
    tie = _tie(args.tie)
    if rule.kind == "phragmen":
        trace = run_phragmen(e, rule.alpha, rule.beta, tie, args.mode, args.eps)
        report = trace.to_dict(e)
        if not args.trace:
            report = {"committee": report["committee"], "mode": report["mode"]}
    else:
        winners = rule.winners(e, tie, args.mode)
        report = {
            "committee": [c + 1 for c in winners[0]],
            "winners": [[c + 1 for c in w] for w in winners],
            "labels": committee_labels(e, winners[0]),
            "score": str(lambda_score(e, winners[0], rule.lam)),
        }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_bounds(args) -> int:
    curve = bounds.emit_bound_curve(args.family, args.k, args.grid)
    _emit(curve.to_csv(), args.out)
    return EXIT_OK


def _instances(args) -> list[Election]:
    if args.election:
        return [_read_election(args.election)]
    n, m, k, seed, count = _ints(args.random, 5, "random")
    if min(n, m, k, count) < 1 or k > m:
        raise UsageError("--random needs positive n, m, count and 1 <= k <= m")
    rng = np.random.default_rng(seed)
    return [random_election(rng, n, m, k) for _ in range(count)]


def cmd_verify(args) -> int:
    if bool(args.election) == bool(args.random):
        raise UsageError("give exactly one of --election or --random")
    rule = parse_rule(args.rule)
    tie = _tie(args.tie)
    details, checked, skipped = [], 0, 0
    for index, e in enumerate(_instances(args)):
        if args.property == "iuac" and args.random:
            if axioms.unanimous_candidates(e):
                skipped += 1  # injecting another would make two
                continue
            e = axioms.with_unanimous_candidate(e)
        try:
            if args.property == "pjr":
                f = axioms.pjr_bound_for(rule, strict=args.strict)
                for w in rule.winners(e, tie, args.mode):
                    violation = axioms.verify_pjr_degree(e, w, f)
                    if violation:
                        details.append({"instance": index, "committee": [c + 1 for c in w],
                                        **violation.to_dict()})
            elif args.property == "iuac":
                report = axioms.check_iuac(rule, e, tie, args.mode)
                if not report.holds:
                    details.append({"instance": index, **report.to_dict()})
            else:
                report = axioms.check_committee_monotonicity(
                    rule, e, args.k_max or e.m, tie, args.mode
                )
                if not report.holds:
                    details.append({"instance": index, **report.to_dict()})
        except PhragmenError as err:
            if not args.random:
                raise
            skipped += 1  # fewer approved candidates than seats
            logging.getLogger(__name__).debug("instance %d skipped: %s", index, err)
            continue
        checked += 1
    print(json.dumps({"property": args.property, "rule": args.rule, "checked": checked,
                      "skipped": skipped, "violations": len(details), "details": details},
                     indent=2))
    print(f"{len(details)} violations")
    return EXIT_OK


def cmd_gen(args) -> int:
    a, b = (float(as_fraction(x)) for x in args.beta.split(","))
    cfg = euclidean.EuclideanConfig(a, b, args.n, args.m, args.k, args.xi)
    pe = euclidean.build_euclidean_election(cfg, np.random.default_rng(args.seed))
    _emit(serialize_election(pe.election), args.out)
    if args.positions:
        with open(args.positions, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kind", "index", "position"])
            w.writerows(("voter", i + 1, repr(float(x))) for i, x in enumerate(pe.voter_positions))
            w.writerows(
                ("candidate", i + 1, repr(float(x))) for i, x in enumerate(pe.candidate_positions)
            )
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = harness.load_config(args.config, runs=args.runs, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw = out / "raw.csv.gz" if args.raw else None
    summary = harness.run_experiment(cfg, workers=args.workers, raw_path=raw)
    for path in harness.write_outputs(summary, out):
        print(path)
    for err in summary.errors:
        print(err, file=sys.stderr)
    return EXIT_RUNTIME if summary.errors else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phragmen-lab", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check an election file")
    s.add_argument("file", help="election in JSON or line format ('-' for stdin)")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("run", help="compute a committee")
    s.add_argument("--rule", required=True, help="rule spec, e.g. alpha:geom:0.5, beta:exp:0.9:100, thiele:pav")
    s.add_argument("--election", required=True, help="election file ('-' for stdin)")
    s.add_argument("--k", type=int, help="override the committee size")
    s.add_argument("--tie", default="lex", help="'lex' or 'fixed:<1-based order>' (default lex)")
    s.add_argument("--mode", choices=("exact", "float", "auto"), default="auto",
                   help="arithmetic for Phragmén rules (default auto)")
    s.add_argument("--eps", type=float, default=1e-9, help="float tie tolerance (default 1e-9)")
    s.add_argument("--trace", action="store_true", help="include every purchase event")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("bounds", help="emit a PJR-degree curve as CSV")
    s.add_argument("--family", required=True,
                   help="alpha-<speed>, alpha-simple-<speed>, alpha-closed:Q, beta-<cost>, "
                        "thiele-lower-<w> or thiele-upper-<w>")
    s.add_argument("--k", type=int, required=True, help="committee size")
    s.add_argument("--grid", default="0.01", help="gamma step (default 0.01)")
    s.add_argument("--out", help="output file (default stdout)")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("verify", help="check an axiom on one or many elections")
    s.add_argument("property", choices=("pjr", "iuac", "monotone"))
    s.add_argument("--rule", required=True, help="rule spec")
    s.add_argument("--election", help="election file")
    s.add_argument("--random", help="n,m,k,seed,count: that many random n-voter, m-candidate instances")
    s.add_argument("--tie", default="lex", help="tie rule (default lex)")
    s.add_argument("--mode", choices=("exact", "float", "auto"), default="auto")
    s.add_argument("--k-max", type=int, help="largest committee size for 'monotone'")
    s.add_argument("--strict", action="store_true",
                   help="pjr: use the largest integer strictly below the bound")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", help="sample a 1-D Euclidean election")
    s.add_argument("--beta", default="2,2", help="shape parameters a,b (default 2,2)")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--m", type=int, default=150)
    s.add_argument("--k", type=int, default=25)
    s.add_argument("--xi", type=float, default=0.2, help="approval radius (default 0.2)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="election JSON (default stdout)")
    s.add_argument("--positions", help="CSV of voter and candidate positions")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", help="run a simulation experiment from a TOML/JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", default=".", help="directory for summary.csv and boxplot.csv")
    s.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    s.add_argument("--runs", type=int, help="override the number of runs per scenario")
    s.add_argument("--seed", type=int, help="override the master seed")
    s.add_argument("--raw", action="store_true", help="also write raw.csv.gz")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, RuleSyntaxError, harness.ConfigError) as err:
        parser.print_usage(sys.stderr)
        print(f"phragmen-lab: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ElectionError, PhragmenError, InstanceTooLarge, axioms.AxiomError,
            ValueError, OSError) as err:
        print(f"phragmen-lab: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
