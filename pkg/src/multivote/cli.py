"""Command line interface: ``multivote <subcommand> ...``.

Exit codes: 0 success, 1 domain error (invalid election, budget exceeded),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import constructions, freeride, sim, solvers
from .core import Election, ValidationError
from .scoring import RuleSpec, parse_rule


class UsageError(Exception):
    pass


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _dump(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _load_election(args: argparse.Namespace) -> Election:
    if (args.input is None) == (args.json is None):
        raise UsageError("give exactly one election source: a path (or '-') or --json")
    if args.json is not None:
        text = args.json
    elif args.input == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from exc
    return Election.from_json(text)


def _rule(text: str, default_mode: str = "opt") -> RuleSpec:
    try:
        return parse_rule(text, default_mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _candidate(election: Election, issue: int, text: str) -> int:
    if not 0 <= issue < election.k:
        raise ValidationError(f"issue {issue} out of range")
    cands = election.issues[issue].candidates
    if text in cands:
        return cands.index(text)
    if text.isdigit() and int(text) < len(cands):
        return int(text)
    raise ValidationError(f"issue {issue} has no candidate {text!r}")


def _finding_json(election: Election, f: freeride.FreeRideFinding) -> dict[str, Any]:
    out = f.to_dict()
    out["truthful_labels"] = list(election.labels(f.truthful_outcome))
    out["deviated_labels"] = list(election.labels(f.deviated_outcome))
    return out


def cmd_solve(args: argparse.Namespace) -> str:
    election = _load_election(args)
    rule = _rule(args.rule)
    budget = solvers.SolverBudget.from_env(enable_pruning=not args.no_prune)
    result = solvers.solve(election, rule, budget)
    labels = election.labels(result.outcome)
    out: dict[str, Any] = {
        "rule": str(rule),
        "outcome": list(labels),
        "winners": [{"issue": i, "candidate": lab, "index": c}
                    for i, (c, lab) in enumerate(zip(result.outcome, labels))],
        "score": _jsonable(result.score),
    }
    if args.trace and result.trace is not None:
        out["trace"] = [{"issue": t.issue, "winner": t.winner,
                         "scores": [[c, _jsonable(key)] for c, key in t.scores]}
                        for t in result.trace]
    return _dump(out)


def cmd_winner(args: argparse.Namespace) -> str:
    election = _load_election(args)
    rule = _rule(args.rule)
    cand = _candidate(election, args.issue, args.candidate)
    budget = solvers.SolverBudget.from_env()
    return "true" if solvers.winner_of_issue(election, rule, args.issue, cand, budget) else "false"


def cmd_freeride(args: argparse.Namespace) -> str:
    election = _load_election(args)
    rule = _rule(args.rule)
    budget = solvers.SolverBudget.from_env()
    if not 0 <= args.voter < election.n:
        raise ValidationError(f"voter {args.voter} out of range")
    if args.manipulate:
        ok, witness = freeride.can_manipulate_by_free_riding(
            election, rule, args.voter, args.generalized, args.single_issue, budget)
        return _dump({"rule": str(rule), "voter": args.voter, "manipulable": ok,
                      "witness": None if witness is None else _finding_json(election, witness)})
    truthful = solvers.solve(election, rule, budget).outcome
    issues = [args.issue] if args.issue is not None else range(election.k)
    findings = []
    for i in issues:
        findings += freeride.find_free_rides(election, rule, args.voter, i, args.generalized,
                                             budget, distinct=not args.all_ballots,
                                             truthful=truthful)
    return _dump({"rule": str(rule), "voter": args.voter,
                  "truthful_outcome": list(election.labels(truthful)),
                  "findings": [_finding_json(election, f) for f in findings]})


def cmd_audit(args: argparse.Namespace) -> str:
    election = _load_election(args)
    rule = _rule(args.rule)
    report = freeride.audit_election(election, rule, args.generalized,
                                     solvers.SolverBudget.from_env())
    return _dump(report.to_dict())


def cmd_simulate(args: argparse.Namespace) -> str | bytes:
    try:
        geometry = sim.GeometryConfig(args.voters, args.issues, args.candidates, args.slack,
                                      args.seed)
        rules = tuple(r.strip() for r in args.rules.split(",") if r.strip()) if args.rules else ()
        for text in rules:
            _rule(text, "seq")
        config = sim.ExperimentConfig(geometry, args.elections, rules, args.jobs, args.pooled_q3)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = sim.run_experiment(config)
    data = sim.emit_csv(result.rows)
    if args.svg:
        Path(args.svg).write_bytes(sim.emit_svg_plot(result.rows))
    if args.plot:
        from .plotting import write_figure

        write_figure(result.rows, args.plot)
    if args.raw:
        with open(args.raw, "w") as fh:
            sim.write_records(result, fh)
    if args.out:
        Path(args.out).write_bytes(data)
        return ""
    return data


def cmd_fixture(args: argparse.Namespace) -> str:
    if args.name == "list":
        return "\n".join(constructions.FIXTURES)
    if args.name not in constructions.FIXTURES:
        raise UsageError(f"unknown fixture {args.name!r}; try 'fixture list'")
    fixture = constructions.FIXTURES[args.name]()
    if args.election:
        return fixture.election.to_json()
    return _dump(fixture.to_dict())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multivote",
                                     description="Multi-issue approval voting and free-riding.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(p: argparse.ArgumentParser, rule: bool = True) -> argparse.ArgumentParser:
        p.add_argument("input", nargs="?", help="election JSON file, or '-' for stdin")
        p.add_argument("--json", help="election JSON given inline")
        if rule:
            p.add_argument("--rule", required=True,
                           help="e.g. thiele:pav@opt, owa:leximin@seq, owa:hybrid:3, thiele:pow:0.5")
        return p

    p = with_input(sub.add_parser("solve", help="compute the winning outcome"))
    p.add_argument("--no-prune", action="store_true", help="disable branch-and-bound")
    p.add_argument("--trace", action="store_true", help="include per-round scores (sequential)")
    p.set_defaults(func=cmd_solve)

    p = with_input(sub.add_parser("winner", help="does a candidate win an issue?"))
    p.add_argument("--issue", type=int, required=True)
    p.add_argument("--candidate", required=True, help="label or index")
    p.set_defaults(func=cmd_winner)

    p = with_input(sub.add_parser("freeride", help="free-riding options of one voter"))
    p.add_argument("--voter", type=int, required=True)
    p.add_argument("--issue", type=int)
    p.add_argument("--generalized", action="store_true")
    p.add_argument("--all-ballots", action="store_true",
                   help="report every deviating ballot, not one per resulting outcome")
    p.add_argument("--manipulate", action="store_true",
                   help="search for a free-ride that raises the voter's satisfaction")
    p.add_argument("--single-issue", action="store_true",
                   help="with --manipulate, only free-ride on one issue at a time")
    p.set_defaults(func=cmd_freeride)

    p = with_input(sub.add_parser("audit", help="free-riding flags for every voter and issue"))
    p.add_argument("--generalized", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("simulate", help="2d-Euclidean free-riding experiment (CSV output)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--elections", type=int, default=1000)
    p.add_argument("--voters", type=int, default=20)
    p.add_argument("--issues", type=int, default=20)
    p.add_argument("--candidates", type=int, default=4)
    p.add_argument("--slack", type=float, default=1.2)
    p.add_argument("--rules", help="comma-separated sequential rules (default: both x-grids)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--pooled-q3", action="store_true",
                   help="average risk over all eligible voters instead of per election")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg", help="write the metrics plot as SVG")
    p.add_argument("--plot", help="write the metrics plot; format from the file suffix")
    p.add_argument("--raw", help="write per-voter records as JSON lines")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fixture", help="dump a construction election ('list' for names)")
    p.add_argument("name")
    p.add_argument("--election", action="store_true",
                   help="print only the election document, ready for other subcommands")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out = args.func(args)
    except UsageError as exc:
        print(f"multivote: usage error: {exc}", file=sys.stderr)
        return 2
    except solvers.BudgetExceeded as exc:
        print(f"multivote: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"multivote: invalid input: {exc}", file=sys.stderr)
        return 1
    if isinstance(out, bytes):
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    elif out:
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
