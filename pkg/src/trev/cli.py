"""Command line: run, detect, snoop, check.

Exit codes: 0 success or true, 1 failure, false or nothing found, 2 bad
usage or input, 3 a search or expansion bound was hit.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .bruteforce import brute_force_entails
from .checker import check_entailment, support_report, violations
from .detection import detect
from .errors import BoundExceeded, TrevError
from .executor import ExecutionContext, NoExecution, execute
from .formulas import atoms_of
from .grounding import goal_constants, ground
from .parser import parse, parse_goal, parse_state
from .paths import Path, path_from_dict, path_to_dict, validate
from .snoop import parse_history, parse_snoop, snoop_verify

FORMAT = 1
EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise TrevError(f"cannot read {path}: {e.strerror}") from None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _path_constants(path: Path) -> set:
    out = set()
    for s in path.states:
        for a in s:
            out.update(a.args)
    for label in path.labels:
        if label is not None:
            out.update(label.args)
    return out


def _load_path(file: str) -> Path:
    try:
        return path_from_dict(json.loads(_read(file)))
    except json.JSONDecodeError as e:
        raise TrevError(f"{file}: invalid JSON: {e}") from None


def cmd_run(args) -> int:
    program = parse(_read(args.program))
    state = parse_state(_read(args.state)) if args.state else frozenset()
    goal = parse_goal(args.goal, program)
    consts = goal_constants(goal) | {t for a in state for t in a.args}
    program = ground(program, consts)
    ctx = ExecutionContext(
        program,
        max_expansion_rounds=args.max_expansions,
        max_path_states=args.max_states,
        random_seed=args.seed,
    )
    try:
        result = execute(ctx, state, goal)
    except NoExecution as e:
        print(f"failed: {e}", file=sys.stderr)
        return EXIT_BOUND if e.bounded else EXIT_FALSE
    if args.trace:
        out = sys.stderr if args.json else sys.stdout
        for line in result.trace():
            print(line, file=out)
        if not args.json:
            return EXIT_OK
    doc = {"format": FORMAT, **path_to_dict(result.path), "responses": [e.to_dict() for e in result.ledger]}
    _emit(doc)
    return EXIT_OK


def cmd_detect(args) -> int:
    path = _load_path(args.path)
    program = ground(parse(_read(args.program)), _path_constants(path))
    table = detect(program, path)
    rows = table.entries()
    if args.event:
        rows = [r for r in rows if r["event"] == args.event]
    _emit({"format": FORMAT, "occurrences": rows})
    return EXIT_OK if rows or not args.event else EXIT_FALSE


def cmd_snoop(args) -> int:
    history = parse_history(_read(args.history))
    report = snoop_verify(history, parse_snoop(args.expr))
    _emit(report.to_dict())
    return EXIT_OK if report.intervals else EXIT_FALSE


def cmd_check(args) -> int:
    program = parse(_read(args.program))
    path = _load_path(args.path)
    goal = parse_goal(args.goal, program)
    program = ground(program, goal_constants(goal) | _path_constants(path))
    validate(path, is_event=lambda a: program.is_event(a) or a in set(atoms_of(goal)))
    if args.brute_force:
        verdict = brute_force_entails(program, path, goal)
        method = "brute-force"
    else:
        verdict = check_entailment(program, path, goal)
        method = "replay"
    doc = {"format": FORMAT, "entailed": verdict, "method": method}
    if args.support_report:
        report = support_report(program, path)
        doc["support"] = [{"formula": line.label(), **line.justification.to_dict()} for line in report]
        doc["violations"] = len(violations(report))
    _emit(doc)
    return EXIT_OK if verdict else EXIT_FALSE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trev", description="Transactions with events: execute, detect, check.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="execute a goal from an initial state")
    run.add_argument("--program", required=True)
    run.add_argument("--state", help="initial state file, one fact per line (default: empty)")
    run.add_argument("--goal", required=True)
    run.add_argument("--trace", action="store_true", help="print STEP/RESPOND lines")
    run.add_argument("--json", action="store_true", help="JSON on stdout even with --trace")
    run.add_argument("--max-states", type=int, default=64)
    run.add_argument("--max-expansions", type=int, default=100)
    run.add_argument("--seed", type=int, default=0)
    run.set_defaults(func=cmd_run)

    det = sub.add_parser("detect", help="list event occurrences over a path")
    det.add_argument("--program", required=True)
    det.add_argument("--path", required=True)
    det.add_argument("--event", help="only this event; exit 1 when it never occurs")
    det.set_defaults(func=cmd_detect)

    sn = sub.add_parser("snoop", help="evaluate a SNOOP expression over a history")
    sn.add_argument("--history", required=True)
    sn.add_argument("--expr", required=True)
    sn.set_defaults(func=cmd_snoop)

    chk = sub.add_parser("check", help="is a path an execution of the goal?")
    chk.add_argument("--program", required=True)
    chk.add_argument("--path", required=True)
    chk.add_argument("--goal", required=True)
    chk.add_argument("--brute-force", action="store_true", help="enumerate minimal models (tiny inputs only)")
    chk.add_argument("--support-report", action="store_true")
    chk.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "max_states", 1) < 1 or getattr(args, "max_expansions", 1) < 1:
        print("error: bounds must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except BoundExceeded as e:
        print(f"bound exceeded: {e}", file=sys.stderr)
        return EXIT_BOUND
    except TrevError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
