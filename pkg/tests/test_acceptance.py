"""The eight acceptance criteria, each checked at its stated time limit.

Run alone with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import io
import json
import random
import sys
import tempfile
import time
from contextlib import contextmanager, redirect_stdout

from conftest import ACCEPTANCE, DATA, load
from generators import (
    random_path,
    random_state,
    serial_horn_program,
    snoop_expr,
    snoop_history,
    tiny_event_program,
    tiny_program,
)
from trev.bruteforce import brute_force_entails, brute_force_minimal_models, check_caps
from trev.checker import check_entailment, support_report, violations
from trev.cli import main
from trev.detection import detect, occurrence_intervals
from trev.errors import BudgetExceeded, ExpansionLimit
from trev.executor import ExecutionContext, NoExecution, execute, respond_loop, without_expansion
from trev.formulas import Atom, HeadKind, TAtom, Trigger
from trev.grounding import ground
from trev.parser import parse
from trev.paths import Path, compose, dumps, prefixes, splits
from trev.snoop import expr_depth, snoop_verify

A = Atom


@contextmanager
def criterion(n, title, limit):
    """Record a PASS/FAIL line for criterion ``n``, failing also on time."""
    start = time.perf_counter()
    note = {}
    try:
        yield note
    except BaseException as e:
        ACCEPTANCE[n] = (False, f"{title}: {type(e).__name__}: {e}".splitlines()[0])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < limit
    extra = f", {note['detail']}" if "detail" in note else ""
    ACCEPTANCE[n] = (ok, f"{title} ({elapsed:.2f}s, limit {limit}s{extra})")
    assert ok, f"criterion {n} took {elapsed:.2f}s"


def states(*groups):
    return tuple(frozenset(A(c) for c in g) for g in groups)


def test_criterion_1_move():
    with criterion(1, "move example, exact 5-state path", 1.0):
        program = ground(parse(load("move.trev")), {"c", "oven", "table"})
        init = frozenset({A("clear", ("table",)), A("loc", ("c", "oven"))})
        r = execute(ExecutionContext(program), init, TAtom(A("move", ("c", "oven", "table"))))
        assert r.path.labels == (
            A("loc", ("c", "oven"), "del"),
            A("loc", ("c", "table"), "ins"),
            A("clear", ("table",), "del"),
            A("clear", ("oven",), "ins"),
        )
        assert r.path.states == (
            init,
            frozenset({A("clear", ("table",))}),
            frozenset({A("clear", ("table",)), A("loc", ("c", "table"))}),
            frozenset({A("loc", ("c", "table"))}),
            frozenset({A("loc", ("c", "table")), A("clear", ("oven",))}),
        )


def test_criterion_2_delayed_commit():
    with criterion(2, "plain vs delayed commit, non-monotone check", 1.0):
        plain, delayed = parse(load("plain.trev")), parse(load("delayed.trev"))
        goal = TAtom(A("p"))
        short = execute(ExecutionContext(plain), frozenset(), goal).path
        long = execute(ExecutionContext(delayed), frozenset(), goal).path
        assert short.states == states("", "a")
        assert long.states == states("", "a", "ac")
        assert not check_entailment(delayed, short, goal)
        assert check_entailment(delayed, long, goal)


def test_criterion_3_cascade():
    with criterion(3, "cascade example, exact 6-state path", 1.0):
        r = execute(ExecutionContext(parse(load("cascade.trev"))), frozenset(), Trigger(A("e_x")))
        ins = lambda x: A(x, (), "ins")
        assert r.path.labels == (A("e_x"), ins("a"), ins("c"), ins("b"), ins("d"))
        assert r.path.states == states("", "", "a", "ac", "abc", "abcd")


def test_criterion_4_snoop_translation():
    with criterion(4, "SNOOP translation, 1000 random cases", 30.0) as note:
        rng = random.Random(0)
        failures = []
        checked = 0
        for _ in range(1000):
            expr, history = snoop_expr(rng, depth=3), snoop_history(rng, max_points=8)
            assert expr_depth(expr) <= 3 and len(history.events) <= 8
            report = snoop_verify(history, expr)
            checked += len(report.intervals)
            if not report.ok:
                failures.append(report.to_dict())
        note["detail"] = f"{checked} intervals, {len(failures)} failures"
        assert failures == []


def _goals(program, path):
    goals = [TAtom(r.head) for r in program.transaction_rules if r.head_kind is HeadKind.TRANSACTION]
    goals += [TAtom(label) for label in path.labels if label.is_update]
    return list(dict.fromkeys(goals))


def test_criterion_5_brute_force_agreement():
    with criterion(5, "replay checker vs minimal models", 60.0) as note:
        rng = random.Random(0)
        instances = compared = 0
        disagreements = []
        while instances < 120:
            program = tiny_program(rng) if rng.random() < 0.5 else tiny_event_program(rng)
            names = [r.head for r in program.transaction_rules if r.head_kind is HeadKind.TRANSACTION]
            path = None
            if rng.random() < 0.6:
                try:
                    goal = TAtom(rng.choice(names))
                    path = execute(ExecutionContext(program, max_path_states=3), random_path(rng, 1).first, goal).path
                except (NoExecution, ExpansionLimit):
                    pass
            if path is None:
                path = random_path(rng, rng.randint(1, 3))
            try:
                check_caps(program, path)
            except BudgetExceeded:
                continue
            models = brute_force_minimal_models(program, path)
            for goal in _goals(program, path):
                compared += 1
                if brute_force_entails(program, path, goal, models=models) != check_entailment(program, path, goal):
                    disagreements.append((program, path, goal))
            instances += 1
        note["detail"] = f"{instances} instances, {compared} goals, {len(disagreements)} disagreements"
        assert disagreements == []


def test_criterion_6_conservativity():
    with criterion(6, "event-free programs unchanged by expansion", 30.0) as note:
        rng = random.Random(0)
        done = 0
        mismatches = []
        while done < 50:
            program, name = serial_horn_program(rng)
            state = random_state(rng)
            ctx = ExecutionContext(program, max_path_states=12)
            try:
                with_exp = execute(ctx, state, TAtom(name))
            except NoExecution:
                continue
            plain = execute(without_expansion(ctx), state, TAtom(name))
            if with_exp.path != plain.path or not check_entailment(program, with_exp.path, TAtom(name)):
                mismatches.append((program, state))
            done += 1
        note["detail"] = f"{done} programs, {len(mismatches)} mismatches"
        assert mismatches == []


def _executor_paths():
    runs = []
    delayed = parse(load("delayed.trev"))
    runs.append((delayed, execute(ExecutionContext(delayed), frozenset(), TAtom(A("p")))))
    cascade = parse(load("cascade.trev"))
    runs.append((cascade, execute(ExecutionContext(cascade), frozenset(), Trigger(A("e_x")))))
    move = ground(parse(load("move.trev")), {"c", "oven", "table"})
    init = frozenset({A("clear", ("table",)), A("loc", ("c", "oven"))})
    runs.append((move, execute(ExecutionContext(move), init, TAtom(A("move", ("c", "oven", "table"))))))
    rng = random.Random(1)
    while len(runs) < 60:
        program = [tiny_program, tiny_event_program][len(runs) % 2](rng)
        names = [r.head for r in program.transaction_rules if r.head_kind is HeadKind.TRANSACTION]
        try:
            r = execute(ExecutionContext(program, max_path_states=8), random_path(rng, 1).first, TAtom(rng.choice(names)))
        except (NoExecution, ExpansionLimit):
            continue
        runs.append((program, r))
    return runs


def _random_paths(rng, count=200):
    return [random_path(rng, rng.randint(1, 8), explicit=(A("ex"), A("ey"))) for _ in range(count)]


def test_criterion_7_structural():
    with criterion(7, "structural suites", 30.0) as note:
        failures = []
        rng = random.Random(0)
        for path in _random_paths(rng):
            n = len(path)
            sp = splits(path)
            if len(sp) != n or len(prefixes(path)) != n:
                failures.append(("counts", path))
            if any(compose(a, b) != path for a, b in sp):
                failures.append(("compose", path))

        runs = _executor_paths()
        for program, r in runs:
            ctx = ExecutionContext(program)
            again = respond_loop(ctx, r.path, r.ledger)
            if (again.path, again.ledger) != (r.path, r.ledger):
                failures.append(("respond loop", r.path))
            if violations(support_report(program, r.path, ctx)):
                failures.append(("support", r.path))

        for argv in (
            ["run", "--program", str(DATA / "cascade.trev"), "--goal", "e_x", "--seed", "3"],
            ["run", "--program", str(DATA / "delayed.trev"), "--goal", "p", "--trace", "--seed", "3"],
            ["run", "--program", str(DATA / "move.trev"), "--state", str(DATA / "move.state"),
             "--goal", "move(c,oven,table)", "--seed", "3"],
        ):
            outputs = []
            for _ in range(2):
                buf = io.StringIO()
                with redirect_stdout(buf):
                    main(argv)
                outputs.append(buf.getvalue().encode())
            if outputs[0] != outputs[1] or not outputs[0]:
                failures.append(("determinism", argv))
        note["detail"] = f"{len(runs)} executor paths, {len(failures)} failures"
        assert failures == []


def test_criterion_8_alarm():
    with criterion(8, "alarm detected over the whole path", 1.0):
        e = {k: A(k) for k in ("e1", "e2", "e3", "ex", "alarm")}
        # e2 and e3 happen together on the first transition, e1 later
        path = Path(states("", "", "", ""), (e["e2"], e["ex"], e["e1"]))
        table = detect(parse(load("alarm.trev")), path, seed={(0, 1): {e["e3"]}})
        assert (0, 3) in occurrence_intervals(table, e["alarm"])
        # e2 and e3 both derived over the first two transitions
        path = Path(
            states("", "a", "ab", "ab"), (A("a", (), "ins"), A("b", (), "ins"), e["e1"])
        )
        table = detect(parse(load("alarm_pair.trev")), path)
        assert occurrence_intervals(table, e["alarm"]) == [(0, 3)]
        out = io.StringIO()
        with redirect_stdout(out):
            main(["detect", "--program", str(DATA / "alarm_pair.trev"), "--path", _write(path), "--event", "alarm"])
        assert json.loads(out.getvalue())["occurrences"] == [{"event": "alarm", "start": 0, "end": 3}]


def _write(path):
    fh = tempfile.NamedTemporaryFile("w", suffix=".json", delete=False)
    fh.write(dumps(path))
    fh.close()
    return fh.name


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
