import random

import pytest

from conftest import load
from generators import random_state, serial_horn_program
from trev.bruteforce import (
    Cell,
    brute_force_entails,
    brute_force_minimal_models,
    check_caps,
    free_atoms,
)
from trev.checker import check_entailment, support_report, violations
from trev.errors import BudgetExceeded, FragmentError
from trev.executor import ExecutionContext, NoExecution, execute, without_expansion
from trev.formulas import Atom, Program, TAtom, Trigger
from trev.grounding import ground
from trev.parser import parse
from trev.paths import Path

A = Atom
a_ins, c_ins = A("a", (), "ins"), A("c", (), "ins")
P = TAtom(A("p"))
SHORT = Path((frozenset(), frozenset({A("a")})), (a_ins,))
LONG = SHORT.extend(c_ins, frozenset({A("a"), A("c")}))


def test_delayed_short_path_false():
    assert not check_entailment(parse(load("delayed.trev")), SHORT, P)


def test_delayed_long_path_true():
    assert check_entailment(parse(load("delayed.trev")), LONG, P)


def test_plain_short_path_true():
    assert check_entailment(parse(load("plain.trev")), SHORT, P)


def test_adding_event_rule_flips_verdict():
    plain = parse(load("plain.trev"))
    delayed = parse(load("delayed.trev"))
    assert check_entailment(plain, SHORT, P) and not check_entailment(delayed, SHORT, P)
    assert execute(ExecutionContext(delayed), frozenset(), P).path == LONG


def test_primitive_not_a_transaction_on_unanswered_path():
    assert not check_entailment(parse(load("delayed.trev")), SHORT, TAtom(a_ins))
    assert check_entailment(parse(load("delayed.trev")), LONG, TAtom(a_ins))


def test_ledger_must_match_when_given():
    program = parse(load("delayed.trev"))
    r = execute(ExecutionContext(program), frozenset(), P)
    assert check_entailment(program, LONG, P, ledger=r.ledger)
    assert not check_entailment(program, LONG, P, ledger=r.ledger[:1])


def test_cascade_checks():
    program = parse(load("cascade.trev"))
    r = execute(ExecutionContext(program), frozenset(), Trigger(A("e_x")))
    assert check_entailment(program, r.path, Trigger(A("e_x")))
    assert not check_entailment(program, r.path.window(0, 4), Trigger(A("e_x")))


# -- support ---------------------------------------------------------------------


def test_support_move():
    program = ground(parse(load("move.trev")), {"c", "oven", "table"})
    ctx = ExecutionContext(program)
    init = frozenset({A("clear", ("table",)), A("loc", ("c", "oven"))})
    goal = TAtom(A("move", ("c", "oven", "table")))
    r = execute(ctx, init, goal)
    report = support_report(program, r.path, ctx)
    lines = {line.label(): line.justification for line in report}
    assert lines["move(c,oven,table)"].kind == "rule-head"
    assert lines["upd(c,oven,table)"].kind == "rule-head"
    # queries and single updates span fewer states than the whole path
    assert "loc(c,oven)" not in lines
    assert violations(report) == []


def test_support_data_on_single_state():
    program = parse("t <- a.")
    rep = support_report(program, Path.single(frozenset({A("a")})))
    assert [(l.label(), l.justification.kind) for l in rep] == [("t", "rule-head"), ("a", "oracle-data")]


def test_support_primitive():
    program = parse(load("plain.trev"))
    lines = support_report(program, SHORT)
    assert [(l.label(), l.justification.kind) for l in lines if l.label() == "a.ins"] == [
        ("a.ins", "oracle-transition")
    ]


def test_support_flags_unjustified():
    from trev.checker import _justify
    from trev.formulas import Kind

    # a transaction name declared without any rule cannot be justified
    odd = Program([], {("ghost", 0): Kind.TRANSACTION})
    j = _justify(odd, Path.single(frozenset()), TAtom(A("ghost")), ExecutionContext(odd))
    assert not j.ok and j.kind == "violation"


# -- brute force -------------------------------------------------------------------


def test_empty_program_single_state():
    models = brute_force_minimal_models(Program(), Path.single(frozenset()))
    assert models == [frozenset()]


def test_delayed_fragment_event_on_path():
    program = parse("o(e1) <- o(a.ins).")
    for m in brute_force_minimal_models(program, SHORT):
        assert Cell("o", A("e1"), 0, 1) in m


def test_brute_force_delayed():
    program = parse(load("delayed.trev"))
    assert not brute_force_entails(program, SHORT, P)
    assert brute_force_entails(program, LONG, P)
    assert brute_force_entails(parse(load("plain.trev")), SHORT, P)


def test_caps():
    with pytest.raises(BudgetExceeded):
        check_caps(parse(load("delayed.trev")), LONG.extend(a_ins, LONG.last))
    many = parse("\n".join(f"t{k} <- a.ins." for k in range(9)))
    with pytest.raises(BudgetExceeded):
        check_caps(many, SHORT)
    wide = parse("\n".join(f"t{k} <- a.ins." for k in range(5)))
    with pytest.raises(BudgetExceeded):
        check_caps(wide, SHORT)
    assert [a for _, a in free_atoms(parse(load("delayed.trev")))] == [A("e1"), A("e1"), A("p")]


def test_brute_force_rejects_poss():
    program = parse("t <- poss(a.ins).")
    with pytest.raises(FragmentError):
        brute_force_minimal_models(program, SHORT)


# -- conservativity ------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(25))
def test_event_free_programs_unchanged_by_expansion(seed):
    rng = random.Random(seed)
    program, name = serial_horn_program(rng)
    ctx = ExecutionContext(program, max_path_states=12)
    state = random_state(rng)
    try:
        with_exp = execute(ctx, state, TAtom(name))
    except NoExecution:
        with pytest.raises(NoExecution):
            execute(without_expansion(ctx), state, TAtom(name))
        return
    plain = execute(without_expansion(ctx), state, TAtom(name))
    assert with_exp.path == plain.path
    assert check_entailment(program, with_exp.path, TAtom(name))
