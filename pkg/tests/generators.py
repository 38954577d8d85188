"""Random instance generators shared by the property and acceptance suites."""
from __future__ import annotations

import random

from trev.formulas import (
    And,
    Atom,
    HeadKind,
    Kind,
    Not,
    Occ,
    Or,
    Program,
    Rule,
    Serial,
    TAtom,
    Trigger,
    followed_by,
)
from trev.paths import Path
from trev.oracle import apply_primitive

FACTS = ("a", "b", "c")


def update(rng: random.Random) -> Atom:
    return Atom(rng.choice(FACTS), (), rng.choice(("ins", "ins", "del")))


def tiny_program(rng: random.Random) -> Program:
    """At most 4 interpreted atoms and 8 rules, primitives over a, b, c."""
    names = [Atom(n) for n in rng.sample(["p", "q"], rng.randint(1, 2))]
    events = [Atom("e1")] if rng.random() < 0.7 else []
    explicit = Atom("ex")
    kinds = {n.key: Kind.TRANSACTION for n in names}
    kinds[explicit.key] = Kind.EVENT
    for e in events:
        kinds[e.key] = Kind.EVENT
    rules = []

    def item(allow_names):
        r = rng.random()
        if r < 0.55:
            return TAtom(update(rng))
        if r < 0.7:
            return TAtom(Atom(rng.choice(FACTS)))
        if r < 0.8:
            return Trigger(explicit)
        if allow_names:
            return TAtom(rng.choice(names))
        return TAtom(update(rng))

    def body(allow_names=True):
        f = item(allow_names)
        r = rng.random()
        if r < 0.45:
            f = Serial(f, item(allow_names))
        elif r < 0.55:
            f = Or(f, item(allow_names))
        elif r < 0.62:
            f = And(f, item(allow_names))
        elif r < 0.7:
            f = Serial(Not(item(False)), f)
        return f

    for n in names:
        for _ in range(rng.randint(1, 2)):
            rules.append(Rule(n, HeadKind.TRANSACTION, body()))
    responders = [explicit] + events + ([update(rng)] if rng.random() < 0.4 else [])
    budget = 4 - len(names) - len(events)
    for subject in rng.sample(responders, min(len(responders), max(0, budget))):
        rules.append(Rule(subject, HeadKind.RESPONSE, body(allow_names=False)))
    for e in events:
        src = [Occ(update(rng)), Occ(explicit)]
        shape = rng.random()
        if shape < 0.5:
            b = rng.choice(src)
        elif shape < 0.75:
            b = Serial(rng.choice(src), rng.choice(src))
        elif shape < 0.9:
            b = followed_by(rng.choice(src), rng.choice(src))
        else:
            b = And(rng.choice(src), Not(Occ(update(rng))))
        rules.append(Rule(e, HeadKind.EVENT, b))
    return Program(rules[:8], kinds)


def random_path(rng: random.Random, n_states: int, explicit=(Atom("ex"),)) -> Path:
    state = frozenset(Atom(f) for f in FACTS if rng.random() < 0.4)
    path = Path.single(state)
    for _ in range(n_states - 1):
        if explicit and rng.random() < 0.2:
            path = path.extend(rng.choice(explicit), path.last)
        else:
            u = update(rng)
            path = path.extend(u, apply_primitive(path.last, u))
    return path


def tiny_event_program(rng: random.Random) -> Program:
    """One transaction name, one complex event and one response: sized so a
    3-state path stays within the brute-force cell budget."""
    p, e1 = Atom("p"), Atom("e1")
    kinds = {p.key: Kind.TRANSACTION, e1.key: Kind.EVENT}
    first = update(rng)
    trigger_src = first if rng.random() < 0.7 else update(rng)
    body = TAtom(first)
    if rng.random() < 0.4:
        body = Serial(body, TAtom(update(rng)))
    elif rng.random() < 0.2:
        body = Or(body, TAtom(update(rng)))
    rules = [Rule(p, HeadKind.TRANSACTION, body)]
    if rng.random() < 0.3:
        rules.append(Rule(p, HeadKind.TRANSACTION, TAtom(update(rng))))
    shape = rng.random()
    if shape < 0.6:
        ev = Occ(trigger_src)
    elif shape < 0.8:
        ev = Serial(Occ(trigger_src), Occ(update(rng)))
    else:
        ev = And(Occ(trigger_src), Not(Occ(update(rng))))
    rules.append(Rule(e1, HeadKind.EVENT, ev))
    resp = TAtom(update(rng)) if rng.random() < 0.8 else Serial(TAtom(Atom(rng.choice(FACTS))), TAtom(update(rng)))
    rules.append(Rule(e1, HeadKind.RESPONSE, resp))
    return Program(rules, kinds)


SNOOP_NAMES = ("e1", "e2", "e3", "e4")


def snoop_expr(rng: random.Random, depth: int = 3):
    """Random expression over Seq, Or, And and Not; a primitive has depth 1."""
    from trev.snoop import AndE, NotE, OrE, Primitive, Seq

    if depth == 1 or rng.random() < 1 / 3:
        return Primitive(rng.choice(SNOOP_NAMES))
    op = rng.choice(("seq", "or", "and", "not"))
    if op == "not":
        return NotE(snoop_expr(rng, depth - 1), snoop_expr(rng, depth - 1), snoop_expr(rng, depth - 1))
    cls = {"seq": Seq, "or": OrE, "and": AndE}[op]
    return cls(snoop_expr(rng, depth - 1), snoop_expr(rng, depth - 1))


def snoop_history(rng: random.Random, max_points: int = 8):
    from trev.snoop import History

    n = rng.randint(1, max_points)
    return History(1, tuple(frozenset(e for e in SNOOP_NAMES if rng.random() < 0.3) for _ in range(n)))


def serial_horn_program(rng: random.Random) -> tuple[Program, Atom]:
    """Event-free program whose bodies are serial conjunctions of updates,
    queries and calls to lower-numbered names; returns it with a goal name."""
    names = [Atom(f"t{k}") for k in range(rng.randint(1, 4))]
    kinds = {n.key: Kind.TRANSACTION for n in names}
    rules = []
    for k, n in enumerate(names):
        for _ in range(rng.randint(1, 2)):
            items = []
            for _ in range(rng.randint(1, 3)):
                r = rng.random()
                if r < 0.55:
                    items.append(TAtom(update(rng)))
                elif r < 0.8 or k == 0:
                    items.append(TAtom(Atom(rng.choice(FACTS))))
                else:
                    items.append(TAtom(names[rng.randrange(k)]))
            body = items[-1]
            for it in reversed(items[:-1]):
                body = Serial(it, body)
            rules.append(Rule(n, HeadKind.TRANSACTION, body))
    return Program(rules, kinds), names[-1]


def random_state(rng: random.Random) -> frozenset:
    return frozenset(Atom(f) for f in FACTS if rng.random() < 0.5)
