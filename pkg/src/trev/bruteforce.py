"""Minimal models by exhaustive enumeration, for tiny instances only.

An interpretation assigns to every contiguous subpath a set of atoms:
defined transaction atoms, explicit responses ``r(x)`` and complex events
``o(e)``. Primitive occurrences, data and the trivial responses of update
primitives are fixed by the oracles. Satisfaction follows the definitions
directly: a transaction formula holds on a subpath when some prefix of it
satisfies the formula and the rest is exactly the expansion of that prefix,
the expansion responding to the first unanswered event again and again.

This module shares no evaluation code with the replay checker, which makes
it usable as an independent oracle for it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BudgetExceeded, FragmentError
from .formulas import (
    And,
    Atom,
    Formula,
    HeadKind,
    Kind,
    Not,
    Occ,
    Or,
    PathAny,
    Poss,
    Program,
    Resp,
    Serial,
    TAtom,
    Trigger,
    TrueF,
)
from .oracle import RELATIONAL, Oracle
from .paths import Path

MAX_STATES = 3
MAX_ATOMS = 4
MAX_RULES = 8
MAX_CELLS = 12


@dataclass(frozen=True)
class Cell:
    tag: str  # "t" transaction atom, "r" response, "o" complex event
    atom: Atom
    i: int
    j: int


def free_atoms(program: Program) -> list[tuple[str, Atom]]:
    out: dict[tuple[str, Atom], None] = {}
    for rule in program.rules:
        tag = {HeadKind.TRANSACTION: "t", HeadKind.RESPONSE: "r", HeadKind.EVENT: "o"}[rule.head_kind]
        out.setdefault((tag, rule.head), None)
    return sorted(out, key=lambda ta: (ta[0], str(ta[1])))


def cells_for(program: Program, path: Path) -> list[Cell]:
    n = len(path)
    return [Cell(tag, a, i, j) for tag, a in free_atoms(program) for i in range(n) for j in range(i, n)]


class Interpretation:
    """Satisfaction under one fixed assignment of cells."""

    def __init__(
        self, program: Program, path: Path, cells: frozenset, oracle: Oracle = RELATIONAL, ext_from=None
    ):
        self.ext_from = ext_from if ext_from is not None else self
        self.program = program
        self.path = path
        self.cells = cells
        self.oracle = oracle
        self._sat: dict = {}
        self._exp: dict = {}
        self._busy: set = set()

    # -- occurrences
    def base(self, x: Atom, i: int, j: int) -> bool:
        if j != i + 1 or self.path.labels[i] != x:
            return False
        d1, d2 = self.path.states[i], self.path.states[j]
        if x.is_update:
            return self.oracle.holds(d1, d2, x)
        return d1 == d2 and self.program.kind_of(x) is not Kind.TRANSACTION

    def occurs(self, x: Atom, i: int, j: int) -> bool:
        return self.base(x, i, j) or Cell("o", x, i, j) in self.cells

    def occurs_stretched(self, x: Atom, i: int, j: int) -> bool:
        if self.occurs(x, i, j):
            return True
        return j > i + 1 and self.base(x, i, i + 1) and self.ext_from.sat(Resp(x), i + 1, j)

    def event(self, f: Formula, i: int, j: int) -> bool:
        if isinstance(f, Occ):
            return self.occurs_stretched(f.subject, i, j)
        if isinstance(f, PathAny):
            return True
        if isinstance(f, Not):
            return not self.event(f.body, i, j)
        if isinstance(f, And):
            return self.event(f.left, i, j) and self.event(f.right, i, j)
        if isinstance(f, Or):
            return self.event(f.left, i, j) or self.event(f.right, i, j)
        if isinstance(f, Serial):
            return any(self.event(f.left, i, m) and self.event(f.right, m, j) for m in range(i, j + 1))
        raise FragmentError(f"{type(f).__name__} in an event formula")

    # -- responses and expansion
    def responded(self, x: Atom, i: int, k: int) -> bool:
        if Cell("r", x, i, k) in self.cells:
            return True
        return k == i and self.program.has_implicit_response(x)

    def answered(self, x: Atom, after: int, upto: int) -> bool:
        return any(self.sat(Resp(x), c, d) for c in range(after, upto + 1) for d in range(c, upto + 1))

    def first_unanswered(self, i: int, k: int) -> Atom | None:
        ends: dict[Atom, list[int]] = {}
        for a in range(i, k + 1):
            for b in range(a, k + 1):
                for x in self._subjects(a, b):
                    ends.setdefault(x, []).append(b)
        best = None
        for x, js in ends.items():
            if not self.program.has_response(x):
                continue
            pending = [b for b in js if not self.answered(x, b, k)]
            if pending:
                key = (min(pending), self.program.event_rank(x), str(x))
                if best is None or key < best[0]:
                    best = (key, x)
        return best[1] if best else None

    def _subjects(self, a: int, b: int):
        out = set()
        if b == a + 1 and self.path.labels[a] is not None and self.base(self.path.labels[a], a, b):
            out.add(self.path.labels[a])
        for c in self.cells:
            if c.tag == "o" and c.i == a and c.j == b:
                out.add(c.atom)
        return out

    def expands(self, i: int, k: int, j: int) -> bool:
        """Does expanding the subpath i..k end exactly at state j?"""
        key = (i, k, j)
        if key in self._exp:
            return self._exp[key]
        if key in self._busy:
            return False
        self._busy.add(key)
        x = self.first_unanswered(i, k)
        if x is None:
            v = k == j
        else:
            v = any(self.sat(Resp(x), k, m) and self.expands(i, m, j) for m in range(k + 1, j + 1))
        self._busy.discard(key)
        self._exp[key] = v
        return v

    # -- transaction formulas
    def sat(self, f: Formula, i: int, j: int) -> bool:
        key = (f, i, j)
        if key in self._sat:
            return self._sat[key]
        if key in self._busy:
            return False
        self._busy.add(key)
        v = self._sat_uncached(f, i, j)
        self._busy.discard(key)
        self._sat[key] = v
        return v

    def _sat_uncached(self, f: Formula, i: int, j: int) -> bool:
        r = range(i, j + 1)
        if isinstance(f, TAtom):
            a = f.atom
            if a.is_update:
                return i + 1 <= j and self.base(a, i, i + 1) and self.expands(i, i + 1, j)
            if self.program.kind_of(a) is Kind.TRANSACTION:
                return any(Cell("t", a, i, k) in self.cells and self.expands(i, k, j) for k in r)
            return a in self.oracle.data(self.path.states[i]) and self.expands(i, i, j)
        if isinstance(f, Resp):
            return any(self.responded(f.subject, i, k) and self.expands(i, k, j) for k in r)
        if isinstance(f, Trigger):
            return any(self.occurs_stretched(f.event, i, k) and self.expands(i, k, j) for k in r)
        if isinstance(f, TrueF):
            return self.expands(i, i, j)
        if isinstance(f, Serial):
            return any(
                self.sat(f.left, i, m) and self.sat(f.right, m, k) and self.expands(i, k, j)
                for k in r
                for m in range(i, k + 1)
            )
        if isinstance(f, Or):
            return self.sat(f.left, i, j) or self.sat(f.right, i, j)
        if isinstance(f, And):
            return self.sat(f.left, i, j) and self.sat(f.right, i, j)
        if isinstance(f, Not):
            return not self.sat(f.body, i, j)
        if isinstance(f, Poss):
            raise FragmentError("poss is outside the brute-force fragment")
        raise FragmentError(f"{type(f).__name__} is not a transaction formula")

    # -- model condition
    def is_model(self) -> bool:
        n = len(self.path)
        wins = [(i, j) for i in range(n) for j in range(i, n)]
        for rule in self.program.event_rules:
            for i, j in wins:
                if Cell("o", rule.head, i, j) not in self.cells and self.event(rule.body, i, j):
                    return False
        for rule in self.program.transaction_rules:
            head = Resp(rule.head) if rule.head_kind is HeadKind.RESPONSE else TAtom(rule.head)
            for i, j in wins:
                if self.sat(rule.body, i, j) and not self.sat(head, i, j):
                    return False
        return True


def transaction_cells(program: Program, path: Path) -> list[Cell]:
    return [c for c in cells_for(program, path) if c.tag != "o"]


def check_caps(program: Program, path: Path, max_cells: int = MAX_CELLS) -> list[Cell]:
    if len(path) > MAX_STATES:
        raise BudgetExceeded(f"path has {len(path)} states (limit {MAX_STATES})")
    if len(program.rules) > MAX_RULES:
        raise BudgetExceeded(f"program has {len(program.rules)} rules (limit {MAX_RULES})")
    atoms = free_atoms(program)
    if len(atoms) > MAX_ATOMS:
        raise BudgetExceeded(f"{len(atoms)} interpreted atoms (limit {MAX_ATOMS})")
    cells = transaction_cells(program, path)
    if len(cells) > max_cells:
        raise BudgetExceeded(f"{len(cells)} transaction cells to enumerate (limit {max_cells})")
    return cells


def _event_closure(program: Program, path: Path, layers, tcells: frozenset, ext_from, oracle) -> frozenset:
    n = len(path)
    wins = [(i, j) for i in range(n) for j in range(i, n)]
    ecells: set = set()
    for layer in layers:
        changed = True
        while changed:
            changed = False
            interp = Interpretation(program, path, tcells | ecells, oracle, ext_from)
            for rule in layer:
                for i, j in wins:
                    c = Cell("o", rule.head, i, j)
                    if c not in ecells and interp.event(rule.body, i, j):
                        ecells.add(c)
                        changed = True
    return frozenset(ecells)


def supported_events(program: Program, path: Path, tcells: frozenset, oracle: Oracle = RELATIONAL, layers=None):
    """The event cells forced by ``tcells``: the stratified closure of the
    event rules, re-run until the stretched occurrences it relies on agree
    with the interpretation it produces. None if that never settles."""
    from .grounding import strata

    layers = strata(program) if layers is None else layers
    ecells: frozenset = frozenset()
    for _ in range(2 * len(path) + 2):
        current = Interpretation(program, path, tcells | ecells, oracle)
        nxt = _event_closure(program, path, layers, tcells, current, oracle)
        if nxt == ecells:
            return ecells
        ecells = nxt
    return None


def brute_force_minimal_models(
    program: Program, path: Path, oracle: Oracle = RELATIONAL, max_cells: int = MAX_CELLS
) -> list[frozenset]:
    """Every minimal model, as sets of :class:`Cell`, smallest first.

    Events are minimized before transaction atoms: the event cells of a
    model must be exactly the closure its transaction cells support, and
    among models a smaller event layer beats any transaction layer.
    """
    from .grounding import strata

    tcells = check_caps(program, path, max_cells)
    layers = strata(program)
    models: list[tuple[frozenset, frozenset]] = []
    for size in range(len(tcells) + 1):
        for combo in itertools.combinations(tcells, size):
            t = frozenset(combo)
            e = supported_events(program, path, t, oracle, layers)
            if e is None or any(e2 == e and t2 <= t for e2, t2 in models):
                continue
            if Interpretation(program, path, t | e, oracle).is_model():
                models.append((e, t))
    minimal = [
        (e, t)
        for e, t in models
        if not any(e2 < e or (e2 == e and t2 < t) for e2, t2 in models)
    ]
    return [e | t for e, t in minimal]
def brute_force_entails(
    program: Program, path: Path, goal: Formula, oracle: Oracle = RELATIONAL, models=None
) -> bool:
    """Goal holds on the whole path in every minimal model."""
    models = brute_force_minimal_models(program, path, oracle) if models is None else models
    n = len(path) - 1
    return all(Interpretation(program, path, m, oracle).sat(goal, 0, n) for m in models)
