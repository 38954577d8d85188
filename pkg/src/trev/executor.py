"""Transaction execution with event detection and response.

A :class:`Machine` runs a depth-first, backtracking search over the
executable fragment. In *execute* mode every primitive or trigger appends a
transition to the path being built; in *replay* mode the same steps must
match the transitions of a fixed target path, which is how the checker
decides whether a given path is a valid expanded execution.

After each atomic step, each rule body and each serial join, the respond
loop detects events over the segment just executed and, while the choice
function picks an unanswered one, appends an execution of its response.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from .detection import DetectionTable, ResponseEntry, detect
from .errors import ExpansionLimit, FragmentError, TrevError
from .formulas import (
    And,
    Atom,
    Formula,
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
from .grounding import strata
from .oracle import RELATIONAL, Oracle, State
from .paths import Path

MAX_CALL_DEPTH = 400


class NoExecution(TrevError):
    def __init__(self, message: str, bounded: bool):
        self.bounded = bounded
        super().__init__(message)


@dataclass(frozen=True)
class Chosen:
    event: Atom
    occurrence_end: int


NO_EVENT = None

Choice = Callable[[Program, DetectionTable, tuple, int, int], "Chosen | None"]


def temporal_choice(
    program: Program, table: DetectionTable, ledger: tuple = (), start: int = 0, end: int | None = None
) -> Chosen | None:
    """Pick the event whose earliest unanswered occurrence ends first.

    Only occurrences inside states ``start..end`` count. An event is answered
    once some response to it starts at or after its latest occurrence, so a
    burst of occurrences is responded to once. Ties on the end state go to
    occurrences with no defining rule, then program order, then name.
    """
    end = table.n_states - 1 if end is None else end
    ends: dict[Atom, list[int]] = {}
    for (i, j), subjects in table.occ.items():
        if i < start or j > end:
            continue
        for s in subjects:
            ends.setdefault(s, []).append(j)
    last_response: dict[Atom, int] = {}
    for entry in ledger:
        last_response[entry.event] = max(last_response.get(entry.event, -1), entry.start)
    best = None
    for subject, js in ends.items():
        if not program.has_response(subject):
            continue
        threshold = last_response.get(subject, -1)
        pending = [j for j in js if j > threshold]
        if not pending:
            continue
        key = (min(pending), program.event_rank(subject), str(subject))
        if best is None or key < best[0]:
            best = (key, Chosen(subject, max(js)))
    return best[1] if best else NO_EVENT


@dataclass(frozen=True)
class ExecutionContext:
    program: Program
    oracle: Oracle = RELATIONAL
    choice: Choice = temporal_choice
    max_expansion_rounds: int = 100
    max_path_states: int = 64
    random_seed: int = 0
    expansion: bool = True
    layers: list | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.max_expansion_rounds < 1 or self.max_path_states < 1:
            raise ValueError("bounds must be positive")
        if self.layers is None:
            object.__setattr__(self, "layers", strata(self.program))


@dataclass(frozen=True)
class Run:
    path: Path
    ledger: tuple = ()

    @property
    def end(self) -> int:
        return len(self.path) - 1


@dataclass(frozen=True)
class ExecutionResult:
    path: Path
    ledger: tuple

    def trace(self) -> list[str]:
        lines = []
        by_end: dict[int, list[ResponseEntry]] = {}
        for e in self.ledger:
            by_end.setdefault(e.end, []).append(e)

        def respond_lines(k):
            return [f"RESPOND {e.event} over [{e.start},{e.end}]" for e in sorted(by_end.get(k, []), key=lambda e: e.start)]

        lines += respond_lines(0)
        for k, (label, state) in enumerate(zip(self.path.labels, self.path.states[1:]), 1):
            atoms = ", ".join(sorted(map(str, state)))
            lines.append(f"STEP {k}: o({label}) : {{{atoms}}}")
            lines += respond_lines(k)
        return lines


class Machine:
    def __init__(
        self, ctx: ExecutionContext, target: Path | None = None, cap: int | None = None, pending: set | None = None
    ):
        self.ctx = ctx
        self.pending = set() if pending is None else pending  # window checks in progress
        self.program = ctx.program
        self.target = target
        self.cap = ctx.max_path_states if cap is None else cap
        self.cut = False
        self._tables: dict = {}

    # -- helpers
    def table(self, path: Path, ledger: tuple) -> DetectionTable:
        key = (path, ledger)
        t = self._tables.get(key)
        if t is None:
            t = detect(self.program, path, ledger, oracle=self.ctx.oracle, layers=self.ctx.layers)
            if len(self._tables) > 4096:
                self._tables.clear()
            self._tables[key] = t
        return t

    def extend(self, run: Run, label: Atom, state: State) -> Run | None:
        if self.target is None:
            if len(run.path) >= self.cap:
                self.cut = True
                return None
            return Run(run.path.extend(label, state), run.ledger)
        k = run.end
        t = self.target
        if k + 1 >= len(t) or t.labels[k] != label or t.states[k + 1] != state:
            return None
        return Run(t.window(0, k + 1), run.ledger)

    def jump(self, run: Run, m: int) -> Run:
        return Run(self.target.window(0, m), run.ledger)

    def holds_on(self, formula: Formula, path: Path, i: int, j: int) -> bool:
        window = path.window(i, j)
        key = (formula, window)
        if key in self.pending:
            return False  # the check depends on itself; nothing supports it
        self.pending.add(key)
        try:
            return Machine(self.ctx, target=window, pending=self.pending).entails(formula)
        finally:
            self.pending.discard(key)

    # -- entry points
    def run_from(self, initial: Run, goal: Formula) -> Iterator[Run]:
        for r in self.solve(goal, initial, 0):
            yield from self.respond(r, initial.end, 0)

    def entails(self, goal: Formula, ledger: tuple | None = None) -> bool:
        n = len(self.target)
        for r in self.run_from(Run(self.target.window(0, 0)), goal):
            if r.end == n - 1 and (ledger is None or sorted(r.ledger) == sorted(ledger)):
                return True
        return False

    # -- the search
    def solve(self, f: Formula, run: Run, depth: int, active: frozenset = frozenset()) -> Iterator[Run]:
        if depth > MAX_CALL_DEPTH:
            raise ExpansionLimit(f"nesting deeper than {MAX_CALL_DEPTH} calls without finishing a response")
        k = run.end
        d = depth + 1
        program = self.program
        if isinstance(f, TAtom):
            a = f.atom
            if a.is_update:
                nxt = self.extend(run, a, self.ctx.oracle.apply(run.path.last, a))
                if nxt is not None:
                    yield from self.respond(nxt, k, d)
            elif program.kind_of(a) is Kind.TRANSACTION:
                key = (a, k, len(run.ledger))
                if key in active:
                    return  # left recursion: any answer has a derivation without the loop
                for body in program.definitions(a):
                    for r in self.solve(body, run, d, active | {key}):
                        yield from self.respond(r, k, d)
            elif a in self.ctx.oracle.data(run.path.last):
                yield from self.respond(run, k, d)
        elif isinstance(f, Trigger):
            e = f.event
            last = run.path.last
            if self.target is None:
                nxt = self.extend(run, e, last)
                if nxt is not None:
                    yield from self.respond(nxt, k, d)
            else:
                table = self.table(self.target, run.ledger)
                for m in range(k, len(self.target)):
                    if table.holds(e, k, m):
                        yield from self.respond(self.jump(run, m), k, d)
        elif isinstance(f, Resp):
            key = (f, k, len(run.ledger))
            if key in active:
                return
            for body in program.response_bodies(f.subject):
                for r in self.solve(body, run, d, active | {key}):
                    yield from self.respond(r, k, d)
        elif isinstance(f, TrueF):
            yield from self.respond(run, k, d)
        elif isinstance(f, Serial):
            for r1 in self.solve(f.left, run, d, active):
                for r2 in self.solve(f.right, r1, d, active if r1.end == k else frozenset()):
                    yield from self.respond(r2, k, d)
        elif isinstance(f, Or):
            yield from self.solve(f.left, run, d, active)
            yield from self.solve(f.right, run, d, active)
        elif isinstance(f, And):
            seen = set()
            for first, second in ((f.left, f.right), (f.right, f.left)):
                for r in self.solve(first, run, d, active):
                    if r in seen:
                        continue
                    base = self.target if self.target is not None else r.path
                    if self.holds_on(second, base, k, r.end):
                        seen.add(r)
                        yield r
        elif isinstance(f, Not):
            if self.target is None:
                if not self.holds_on(f.body, run.path, k, k):
                    yield run
            else:
                for m in range(k, len(self.target)):
                    if not self.holds_on(f.body, self.target, k, m):
                        yield self.jump(run, m)
        elif isinstance(f, Poss):
            if self.hypothetically(f.body, run.path.last):
                yield run
        elif isinstance(f, (Occ, PathAny)):
            raise FragmentError(f"{type(f).__name__} is an event formula and cannot be executed")
        else:
            raise FragmentError(f"cannot execute {f!r}")

    def hypothetically(self, f: Formula, state: State) -> bool:
        try:
            execute(self.ctx, state, f)
        except NoExecution:
            return False
        return True

    def respond(self, run: Run, start: int, depth: int, rounds: int = 0) -> Iterator[Run]:
        if not self.ctx.expansion:
            yield run
            return
        table = self.table(run.path, run.ledger)
        chosen = self.ctx.choice(self.program, table, run.ledger, start, run.end)
        if chosen is NO_EVENT:
            yield run
            return
        if rounds >= self.ctx.max_expansion_rounds:
            raise ExpansionLimit(
                f"still responding to {chosen.event} after {rounds} rounds (segment from state {start})"
            )
        k = run.end
        for r in self.solve(Resp(chosen.event), run, depth + 1):
            entry = ResponseEntry(chosen.occurrence_end, k, r.end, chosen.event)
            yield from self.respond(Run(r.path, r.ledger + (entry,)), start, depth + 1, rounds + 1)


def _ensure_recursion_headroom() -> None:
    if sys.getrecursionlimit() < 6000:
        sys.setrecursionlimit(6000)


def execute(ctx: ExecutionContext, initial: State, goal: Formula) -> ExecutionResult:
    """Find a path from ``initial`` on which ``goal`` executes, shortest first."""
    _ensure_recursion_headroom()
    bounded = False
    for cap in range(1, ctx.max_path_states + 1):
        m = Machine(ctx, cap=cap)
        for r in m.run_from(Run(Path.single(initial)), goal):
            return ExecutionResult(r.path, r.ledger)
        if not m.cut:
            raise NoExecution("no execution of the goal exists from the initial state", bounded=False)
        bounded = True
    raise NoExecution(f"no execution within {ctx.max_path_states} states", bounded=bounded)


def step(ctx: ExecutionContext, partial: Path, formula: Formula, ledger: tuple = ()) -> Iterator[Run]:
    """All continuations of ``partial`` that execute ``formula`` from its last state."""
    _ensure_recursion_headroom()
    yield from Machine(ctx).solve(formula, Run(partial, tuple(ledger)), 0)


def respond_loop(ctx: ExecutionContext, path: Path, ledger: tuple = (), start: int = 0) -> ExecutionResult:
    _ensure_recursion_headroom()
    for r in Machine(ctx).respond(Run(path, tuple(ledger)), start, 0):
        return ExecutionResult(r.path, r.ledger)
    raise NoExecution("every response alternative failed", bounded=False)


def replay(ctx: ExecutionContext, path: Path, goal: Formula, ledger: tuple | None = None) -> bool:
    _ensure_recursion_headroom()
    return Machine(ctx, target=path).entails(goal, ledger)


def without_expansion(ctx: ExecutionContext) -> ExecutionContext:
    return replace(ctx, expansion=False)
