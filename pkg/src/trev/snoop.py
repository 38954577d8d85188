"""SNOOP event algebra (unrestricted context) and its embedding into event formulas.

``snoop_eval`` enumerates occurrence intervals directly from the operator
definitions. ``translate`` maps an expression to an event formula, and
``history_to_path`` builds the path whose transitions carry the history's
primitive events, so both sides can be compared interval by interval.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .detection import detect
from .errors import ParseError
from .formulas import PATH, And, Atom, Formula, Not, Occ, Or, Program, Serial
from .paths import Path


@dataclass(frozen=True)
class Primitive:
    name: str


@dataclass(frozen=True)
class Seq:
    left: "SnoopExpr"
    right: "SnoopExpr"


@dataclass(frozen=True)
class OrE:
    left: "SnoopExpr"
    right: "SnoopExpr"


@dataclass(frozen=True)
class AndE:
    left: "SnoopExpr"
    right: "SnoopExpr"


@dataclass(frozen=True)
class NotE:
    """``not(absent)[first, second]``"""

    absent: "SnoopExpr"
    first: "SnoopExpr"
    second: "SnoopExpr"


SnoopExpr = Union[Primitive, Seq, OrE, AndE, NotE]
Interval = tuple  # (ti, tf)


def expr_depth(e: SnoopExpr) -> int:
    if isinstance(e, Primitive):
        return 1
    if isinstance(e, NotE):
        return 1 + max(expr_depth(e.absent), expr_depth(e.first), expr_depth(e.second))
    return 1 + max(expr_depth(e.left), expr_depth(e.right))


def format_expr(e: SnoopExpr) -> str:
    if isinstance(e, Primitive):
        return e.name
    if isinstance(e, NotE):
        return f"not({format_expr(e.absent)})[{format_expr(e.first)},{format_expr(e.second)}]"
    op = {Seq: ";", OrE: "\\/", AndE: "/\\"}[type(e)]
    return f"({format_expr(e.left)} {op} {format_expr(e.right)})"


# -- histories --------------------------------------------------------------


@dataclass(frozen=True)
class History:
    """Primitive event names per time point; ``events[k]`` is time ``t1 + k``."""

    t1: int
    events: tuple  # tuple of frozenset[str]

    @property
    def tmax(self) -> int:
        return self.t1 + len(self.events) - 1

    def at(self, t: int) -> frozenset:
        return self.events[t - self.t1]

    def times(self) -> range:
        return range(self.t1, self.tmax + 1)

    @classmethod
    def from_mapping(cls, mapping: dict) -> History:
        if not mapping:
            return cls(1, ())
        lo, hi = min(mapping), max(mapping)
        return cls(lo, tuple(frozenset(mapping.get(t, ())) for t in range(lo, hi + 1)))


_HISTORY_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*@\s*(-?\d+)\s*$")


def parse_history(text: str) -> History:
    mapping: dict[int, set] = {}
    for n, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _HISTORY_LINE.match(stripped)
        if not m:
            raise ParseError(f"expected 'name @ integer', got {stripped!r}", n, 1, ("name @ integer",))
        mapping.setdefault(int(m.group(2)), set()).add(m.group(1))
    return History.from_mapping(mapping)


# -- direct evaluation ------------------------------------------------------


def snoop_eval(expr: SnoopExpr, history: History) -> set:
    if isinstance(expr, Primitive):
        return {(t, t) for t in history.times() if expr.name in history.at(t)}
    if isinstance(expr, OrE):
        return snoop_eval(expr.left, history) | snoop_eval(expr.right, history)
    if isinstance(expr, Seq):
        return _sequence(snoop_eval(expr.left, history), snoop_eval(expr.right, history))
    if isinstance(expr, AndE):
        s1, s2 = snoop_eval(expr.left, history), snoop_eval(expr.right, history)
        out = set()
        for a, b in ((s1, s2), (s2, s1)):
            out |= {(i1, f2) for i1, f1 in a for i2, f2 in b if f1 <= i2}
        return out
    if isinstance(expr, NotE):
        absent = snoop_eval(expr.absent, history)
        seq = _sequence(snoop_eval(expr.first, history), snoop_eval(expr.second, history))
        return {(ti, tf) for ti, tf in seq if not any(ti <= i3 and f3 <= tf for i3, f3 in absent)}
    raise TypeError(f"unsupported SNOOP operator {type(expr).__name__}")


def _sequence(s1: set, s2: set) -> set:
    return {(i1, f2) for i1, f1 in s1 for i2, f2 in s2 if f1 < i2}


# -- translation ------------------------------------------------------------


def translate(expr: SnoopExpr) -> Formula:
    if isinstance(expr, Primitive):
        return Occ(Atom(expr.name))
    if isinstance(expr, Seq):
        return Serial(translate(expr.left), Serial(PATH, translate(expr.right)))
    if isinstance(expr, OrE):
        return Or(translate(expr.left), translate(expr.right))
    if isinstance(expr, AndE):
        t1, t2 = translate(expr.left), translate(expr.right)
        return Or(
            And(Serial(t1, PATH), Serial(PATH, t2)),
            And(Serial(t2, PATH), Serial(PATH, t1)),
        )
    if isinstance(expr, NotE):
        return Serial(translate(expr.first), Serial(Not(translate(expr.absent)), translate(expr.second)))
    raise TypeError(f"unsupported SNOOP operator {type(expr).__name__}")


def history_to_path(history: History) -> tuple[Path, dict]:
    """Empty-state path with one transition per time point, plus the seed
    placing each primitive event of time t on transition t."""
    n = len(history.events) + 1
    path = Path(tuple(frozenset() for _ in range(n)), tuple(None for _ in range(n - 1)))
    seed = {}
    for k, names in enumerate(history.events):
        if names:
            seed[(k, k + 1)] = {Atom(name) for name in names}
    return path, seed


def interval_window(history: History, interval: Interval) -> tuple[int, int]:
    ti, tf = interval
    return ti - history.t1, tf - history.t1 + 1


@dataclass(frozen=True)
class SnoopReport:
    expr: SnoopExpr
    intervals: tuple
    counterexamples: tuple

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "expr": format_expr(self.expr),
            "intervals": [list(iv) for iv in self.intervals],
            "counterexamples": [list(iv) for iv in self.counterexamples],
            "verified": self.ok,
        }


def snoop_verify(history: History, expr: SnoopExpr) -> SnoopReport:
    """Check every interval found directly also satisfies the translation."""
    intervals = sorted(snoop_eval(expr, history))
    path, seed = history_to_path(history)
    table = detect(Program(), path, seed=seed)
    formula = translate(expr)
    memo: dict = {}
    bad = [iv for iv in intervals if not table.eval(formula, *interval_window(history, iv), memo)]
    return SnoopReport(expr, tuple(intervals), tuple(bad))


# -- expression syntax ------------------------------------------------------

_SNOOP_TOKEN = re.compile(r"\s*(?:(\\/|/\\|[;()\[\],])|([A-Za-z_][A-Za-z0-9_]*))")


def parse_snoop(text: str) -> SnoopExpr:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _SNOOP_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", 1, pos + 1, ())
        tokens.append((m.group(1) or m.group(2), m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    tokens.append(("", len(text)))
    i = 0

    def peek() -> str:
        return tokens[i][0]

    def take(expected: str | None = None) -> str:
        nonlocal i
        tok, at = tokens[i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok or 'end of input'!r}", 1, at + 1, (expected,))
        i += 1
        return tok

    def disjunction():
        e = conjunction()
        while peek() == "\\/":
            take()
            e = OrE(e, conjunction())
        return e

    def conjunction():
        e = sequence()
        while peek() == "/\\":
            take()
            e = AndE(e, sequence())
        return e

    def sequence():
        e = primary()
        while peek() == ";":
            take()
            e = Seq(e, primary())
        return e

    def primary():
        tok, at = tokens[i]
        if tok == "(":
            take()
            e = disjunction()
            take(")")
            return e
        if tok == "not" and tokens[i + 1][0] == "(":
            take()
            take("(")
            absent = disjunction()
            take(")")
            take("[")
            first = disjunction()
            take(",")
            second = disjunction()
            take("]")
            return NotE(absent, first, second)
        if tok and (tok[0].isalpha() or tok[0] == "_"):
            take()
            return Primitive(tok)
        raise ParseError(f"expected an event name, got {tok or 'end of input'!r}", 1, at + 1, ("name", "(", "not"))

    e = disjunction()
    if peek():
        raise ParseError(f"unexpected {peek()!r}", 1, tokens[i][1] + 1, ("end of input",))
    return e
