"""Atoms, predicate kinds, formula trees, rules and programs."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Union


class Kind(enum.Enum):
    TRANSACTION = "transaction"
    EVENT = "event"
    PRIMITIVE = "primitive"


@dataclass(frozen=True)
class Func:
    """A function term. Parsed so it can be rejected with a clear message."""

    name: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.name}({','.join(map(str, self.args))})"


Term = Union[str, Func]


def is_variable(term: Term) -> bool:
    return isinstance(term, str) and (term[0].isupper() or term[0] == "_")


@dataclass(frozen=True, order=True)
class Atom:
    name: str
    args: tuple = ()
    op: str | None = None  # "ins" / "del" for update primitives

    def __str__(self) -> str:
        s = self.name
        if self.args:
            s += "(" + ",".join(map(str, self.args)) + ")"
        if self.op:
            s += "." + self.op
        return s

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.args))

    @property
    def base(self) -> Atom:
        """The stored fact an update primitive inserts or deletes."""
        return Atom(self.name, self.args)

    @property
    def is_update(self) -> bool:
        return self.op is not None

    def is_ground(self) -> bool:
        return not any(is_variable(t) or isinstance(t, Func) for t in self.args)


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    arity: int
    kind: Kind


# -- formula nodes ----------------------------------------------------------
# Not/And/Or/Serial are shared by event and transaction formulas; the
# remaining nodes belong to exactly one of the two languages.


@dataclass(frozen=True)
class Occ:
    subject: Atom


@dataclass(frozen=True)
class PathAny:
    pass


@dataclass(frozen=True)
class TAtom:
    atom: Atom


@dataclass(frozen=True)
class Trigger:
    event: Atom


@dataclass(frozen=True)
class Resp:
    subject: Atom


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Poss:
    body: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Serial:
    left: "Formula"
    right: "Formula"


Formula = Union[Occ, PathAny, TAtom, Trigger, Resp, TrueF, Poss, Not, And, Or, Serial]
EventFormula = Formula
TransactionFormula = Formula

PATH = PathAny()
TRUE = TrueF()


def followed_by(left: Formula, right: Formula) -> Serial:
    """``left ; right`` is sugar for ``left * path * right``."""
    return Serial(left, Serial(PATH, right))


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Not, Poss)):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or, Serial)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def atoms_of(f: Formula) -> Iterator[Atom]:
    for g in subformulas(f):
        if isinstance(g, (Occ, Resp)):
            yield g.subject
        elif isinstance(g, TAtom):
            yield g.atom
        elif isinstance(g, Trigger):
            yield g.event


def map_atoms(f: Formula, fn) -> Formula:
    """Rebuild ``f`` with every atom replaced by ``fn(atom)``."""
    if isinstance(f, Occ):
        return Occ(fn(f.subject))
    if isinstance(f, Resp):
        return Resp(fn(f.subject))
    if isinstance(f, TAtom):
        return TAtom(fn(f.atom))
    if isinstance(f, Trigger):
        return Trigger(fn(f.event))
    if isinstance(f, (Not, Poss)):
        return type(f)(map_atoms(f.body, fn))
    if isinstance(f, (And, Or, Serial)):
        return type(f)(map_atoms(f.left, fn), map_atoms(f.right, fn))
    return f


def depth(f: Formula) -> int:
    if isinstance(f, (Not, Poss)):
        return 1 + depth(f.body)
    if isinstance(f, (And, Or, Serial)):
        return 1 + max(depth(f.left), depth(f.right))
    return 1


# -- rules and programs -----------------------------------------------------


class HeadKind(enum.Enum):
    TRANSACTION = "transaction"  # p <- body
    RESPONSE = "response"  # r(e) <- body
    EVENT = "event"  # o(e) <- body


@dataclass(frozen=True)
class Rule:
    head: Atom
    head_kind: HeadKind
    body: Formula

    @property
    def is_event_rule(self) -> bool:
        return self.head_kind is HeadKind.EVENT


@dataclass
class Program:
    rules: list[Rule] = field(default_factory=list)
    kinds: dict[tuple[str, int], Kind] = field(default_factory=dict)
    declared_events: set[tuple[str, int]] = field(default_factory=set, compare=False)

    def __post_init__(self) -> None:
        self._index: dict | None = None

    @property
    def transaction_rules(self) -> list[Rule]:
        return [r for r in self.rules if not r.is_event_rule]

    @property
    def event_rules(self) -> list[Rule]:
        return [r for r in self.rules if r.is_event_rule]

    def kind_of(self, atom: Atom) -> Kind:
        if atom.op is not None:
            return Kind.PRIMITIVE
        return self.kinds.get(atom.key, Kind.PRIMITIVE)

    def is_event(self, atom: Atom) -> bool:
        return atom.op is None and self.kinds.get(atom.key) is Kind.EVENT

    def _build_index(self) -> dict:
        defs: dict[Atom, list[Formula]] = {}
        resp: dict[Atom, list[Formula]] = {}
        rank: dict[Atom, int] = {}
        for i, r in enumerate(self.rules):
            if r.head_kind is HeadKind.TRANSACTION:
                defs.setdefault(r.head, []).append(r.body)
            elif r.head_kind is HeadKind.RESPONSE:
                resp.setdefault(r.head, []).append(r.body)
            else:
                rank.setdefault(r.head, i)
        return {"defs": defs, "resp": resp, "rank": rank}

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = self._build_index()
        return self._index

    def definitions(self, atom: Atom) -> list[Formula]:
        return self.index["defs"].get(atom, [])

    def response_bodies(self, subject: Atom) -> list[Formula]:
        """Bodies of r(subject); update primitives answer trivially by default."""
        bodies = self.index["resp"].get(subject)
        if bodies:
            return bodies
        if subject.is_update:
            return [TRUE]
        return []

    def has_response(self, subject: Atom) -> bool:
        return bool(self.response_bodies(subject))

    def event_rank(self, subject: Atom) -> int:
        """Program position of the first event rule defining ``subject``.

        Occurrences with no defining rule (update primitives, explicitly
        triggered events) rank before every defined event.
        """
        return self.index["rank"].get(subject, -1)

    def has_implicit_response(self, subject: Atom) -> bool:
        return subject.is_update and subject not in self.index["resp"]

    def constants(self) -> set[str]:
        out: set[str] = set()
        for r in self.rules:
            for a in (r.head, *atoms_of(r.body)):
                out.update(t for t in a.args if isinstance(t, str) and not is_variable(t))
        return out

    def with_rules(self, rules: list[Rule]) -> Program:
        return Program(list(rules), dict(self.kinds), set(self.declared_events))
