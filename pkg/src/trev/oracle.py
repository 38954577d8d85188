"""Data and transition oracles.

Only the relational instantiation ships: a state is a set of ground facts,
``p.ins`` holds between D1 and D2 iff D2 = D1 | {p}, and ``p.del`` iff
D2 = D1 - {p}.
"""
from __future__ import annotations

from typing import Iterable, Protocol

from .formulas import Atom

State = frozenset  # frozenset[Atom]; equal atom sets are the same state


class Oracle(Protocol):
    def data(self, state: State) -> frozenset[Atom]: ...

    def transition(self, d1: State, d2: State) -> frozenset[Atom]: ...

    def holds(self, d1: State, d2: State, primitive: Atom) -> bool: ...

    def apply(self, d1: State, primitive: Atom) -> State: ...


class RelationalOracle:
    def __init__(self, herbrand_base: Iterable[Atom] = ()):
        self.herbrand_base = frozenset(herbrand_base)

    def data(self, state: State) -> frozenset[Atom]:
        return frozenset(state)

    def transition(self, d1: State, d2: State) -> frozenset[Atom]:
        out = set()
        for p in self.herbrand_base | d1 | d2:
            if d2 == d1 | {p}:
                out.add(Atom(p.name, p.args, "ins"))
            if d2 == d1 - {p}:
                out.add(Atom(p.name, p.args, "del"))
        return frozenset(out)

    def holds(self, d1: State, d2: State, primitive: Atom) -> bool:
        if primitive.op is None:
            return False
        return d2 == self.apply(d1, primitive)

    def apply(self, d1: State, primitive: Atom) -> State:
        if primitive.op == "ins":
            return d1 | {primitive.base}
        if primitive.op == "del":
            return d1 - {primitive.base}
        raise ValueError(f"{primitive} is not an update primitive")


RELATIONAL = RelationalOracle()


def relational_data(state: State) -> frozenset[Atom]:
    return RELATIONAL.data(state)


def relational_transition(d1: State, d2: State, herbrand_base: Iterable[Atom] = ()) -> frozenset[Atom]:
    return RelationalOracle(herbrand_base).transition(d1, d2)


def apply_primitive(d1: State, p: Atom) -> State:
    return RELATIONAL.apply(d1, p)
