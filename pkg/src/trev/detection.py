"""Event detection over a fixed path.

The detection table is the least assignment of occurrences to contiguous
subpaths that contains the oracle/explicit base facts and is closed under
the event rules, computed stratum by stratum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import FragmentError
from .formulas import And, Atom, Formula, Kind, Not, Occ, Or, PathAny, Program, Serial
from .grounding import strata as event_strata
from .oracle import RELATIONAL, Oracle
from .paths import Path, windows


@dataclass(frozen=True, order=True)
class ResponseEntry:
    """``event`` occurring up to state ``occurrence_end`` was answered by the
    response executed over states ``start..end``."""

    occurrence_end: int
    start: int
    end: int
    event: Atom = field(compare=False)

    def to_dict(self) -> dict:
        return {
            "event": str(self.event),
            "occurrence_end": self.occurrence_end,
            "response": [self.start, self.end],
        }


@dataclass
class DetectionTable:
    n_states: int
    occ: dict  # (i, j) -> set of atoms whose occurrence holds there
    ext: frozenset = frozenset()  # (atom, i, j): a base occurrence stretched over its own response

    def holds(self, subject: Atom, i: int, j: int) -> bool:
        return subject in self.occ.get((i, j), ()) or (subject, i, j) in self.ext

    def eval(self, formula: Formula, i: int, j: int, memo: dict | None = None) -> bool:
        return _eval(formula, i, j, self, {} if memo is None else memo)

    def intervals(self, subject: Atom) -> list[tuple[int, int]]:
        return sorted(((i, j) for (i, j), s in self.occ.items() if subject in s), key=lambda ij: (ij[1], ij[0]))

    def events(self) -> set[Atom]:
        out: set[Atom] = set()
        for s in self.occ.values():
            out |= s
        return out

    def entries(self) -> list[dict]:
        rows = [
            {"event": str(a), "start": i, "end": j}
            for (i, j), s in self.occ.items()
            for a in s
        ]
        return sorted(rows, key=lambda r: (r["end"], r["start"], r["event"]))


def _eval(f: Formula, i: int, j: int, table: DetectionTable, memo: dict) -> bool:
    if isinstance(f, Occ):
        return table.holds(f.subject, i, j)
    if isinstance(f, PathAny):
        return True
    key = (id(f), i, j)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(f, Not):
        v = not _eval(f.body, i, j, table, memo)
    elif isinstance(f, And):
        v = _eval(f.left, i, j, table, memo) and _eval(f.right, i, j, table, memo)
    elif isinstance(f, Or):
        v = _eval(f.left, i, j, table, memo) or _eval(f.right, i, j, table, memo)
    elif isinstance(f, Serial):
        v = any(_eval(f.left, i, m, table, memo) and _eval(f.right, m, j, table, memo) for m in range(i, j + 1))
    else:
        raise FragmentError(f"{type(f).__name__} cannot appear in an event formula")
    memo[key] = v
    return v


def base_facts(program: Program | None, path: Path, oracle: Oracle = RELATIONAL) -> dict:
    occ: dict = {}
    for k, (label, d1, d2) in enumerate(zip(path.labels, path.states, path.states[1:])):
        if label is None:
            continue
        if label.is_update:
            ok = oracle.holds(d1, d2, label)
        else:
            ok = d1 == d2 and (program is None or program.kind_of(label) is not Kind.TRANSACTION)
        if ok:
            occ.setdefault((k, k + 1), set()).add(label)
    return occ


def stretched_occurrences(occ: Mapping, path: Path, ledger: Iterable[ResponseEntry]) -> frozenset:
    """A base occurrence also spans the response that immediately answered it."""
    out = set()
    for e in ledger:
        k = e.occurrence_end
        if e.start == k and e.end > k and k >= 1 and path.labels[k - 1] == e.event and e.event in occ.get((k - 1, k), ()):
            out.add((e.event, k - 1, e.end))
    return frozenset(out)


def detect(
    program: Program,
    path: Path,
    ledger: Iterable[ResponseEntry] = (),
    seed: Mapping | None = None,
    oracle: Oracle = RELATIONAL,
    layers: list | None = None,
) -> DetectionTable:
    occ = base_facts(program, path, oracle)
    for key, atoms in (seed or {}).items():
        occ.setdefault(key, set()).update(atoms)
    table = DetectionTable(len(path), occ, stretched_occurrences(occ, path, ledger))
    all_windows = list(windows(len(path)))
    for layer in (event_strata(program) if layers is None else layers):
        changed = True
        while changed:
            changed = False
            memo: dict = {}
            for rule in layer:
                for i, j in all_windows:
                    if rule.head in occ.get((i, j), ()):
                        continue
                    if _eval(rule.body, i, j, table, memo):
                        occ.setdefault((i, j), set()).add(rule.head)
                        changed = True
                        memo = {}
    return table


def eval_event(formula: Formula, table: DetectionTable, i: int = 0, j: int | None = None) -> bool:
    return table.eval(formula, i, table.n_states - 1 if j is None else j)


def occurrence_intervals(table: DetectionTable, subject: Atom) -> list[tuple[int, int]]:
    return table.intervals(subject)
