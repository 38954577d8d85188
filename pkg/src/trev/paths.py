"""Labeled paths: sequences of states joined by occurrence-labeled transitions."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

from .errors import PathError
from .formulas import Atom
from .oracle import RELATIONAL, Oracle, State


@dataclass(frozen=True)
class Path:
    states: tuple
    labels: tuple = ()

    def __post_init__(self):
        if not self.states:
            raise PathError("a path needs at least one state")
        if len(self.labels) != len(self.states) - 1:
            raise PathError(f"{len(self.states)} states need {len(self.states) - 1} labels, got {len(self.labels)}")

    @classmethod
    def single(cls, state: State) -> Path:
        return cls((frozenset(state),))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def first(self) -> State:
        return self.states[0]

    @property
    def last(self) -> State:
        return self.states[-1]

    def extend(self, label: Atom | None, state: State) -> Path:
        return Path(self.states + (frozenset(state),), self.labels + (label,))

    def window(self, i: int, j: int) -> Path:
        """States i..j inclusive (0-based) with the labels between them."""
        if not 0 <= i <= j < len(self.states):
            raise PathError(f"window [{i},{j}] outside a {len(self.states)}-state path")
        return Path(self.states[i : j + 1], self.labels[i:j])

    def __str__(self) -> str:
        parts = [format_state(self.states[0])]
        for label, s in zip(self.labels, self.states[1:]):
            parts.append(f"-{'o(' + str(label) + ')' if label else ''}-> {format_state(s)}")
        return "<" + " ".join(parts) + ">"


def format_state(state: State) -> str:
    return "{" + ", ".join(sorted(map(str, state))) + "}"


def splits(path: Path) -> list[tuple[Path, Path]]:
    k = len(path)
    return [(path.window(0, i), path.window(i, k - 1)) for i in range(k)]


def prefixes(path: Path) -> list[Path]:
    return [path.window(0, i) for i in range(len(path))]


def subpaths_contiguous(path: Path) -> list[Path]:
    k = len(path)
    return [path.window(i, j) for i in range(k) for j in range(i, k)]


def windows(n_states: int) -> Iterator[tuple[int, int]]:
    """Index pairs of every contiguous subpath, shortest first."""
    for width in range(n_states):
        for i in range(n_states - width):
            yield i, i + width


def compose(p1: Path, p2: Path) -> Path:
    if p1.last != p2.first:
        raise PathError(f"cannot compose: {format_state(p1.last)} != {format_state(p2.first)}")
    return Path(p1.states + p2.states[1:], p1.labels + p2.labels)


def validate(path: Path, oracle: Oracle = RELATIONAL, is_event=None) -> None:
    """Raise PathError unless every transition is justified by its label."""
    for n, (label, d1, d2) in enumerate(zip(path.labels, path.states, path.states[1:])):
        if label is None:
            raise PathError(f"transition {n} has no label")
        if label.is_update:
            if not oracle.holds(d1, d2, label):
                raise PathError(f"transition {n}: {label} does not lead from {format_state(d1)} to {format_state(d2)}")
        else:
            if d1 != d2:
                raise PathError(f"transition {n}: explicit event {label} must not change the state")
            if is_event is not None and not is_event(label):
                raise PathError(f"transition {n}: {label} is not an event")


# -- JSON -------------------------------------------------------------------


def path_to_dict(path: Path) -> dict:
    return {
        "states": [sorted(map(str, s)) for s in path.states],
        "labels": [f"o({l})" if l is not None else None for l in path.labels],
    }


def path_from_dict(data: dict) -> Path:
    from .parser import parse_atom, parse_label

    try:
        states = tuple(frozenset(parse_atom(a) for a in s) for s in data["states"])
        labels = tuple(parse_label(l) if l is not None else None for l in data.get("labels", []))
    except (KeyError, TypeError) as e:
        raise PathError(f"malformed path JSON: {e}") from None
    return Path(states, labels)


def dumps(path: Path) -> str:
    return json.dumps(path_to_dict(path))


def loads(text: str) -> Path:
    try:
        return path_from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise PathError(f"invalid JSON: {e}") from None
