"""Herbrand grounding over a finite constant set, and event-rule stratification."""
from __future__ import annotations

import itertools
from collections import defaultdict

from .errors import GroundingError, StratificationError
from .formulas import Atom, Formula, Func, Not, Occ, Program, Rule, atoms_of, is_variable, map_atoms

DEFAULT_MAX_INSTANCES = 200_000


def _rule_variables(rule: Rule) -> list[str]:
    seen: dict[str, None] = {}
    for a in (rule.head, *atoms_of(rule.body)):
        for t in a.args:
            if isinstance(t, Func):
                raise GroundingError(f"function term {t} in rule for {rule.head}: only constants and variables are supported")
            if is_variable(t):
                seen.setdefault(t, None)
    return list(seen)


def ground(program: Program, extra_constants=(), max_instances: int = DEFAULT_MAX_INSTANCES) -> Program:
    constants = sorted(program.constants() | set(extra_constants))
    out: list[Rule] = []
    for rule in program.rules:
        variables = _rule_variables(rule)
        if not variables:
            out.append(rule)
            continue
        if not constants:
            continue
        if len(out) + len(constants) ** len(variables) > max_instances:
            raise GroundingError(
                f"grounding {rule.head} needs {len(constants)}^{len(variables)} instances (bound {max_instances})"
            )
        for values in itertools.product(constants, repeat=len(variables)):
            sub = dict(zip(variables, values))

            def bind(a: Atom) -> Atom:
                return Atom(a.name, tuple(sub.get(t, t) for t in a.args), a.op)

            out.append(Rule(bind(rule.head), rule.head_kind, map_atoms(rule.body, bind)))
    return program.with_rules(out)


def goal_constants(goal: Formula) -> set[str]:
    out = set()
    for a in atoms_of(goal):
        for t in a.args:
            if isinstance(t, Func):
                raise GroundingError(f"function term {t} in goal")
            if is_variable(t):
                raise GroundingError(f"goal must be ground; found variable {t} in {a}")
            out.add(t)
    return out


def _occurrence_edges(body: Formula, negated: bool = False):
    """Yield (event atom, under-negation) for every occurrence in ``body``."""
    if isinstance(body, Occ):
        yield body.subject, negated
    elif isinstance(body, Not):
        yield from _occurrence_edges(body.body, True)
    else:
        for child in (getattr(body, "left", None), getattr(body, "right", None), getattr(body, "body", None)):
            if child is not None:
                yield from _occurrence_edges(child, negated)


def stratify(program: Program) -> dict[tuple[str, int], int]:
    """Assign each event predicate a level; negated dependencies go strictly up."""
    edges: dict = defaultdict(set)  # head -> {(dep, negative)}
    preds: set = set()
    for rule in program.event_rules:
        h = rule.head.key
        preds.add(h)
        for a, neg in _occurrence_edges(rule.body):
            if a.is_update:
                continue
            edges[h].add((a.key, neg))
            preds.add(a.key)
    level = {p: 0 for p in preds}
    for _ in range(len(preds) + 1):
        changed = False
        for h in preds:
            for dep, neg in edges[h]:
                need = level[dep] + (1 if neg else 0)
                if level[h] < need:
                    level[h] = need
                    changed = True
        if not changed:
            return level
    raise StratificationError(_negative_cycle(edges, preds))


def _negative_cycle(edges, preds) -> list:
    # a negative edge h -> d lies on a cycle iff d reaches h
    def reach(src):
        seen, stack, parent = {src}, [src], {src: None}
        while stack:
            n = stack.pop()
            for d, _ in edges[n]:
                if d not in seen:
                    seen.add(d)
                    parent[d] = n
                    stack.append(d)
        return parent

    for h in sorted(preds):
        for d, neg in sorted(edges[h]):
            if not neg:
                continue
            parent = reach(d)
            if h in parent:
                path = [h]
                n = h
                while n != d:
                    n = parent[n]
                    path.append(n)
                cycle = [h] + list(reversed(path[1:])) + [h] if d != h else [h, h]
                return [f"{name}/{arity}" for name, arity in cycle]
    return sorted(f"{n}/{a}" for n, a in preds)


def strata(program: Program) -> list[list[Rule]]:
    """Event rules grouped by level, lowest first."""
    levels = stratify(program)
    grouped: dict[int, list[Rule]] = defaultdict(list)
    for rule in program.event_rules:
        grouped[levels[rule.head.key]].append(rule)
    return [grouped[k] for k in sorted(grouped)]
