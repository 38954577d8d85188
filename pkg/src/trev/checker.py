"""Entailment on a given path, and per-atom support justification."""
from __future__ import annotations

from dataclasses import dataclass

from .executor import ExecutionContext, replay
from .formulas import Atom, Formula, HeadKind, Kind, Program, Resp, Rule, TAtom, atoms_of
from .oracle import RELATIONAL, Oracle
from .paths import Path


def check_entailment(
    program: Program,
    path: Path,
    goal: Formula,
    ledger: tuple | None = None,
    oracle: Oracle = RELATIONAL,
    expansion: bool = True,
    ctx: ExecutionContext | None = None,
) -> bool:
    """True iff ``path`` is an expanded execution of ``goal``.

    With ``ledger`` given, the responses performed along the way must also
    match it exactly.
    """
    ctx = ctx or ExecutionContext(program, oracle=oracle, expansion=expansion)
    return replay(ctx, path, goal, ledger)


@dataclass(frozen=True)
class Justification:
    kind: str  # "oracle-data", "oracle-transition", "rule-head", "implicit-response", "violation"
    rule: Rule | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.kind != "violation"

    def to_dict(self) -> dict:
        from .parser import format_rule

        out = {"kind": self.kind}
        if self.rule is not None:
            out["rule"] = format_rule(self.rule)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True)
class SupportLine:
    formula: Formula
    justification: Justification

    def label(self) -> str:
        from .parser import format_formula

        return format_formula(self.formula)


def _candidates(program: Program, path: Path) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for rule in program.transaction_rules:
        head = Resp(rule.head) if rule.head_kind is HeadKind.RESPONSE else TAtom(rule.head)
        seen.setdefault(head, None)
        for a in atoms_of(rule.body):
            if a.is_update or program.kind_of(a) is not Kind.EVENT:
                seen.setdefault(TAtom(a), None)
    for label in path.labels:
        if label is not None and label.is_update:
            seen.setdefault(TAtom(label), None)
    return list(seen)


def support_report(
    program: Program, path: Path, ctx: ExecutionContext | None = None, formulas=None
) -> list[SupportLine]:
    """For every transaction atom that holds on ``path``, say why.

    A primitive must be backed by the oracles, a defined atom or response by
    a rule whose body also holds on the path. Anything else is a violation.
    """
    ctx = ctx or ExecutionContext(program)
    out = []
    for f in formulas if formulas is not None else _candidates(program, path):
        if not replay(ctx, path, f):
            continue
        out.append(SupportLine(f, _justify(program, path, f, ctx)))
    return out


def _justify(program: Program, path: Path, f: Formula, ctx: ExecutionContext) -> Justification:
    if isinstance(f, Resp):
        subject = f.subject
        for rule in program.transaction_rules:
            if rule.head_kind is HeadKind.RESPONSE and rule.head == subject and replay(ctx, path, rule.body):
                return Justification("rule-head", rule)
        if program.has_implicit_response(subject):
            return Justification("implicit-response", detail=f"{subject} answers itself")
        return Justification("violation", detail=f"no response rule for {subject} holds here")
    a: Atom = f.atom
    if a.is_update:
        if len(path) >= 2 and path.labels[0] == a and ctx.oracle.holds(path.states[0], path.states[1], a):
            return Justification("oracle-transition", detail=f"{a} in the first transition")
        return Justification("violation", detail=f"{a} holds but the first transition does not perform it")
    if program.kind_of(a) is Kind.TRANSACTION:
        for rule in program.transaction_rules:
            if rule.head_kind is HeadKind.TRANSACTION and rule.head == a and replay(ctx, path, rule.body):
                return Justification("rule-head", rule)
        return Justification("violation", detail=f"no rule for {a} has a body holding here")
    if a in ctx.oracle.data(path.first):
        return Justification("oracle-data", detail=f"{a} in the first state")
    return Justification("violation", detail=f"{a} is not in the first state")


def violations(report: list[SupportLine]) -> list[SupportLine]:
    return [line for line in report if not line.justification.ok]
