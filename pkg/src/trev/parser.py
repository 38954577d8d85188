"""Concrete syntax for programs, goals, atoms and states.

Connectives: ``*`` serial conjunction, ``;`` followed-by (event rules only),
``&``, ``|``, ``~``, ``poss(...)``, ``o(...)`` occurrence, ``r(...)``
response, ``true``, ``path``. Precedence from loosest: ``|``, ``&``,
``* ;`` (right associative), ``~``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import KindConflict, ParseError
from .formulas import (
    And,
    Atom,
    Formula,
    Func,
    HeadKind,
    Kind,
    Not,
    Occ,
    Or,
    PathAny,
    Poss,
    Program,
    Resp,
    Rule,
    Serial,
    TAtom,
    Trigger,
    TrueF,
    followed_by,
    subformulas,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<decl>\#event\b)
  | (?P<arrow><-)
  | (?P<suffix>\.(?:ins|del)(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>-?\d+)
  | (?P<punct>[.,()*&|~;/])
    """,
    re.VERBOSE,
)

_RESERVED = {"o", "r", "poss", "true", "path"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    prev_end = -1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok_text = m.group()
        if kind == "suffix" and prev_end != pos:
            # ".ins" only binds to an atom written right before it
            kind, tok_text = "punct", "."
            m_end = pos + 1
        else:
            m_end = m.end()
        if kind != "ws":
            tokens.append(Token(kind, tok_text, line, pos - line_start + 1))
            prev_end = m_end
        nl = text.count("\n", pos, m_end)
        if nl:
            line += nl
            line_start = text.rindex("\n", pos, m_end) + 1
        pos = m_end
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True)
class _FollowedBy:
    left: Formula
    right: Formula


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, *expected: str) -> ParseError:
        return ParseError(msg, self.tok.line, self.tok.col, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "arrow", "decl") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", repr(text))
        t = self.tok
        self.i += 1
        return t

    def at_marker(self, name: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == name and self.peek().text == "("

    # -- grammar
    def program(self) -> tuple[list[tuple[Atom, HeadKind, Formula | None]], set]:
        rules: list = []
        decls: set = set()
        while self.tok.kind != "eof":
            if self.tok.kind == "decl":
                self.i += 1
                name = self.ident()
                self.expect("/")
                if self.tok.kind != "number":
                    raise self.error("bad arity", "integer")
                arity = int(self.tok.text)
                self.i += 1
                self.expect(".")
                decls.add((name, arity))
            else:
                head, hk = self.head()
                body = None
                if self.at("<-"):
                    self.i += 1
                    body = self.body()
                self.expect(".")
                rules.append((head, hk, body))
        return rules, decls

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", "identifier")
        t = self.tok.text
        self.i += 1
        return t

    def head(self) -> tuple[Atom, HeadKind]:
        for marker, hk in (("o", HeadKind.EVENT), ("r", HeadKind.RESPONSE)):
            if self.at_marker(marker):
                self.i += 2
                a = self.atom()
                self.expect(")")
                return a, hk
        return self.atom(), HeadKind.TRANSACTION

    def body(self) -> Formula:
        left = self.conj()
        if self.at("|"):
            self.i += 1
            return Or(left, self.body())
        return left

    def conj(self) -> Formula:
        left = self.seq()
        if self.at("&"):
            self.i += 1
            return And(left, self.conj())
        return left

    def seq(self) -> Formula:
        left = self.unary()
        if self.at("*"):
            self.i += 1
            return Serial(left, self.seq())
        if self.at(";"):
            self.i += 1
            return _FollowedBy(left, self.seq())
        return left

    def unary(self) -> Formula:
        if self.at("~"):
            self.i += 1
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        if self.at("("):
            self.i += 1
            f = self.body()
            self.expect(")")
            return f
        if self.at_marker("poss"):
            self.i += 2
            f = self.body()
            self.expect(")")
            return Poss(f)
        for marker, node in (("o", Occ), ("r", Resp)):
            if self.at_marker(marker):
                self.i += 2
                a = self.atom()
                self.expect(")")
                return node(a)
        if self.tok.kind == "ident" and self.tok.text == "true":
            self.i += 1
            return TrueF()
        if self.tok.kind == "ident" and self.tok.text == "path":
            self.i += 1
            return PathAny()
        if self.tok.kind != "ident":
            raise self.error(
                f"unexpected {self.tok.text or 'end of input'!r}",
                "atom", "'('", "'~'", "o(", "r(", "poss(", "true", "path",
            )
        return TAtom(self.atom())

    def atom(self) -> Atom:
        t = self.tok
        if t.kind == "ident" and (t.text in ("true", "path") or (t.text in _RESERVED and self.peek().text == "(")):
            raise self.error(f"reserved word {t.text!r} used as predicate name")
        name = self.ident()
        args: tuple = ()
        if self.at("("):
            self.i += 1
            args = self.terms()
            self.expect(")")
        op = None
        if self.tok.kind == "suffix":
            op = self.tok.text[1:]
            self.i += 1
        return Atom(name, args, op)

    def terms(self) -> tuple:
        out = [self.term()]
        while self.at(","):
            self.i += 1
            out.append(self.term())
        return tuple(out)

    def term(self):
        if self.tok.kind == "number":
            t = self.tok.text
            self.i += 1
            return t
        name = self.ident()
        if self.at("("):
            self.i += 1
            args = self.terms()
            self.expect(")")
            return Func(name, args)
        return name


# -- kind resolution --------------------------------------------------------


def _walk_raw(f):
    if isinstance(f, _FollowedBy):
        yield f
        yield from _walk_raw(f.left)
        yield from _walk_raw(f.right)
        return
    if isinstance(f, (Not, Poss)):
        yield f
        yield from _walk_raw(f.body)
    elif isinstance(f, (And, Or, Serial)):
        yield f
        yield from _walk_raw(f.left)
        yield from _walk_raw(f.right)
    else:
        yield f


class _KindTable:
    def __init__(self, declared: set):
        self.kinds: dict[tuple[str, int], Kind] = {}
        self.why: dict[tuple[str, int], str] = {}
        for key in declared:
            self.mark(key, Kind.EVENT, "#event declaration")

    def mark(self, key, kind: Kind, why: str) -> None:
        old = self.kinds.get(key)
        if old is not None and old is not kind:
            raise KindConflict(
                f"{key[0]}/{key[1]} used as {old.value} ({self.why[key]}) and as {kind.value} ({why})"
            )
        self.kinds[key] = kind
        self.why.setdefault(key, why)


def _collect_kinds(raw_rules, declared: set, extra_formulas=()) -> dict:
    table = _KindTable(declared)
    for head, hk, body in raw_rules:
        if hk is HeadKind.TRANSACTION:
            if head.is_update:
                raise ParseError(f"cannot define update primitive {head} by a rule")
            table.mark(head.key, Kind.TRANSACTION, "rule head")
        elif not head.is_update:
            table.mark(head.key, Kind.EVENT, f"head {'o' if hk is HeadKind.EVENT else 'r'}({head})")
        else:
            table.mark(head.key, Kind.PRIMITIVE, f"update {head}")
    for f in [b for _, _, b in raw_rules if b is not None] + list(extra_formulas):
        for g in _walk_raw(f):
            if isinstance(g, (Occ, Resp, TAtom)):
                a = g.subject if isinstance(g, (Occ, Resp)) else g.atom
                if a.is_update:
                    table.mark(a.key, Kind.PRIMITIVE, f"update {a}")
                elif isinstance(g, (Occ, Resp)):
                    table.mark(a.key, Kind.EVENT, f"{'o' if isinstance(g, Occ) else 'r'}({a})")
    return table.kinds


def _to_event(f, kinds) -> Formula:
    if isinstance(f, _FollowedBy):
        return followed_by(_to_event(f.left, kinds), _to_event(f.right, kinds))
    if isinstance(f, Occ):
        return f
    if isinstance(f, PathAny):
        return f
    if isinstance(f, Poss):
        raise ParseError("hypothetical poss(...) is not allowed in an event formula")
    if isinstance(f, Not):
        return Not(_to_event(f.body, kinds))
    if isinstance(f, (And, Or, Serial)):
        return type(f)(_to_event(f.left, kinds), _to_event(f.right, kinds))
    if isinstance(f, TAtom):
        raise ParseError(f"bare atom {f.atom} in an event formula; write o({f.atom})")
    if isinstance(f, Resp):
        raise ParseError(f"response r({f.subject}) is not allowed in an event formula")
    raise ParseError("'true' is not allowed in an event formula")


def _to_transaction(f, kinds) -> Formula:
    if isinstance(f, _FollowedBy):
        raise ParseError("';' (followed-by) is only allowed in event formulas")
    if isinstance(f, PathAny):
        raise ParseError("'path' is only allowed in event formulas")
    if isinstance(f, Occ):
        raise ParseError(f"occurrence o({f.subject}) belongs in an event rule body")
    if isinstance(f, TAtom):
        a = f.atom
        if not a.is_update and kinds.get(a.key) is Kind.EVENT:
            return Trigger(a)
        return f
    if isinstance(f, (Resp, TrueF)):
        return f
    if isinstance(f, (Not, Poss)):
        return type(f)(_to_transaction(f.body, kinds))
    if isinstance(f, (And, Or, Serial)):
        return type(f)(_to_transaction(f.left, kinds), _to_transaction(f.right, kinds))
    raise ParseError(f"unsupported node {f!r}")


def _fill_primitive_kinds(kinds: dict, formulas) -> None:
    for f in formulas:
        for g in subformulas(f):
            if isinstance(g, TAtom):
                kinds.setdefault(g.atom.key, Kind.PRIMITIVE)


def parse(text: str) -> Program:
    raw, decls = _Parser(text).program()
    kinds = _collect_kinds(raw, decls)
    rules: list[Rule] = []
    for head, hk, body in raw:
        if hk is HeadKind.EVENT:
            if head.is_update:
                raise ParseError(f"o({head}) is an oracle occurrence and cannot be a rule head")
            if body is None:
                raise ParseError(f"event fact o({head}) needs a body")
            rules.append(Rule(head, hk, _to_event(body, kinds)))
        else:
            rules.append(Rule(head, hk, _to_transaction(body if body is not None else TrueF(), kinds)))
    _fill_primitive_kinds(kinds, [r.body for r in rules])
    return Program(rules, kinds, set(decls))


def parse_goal(text: str, program: Program) -> Formula:
    p = _Parser(text)
    f = p.body()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after goal")
    kinds = dict(program.kinds)
    for key, kind in _collect_kinds([], set(), [f]).items():
        if kinds.setdefault(key, kind) is not kind:
            raise KindConflict(f"{key[0]}/{key[1]} is a {kinds[key].value} in the program but used as {kind.value}")
    return _to_transaction(f, kinds)


def parse_event_formula(text: str, program: Program | None = None) -> Formula:
    p = _Parser(text)
    f = p.body()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after formula")
    return _to_event(f, program.kinds if program else {})


def parse_atom(text: str) -> Atom:
    p = _Parser(text.strip())
    a = p.atom()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after atom")
    return a


def parse_label(text: str) -> Atom:
    """Labels are written ``o(atom)``; a bare atom is accepted too."""
    text = text.strip()
    m = re.fullmatch(r"o\((.*)\)", text)
    return parse_atom(m.group(1) if m else text)


def parse_state(text: str) -> frozenset[Atom]:
    """One ground atom per line; ``#`` starts a comment."""
    atoms = set()
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip().rstrip(".")
        if not line:
            continue
        try:
            a = parse_atom(line)
        except ParseError as e:
            raise ParseError(f"state line {n}: {e}") from None
        if a.is_update or not a.is_ground():
            raise ParseError(f"state line {n}: {line!r} is not a ground fact")
        atoms.add(a)
    return frozenset(atoms)


# -- printing ---------------------------------------------------------------


def format_formula(f: Formula) -> str:
    if isinstance(f, Occ):
        return f"o({f.subject})"
    if isinstance(f, Resp):
        return f"r({f.subject})"
    if isinstance(f, TAtom):
        return str(f.atom)
    if isinstance(f, Trigger):
        return str(f.event)
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, PathAny):
        return "path"
    if isinstance(f, Poss):
        return f"poss({format_formula(f.body)})"
    if isinstance(f, Not):
        return f"~{_wrap(f.body)}"
    sym = {And: "&", Or: "|", Serial: "*"}[type(f)]
    return f"{_wrap(f.left)} {sym} {_wrap(f.right)}"


def _wrap(f: Formula) -> str:
    s = format_formula(f)
    return f"({s})" if isinstance(f, (And, Or, Serial)) else s


def format_rule(rule: Rule) -> str:
    head = {
        HeadKind.TRANSACTION: str(rule.head),
        HeadKind.RESPONSE: f"r({rule.head})",
        HeadKind.EVENT: f"o({rule.head})",
    }[rule.head_kind]
    return f"{head} <- {format_formula(rule.body)}."


def format_program(program: Program) -> str:
    lines = [
        f"#event {name}/{arity}."
        for (name, arity), kind in sorted(program.kinds.items())
        if kind is Kind.EVENT
    ]
    lines += [format_rule(r) for r in program.rules]
    return "\n".join(lines) + "\n"
