"""Source-to-target tuple-generating dependencies and their textual form.

A dependency has a body of atoms over the source schema plus optional
comparison conditions, and a head of atoms over the target schema.  Head
variables missing from the body must be declared existential.  Function terms
(``dec_add(b, c)`` or the inverse application ``dec_add^-1(g, c)``) appear only
in heads.

Textual grammar, round-trips exactly::

    R(a,b) AND V(c,d) AND b = c -> T(a,b,d)
    T(a,g) -> EXISTS D,E: R(a,D,E)
    R(a,b,c) AND c = 'Math' -> T1(a,b,c)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .errors import ValidationError
from .model import Constant, Schema, const

COMPARISON_OPS = ("<=", ">=", "<", ">", "=")


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class FunctionTerm:
    function: str
    args: tuple["Term", ...]
    inverse: bool = False


Term = Variable | Constant | FunctionTerm


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise ValidationError(f"unknown comparison operator {self.op!r}")


def _term_vars(term: Term) -> Iterator[str]:
    if isinstance(term, Variable):
        yield term.name
    elif isinstance(term, FunctionTerm):
        for a in term.args:
            yield from _term_vars(a)


@dataclass(frozen=True)
class StTgd:
    body: tuple[Atom, ...]
    head: tuple[Atom, ...]
    conditions: tuple[Comparison, ...] = ()
    existential_vars: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.body or not self.head:
            raise ValidationError("a dependency needs a nonempty body and head")
        body_vars = self.body_vars()
        for atom in self.head:
            for term in atom.terms:
                for v in _term_vars(term):
                    if v not in body_vars and v not in self.existential_vars:
                        raise ValidationError(
                            f"head variable {v!r} is neither bound in the body "
                            f"nor declared existential"
                        )
        for atom in self.body:
            for term in atom.terms:
                if isinstance(term, FunctionTerm):
                    raise ValidationError("function terms may appear only in heads")
        for cond in self.conditions:
            for side in (cond.left, cond.right):
                if isinstance(side, FunctionTerm):
                    raise ValidationError("comparisons may not contain function terms")
                for v in _term_vars(side):
                    if v not in body_vars:
                        raise ValidationError(
                            f"comparison references {v!r}, which is not a body variable"
                        )

    def body_vars(self) -> frozenset[str]:
        return frozenset(
            v for atom in self.body for term in atom.terms for v in _term_vars(term)
        )

    def existential_order(self) -> tuple[str, ...]:
        """Existential variables in order of first appearance in the head."""
        seen: list[str] = []
        for atom in self.head:
            for term in atom.terms:
                for v in _term_vars(term):
                    if v in self.existential_vars and v not in seen:
                        seen.append(v)
        return tuple(seen)

    def function_terms(self) -> Iterator[FunctionTerm]:
        def walk(term: Term) -> Iterator[FunctionTerm]:
            if isinstance(term, FunctionTerm):
                yield term
                for a in term.args:
                    yield from walk(a)

        for atom in self.head:
            for term in atom.terms:
                yield from walk(term)


@dataclass(frozen=True)
class SchemaMapping:
    source: Schema
    target: Schema
    sigma: tuple[StTgd, ...]

    def __post_init__(self):
        for tgd in self.sigma:
            for atom in tgd.body:
                if not self.source.has(atom.relation):
                    raise ValidationError(
                        f"body relation {atom.relation!r} is not in the source schema"
                    )
                if len(atom.terms) != self.source.relation(atom.relation).arity:
                    raise ValidationError(
                        f"atom {atom.relation} has wrong arity in body"
                    )
            for atom in tgd.head:
                if not self.target.has(atom.relation):
                    raise ValidationError(
                        f"head relation {atom.relation!r} is not in the target schema"
                    )
                if len(atom.terms) != self.target.relation(atom.relation).arity:
                    raise ValidationError(
                        f"atom {atom.relation} has wrong arity in head"
                    )


# ---------------------------------------------------------------------------
# printing


def _format_term(term: Term) -> str:
    if isinstance(term, Variable):
        return term.name
    if isinstance(term, Constant):
        if term.kind == "text":
            return "'" + term.lexical.replace("'", "''") + "'"
        return term.lexical
    name = term.function + ("^-1" if term.inverse else "")
    return f"{name}({','.join(_format_term(a) for a in term.args)})"


def _format_atom(atom: Atom) -> str:
    return f"{atom.relation}({','.join(_format_term(t) for t in atom.terms)})"


def format_tgd(tgd: StTgd) -> str:
    body = " AND ".join(
        [_format_atom(a) for a in tgd.body]
        + [f"{_format_term(c.left)} {c.op} {_format_term(c.right)}"
           for c in tgd.conditions]
    )
    head = " AND ".join(_format_atom(a) for a in tgd.head)
    exist = tgd.existential_order()
    prefix = f"EXISTS {','.join(exist)}: " if exist else ""
    return f"{body} -> {prefix}{head}"


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<arrow>->)
      | (?P<op><=|>=|<|>|=)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<comma>,)
      | (?P<colon>:)
      | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
      | (?P<quoted>'(?:[^']|'')*')
      | (?P<ident>[A-Za-z_][A-Za-z_0-9']*(?:\^-1)?)
    )""",
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip():
                    raise ValidationError(f"cannot tokenize dependency near {text[pos:]!r}")
                break
            pos = m.end()
            kind = m.lastgroup
            self.items.append((kind, m.group(kind)))
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self, expected: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ValidationError("unexpected end of dependency text")
        if expected and tok[0] != expected:
            raise ValidationError(f"expected {expected}, got {tok[1]!r}")
        self.pos += 1
        return tok


def _parse_term(tokens: _Tokens) -> Term:
    kind, text = tokens.next()
    if kind == "number":
        return const(text)
    if kind == "quoted":
        return const(text[1:-1].replace("''", "'"))
    if kind == "ident":
        inverse = text.endswith("^-1")
        name = text[:-3] if inverse else text
        nxt = tokens.peek()
        if nxt and nxt[0] == "lpar":
            tokens.next("lpar")
            args: list[Term] = []
            while True:
                args.append(_parse_term(tokens))
                k, _ = tokens.next()
                if k == "rpar":
                    break
                if k != "comma":
                    raise ValidationError("expected ',' or ')' in argument list")
            return FunctionTerm(name, tuple(args), inverse=inverse)
        if inverse:
            raise ValidationError("'^-1' is only valid on a function application")
        return Variable(name)
    raise ValidationError(f"unexpected token {text!r} in term position")


def _parse_conjunct(tokens: _Tokens) -> Atom | Comparison:
    start = tokens.pos
    left = _parse_term(tokens)
    nxt = tokens.peek()
    if nxt and nxt[0] == "op":
        op = tokens.next("op")[1]
        right = _parse_term(tokens)
        return Comparison(left, op, right)
    tokens.pos = start
    kind, name = tokens.next("ident")
    if name.endswith("^-1"):
        raise ValidationError("'^-1' is only valid on a function application")
    tokens.next("lpar")
    terms: list[Term] = []
    nxt = tokens.peek()
    if nxt and nxt[0] == "rpar":
        raise ValidationError(f"atom {name} needs at least one term")
    while True:
        terms.append(_parse_term(tokens))
        k, _ = tokens.next()
        if k == "rpar":
            break
        if k != "comma":
            raise ValidationError("expected ',' or ')' in atom")
    return Atom(name, tuple(terms))


def parse_tgd(text: str) -> StTgd:
    """Parse the textual dependency form; inverse of :func:`format_tgd`."""
    if "->" not in text:
        raise ValidationError(f"dependency text needs '->': {text!r}")
    tokens = _Tokens(text)
    body_atoms: list[Atom] = []
    conditions: list[Comparison] = []
    while True:
        item = _parse_conjunct(tokens)
        if isinstance(item, Atom):
            body_atoms.append(item)
        else:
            conditions.append(item)
        kind, tok = tokens.next()
        if kind == "arrow":
            break
        if not (kind == "ident" and tok == "AND"):
            raise ValidationError(f"expected AND or -> after conjunct, got {tok!r}")
    existential: list[str] = []
    nxt = tokens.peek()
    if nxt and nxt[0] == "ident" and nxt[1] == "EXISTS":
        tokens.next()
        while True:
            existential.append(tokens.next("ident")[1])
            kind, _ = tokens.next()
            if kind == "colon":
                break
            if kind != "comma":
                raise ValidationError("expected ',' or ':' in EXISTS list")
    head_atoms: list[Atom] = []
    while True:
        item = _parse_conjunct(tokens)
        if not isinstance(item, Atom):
            raise ValidationError("comparisons are not allowed in heads")
        head_atoms.append(item)
        nxt = tokens.peek()
        if nxt is None:
            break
        kind, tok = tokens.next()
        if not (kind == "ident" and tok == "AND"):
            raise ValidationError(f"unexpected trailing input {tok!r}")
    return StTgd(
        body=tuple(body_atoms),
        head=tuple(head_atoms),
        conditions=tuple(conditions),
        existential_vars=frozenset(existential),
    )


def variable_names(count: int) -> tuple[str, ...]:
    """Deterministic variable supply: a, b, ..., z, a1, b1, ..."""
    out = []
    letters = "abcdefghijklmnopqrstuvwxyz"
    for i in range(count):
        suffix = i // 26
        out.append(letters[i % 26] + (str(suffix) if suffix else ""))
    return tuple(out)
