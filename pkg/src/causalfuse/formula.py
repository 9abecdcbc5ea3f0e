"""Boolean formula AST, text grammar and evaluation.

Grammar (lowest to highest precedence)::

    expr   := xor ('|' xor)*
    xor    := conj ('^' conj)*
    conj   := unary ('&' unary)*
    unary  := '!' unary | atom
    atom   := NAME | '0' | '1' | '(' expr ')'

Binary operators associate to the left.  ``render`` inserts the minimal
parentheses needed so that ``parse_formula(render(f)) == f``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import FormulaSyntaxError, UnboundVariableError

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Xor:
    left: "Formula"
    right: "Formula"


Formula = Union[Var, Const, Not, And, Or, Xor]

TRUE = Const(1)
FALSE = Const(0)

_BINARY = {And: "&", Or: "|", Xor: "^"}
_PRECEDENCE = {Or: 1, Xor: 2, And: 3}
_OPS = {"|": Or, "^": Xor, "&": And}


def is_valid_name(name: str) -> bool:
    return isinstance(name, str) and NAME_RE.fullmatch(name) is not None


# -- lexing / parsing --------------------------------------------------------

def _tokenize(text):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "!&^|()":
            tokens.append((ch, ch, i))
            i += 1
        elif ch in "01" and not (i + 1 < n and (text[i + 1].isalnum() or text[i + 1] == "_")):
            tokens.append(("const", int(ch), i))
            i += 1
        else:
            m = NAME_RE.match(text, i)
            if m is None:
                raise FormulaSyntaxError(f"unknown operator token {ch!r}", text, i)
            tokens.append(("name", m.group(), i))
            i = m.end()
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return FormulaSyntaxError(message, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty formula")
        f = self.binary(1)
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected token {tok[1]!r}")
        return f

    def binary(self, level):
        if level > 3:
            return self.unary()
        op = {1: "|", 2: "^", 3: "&"}[level]
        left = self.binary(level + 1)
        while self.peek()[0] == op:
            self.take()
            right = self.binary(level + 1)
            left = _OPS[op](left, right)
        return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "!":
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self):
        tok = self.take()
        kind = tok[0]
        if kind == "name":
            return Var(tok[1])
        if kind == "const":
            return Const(tok[1])
        if kind == "(":
            inner = self.binary(1)
            close = self.take()
            if close[0] != ")":
                raise self.error("expected ')'", close)
            return inner
        if kind == "end":
            raise self.error("unexpected end of formula", tok)
        raise self.error(f"unexpected token {tok[1]!r}", tok)


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a formula AST.

    >>> parse_formula("BT & !SH")
    And(left=Var(name='BT'), right=Not(arg=Var(name='SH')))
    """
    if not isinstance(text, str):
        raise TypeError(f"formula text must be str, not {type(text).__name__}")
    return _Parser(text).parse()


# -- rendering ---------------------------------------------------------------

def render(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Const):
        return str(f.value)
    if isinstance(f, Not):
        inner = render(f.arg)
        if isinstance(f.arg, (And, Or, Xor)):
            inner = f"({inner})"
        return "!" + inner
    prec = _PRECEDENCE[type(f)]
    left = render(f.left)
    if type(f.left) in _PRECEDENCE and _PRECEDENCE[type(f.left)] < prec:
        left = f"({left})"
    right = render(f.right)
    # right operand at equal precedence needs parens to keep left-association
    if type(f.right) in _PRECEDENCE and _PRECEDENCE[type(f.right)] <= prec:
        right = f"({right})"
    return f"{left} {_BINARY[type(f)]} {right}"


def normalize(text: str) -> str:
    """Canonical spelling of a formula string (parse then render)."""
    return render(parse_formula(text))


# -- evaluation --------------------------------------------------------------

def eval_formula(f: Formula, assignment: Mapping[str, int]) -> int:
    if isinstance(f, Var):
        try:
            return 1 if assignment[f.name] else 0
        except KeyError:
            raise UnboundVariableError(f.name) from None
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return 1 - eval_formula(f.arg, assignment)
    a = eval_formula(f.left, assignment)
    b = eval_formula(f.right, assignment)
    if isinstance(f, And):
        return a & b
    if isinstance(f, Or):
        return a | b
    return a ^ b


def formula_vars(f: Formula) -> frozenset:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.name)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif not isinstance(g, Const):
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(out)


# -- construction helpers ----------------------------------------------------

def conjoin(parts):
    """Left fold with ``&``; an empty sequence is the constant 1."""
    return _fold(And, parts, TRUE)


def disjoin(parts):
    return _fold(Or, parts, FALSE)


def exclusive(parts):
    """Left fold with ``^`` (odd parity)."""
    return _fold(Xor, parts, FALSE)


def _fold(op, parts, empty):
    parts = list(parts)
    if not parts:
        return empty
    acc = parts[0]
    for p in parts[1:]:
        acc = op(acc, p)
    return acc


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Replace variables by formulas (names absent from ``mapping`` stay)."""
    if isinstance(f, Var):
        return mapping.get(f.name, f)
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.arg, mapping))
    return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))


def rename(f: Formula, names: Mapping[str, str]) -> Formula:
    return substitute(f, {old: Var(new) for old, new in names.items()})


def fold_constants(f: Formula) -> Formula:
    """Propagate constants through the AST; no other simplification."""
    if isinstance(f, (Var, Const)):
        return f
    if isinstance(f, Not):
        a = fold_constants(f.arg)
        if isinstance(a, Const):
            return Const(1 - a.value)
        return Not(a)
    a = fold_constants(f.left)
    b = fold_constants(f.right)
    ca = a.value if isinstance(a, Const) else None
    cb = b.value if isinstance(b, Const) else None
    if ca is not None and cb is not None:
        return Const(eval_formula(type(f)(a, b), {}))
    if isinstance(f, And):
        if ca == 0 or cb == 0:
            return FALSE
        if ca == 1:
            return b
        if cb == 1:
            return a
    elif isinstance(f, Or):
        if ca == 1 or cb == 1:
            return TRUE
        if ca == 0:
            return b
        if cb == 0:
            return a
    else:
        if ca is not None:
            return b if ca == 0 else Not(b)
        if cb is not None:
            return a if cb == 0 else Not(a)
    return type(f)(a, b)


def as_formula(value) -> Formula:
    """Accept either a parsed formula or its text."""
    if isinstance(value, str):
        return parse_formula(value)
    if isinstance(value, (Var, Const, Not, And, Or, Xor)):
        return value
    raise TypeError(f"expected formula or str, got {type(value).__name__}")
