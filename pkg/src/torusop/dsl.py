"""A small expression language for closed-form symbols a_j(x).

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NUMBER 'i' | NAME | NAME '(' expr ')' | '(' expr ')'

Names: ``i`` (imaginary unit), ``pi``, ``x1..xn`` (torus coordinates),
``j1..jn`` (frequency components), ``x`` / ``j`` as aliases of ``x1`` / ``j1``
when n = 1, and user parameters.  ``abs(j)`` is the euclidean norm |j| in
any dimension.  Functions: exp, sin, cos, abs.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}
CONSTANTS = {"i": 1j, "pi": np.pi}


class SpecSyntaxError(ValueError):
    def __init__(self, msg, line, col, source=""):
        self.line, self.col = line, col
        text = f"{msg} at line {line}, column {col}"
        if source:
            src_line = source.splitlines()[line - 1] if source.splitlines() else ""
            text += f"\n  {src_line}\n  {' ' * (col - 1)}^"
        super().__init__(text)


class SpecEvaluationError(ValueError):
    pass


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    line: int
    col: int


@dataclass(frozen=True)
class Num(Node):
    value: complex


@dataclass(frozen=True)
class Name(Node):
    name: str


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


def walk(node):
    yield node
    for child in (getattr(node, "arg", None), getattr(node, "operand", None),
                  getattr(node, "left", None), getattr(node, "right", None)):
        if child is not None:
            yield from walk(child)


# --------------------------------------------------------------------------
# tokenizer / parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise SpecSyntaxError(f"unexpected character {source[pos]!r}", line, col, source)
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            nl = text.count("\n")
            if nl:
                line += nl
                line_start = pos + text.rfind("\n") + 1
        else:
            toks.append(_Tok(kind, text, line, col))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, source, names):
        self.source = source
        self.toks = tokenize(source)
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok):
        raise SpecSyntaxError(msg, tok.line, tok.col, self.source)

    def expect(self, text):
        tok = self.take()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected {tok.text!r}", tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            tok = self.take()
            node = BinOp(tok.line, tok.col, tok.text, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            tok = self.take()
            node = BinOp(tok.line, tok.col, tok.text, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok.text in ("-", "+"):
            self.take()
            return Unary(tok.line, tok.col, tok.text, self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            tok = self.take()
            return BinOp(tok.line, tok.col, "^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            if tok.text.endswith("i"):
                return Num(tok.line, tok.col, 1j * float(tok.text[:-1]))
            return Num(tok.line, tok.col, complex(float(tok.text)))
        if tok.kind == "name":
            if self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    self.error(f"unknown function {tok.text!r}", tok)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(tok.line, tok.col, tok.text, arg)
            if tok.text in FUNCTIONS:
                self.error(f"function {tok.text!r} needs an argument", tok)
            if tok.text not in self.names:
                self.error(f"unknown identifier {tok.text!r}", tok)
            return Name(tok.line, tok.col, tok.text)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.error(f"unexpected {tok.text or 'end of input'!r}", tok)


def allowed_names(n: int, params: Mapping[str, complex] = ()) -> set[str]:
    names = set(CONSTANTS) | set(params)
    names |= {f"x{d}" for d in range(1, n + 1)} | {f"j{d}" for d in range(1, n + 1)}
    names.add("j")
    if n == 1:
        names.add("x")
    return names


@dataclass(frozen=True)
class SymbolSpec:
    """Parsed closed-form symbol: a family name, parameters and an AST."""

    name: str
    source: str
    n: int
    ast: Node
    params: Mapping[str, complex] = field(default_factory=dict)

    def evaluate(self, xs, j) -> np.ndarray:
        return evaluate(self.ast, xs, j, self.params)

    def uses_x(self) -> bool:
        return any(isinstance(nd, Name) and nd.name.startswith("x") for nd in walk(self.ast))


def parse_symbol_spec(source: str, n: int = 1, params: Mapping[str, complex] | None = None,
                      name: str = "custom") -> SymbolSpec:
    """Parse ``source``; unknown identifiers and bad syntax raise :class:`SpecSyntaxError`."""
    params = dict(params or {})
    clash = set(params) & (set(FUNCTIONS) | allowed_names(n))
    if clash:
        raise ValueError(f"parameter names shadow built-ins: {sorted(clash)}")
    ast = _Parser(source, allowed_names(n, params)).parse()
    _check_bare_j(ast, n, source)
    return SymbolSpec(name=name, source=source, n=n, ast=ast, params=params)


def _check_bare_j(node, n, source, inside_abs=False):
    if isinstance(node, Name) and node.name == "j" and n > 1 and not inside_abs:
        raise SpecSyntaxError("bare 'j' is a vector when n > 1; use abs(j) or j1..jn",
                              node.line, node.col, source)
    if isinstance(node, Call):
        _check_bare_j(node.arg, n, source, node.func == "abs" and isinstance(node.arg, Name))
    for child in (getattr(node, "operand", None), getattr(node, "left", None),
                  getattr(node, "right", None)):
        if child is not None:
            _check_bare_j(child, n, source)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def evaluate(node: Node, xs, j, params: Mapping[str, complex] = ()):
    """Evaluate on coordinate arrays ``xs`` (one per dimension) at frequency ``j``."""
    params = dict(params)
    n = len(xs)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _eval(node, xs, tuple(j), params, n)


def _eval(node, xs, j, params, n):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        nm = node.name
        if nm in CONSTANTS:
            return CONSTANTS[nm]
        if nm in params:
            return complex(params[nm])
        if nm == "x":
            return xs[0]
        if nm == "j":
            return float(j[0])
        if nm[0] == "x":
            return xs[int(nm[1:]) - 1]
        if nm[0] == "j":
            return float(j[int(nm[1:]) - 1])
        raise SpecEvaluationError(f"unbound name {nm!r}")
    if isinstance(node, Call):
        if node.func == "abs" and isinstance(node.arg, Name) and node.arg.name == "j":
            return float(np.sqrt(sum(ji * ji for ji in j)))
        arg = _eval(node.arg, xs, j, params, n)
        out = FUNCTIONS[node.func](np.asarray(arg, dtype=complex))
        return out.real if node.func == "abs" else out
    if isinstance(node, Unary):
        v = _eval(node.operand, xs, j, params, n)
        return -v if node.op == "-" else v
    left = _eval(node.left, xs, j, params, n)
    right = _eval(node.right, xs, j, params, n)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return np.asarray(left, dtype=complex) / np.asarray(right, dtype=complex)
    return _power(left, right)


def _power(base, expo):
    b = np.asarray(base, dtype=complex)
    e = np.asarray(expo, dtype=complex)
    if e.ndim == 0 and e.imag == 0 and float(e.real).is_integer():
        k = int(e.real)
        if k >= 0:
            return b ** k
        return 1.0 / b ** (-k)
    return b ** e
