"""Expression language for Lagrangians and force components.

Sources are plain arithmetic over coordinates ``x1..xn``, ``y1..yn`` and
named parameters, e.g. ``"(1 + x1^2)*y1^2 + y2^2"``.  Parsed trees are
immutable and evaluate over any numeric tower (floats, dual numbers,
jets) with identical value parts, so one definition serves plain
evaluation, directional derivatives, and full jet propagation.

Grammar (EBNF, also in docs/grammar.md)::

    expr    = term { ("+" | "-") term } ;
    term    = factor { ("*" | "/") factor } ;
    factor  = "-" factor | power ;
    power   = atom [ "^" factor ] ;            (right-associative)
    atom    = NUMBER | variable | parameter
            | function "(" expr { "," expr } ")"
            | "(" expr ")" ;
    variable  = ("x" | "y") INDEX ;             (1-based, INDEX <= n)
    function  = "sqrt" | "sin" | "cos" | "tan" | "exp" | "log" | "pow" ;

Only smooth primitives are provided; absolute values, minima and signs
would silently break every derivative-based identity downstream.
Non-integer exponents require a positive base at evaluation time, while
integer exponents multiply out and stay smooth through zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import (
    ArityError,
    DomainError,
    ParseError,
    UnboundParameter,
    VariableIndexError,
)
from .jets import apply_function, power
from .phase import PhasePoint, ScalarField, VerticalField

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Param",
    "Neg",
    "Bin",
    "Call",
    "SystemConfig",
    "parse",
    "evaluate",
    "eval_expr",
    "to_source",
    "bind_scalar",
    "bind_vertical",
    "parameter_names",
]


# ---------------------------------------------------------------------------
# syntax tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x" or "y"
    index: int  # 1-based


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, Param, Neg, Bin, Call]

_FUNCTIONS = {"sqrt": 1, "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1, "pow": 2}
_VAR_RE = re.compile(r"^([xy])([1-9][0-9]*)$")
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.tokens = []  # (kind, text, offset)
        pos = 0
        while pos < len(source):
            m = _TOKEN_RE.match(source, pos)
            if m is None or m.end() == pos:
                stripped = source[pos:].lstrip()
                if not stripped:
                    break
                bad = len(source) - len(stripped)
                raise ParseError(f"unexpected character {source[bad]!r}", bad,
                                 expected=("number", "identifier", "operator"))
            if m.group("num") is not None:
                self.tokens.append(("num", m.group("num"), m.start("num")))
            elif m.group("ident") is not None:
                self.tokens.append(("ident", m.group("ident"), m.start("ident")))
            else:
                self.tokens.append(("op", m.group("op"), m.start("op")))
            pos = m.end()
        self.tokens.append(("end", "", len(source)))


class _Parser:
    def __init__(self, source: str, n: int):
        self.n = n
        self.toks = _Tokenizer(source).tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ParseError(f"expected {op!r}", off, expected=(op,))

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {text!r}", off,
                             expected=("end of input",))
        return e

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = Bin(text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = Bin(text, node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Bin("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, text, off = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            nxt_kind, nxt_text, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in _FUNCTIONS:
                    raise ParseError(f"unknown function {text!r}", off,
                                     expected=tuple(sorted(_FUNCTIONS)))
                self.advance()
                args = [self.expr()]
                while True:
                    k, t, _ = self.peek()
                    if k == "op" and t == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != _FUNCTIONS[text]:
                    raise ArityError(
                        f"{text} takes {_FUNCTIONS[text]} argument(s), got {len(args)}"
                    )
                return Call(text, tuple(args))
            m = _VAR_RE.match(text)
            if m:
                index = int(m.group(2))
                if index > self.n:
                    raise VariableIndexError(
                        f"variable {text} exceeds dimension n={self.n}"
                    )
                return Var(m.group(1), index)
            return Param(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        what = text if text else "end of input"
        raise ParseError(f"expected a value, found {what!r}", off,
                         expected=("number", "variable", "parameter", "function", "("))


def parse(source: str, n: int) -> Expr:
    """Parse an expression source for a system of dimension ``n``."""
    if not source or not source.strip():
        raise ParseError("empty expression", 0, expected=("expression",))
    return _Parser(source, n).parse()


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval_expr(e: Expr, xs, ys, params=None):
    """Evaluate over whatever tower the coordinate scalars live in."""
    if isinstance(e, Bin):
        if e.op == "^":
            return power(eval_expr(e.left, xs, ys, params),
                         eval_expr(e.right, xs, ys, params))
        l = eval_expr(e.left, xs, ys, params)
        r = eval_expr(e.right, xs, ys, params)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r
        if e.op == "*":
            return l * r
        # division
        if isinstance(l, (int, float)) and isinstance(r, (int, float)):
            if r == 0.0:
                raise DomainError("division by zero")
            return l / r
        return l / r
    if isinstance(e, Var):
        seq = xs if e.kind == "x" else ys
        return seq[e.index - 1]
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Call):
        if e.name == "pow":
            return power(eval_expr(e.args[0], xs, ys, params),
                         eval_expr(e.args[1], xs, ys, params))
        return apply_function(e.name, eval_expr(e.args[0], xs, ys, params))
    if isinstance(e, Neg):
        return -eval_expr(e.arg, xs, ys, params)
    if isinstance(e, Param):
        if params is None or e.name not in params:
            raise UnboundParameter(e.name)
        return params[e.name]
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, p: PhasePoint, params=None, tower: str = "real", order: int = 3):
    """Evaluate at a phase point in the requested numeric tower.

    ``tower="real"`` returns a float; ``tower="jet"`` returns a jet of the
    given order whose value slot is bit-identical to the real evaluation.
    """
    if tower == "real":
        v = eval_expr(e, p.x, p.y, params)
        return float(v) if isinstance(v, (int, float)) else v
    if tower == "jet":
        from .jets import eval_jet

        n = p.n
        return eval_jet(ScalarField(n, lambda xs, ys: eval_expr(e, xs, ys, params)),
                        p, order)
    raise ValueError(f"unknown tower {tower!r}")


def parameter_names(e: Expr) -> set:
    """Names of all free parameters in an expression."""
    out: set = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Param):
            out.add(node.name)
        elif isinstance(node, Bin):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, Call):
            stack.extend(node.args)
    return out


def bind_scalar(e: Expr, n: int, params=None, source: str | None = None) -> ScalarField:
    """Close an expression over a parameter map as a scalar field."""
    missing = parameter_names(e) - set(params or {})
    if missing:
        raise UnboundParameter(sorted(missing)[0])
    bound = dict(params or {})
    return ScalarField(n, lambda xs, ys: eval_expr(e, xs, ys, bound),
                       source=source if source is not None else to_source(e))


def bind_vertical(exprs, n: int, params=None) -> VerticalField:
    """Close force component expressions over a parameter map."""
    exprs = list(exprs)
    if len(exprs) != n:
        raise ValueError(f"force needs {n} components, got {len(exprs)}")
    for e in exprs:
        missing = parameter_names(e) - set(params or {})
        if missing:
            raise UnboundParameter(sorted(missing)[0])
    bound = dict(params or {})
    return VerticalField(
        n,
        lambda xs, ys: [eval_expr(e, xs, ys, bound) for e in exprs],
        sources=[to_source(e) for e in exprs],
    )


# ---------------------------------------------------------------------------
# pretty printing
# ---------------------------------------------------------------------------

_LEVEL_ADD = 1
_LEVEL_MUL = 2
_LEVEL_NEG = 3
_LEVEL_POW = 4
_LEVEL_ATOM = 5


def _level(e: Expr) -> int:
    if isinstance(e, Bin):
        if e.op in "+-":
            return _LEVEL_ADD
        if e.op in "*/":
            return _LEVEL_MUL
        return _LEVEL_POW
    if isinstance(e, Neg):
        return _LEVEL_NEG
    return _LEVEL_ATOM


def _render(e: Expr, min_level: int) -> str:
    lvl = _level(e)
    if isinstance(e, Num):
        v = e.value
        s = str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)
    elif isinstance(e, Var):
        s = f"{e.kind}{e.index}"
    elif isinstance(e, Param):
        s = e.name
    elif isinstance(e, Neg):
        s = f"-{_render(e.arg, _LEVEL_POW)}"
    elif isinstance(e, Call):
        s = f"{e.name}({', '.join(_render(a, _LEVEL_ADD) for a in e.args)})"
    elif isinstance(e, Bin):
        if e.op == "^":
            s = f"{_render(e.left, _LEVEL_ATOM)}^{_render(e.right, _LEVEL_NEG)}"
        else:
            s = f"{_render(e.left, lvl)} {e.op} {_render(e.right, lvl + 1)}"
    else:
        raise TypeError(f"not an expression node: {e!r}")
    if lvl < min_level:
        return f"({s})"
    return s


def to_source(e: Expr) -> str:
    """Render an expression; reparsing yields a structurally equal tree."""
    return _render(e, _LEVEL_ADD)


# ---------------------------------------------------------------------------
# system configuration
# ---------------------------------------------------------------------------


@dataclass
class SystemConfig:
    """Declarative description of a mechanical system.

    ``lagrangian`` is either an expression source or a builtin id;
    ``force`` is a list of n component sources, a builtin id, or None for
    a free system.  Parameters are late-bound so the same config sweeps
    parameter values without reparsing.
    """

    n: int
    lagrangian: str
    force: list | str | None = None
    params: dict = field(default_factory=dict)
    domain_guard: str | None = None

    def validate(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if isinstance(self.force, list) and len(self.force) != self.n:
            raise ValueError(
                f"force has {len(self.force)} components for dimension {self.n}"
            )
