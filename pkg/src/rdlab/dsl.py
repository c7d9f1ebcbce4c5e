"""Reaction-term expressions: parser, printer, evaluator and named families.

Grammar (see ``docs/grammar.ebnf``)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = primary , [ "^" , unary ] ;
    primary = number | name | func , "(" , expr , ")" | "(" , expr , ")" ;

So ``^`` binds tighter than unary minus (``-u^2`` is ``-(u^2)``) and is
right-associative, while ``+ - * /`` associate to the left.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ExpressionSyntaxError,
    MissingParameterError,
    NonFiniteResultError,
    UnboundVariableError,
    UnknownFamilyError,
    UnknownIdentifierError,
)

VARIABLES = ("t", "x", "y", "u", "v")
FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt", "abs")
NAMED_CONSTANTS = {"pi": math.pi}

BINARY_OPS = {"+": "add", "-": "sub", "*": "mul", "/": "div", "^": "pow"}
_SYMBOL = {v: k for k, v in BINARY_OPS.items()}
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


def variables(node):
    """Set of variable names referenced by an AST."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Unary):
        return variables(node.arg)
    if isinstance(node, Binary):
        return variables(node.left) | variables(node.right)
    return set()


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            stripped = rest.lstrip()
            if not stripped:
                tokens.append(("end", None, len(text)))
                return tokens
            offset = len(text) - len(stripped)
            raise ExpressionSyntaxError(f"unexpected character {stripped[0]!r}", offset, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, text, constants, aliases=None):
        self.text = text
        self.constants = constants
        self.aliases = aliases or {}
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, value, offset = self.tok
        found = "end of input" if kind == "end" else repr(value)
        raise ExpressionSyntaxError(f"expected {expected}, found {found}", offset, self.text)

    def expect_op(self, op):
        if self.tok[0] == "op" and self.tok[1] == op:
            return self.advance()
        self.fail(f'"{op}"')

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            self.fail("operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = BINARY_OPS[self.advance()[1]]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = BINARY_OPS[self.advance()[1]]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return Binary("pow", base, self.unary())
        return base

    def primary(self):
        kind, value, offset = self.tok
        if kind == "num":
            self.advance()
            x = float(value)
            if not math.isfinite(x):
                raise ExpressionSyntaxError("numeric literal out of range", offset, self.text)
            return Const(x)
        if kind == "name":
            self.advance()
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Unary(value, arg)
            if value in VARIABLES:
                return Var(value)
            if value in self.aliases:
                return Var(self.aliases[value])
            if value in self.constants:
                return Const(float(self.constants[value]))
            if value in NAMED_CONSTANTS:
                return Const(NAMED_CONSTANTS[value])
            raise UnknownIdentifierError(f"unknown identifier {value!r}", offset, self.text)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail("expression")


def parse(text, constants=None, aliases=None):
    """Parse ``text`` into an immutable AST.

    ``constants`` maps extra identifiers to numbers substituted at parse
    time; ``aliases`` maps extra identifiers onto one of the five variables
    (e.g. ``{"s": "u"}`` for integrands written in ``s``).
    """
    return _Parser(text, constants or {}, aliases).parse()


# -------------------------------------------------------------- printer


def to_text(node):
    """Render an AST so that ``parse(to_text(ast)) == ast``."""
    if isinstance(node, Const):
        s = repr(float(node.value))
        return f"({s})" if node.value < 0 or s.startswith("-") else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + _wrap(node.arg, _PREC["neg"])
        return f"{node.op}({to_text(node.arg)})"
    prec = _PREC[node.op]
    if node.op == "pow":
        # right-assoc: a nested pow on the left must be bracketed
        left = _wrap(node.left, prec + 1)
        right = _wrap(node.right, _PREC["neg"])
    else:
        left = _wrap(node.left, prec)
        right = _wrap(node.right, prec + 1)
    return f"{left} {_SYMBOL[node.op]} {right}"


def _wrap(node, min_prec):
    text = to_text(node)
    if isinstance(node, Binary):
        p = _PREC[node.op]
    elif isinstance(node, Unary) and node.op == "neg":
        p = _PREC["neg"]
    else:
        return text
    return text if p >= min_prec else f"({text})"


# ------------------------------------------------------------ evaluator


def _bad(msg):
    raise NonFiniteResultError(msg)


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        _bad(f"{what} produced a non-finite value")
    return value


def _eval(node, env, strict):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(node.name) from None
    if isinstance(node, Unary):
        a = _eval(node.arg, env, strict)
        op = node.op
        if op == "neg":
            return -a
        if op == "ln":
            if strict and np.any(np.asarray(a) <= 0):
                _bad("ln of a non-positive value")
            r = np.log(a)
        elif op == "sqrt":
            if strict and np.any(np.asarray(a) < 0):
                _bad("sqrt of a negative value")
            r = np.sqrt(a)
        else:
            r = getattr(np, op)(a)
        return _finite(r, op) if strict else r
    a = _eval(node.left, env, strict)
    b = _eval(node.right, env, strict)
    op = node.op
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if strict and np.any(np.asarray(b) == 0):
            _bad("division by zero")
        r = np.true_divide(a, b)
    else:
        if strict:
            base = np.asarray(a)
            expo = np.asarray(b)
            if np.any((base < 0) & (expo != np.round(expo))):
                _bad("negative base raised to a non-integer power")
        r = np.power(np.asarray(a, dtype=float), b)
    return _finite(r, op) if strict else r


def evaluate(node, bindings=None, strict=True, **kw):
    """Evaluate an AST with IEEE doubles.

    Bindings may be floats or numpy arrays (broadcast elementwise). With
    ``strict`` (the default) division by zero, ``ln``/``sqrt`` outside their
    domain, negative bases to non-integer powers and any overflow raise
    :class:`NonFiniteResultError`. ``strict=False`` returns raw IEEE values.
    """
    env = dict(bindings or {})
    env.update(kw)
    with np.errstate(all="ignore"):
        r = _eval(node, env, strict)
    if np.ndim(r) == 0:
        return float(r)
    return r


# `eval` reads naturally at call sites that mirror the operation list
eval = evaluate  # noqa: A001


# ------------------------------------------------------- reaction specs


@dataclass(frozen=True)
class ReactionSpec:
    """A scalar reaction ``f`` or a system pair ``(f, g)``."""

    kind: str
    exprs: tuple
    params: dict = field(default_factory=dict, compare=False)
    texts: tuple = ()
    name: str = ""
    positivity: bool = True

    def __post_init__(self):
        if self.kind not in ("scalar", "system"):
            raise ValueError(f"unknown reaction kind {self.kind!r}")
        n = 1 if self.kind == "scalar" else 2
        if len(self.exprs) != n:
            raise ValueError(f"{self.kind} reaction needs {n} expression(s)")
        if self.kind == "scalar" and "v" in variables(self.exprs[0]):
            raise ValueError("scalar reaction must not reference v")
        if not self.texts:
            object.__setattr__(self, "texts", tuple(to_text(e) for e in self.exprs))

    @property
    def f(self):
        return self.exprs[0]

    @property
    def g(self):
        return self.exprs[1] if self.kind == "system" else None

    @property
    def is_system(self):
        return self.kind == "system"

    @classmethod
    def scalar(cls, text, params=None, name=""):
        return cls("scalar", (parse(text, params),), dict(params or {}), (text,), name)

    @classmethod
    def pair(cls, f_text, g_text, params=None, name="", positivity=True):
        exprs = (parse(f_text, params), parse(g_text, params))
        return cls("system", exprs, dict(params or {}), (f_text, g_text), name, positivity)

    def to_dict(self):
        d = {"kind": self.kind, "exprs": list(self.texts)}
        if self.name:
            d["builtin"] = self.name
        if self.params:
            d["params"] = dict(self.params)
        return d


def _num(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Family:
    name: str
    kind: str
    templates: tuple
    required: tuple = ()
    positivity: bool = True
    description: str = ""


FAMILIES = {
    fam.name: fam
    for fam in (
        Family("power", "scalar", ("u^{p}",), ("p",),
               description="f = u^p; global for p <= 1, blows up for p > 1"),
        Family("frank_kamenetskii", "system", ("-u*exp(v)", "u*exp(v)"),
               description="-u F(v), u G(v) with F = G = e^v"),
        Family("haraux_youkana", "system", ("-u*exp(v^{gamma})", "u*exp(v^{gamma})"), ("gamma",),
               description="-u F(v), u G(v) with F = G = exp(v^gamma)"),
        Family("robin_lambda", "scalar", ("{lambda}*exp(u)",), ("lambda",),
               description="lambda * e^u, used with a Robin boundary"),
        Family("mass_control_pair", "system", ("-u*v", "u*v"),
               description="f = -uv, g = uv; f + g = 0 exactly"),
        Family("decaying_positive", "scalar", ("exp(-t)*u",),
               description="f = e^{-t} u; positive with integrable growth"),
    )
}


def builtin(name, **params):
    """Instantiate a named reaction family with its parameters substituted."""
    try:
        fam = FAMILIES[name]
    except KeyError:
        raise UnknownFamilyError(f"unknown reaction family {name!r}") from None
    missing = [p for p in fam.required if p not in params]
    if missing:
        raise MissingParameterError(f"{name} requires parameter(s): {', '.join(missing)}")
    subs = {k: _num(v) for k, v in params.items()}
    texts = tuple(t.format(**subs) for t in fam.templates)
    exprs = tuple(parse(t) for t in texts)
    return ReactionSpec(fam.kind, exprs, dict(params), texts, name, fam.positivity)
