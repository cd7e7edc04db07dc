"""A small expression language for F^2(z; v).

Grammar (lowest to highest precedence)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" rational)?
    primary := NUMBER | "(" expr ")" | ("z" | "v") "[" index "]"
             | FUNC "(" expr ")" | "pow" "(" expr "," rational ")"
             | "sum_" NAME "(" expr ")" | "norm2z" | "norm2v" | "herm"

``FUNC`` is one of conj, re, im, abs2, sqrt.  ``re`` and ``im`` are not
holomorphic; they are differentiated as (w + conj w)/2 and (w - conj w)/2i.
Indices are 1-based; inside ``sum_i(...)`` the name ``i`` runs over 1..n.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, FinslerError
from .jets import abs2, conj, imag, power, real, sqrt
from .metrics import MetricDefinition, herm, norm2


class DslError(FinslerError):
    """Base class of DSL diagnostics."""


class DslSyntaxError(DslError, SyntaxError):
    def __init__(self, message, line=None, col=None, expected=()):
        self.line, self.col, self.expected = line, col, tuple(expected)
        loc = f" at line {line}, column {col}" if line is not None else ""
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message}{loc}{exp}")
        self.msg = f"{message}{loc}{exp}"

    def __str__(self):
        return self.msg


class DslIndexError(DslError, IndexError):
    def __init__(self, message, span=None):
        self.span = span
        super().__init__(f"{message}" + (f" at line {span[0]}, column {span[1]}" if span else ""))


class ArityError(DslError, TypeError):
    pass


# ---------------------------------------------------------------------------
# AST (spans never take part in equality)

@dataclass(frozen=True)
class Num:
    value: Fraction
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    index: object
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Builtin:
    name: str
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    arg: object
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: Fraction
    span: tuple = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sum:
    var: str
    body: object
    span: tuple = field(default=None, compare=False, repr=False)


FUNCS = ("conj", "re", "im", "abs2", "sqrt")
BUILTINS = ("norm2z", "norm2v", "herm")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\],])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source):
    toks, line, start, pos = [], 1, 0, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {source[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind != "ws":
            toks.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - start + 1))
    return toks


class _Parser:
    def __init__(self, source, n):
        self.toks = tokenize(source)
        self.i = 0
        self.n = n
        self.bound = []

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, expected=()):
        t = self.tok
        raise DslSyntaxError(msg if t.kind != "eof" else "unexpected end of input", t.line, t.col, expected)

    def eat(self, text):
        if self.tok.text != text or self.tok.kind == "eof":
            self.error(f"unexpected {self.tok.text!r}", [repr(text)])
        self.i += 1

    def parse(self):
        node = self.expr()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}", ["operator", "end of input"])
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            t = self.tok
            self.i += 1
            node = BinOp(t.text, node, self.term(), (t.line, t.col))
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            t = self.tok
            self.i += 1
            node = BinOp(t.text, node, self.unary(), (t.line, t.col))
        return node

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text in ("-", "+"):
            self.i += 1
            arg = self.unary()
            return Neg(arg, (t.line, t.col)) if t.text == "-" else arg
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.tok
            self.i += 1
            return Pow(base, self.rational(), (t.line, t.col))
        return base

    def rational(self):
        """A rational literal: [-]NUMBER or [-]NUMBER/NUMBER, optionally parenthesized."""
        paren = self.tok.text == "("
        if paren:
            self.i += 1
        sign = 1
        if self.tok.text == "-":
            sign = -1
            self.i += 1
        if self.tok.kind != "num":
            self.error("exponent must be a rational literal", ["number"])
        val = Fraction(self.tok.text)
        self.i += 1
        if self.tok.text == "/":
            self.i += 1
            if self.tok.kind != "num":
                self.error("exponent must be a rational literal", ["number"])
            den = Fraction(self.tok.text)
            if den == 0:
                self.error("zero denominator in exponent")
            val /= den
            self.i += 1
        if paren:
            self.eat(")")
        return sign * val

    def index(self):
        t = self.tok
        if t.kind == "num":
            if not re.fullmatch(r"\d+", t.text):
                self.error("index must be an integer", ["integer"])
            k = int(t.text)
            if not 1 <= k <= self.n:
                raise DslIndexError(f"index {k} outside 1..{self.n}", (t.line, t.col))
            self.i += 1
            return k
        if t.kind == "name":
            if t.text not in self.bound:
                raise DslIndexError(f"index name {t.text!r} is not bound by an enclosing sum", (t.line, t.col))
            self.i += 1
            return t.text
        self.error(f"unexpected {t.text!r}", ["integer", "sum index"])

    def args(self, fn, t):
        self.eat("(")
        args = [self.expr()]
        while self.tok.text == ",":
            self.i += 1
            if fn == "pow" and len(args) == 1:
                args.append(self.rational())
            else:
                args.append(self.expr())
        if self.tok.kind == "eof" or self.tok.text != ")":
            self.error(f"unexpected {self.tok.text!r}", ["','", "')'"])
        self.i += 1
        want = 2 if fn == "pow" else 1
        if len(args) != want:
            raise ArityError(f"{fn} takes {want} argument(s), got {len(args)} at line {t.line}, column {t.col}")
        return args

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(Fraction(t.text), (t.line, t.col))
        if t.kind == "op" and t.text == "(":
            self.i += 1
            node = self.expr()
            self.eat(")")
            return node
        if t.kind == "name":
            name = t.text
            self.i += 1
            if name in ("z", "v"):
                self.eat("[")
                idx = self.index()
                self.eat("]")
                return Var(name, idx, (t.line, t.col))
            if name in FUNCS:
                (arg,) = self.args(name, t)
                return Call(name, arg, (t.line, t.col))
            if name == "pow":
                base, ex = self.args(name, t)
                return Pow(base, ex, (t.line, t.col))
            if name in BUILTINS:
                return Builtin(name, (t.line, t.col))
            if name.startswith("sum_") and len(name) > 4:
                var = name[4:]
                if var in ("z", "v") or var in FUNCS or var in BUILTINS:
                    self.error(f"reserved name {var!r} cannot be a sum index")
                self.eat("(")
                self.bound.append(var)
                body = self.expr()
                self.bound.pop()
                self.eat(")")
                return Sum(var, body, (t.line, t.col))
            self.i -= 1
            self.error(f"unknown name {name!r}", ["z[i]", "v[i]", *FUNCS, "pow", "sum_i", *BUILTINS])
        self.error(f"unexpected {t.text!r}", ["number", "'('", "name"])


def parse(source, n):
    """Parse DSL source for complex dimension n into an AST."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    return _Parser(source, n).parse()


# ---------------------------------------------------------------------------
# printer

def _num_text(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        with localcontext() as ctx:
            ctx.prec = 200
            return format(Decimal(q.numerator) / Decimal(q.denominator), "f")
    return f"{q.numerator}/{q.denominator}"


def to_source(node):
    """Pretty-print an AST; the output reparses to an equal tree."""
    if isinstance(node, Num):
        txt = _num_text(node.value)
        return txt if "/" not in txt else f"({txt})"
    if isinstance(node, Var):
        return f"{node.name}[{node.index}]"
    if isinstance(node, Builtin):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    if isinstance(node, Pow):
        ex = node.exponent
        return f"pow({to_source(node.base)}, {'-' if ex < 0 else ''}{_num_text(abs(ex))})"
    if isinstance(node, Sum):
        return f"sum_{node.var}({to_source(node.body)})"
    raise TypeError(f"not a DSL node: {node!r}")


# ---------------------------------------------------------------------------
# compiler

def _eval(node, z, v, env):
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Var):
        k = env[node.index] if isinstance(node.index, str) else node.index
        return (z if node.name == "z" else v)[k - 1]
    if isinstance(node, Builtin):
        if node.name == "norm2z":
            return norm2(z)
        if node.name == "norm2v":
            return norm2(v)
        return herm(z, v)
    if isinstance(node, Neg):
        return -_eval(node.arg, z, v, env)
    if isinstance(node, BinOp):
        a, b = _eval(node.left, z, v, env), _eval(node.right, z, v, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Call):
        a = _eval(node.arg, z, v, env)
        return {"conj": conj, "re": real, "im": imag, "abs2": abs2, "sqrt": sqrt}[node.fn](a)
    if isinstance(node, Pow):
        return power(_eval(node.base, z, v, env), node.exponent)
    if isinstance(node, Sum):
        acc = None
        for k in range(1, len(z) + 1):
            val = _eval(node.body, z, v, {**env, node.var: k})
            acc = val if acc is None else acc + val
        return acc
    raise TypeError(f"not a DSL node: {node!r}")


def compile_ast(ast, n, label="dsl"):
    """MetricDefinition whose evaluator walks the AST; the domain is where evaluation succeeds."""

    def ev(z, v):
        return _eval(ast, z, v, {})

    def dom(z, v):
        try:
            with np.errstate(all="ignore"):
                val = np.asarray(ev(list(z), list(v)))
        except (DomainError, ZeroDivisionError):
            return False
        return bool(np.all(np.isfinite(val)))

    return MetricDefinition(n, ev, label, {"n": n, "source": to_source(ast)}, domain=dom)


compile = compile_ast  # noqa: A001  (public name used by the CLI and docs)


_HEADER = re.compile(r"^\s*#\s*n\s*=\s*(\d+)\s*$")


def load_dsl(text, label="dsl"):
    """Parse a DSL document whose header line is ``# n = <dim>``."""
    n = None
    for line in text.splitlines():
        m = _HEADER.match(line)
        if m:
            n = int(m.group(1))
            break
    if n is None:
        raise DslSyntaxError("missing header line '# n = <dim>'", 1, 1)
    return compile_ast(parse(text, n), n, label)


def load_dsl_file(path):
    path = Path(path)
    return load_dsl(path.read_text(encoding="utf-8"), label=f"dsl:{path.name}")
