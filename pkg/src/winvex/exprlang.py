"""Small arithmetic expression language for user-supplied functions.

Objective functions h, direction maps eta, point maps w, constraints g_i
and composition maps phi are all written in this language.  Grammar
(whitespace insignificant, no implicit multiplication)::

    function  := expr (';' expr)*            multi-output maps use ';'
    expr      := term (('+' | '-') term)*
    term      := factor (('*' | '/') factor)*
    factor    := '-' factor | power
    power     := atom ('^' factor)?          right-associative
    atom      := NUMBER | VARIABLE | '(' expr ')' | call
    call      := NAME '(' expr (',' expr)* ')'
               | 'piecewise' '(' cmp ',' expr ',' expr ')'
    cmp       := expr ('<' | '<=' | '>' | '>=' | '==') expr

Precedence, tightest first: ``^``, unary ``-``, ``* /``, ``+ -``.  All
binary operators associate left except ``^``.  Built-in calls: ``abs``,
``exp``, ``ln`` (one argument), ``min``, ``max`` (two arguments), and
``piecewise(cond, a, b)``.  Comparisons are only legal inside the first
slot of ``piecewise``.

Variables come in two blocks: ``z1..zn`` for the first argument of a map
and ``y1..yn`` for the second argument of a two-point map such as eta.
A function that references both blocks must declare an even arity 2n and
is evaluated on the concatenated vector (z, y).  A function referencing a
single block (either spelling) is an ordinary map on `arity` inputs; in
particular one-point maps may be written in the y spelling (``w = y1 - 7``).

Numerics are IEEE double precision.  Division by zero, ``ln`` of a
non-positive value, ``0 ^ negative`` and ``negative ^ non-integer`` all
evaluate to NaN rather than raising; NaN propagates through every
operator, including ``min``/``max`` and ``piecewise`` conditions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np


class ExprError(ValueError):
    """Base class for expression language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExprNameError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExprArityError(ExprError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    block: str  # 'z' or 'y'
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # '-'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # abs exp ln min max
    args: tuple


@dataclass(frozen=True)
class Piecewise:
    op: str  # < <= > >= ==
    lhs: "Expr"
    rhs: "Expr"
    then: "Expr"
    otherwise: "Expr"


Expr = Union[Num, Var, Unary, Binary, Call, Piecewise]

_FUNCTIONS = {"abs": 1, "exp": 1, "ln": 1, "min": 2, "max": 2}
_VAR_RE = re.compile(r"^([zy])([0-9]+)$")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<NUM>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<CMP><=|>=|==|<|>)
  | (?P<OP>[-+*/^])
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<COMMA>,)
  | (?P<SEMI>;)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("END", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str):
        tok = self.take()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {what}", tok[2])
        return tok

    def parse_outputs(self) -> tuple[Expr, ...]:
        outputs = [self.expr()]
        while self.peek()[0] == "SEMI":
            self.take()
            outputs.append(self.expr())
        tok = self.peek()
        if tok[0] != "END":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return tuple(outputs)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "OP" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "OP" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok[0] == "OP" and tok[1] == "-":
            self.take()
            return Unary("-", self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "OP" and self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        kind, text, offset = tok
        if kind == "NUM":
            return Num(float(text))
        if kind == "LPAREN":
            node = self.expr()
            self.expect("RPAREN", "')'")
            return node
        if kind == "IDENT":
            if text == "piecewise":
                return self.piecewise(offset)
            if text in _FUNCTIONS:
                return self.call(text, offset)
            m = _VAR_RE.match(text)
            if m:
                index = int(m.group(2))
                if index < 1:
                    raise ExprSyntaxError("variable indices start at 1", offset)
                return Var(m.group(1), index)
            raise ExprNameError(f"unknown identifier {text!r}", offset)
        raise ExprSyntaxError(f"unexpected token {text!r}" if text else "unexpected end of input", offset)

    def call(self, fn: str, offset: int) -> Expr:
        self.expect("LPAREN", "'('")
        args = [self.expr()]
        while self.peek()[0] == "COMMA":
            self.take()
            args.append(self.expr())
        self.expect("RPAREN", "')'")
        want = _FUNCTIONS[fn]
        if len(args) != want:
            raise ExprSyntaxError(f"{fn} takes {want} argument(s), got {len(args)}", offset)
        return Call(fn, tuple(args))

    def piecewise(self, offset: int) -> Expr:
        self.expect("LPAREN", "'('")
        lhs = self.expr()
        cmp_tok = self.take()
        if cmp_tok[0] != "CMP":
            raise ExprSyntaxError("piecewise condition must compare two expressions", cmp_tok[2])
        rhs = self.expr()
        self.expect("COMMA", "','")
        then = self.expr()
        self.expect("COMMA", "','")
        otherwise = self.expr()
        self.expect("RPAREN", "')'")
        return Piecewise(cmp_tok[1], lhs, rhs, then, otherwise)


# ---------------------------------------------------------------------------
# Variable layout and compilation
# ---------------------------------------------------------------------------

def _collect_vars(expr: Expr, out: set) -> None:
    if isinstance(expr, Var):
        out.add((expr.block, expr.index))
    elif isinstance(expr, Unary):
        _collect_vars(expr.operand, out)
    elif isinstance(expr, Binary):
        _collect_vars(expr.left, out)
        _collect_vars(expr.right, out)
    elif isinstance(expr, Call):
        for a in expr.args:
            _collect_vars(a, out)
    elif isinstance(expr, Piecewise):
        for a in (expr.lhs, expr.rhs, expr.then, expr.otherwise):
            _collect_vars(a, out)


def _layout_slots(variables: set, arity: int) -> tuple[dict, bool]:
    """Map (block, index) pairs to input slots for the declared arity."""
    max_z = max((i for b, i in variables if b == "z"), default=0)
    max_y = max((i for b, i in variables if b == "y"), default=0)
    if max_z and max_y:
        if arity % 2 != 0:
            raise ExprArityError(
                f"two-point map must declare an even arity, got {arity}")
        n = arity // 2
        if max_z > n or max_y > n:
            raise ExprArityError(
                f"variable index exceeds block size {n} of a two-point map with arity {arity}")
        slots = {("z", i): i - 1 for i in range(1, n + 1)}
        slots.update({("y", i): n + i - 1 for i in range(1, n + 1)})
        return slots, True
    if max_y:
        if max_y > arity:
            raise ExprArityError(f"variable y{max_y} exceeds declared arity {arity}")
        return {("y", i): i - 1 for i in range(1, arity + 1)}, False
    if max_z > arity:
        raise ExprArityError(f"variable z{max_z} exceeds declared arity {arity}")
    return {("z", i): i - 1 for i in range(1, arity + 1)}, False


_NAN = np.nan

_CMP_FNS = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
    "==": np.equal,
}


def _safe_div(a, b):
    out = np.divide(a, b)
    return np.where(np.asarray(b) == 0.0, _NAN, out)


def _safe_pow(a, b):
    out = np.power(a, b)
    bad = (np.asarray(a) == 0.0) & (np.asarray(b) < 0.0)
    return np.where(bad, _NAN, out)


def _safe_ln(a):
    a = np.asarray(a, dtype=np.float64)
    ok = a > 0.0
    return np.where(ok, np.log(np.where(ok, a, 1.0)), _NAN)


def _compile(expr: Expr, slots: dict) -> Callable[[np.ndarray], np.ndarray]:
    """Compile one AST into a vectorized evaluator over (k, arity) arrays."""
    if isinstance(expr, Num):
        v = float(expr.value)
        return lambda X: v
    if isinstance(expr, Var):
        j = slots[(expr.block, expr.index)]
        return lambda X: X[:, j]
    if isinstance(expr, Unary):
        f = _compile(expr.operand, slots)
        return lambda X: np.negative(f(X))
    if isinstance(expr, Binary):
        fl = _compile(expr.left, slots)
        fr = _compile(expr.right, slots)
        if expr.op == "+":
            return lambda X: np.add(fl(X), fr(X))
        if expr.op == "-":
            return lambda X: np.subtract(fl(X), fr(X))
        if expr.op == "*":
            return lambda X: np.multiply(fl(X), fr(X))
        if expr.op == "/":
            return lambda X: _safe_div(fl(X), fr(X))
        if expr.op == "^":
            return lambda X: _safe_pow(fl(X), fr(X))
        raise AssertionError(expr.op)
    if isinstance(expr, Call):
        fns = [_compile(a, slots) for a in expr.args]
        if expr.fn == "abs":
            f0 = fns[0]
            return lambda X: np.abs(f0(X))
        if expr.fn == "exp":
            f0 = fns[0]
            return lambda X: np.exp(f0(X))
        if expr.fn == "ln":
            f0 = fns[0]
            return lambda X: _safe_ln(f0(X))
        if expr.fn == "min":
            f0, f1 = fns
            return lambda X: np.minimum(f0(X), f1(X))
        if expr.fn == "max":
            f0, f1 = fns
            return lambda X: np.maximum(f0(X), f1(X))
        raise AssertionError(expr.fn)
    if isinstance(expr, Piecewise):
        fl = _compile(expr.lhs, slots)
        fr = _compile(expr.rhs, slots)
        ft = _compile(expr.then, slots)
        fo = _compile(expr.otherwise, slots)
        cmp_fn = _CMP_FNS[expr.op]

        def run(X):
            l = np.asarray(fl(X), dtype=np.float64)
            r = np.asarray(fr(X), dtype=np.float64)
            bad = np.isnan(l) | np.isnan(r)
            return np.where(bad, _NAN, np.where(cmp_fn(l, r), ft(X), fo(X)))

        return run
    raise AssertionError(type(expr))


# ---------------------------------------------------------------------------
# FunctionDef
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionDef:
    """A parsed function: `arity` input slots, one or more output expressions.

    Immutable after construction; evaluation is stateless and thread-safe.
    """

    name: str = field(compare=False)
    arity: int
    outputs: tuple
    two_point: bool = field(default=False, compare=False)
    _compiled: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.arity < 0:
            raise ExprArityError(f"arity must be non-negative, got {self.arity}")
        variables: set = set()
        for out in self.outputs:
            _collect_vars(out, variables)
        slots, two_point = _layout_slots(variables, self.arity)
        compiled = tuple(_compile(out, slots) for out in self.outputs)
        object.__setattr__(self, "two_point", two_point)
        object.__setattr__(self, "_compiled", compiled)

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate on a (k, arity) array of points; returns (k, n_outputs)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.arity:
            raise ExprArityError(
                f"{self.name}: expected points of length {self.arity}, got shape {X.shape}")
        k = X.shape[0]
        with np.errstate(all="ignore"):
            cols = []
            for fn in self._compiled:
                c = np.asarray(fn(X), dtype=np.float64)
                if c.ndim == 0:
                    c = np.full(k, float(c))
                cols.append(c)
        return np.stack(cols, axis=1)

    def eval(self, point: Sequence[float]) -> tuple[float, ...]:
        point = np.asarray(point, dtype=np.float64).reshape(-1)
        if point.shape[0] != self.arity:
            raise ExprArityError(
                f"{self.name}: expected {self.arity} coordinates, got {point.shape[0]}")
        row = self.eval_many(point.reshape(1, -1))[0]
        return tuple(float(v) for v in row)

    def eval1(self, point: Sequence[float]) -> float:
        if self.n_outputs != 1:
            raise ExprArityError(f"{self.name} has {self.n_outputs} outputs, expected scalar")
        return self.eval(point)[0]


def parse(text: str, arity: int, name: str = "f") -> FunctionDef:
    """Parse `text` into a FunctionDef with the declared arity.

    Raises ExprSyntaxError / ExprNameError (both carry the character
    offset) or ExprArityError when a variable index exceeds the arity.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    outputs = _Parser(text).parse_outputs()
    return FunctionDef(name=name, arity=int(arity), outputs=outputs)


def identity_map(n: int, name: str = "identity") -> FunctionDef:
    """The identity map on R^n, used for the classical (w-free) checks."""
    return FunctionDef(name=name, arity=n, outputs=tuple(Var("z", i) for i in range(1, n + 1)))


def substitute(expr: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions; mapping keys are (block, index)."""
    if isinstance(expr, Num):
        return expr
    if isinstance(expr, Var):
        return mapping.get((expr.block, expr.index), expr)
    if isinstance(expr, Unary):
        return Unary(expr.op, substitute(expr.operand, mapping))
    if isinstance(expr, Binary):
        return Binary(expr.op, substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Call):
        return Call(expr.fn, tuple(substitute(a, mapping) for a in expr.args))
    if isinstance(expr, Piecewise):
        return Piecewise(
            expr.op,
            substitute(expr.lhs, mapping),
            substitute(expr.rhs, mapping),
            substitute(expr.then, mapping),
            substitute(expr.otherwise, mapping),
        )
    raise AssertionError(type(expr))


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(expr: Expr) -> int:
    if isinstance(expr, Binary):
        if expr.op in "+-":
            return _PREC_ADD
        if expr.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(expr, Unary):
        return _PREC_NEG
    return _PREC_ATOM


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _pp(expr: Expr) -> str:
    if isinstance(expr, Num):
        return _fmt_num(expr.value)
    if isinstance(expr, Var):
        return f"{expr.block}{expr.index}"
    if isinstance(expr, Unary):
        inner = _pp(expr.operand)
        if _prec(expr.operand) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, Binary):
        my = _prec(expr)
        left, right = _pp(expr.left), _pp(expr.right)
        lp, rp = _prec(expr.left), _prec(expr.right)
        if expr.op == "^":
            if lp <= my:
                left = f"({left})"
            if rp < my:
                right = f"({right})"
        else:
            if lp < my:
                left = f"({left})"
            if rp <= my:
                right = f"({right})"
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Call):
        return f"{expr.fn}({', '.join(_pp(a) for a in expr.args)})"
    if isinstance(expr, Piecewise):
        return (f"piecewise({_pp(expr.lhs)} {expr.op} {_pp(expr.rhs)}, "
                f"{_pp(expr.then)}, {_pp(expr.otherwise)})")
    raise AssertionError(type(expr))


def pretty_print(f: FunctionDef) -> str:
    """Render a FunctionDef back to source; reparsing gives an equal AST."""
    return "; ".join(_pp(out) for out in f.outputs)
