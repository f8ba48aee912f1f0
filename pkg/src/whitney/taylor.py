"""Expression front-end and arbitrary-order forward differentiation.

Derivatives are computed by truncated-Taylor (jet) arithmetic, node by
node over a parsed expression tree.  A jet of order k at a point t is
the sequence (f(t), f'(t), ..., f^(k)(t)); internally every operation
runs on Taylor coefficients a_n = f^(n)(t)/n! with the classical
power-series recurrences, so the cost per node is O(k^2) regardless of
expression swell.

The series kernel is type-generic: it only uses ring operations plus,
for the transcendental heads, `math` calls.  Running it on
`fractions.Fraction` inputs gives exact results for +, -, *, /, and
integer powers, which is how the Leibniz-identity tests are made exact.

Sup norms here are sampled estimates (a uniform grid plus a local
refinement pass around the arg-max), never certified sups.  Every
estimate records whether it is the raw lower bound from sampling or an
inflated value, so consumers can pick the conservative side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Expr",
    "Jet",
    "NormEstimate",
    "parse",
    "jet_eval",
    "jet_compose",
    "sup_norm",
    "schwartz_seminorm",
    "jet_add",
    "jet_sub",
    "jet_scale",
    "jet_mul",
    "jet_div",
]

_FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


# ---------------------------------------------------------------------------
# Truncated power-series kernel.  Series are plain lists of length k+1.
# ---------------------------------------------------------------------------

def _ts_const(value, k):
    out = [value * 0] * (k + 1) if not isinstance(value, float) else [0.0] * (k + 1)
    out[0] = value
    return out


def _ts_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _ts_sub(a, b):
    return [x - y for x, y in zip(a, b)]


def _ts_neg(a):
    return [-x for x in a]


def _ts_mul(a, b):
    k = len(a) - 1
    return [sum(a[i] * b[n - i] for i in range(n + 1)) for n in range(k + 1)]


def _ts_div(a, b):
    if b[0] == 0:
        raise DomainError("division by a function vanishing at the expansion point")
    k = len(a) - 1
    q = [a[0] / b[0]]
    for n in range(1, k + 1):
        acc = a[n]
        for i in range(1, n + 1):
            acc = acc - b[i] * q[n - i]
        q.append(acc / b[0])
    return q


def _ts_exp(a):
    k = len(a) - 1
    e = [math.exp(a[0])]
    for n in range(1, k + 1):
        e.append(sum(i * a[i] * e[n - i] for i in range(1, n + 1)) / n)
    return e


def _ts_log(a):
    if a[0] <= 0:
        raise DomainError("log of a non-positive value")
    k = len(a) - 1
    l = [math.log(a[0])]
    for n in range(1, k + 1):
        acc = a[n]
        if n > 1:
            acc -= sum(i * l[i] * a[n - i] for i in range(1, n)) / n
        l.append(acc / a[0])
    return l


def _ts_sincos(a):
    k = len(a) - 1
    s = [math.sin(a[0])]
    c = [math.cos(a[0])]
    for n in range(1, k + 1):
        s.append(sum(i * a[i] * c[n - i] for i in range(1, n + 1)) / n)
        c.append(-sum(i * a[i] * s[n - i] for i in range(1, n + 1)) / n)
    return s, c


def _ts_sqrt(a):
    if a[0] <= 0:
        raise DomainError("sqrt of a non-positive value")
    k = len(a) - 1
    r = [math.sqrt(a[0])]
    for n in range(1, k + 1):
        acc = a[n] - sum(r[i] * r[n - i] for i in range(1, n))
        r.append(acc / (2 * r[0]))
    return r


def _ts_powi(a, p: int):
    k = len(a) - 1
    if p == 0:
        return _ts_const(a[0] * 0 + 1, k) if not isinstance(a[0], float) else _ts_const(1.0, k)
    if p < 0:
        one = _ts_const(1.0, k) if isinstance(a[0], float) else _ts_const(a[0] * 0 + 1, k)
        return _ts_powi(_ts_div(one, a), -p)
    out = None
    base = a
    while p:
        if p & 1:
            out = base if out is None else _ts_mul(out, base)
        p >>= 1
        if p:
            base = _ts_mul(base, base)
    return out


def _ts_compose(outer, inner):
    """Series of g(f(t)) from the series of g around f(t) and of f around t."""
    k = len(outer) - 1
    shifted = list(inner)
    shifted[0] = inner[0] * 0
    acc = _ts_const(outer[k], k) if not isinstance(outer[k], float) else _ts_const(float(outer[k]), k)
    for i in range(k - 1, -1, -1):
        acc = _ts_mul(acc, shifted)
        acc[0] = acc[0] + outer[i]
    return acc


_FACTORIALS = [math.factorial(i) for i in range(130)]


def _fact(n: int):
    while n >= len(_FACTORIALS):
        _FACTORIALS.append(_FACTORIALS[-1] * len(_FACTORIALS))
    return _FACTORIALS[n]


# ---------------------------------------------------------------------------
# Jets: derivative sequences in natural units.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet:
    """Derivatives (f(t), f'(t), ..., f^(k)(t)) at `point`, natural units."""

    point: float
    coeffs: tuple

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def entry(self, n: int):
        return self.coeffs[n]

    def taylor(self) -> list:
        return [c / _fact(n) for n, c in enumerate(self.coeffs)]

    @staticmethod
    def from_taylor(point, series) -> "Jet":
        return Jet(point, tuple(c * _fact(n) for n, c in enumerate(series)))

    @staticmethod
    def zero(point, k: int) -> "Jet":
        return Jet(point, (0.0,) * (k + 1))

    @staticmethod
    def constant(point, value, k: int) -> "Jet":
        return Jet(point, (value,) + (0.0,) * k)


def jet_add(a: Jet, b: Jet) -> Jet:
    return Jet(a.point, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))


def jet_sub(a: Jet, b: Jet) -> Jet:
    return Jet(a.point, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))


def jet_scale(a: Jet, c) -> Jet:
    return Jet(a.point, tuple(c * x for x in a.coeffs))


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Leibniz product: entry n is the binomial convolution of the factors."""
    k = min(a.order, b.order)
    out = []
    for n in range(k + 1):
        out.append(sum(math.comb(n, i) * a.coeffs[i] * b.coeffs[n - i] for i in range(n + 1)))
    return Jet(a.point, tuple(out))


def jet_div(a: Jet, b: Jet) -> Jet:
    k = min(a.order, b.order)
    q = _ts_div(a.taylor()[: k + 1], b.taylor()[: k + 1])
    return Jet.from_taylor(a.point, q)


def jet_compose(g_jet: Jet, f_jet: Jet) -> Jet:
    """Jet of g∘f at f_jet.point from the jet of g at f(t).

    Used as the independent composition route against the explicit
    higher-order chain rule in `combinatorics.faa_di_bruno`.
    """
    k = min(g_jet.order, f_jet.order)
    series = _ts_compose(g_jet.taylor()[: k + 1], f_jet.taylor()[: k + 1])
    return Jet.from_taylor(f_jet.point, series)


# ---------------------------------------------------------------------------
# Expression trees.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Parsed C^inf expression in the single variable t.

    `domain` is the declared validity interval; jet evaluation refuses
    points outside it, and division/log/sqrt raise DomainError when the
    point makes them singular.
    """

    node: tuple
    source: str
    domain: tuple = (-math.inf, math.inf)

    def __call__(self, t: float) -> float:
        return jet_eval(self, t, 0).coeffs[0]

    def jet(self, t: float, k: int) -> Jet:
        return jet_eval(self, t, k)

    def substitute(self, inner: "Expr") -> "Expr":
        """Replace the variable by another expression (textual composition)."""
        def sub(node):
            kind = node[0]
            if kind == "var":
                return inner.node
            if kind == "const":
                return node
            if kind in ("add", "sub", "mul", "div"):
                return (kind, sub(node[1]), sub(node[2]))
            if kind == "pow":
                return (kind, sub(node[1]), node[2])
            if kind == "func":
                return (kind, node[1], sub(node[2]))
            raise ValueError(f"unknown node {kind!r}")

        return Expr(sub(self.node), f"({self.source})∘({inner.source})", self.domain)


class _Parser:
    """Recursive-descent parser for

        expr   := ('-')? term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := base ('^' integer)?
        base   := number | 't' | func '(' expr ')' | '(' expr ')'

    with func in {exp, log, sin, cos, sqrt}.  Whitespace-insensitive,
    standard precedence, left associativity.
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self):
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input")
        return node

    def expr(self):
        if self.peek() == "-":
            self.pos += 1
            node = ("sub", ("const", 0.0), self.term())
        else:
            node = self.term()
        while self.peek() in "+-":
            op = self.peek()
            self.pos += 1
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() in "*/":
            op = self.peek()
            self.pos += 1
            rhs = self.factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def factor(self):
        node = self.base()
        if self.peek() == "^":
            self.pos += 1
            node = ("pow", node, self.integer())
        return node

    def integer(self):
        self.skip_ws()
        start = self.pos
        if self.peek() in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or not self.text[start:self.pos].lstrip("+-"):
            self.error("expected an integer exponent")
        return int(self.text[start:self.pos])

    def base(self):
        ch = self.peek()
        if ch == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        if ch.isdigit() or ch == ".":
            return ("const", self.number())
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isalnum():
                self.pos += 1
            name = self.text[start:self.pos]
            if name == "t":
                return ("var",)
            if name in _FUNCTIONS:
                self.take("(")
                node = self.expr()
                self.take(")")
                return ("func", name, node)
            self.pos = start
            self.error(f"unknown identifier {name!r}")
        self.error("expected a number, 't', a function call, or '('")

    def number(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos].isdigit():
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark
        try:
            return float(self.text[start:self.pos])
        except ValueError:
            self.pos = start
            self.error("malformed number")


def parse(text: str, domain: tuple = (-math.inf, math.inf)) -> Expr:
    """Parse an expression string; raises ParseError with the offset."""
    return Expr(_Parser(text).parse(), text, domain)


def _eval_node(node, var_series):
    kind = node[0]
    if kind == "const":
        return _ts_const(float(node[1]), len(var_series) - 1)
    if kind == "var":
        return list(var_series)
    if kind == "add":
        return _ts_add(_eval_node(node[1], var_series), _eval_node(node[2], var_series))
    if kind == "sub":
        return _ts_sub(_eval_node(node[1], var_series), _eval_node(node[2], var_series))
    if kind == "mul":
        return _ts_mul(_eval_node(node[1], var_series), _eval_node(node[2], var_series))
    if kind == "div":
        return _ts_div(_eval_node(node[1], var_series), _eval_node(node[2], var_series))
    if kind == "pow":
        return _ts_powi(_eval_node(node[1], var_series), node[2])
    if kind == "func":
        arg = _eval_node(node[2], var_series)
        if node[1] == "exp":
            return _ts_exp(arg)
        if node[1] == "log":
            return _ts_log(arg)
        if node[1] == "sin":
            return _ts_sincos(arg)[0]
        if node[1] == "cos":
            return _ts_sincos(arg)[1]
        if node[1] == "sqrt":
            return _ts_sqrt(arg)
    raise ValueError(f"unknown node {kind!r}")


def jet_eval(e: Expr, t: float, k: int) -> Jet:
    """Jet of order k of the expression at t.  Entry n is f^(n)(t)."""
    lo, hi = e.domain
    if not (lo <= t <= hi):
        raise DomainError(f"point {t} outside declared domain [{lo}, {hi}]")
    var = [0.0] * (k + 1)
    var[0] = t
    if k >= 1:
        var[1] = 1.0
    series = _eval_node(e.node, var)
    return Jet.from_taylor(t, series)


# ---------------------------------------------------------------------------
# Sampled sup norms.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormEstimate:
    """Sampled estimate of a sup norm.

    `lower_sample` never exceeds the true sup.  When kind == "inflated",
    `value` is lower_sample * inflation (inflation >= 1), the
    conservative number consumed by every certified ledger formula.
    """

    value: float
    kind: str                      # "lower-sample" | "inflated"
    grid: str
    inflation: float
    lower_sample: float

    def __post_init__(self):
        if self.inflation < 1:
            raise DomainError("inflation factor must be >= 1")


def _refine(score: Callable[[float], float], lo: float, hi: float, t0: float, rounds: int = 3):
    """Local refinement around an arg-max candidate: repeated trisection."""
    best_t, best = t0, score(t0)
    for _ in range(rounds):
        grid = np.linspace(lo, hi, 33)
        vals = [score(float(t)) for t in grid]
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_t = vals[i], float(grid[i])
        span = (hi - lo) / 8
        lo, hi = best_t - span, best_t + span
    return best


def _grid_max(score: Callable[[float], float], a: float, b: float, samples: int):
    grid = np.linspace(a, b, samples)
    vals = np.array([score(float(t)) for t in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, samples - 1)]
    if a == b:
        return float(vals[i])
    return max(float(vals[i]), _refine(score, float(lo), float(hi), float(grid[i])))


def sup_norm(e: Expr, interval: tuple, m: int, samples: int = 4097,
             inflation: float = 1.05) -> NormEstimate:
    """Sampled max over `interval` of max_{n<=m} |f^(n)|, with inflation.

    The grid is uniform with a local refinement pass around the arg-max;
    the lower-sample value is therefore a true lower bound, and the
    inflated value is the declared conservative estimate.
    """
    a, b = interval
    if a > b:
        raise DomainError("empty interval")
    if samples < 2:
        raise DomainError("need at least 2 samples")

    def score(t: float) -> float:
        jet = jet_eval(e, t, m)
        return max(abs(c) for c in jet.coeffs)

    lower = _grid_max(score, a, b, samples)
    return NormEstimate(
        value=lower * inflation,
        kind="inflated",
        grid=f"uniform[{a},{b}]x{samples}+refine",
        inflation=inflation,
        lower_sample=lower,
    )


def schwartz_seminorm(e: Expr, m: int, n: int, window: tuple = (20.0, 4097)) -> NormEstimate:
    """Sampled sup of |t^m f^(n)(t)| over [-T, T].

    The true seminorm is a sup over all of R; a sampled window cannot
    certify it, so the estimate is flagged lower-sample only.
    """
    T, samples = window
    if T <= 0:
        raise DomainError("window half-width must be positive")

    def score(t: float) -> float:
        jet = jet_eval(e, t, n)
        return abs(t) ** m * abs(jet.coeffs[n]) if m else abs(jet.coeffs[n])

    lower = _grid_max(score, -T, T, int(samples))
    return NormEstimate(
        value=lower,
        kind="lower-sample",
        grid=f"uniform[-{T},{T}]x{samples}+refine",
        inflation=1.0,
        lower_sample=lower,
    )
