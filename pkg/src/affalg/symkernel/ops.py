"""Differentiation, substitution and numeric evaluation of expressions."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from ..errors import EvaluationError, UnknownVariable
from .nodes import Add, Const, Div, Expr, Func, Mul, Pow, Var, lift
from .simplify import simplify


@lru_cache(maxsize=None)
def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, (Add, Mul)):
        out = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    if isinstance(e, Div):
        return free_vars(e.num) | free_vars(e.den)
    if isinstance(e, Pow):
        return free_vars(e.base)
    if isinstance(e, Func):
        return free_vars(e.arg)
    raise TypeError(e)


def _d(e: Expr, v: str) -> Expr:
    if v not in free_vars(e):
        return Const(0)
    if isinstance(e, Var):
        return Const(1)
    if isinstance(e, Add):
        return Add(tuple(_d(a, v) for a in e.args))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = _d(a, v)
            if da.is_zero_literal:
                continue
            terms.append(Mul(e.args[:i] + (da,) + e.args[i + 1:]))
        return Add(tuple(terms))
    if isinstance(e, Div):
        return Div(Add((Mul((_d(e.num, v), e.den)), Mul((Const(-1), e.num, _d(e.den, v))))), Pow(e.den, 2))
    if isinstance(e, Pow):
        return Mul((Const(e.exp), Pow(e.base, e.exp - 1), _d(e.base, v)))
    if isinstance(e, Func):
        u, du = e.arg, _d(e.arg, v)
        outer = {
            "sin": lambda: Func("cos", u),
            "cos": lambda: Mul((Const(-1), Func("sin", u))),
            "tan": lambda: Pow(Func("cos", u), -2),
            "exp": lambda: e,
            "log": lambda: Pow(u, -1),
            "sqrt": lambda: Mul((Const(Fraction(1, 2)), Pow(u, Fraction(-1, 2)))),
        }[e.name]()
        return Mul((outer, du))
    raise TypeError(e)


@lru_cache(maxsize=200_000)
def _diff_cached(e: Expr, v: str) -> Expr:
    return simplify(_d(e, v))


def diff(e: Expr, v, chart=None) -> Expr:
    """Partial derivative of ``e`` with respect to the coordinate ``v``.

    When ``chart`` is given, ``v`` must be one of its coordinates.
    """
    name = v.name if isinstance(v, Var) else str(v)
    if chart is not None and name not in chart:
        raise UnknownVariable(name)
    return _diff_cached(lift(e), name)


def substitute(e: Expr, mapping: Mapping[str, object]) -> Expr:
    """Replace variables by expressions or numbers, then simplify."""
    repl = {k: lift(v) for k, v in mapping.items()}
    return simplify(_subs(lift(e), tuple(sorted(repl.items(), key=lambda kv: kv[0]))))


@lru_cache(maxsize=100_000)
def _subs(e, repl):
    table = dict(repl)
    if not (free_vars(e) & table.keys()):
        return e
    if isinstance(e, Var):
        return table[e.name]
    if isinstance(e, Add):
        return Add(tuple(_subs(a, repl) for a in e.args))
    if isinstance(e, Mul):
        return Mul(tuple(_subs(a, repl) for a in e.args))
    if isinstance(e, Div):
        return Div(_subs(e.num, repl), _subs(e.den, repl))
    if isinstance(e, Pow):
        return Pow(_subs(e.base, repl), e.exp)
    if isinstance(e, Func):
        return Func(e.name, _subs(e.arg, repl))
    return e


# -- numeric evaluation ---------------------------------------------------------

def _dom(msg):
    raise EvaluationError(msg)


def _log(a):
    return math.log(a) if a > 0 else _dom(f"log of non-positive value {a!r}")


def _sqrt(a):
    return math.sqrt(a) if a >= 0 else _dom(f"sqrt of negative value {a!r}")


def _pow(b, p, q):
    """b ** (p/q) over the reals."""
    if q == 1:
        if b == 0 and p < 0:
            _dom("division by zero in negative power")
        return b**p
    if b < 0:
        _dom(f"fractional power of negative value {b!r}")
    if b == 0 and p < 0:
        _dom("division by zero in negative power")
    return b ** (p / q)


def _div(a, b):
    return a / b if b != 0 else _dom("division by zero")


_ENV = {
    "_sin": math.sin, "_cos": math.cos, "_tan": math.tan, "_exp": math.exp,
    "_log": _log, "_sqrt": _sqrt, "_pow": _pow, "_div": _div,
}


def _code(e, names):
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, Var):
        return names[e.name]
    if isinstance(e, Add):
        return "(" + " + ".join(_code(a, names) for a in e.args) + ")" if e.args else "0.0"
    if isinstance(e, Mul):
        return "(" + " * ".join(_code(a, names) for a in e.args) + ")" if e.args else "1.0"
    if isinstance(e, Div):
        return f"_div({_code(e.num, names)}, {_code(e.den, names)})"
    if isinstance(e, Pow):
        if e.exp == 1:
            return _code(e.base, names)
        if e.exp == 2:
            b = _code(e.base, names)
            return f"_pow({b}, 2, 1)"
        return f"_pow({_code(e.base, names)}, {e.exp.numerator}, {e.exp.denominator})"
    if isinstance(e, Func):
        return f"_{e.name}({_code(e.arg, names)})"
    raise TypeError(e)


@lru_cache(maxsize=50_000)
def compile_expr(e: Expr, variables: tuple):
    """Compile ``e`` to a Python function of the positional ``variables``."""
    missing = free_vars(e) - set(variables)
    if missing:
        raise UnknownVariable(sorted(missing)[0])
    names = {v: f"_a{i}" for i, v in enumerate(variables)}
    src = f"lambda {', '.join(names.values())}: {_code(e, names)}"
    raw = eval(src, dict(_ENV))  # noqa: S307 - source is generated from the AST above

    def fn(*args):
        try:
            r = raw(*[float(a) for a in args])
        except EvaluationError:
            raise
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvaluationError(str(exc)) from None
        if isinstance(r, complex) or not math.isfinite(r):
            raise EvaluationError(f"non-finite value {r!r}")
        return float(r)

    return fn


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``e`` at ``point``; raises EvaluationError instead of returning NaN."""
    e = lift(e)
    fv = tuple(sorted(free_vars(e)))
    for v in fv:
        if v not in point:
            raise UnknownVariable(v)
    return compile_expr(e, fv)(*(float(point[v]) for v in fv))
