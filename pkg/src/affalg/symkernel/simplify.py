"""Canonicalising simplifier.

Every expression is normalised to a sum of monomials with rational (or float)
coefficients.  A monomial is a product of *atoms* raised to rational powers;
atoms are variables, elementary-function applications with a normalised
argument, and sums that could not be expanded (negative or fractional powers).

Scope: constant folding, flattening, like-term collection, ``x^0 -> 1``,
``0*e -> 0`` and expansion of small positive integer powers of sums.  There is
no trigonometric canonicalisation; probabilistic zero testing covers the rest.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .nodes import Add, Const, Div, Expr, Func, Mul, Pow, Var, to_text

# powers of sums above this are kept as atoms instead of being expanded
MAX_EXPAND = 6


def _atom_key(atom):
    return _sort_key(atom)


@lru_cache(maxsize=None)
def _sort_key(atom):
    rank = 0 if isinstance(atom, Var) else 1 if isinstance(atom, Func) else 2
    return (rank, to_text(atom))


def _mono(items):
    """Build a canonical monomial from (atom, exponent) pairs."""
    acc = {}
    for atom, e in items:
        acc[atom] = acc.get(atom, 0) + e
    return tuple(sorted(((a, Fraction(e)) for a, e in acc.items() if e != 0), key=lambda p: _atom_key(p[0])))


def _add_coef(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) + float(b)
    return a + b


def _mul_coef(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) * float(b)
    return a * b


def _clean(poly):
    return {m: c for m, c in poly.items() if c != 0}


def _poly_add(p, q):
    out = dict(p)
    for m, c in q.items():
        out[m] = _add_coef(out[m], c) if m in out else c
    return _clean(out)


def _poly_mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono(m1 + m2)
            c = _mul_coef(c1, c2)
            out[m] = _add_coef(out[m], c) if m in out else c
    out = _clean(out)
    return _expand_integral_sum_atoms(out)


def _expand_integral_sum_atoms(poly):
    """Sum atoms whose exponent became a positive integer are multiplied out."""
    needs = any(isinstance(a, Add) and e.denominator == 1 and 0 < e <= MAX_EXPAND for m in poly for a, e in m)
    if not needs:
        return poly
    out = {}
    for m, c in poly.items():
        rest = []
        term = {(): c}
        for a, e in m:
            if isinstance(a, Add) and e.denominator == 1 and 0 < e <= MAX_EXPAND:
                term = _poly_mul(term, _poly_int_pow(dict(_normalize(a)), int(e)))
            else:
                rest.append((a, e))
        if rest:
            term = _poly_mul(term, {_mono(rest): Fraction(1)})
        out = _poly_add(out, term)
    return out


def _poly_int_pow(p, n):
    result = {(): Fraction(1)}
    for _ in range(n):
        result = _poly_mul(result, p)
    return result


def _const_pow(c, e: Fraction):
    """Exact value of c**e if representable, a float if safe, else None."""
    if e.denominator == 1:
        if c == 0 and e < 0:
            return None
        if isinstance(c, float):
            return c ** int(e)
        return c ** int(e)
    if c < 0:
        return None
    if c == 0:
        return Fraction(0) if e > 0 else None
    if isinstance(c, Fraction):
        q = e.denominator
        num = _exact_root(c.numerator, q)
        den = _exact_root(c.denominator, q)
        if num is not None and den is not None:
            return Fraction(num, den) ** e.numerator
    return float(c) ** float(e)


def _exact_root(n, q):
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == n:
            return cand
    return None


def _poly_pow(p, e: Fraction, original_base):
    if e == 0:
        return {(): Fraction(1)}
    if not p:
        if e > 0:
            return {}
        return {_mono([(Pow(Const(0), e), 1)]): Fraction(1)}
    if len(p) == 1:
        (m, c), = p.items()
        if e.denominator == 1:
            ce = _const_pow(c, e)
            if ce is not None:
                return _expand_integral_sum_atoms({_mono([(a, x * e) for a, x in m]): ce})
        elif c > 0 and all(not (x.denominator == 1 and x.numerator % 2 == 0) for _, x in m):
            ce = _const_pow(c, e)
            if ce is not None:
                return _expand_integral_sum_atoms(_clean({_mono([(a, x * e) for a, x in m]): ce}))
        # keep the whole base as a single atom
        base = _to_expr(p)
        return {_mono([(Pow(base, e), 1)]) if not _is_atomic(base) else _mono([(base, e)]): Fraction(1)}
    if e.denominator == 1 and 0 < e <= MAX_EXPAND:
        return _poly_int_pow(p, int(e))
    return {_mono([(_to_expr(p), e)]): Fraction(1)}


def _is_atomic(e):
    return isinstance(e, (Var, Func, Add))


_FOLD_EXACT = {
    "sin": {Fraction(0): Fraction(0)},
    "cos": {Fraction(0): Fraction(1)},
    "tan": {Fraction(0): Fraction(0)},
    "exp": {Fraction(0): Fraction(1)},
    "log": {Fraction(1): Fraction(0)},
}


def _fold_func(name, arg):
    """Constant folding of an elementary function; None if it must stay symbolic."""
    if not isinstance(arg, Const):
        return None
    v = arg.value
    if isinstance(v, Fraction):
        table = _FOLD_EXACT.get(name, {})
        if v in table:
            return table[v]
        if name == "sqrt" and v >= 0:
            exact = _const_pow(v, Fraction(1, 2))
            if isinstance(exact, Fraction):
                return exact
        return None
    # float argument: fold numerically where the function is defined
    try:
        if name == "log" and v <= 0:
            return None
        if name == "sqrt" and v < 0:
            return None
        r = getattr(math, name)(v)
    except (ValueError, OverflowError):
        return None
    return r if math.isfinite(r) else None


@lru_cache(maxsize=200_000)
def _normalize(e: Expr):
    """Normalise to a polynomial dict (returned as an immutable tuple of items)."""
    return tuple(_normalize_dict(e).items())


def _normalize_dict(e):
    if isinstance(e, Const):
        return _clean({(): e.value})
    if isinstance(e, Var):
        return {((e, Fraction(1)),): Fraction(1)}
    if isinstance(e, Add):
        out = {}
        for a in e.args:
            out = _poly_add(out, dict(_normalize(a)))
        return out
    if isinstance(e, Mul):
        out = {(): Fraction(1)}
        for a in e.args:
            pa = dict(_normalize(a))
            if not pa:
                return {}
            out = _poly_mul(out, pa)
        return out
    if isinstance(e, Div):
        num = dict(_normalize(e.num))
        if not num:
            return {}
        return _poly_mul(num, _poly_pow(dict(_normalize(e.den)), Fraction(-1), e.den))
    if isinstance(e, Pow):
        return _poly_pow(dict(_normalize(e.base)), e.exp, e.base)
    if isinstance(e, Func):
        arg = simplify(e.arg)
        folded = _fold_func(e.name, arg)
        if folded is not None:
            return _clean({(): folded})
        return {((Func(e.name, arg), Fraction(1)),): Fraction(1)}
    raise TypeError(f"cannot simplify {e!r}")


def _term_expr(m, c):
    factors = [a if x == 1 else Pow(a, x) for a, x in m]
    if not factors:
        return Const(c)
    if c == 1:
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))
    return Mul((Const(c),) + tuple(factors))


def _mono_key(m):
    return tuple((_atom_key(a), x) for a, x in m)


def _to_expr(poly):
    if not poly:
        return Const(0)
    items = sorted(poly.items(), key=lambda mc: (len(mc[0]) == 0, _mono_key(mc[0])))
    terms = [_term_expr(m, c) for m, c in items]
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


@lru_cache(maxsize=200_000)
def simplify(e: Expr) -> Expr:
    """Return the canonical form of ``e`` (idempotent, value preserving)."""
    return _to_expr(dict(_normalize(e)))


def constant_value(e: Expr):
    """The numeric value if ``e`` simplifies to a constant, else None."""
    s = simplify(e)
    return s.value if isinstance(s, Const) else None
