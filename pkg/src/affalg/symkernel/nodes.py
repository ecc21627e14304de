"""Expression tree nodes.

Nodes are immutable and hash-consed only by value (structural equality).
Arithmetic operators return *simplified* trees; the raw constructors are used
by the parser so that ``parse`` reflects the input text faithfully.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational, Real

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")

# printing precedences
_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def as_number(value):
    """Coerce a Python number to the kernel's constant domain (Fraction or float)."""
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, Real):
        return float(value)
    raise TypeError(f"not a real number: {value!r}")


class Expr:
    __slots__ = ("_hash",)
    _fields: tuple = ()

    def _key(self):
        return tuple(getattr(self, f) for f in self._fields)

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Expr) else False
        return self._hash == other._hash and self._key() == other._key()

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        args = ", ".join(repr(getattr(self, f)) for f in self._fields)
        return f"{type(self).__name__}({args})"

    def __str__(self):
        return to_text(self)

    # -- arithmetic (simplifying) ----------------------------------------
    def __add__(self, other):
        return _simplify(Add((self, lift(other))))

    def __radd__(self, other):
        return _simplify(Add((lift(other), self)))

    def __sub__(self, other):
        return _simplify(Add((self, Mul((Const(-1), lift(other))))))

    def __rsub__(self, other):
        return _simplify(Add((lift(other), Mul((Const(-1), self)))))

    def __mul__(self, other):
        return _simplify(Mul((self, lift(other))))

    def __rmul__(self, other):
        return _simplify(Mul((lift(other), self)))

    def __truediv__(self, other):
        return _simplify(Div(self, lift(other)))

    def __rtruediv__(self, other):
        return _simplify(Div(lift(other), self))

    def __neg__(self):
        return _simplify(Mul((Const(-1), self)))

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return _simplify(Pow(self, Fraction(exponent) if not isinstance(exponent, float) else Fraction(exponent).limit_denominator(10**6)))

    @property
    def is_zero_literal(self):
        return isinstance(self, Const) and self.value == 0


def _init(obj, fields, values):
    for f, v in zip(fields, values):
        object.__setattr__(obj, f, v)
    object.__setattr__(obj, "_hash", hash((type(obj).__name__,) + tuple(values)))


class Const(Expr):
    __slots__ = ("value",)
    _fields = ("value",)

    def __init__(self, value):
        v = as_number(value)
        if isinstance(v, float) and v.is_integer() and abs(v) < 2**53:
            # keep integral floats exact so that 2.0*x and 2*x collect
            v = Fraction(int(v))
        _init(self, self._fields, (v,))

    def __eq__(self, other):
        if isinstance(other, Const):
            return self.value == other.value
        return Expr.__eq__(self, other)

    __hash__ = Expr.__hash__


class Var(Expr):
    __slots__ = ("name",)
    _fields = ("name",)

    def __init__(self, name: str):
        _init(self, self._fields, (str(name),))


class Add(Expr):
    __slots__ = ("args",)
    _fields = ("args",)

    def __init__(self, args):
        _init(self, self._fields, (tuple(args),))


class Mul(Expr):
    __slots__ = ("args",)
    _fields = ("args",)

    def __init__(self, args):
        _init(self, self._fields, (tuple(args),))


class Div(Expr):
    __slots__ = ("num", "den")
    _fields = ("num", "den")

    def __init__(self, num, den):
        _init(self, self._fields, (num, den))


class Pow(Expr):
    """``base ** exp`` with a rational exponent."""

    __slots__ = ("base", "exp")
    _fields = ("base", "exp")

    def __init__(self, base, exp):
        _init(self, self._fields, (base, Fraction(exp)))


class Func(Expr):
    __slots__ = ("name", "arg")
    _fields = ("name", "arg")

    def __init__(self, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unsupported function {name!r}")
        _init(self, self._fields, (name, arg))


ZERO = Const(0)
ONE = Const(1)


def lift(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Var(value)
    return Const(value)


def _simplify(e):
    from .simplify import simplify

    return simplify(e)


# -- printing -----------------------------------------------------------------

def _number_text(v):
    """Text and precedence for a numeric constant."""
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return (str(v.numerator), _ATOM if v >= 0 else _UNARY)
        return (f"{v.numerator}/{v.denominator}", _MUL)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError("non-finite constant cannot be printed")
    return (repr(v), _ATOM if v >= 0 else _UNARY)


def _exponent_text(p: Fraction):
    if p.denominator == 1 and p >= 0:
        return str(p.numerator)
    return f"({p.numerator}/{p.denominator})" if p.denominator != 1 else f"({p.numerator})"


def _wrap(text, prec, need):
    return f"({text})" if prec < need else text


def _render(e):
    """Return (text, precedence)."""
    if isinstance(e, Const):
        return _number_text(e.value)
    if isinstance(e, Var):
        return (e.name, _ATOM)
    if isinstance(e, Func):
        return (f"{e.name}({_render(e.arg)[0]})", _ATOM)
    if isinstance(e, Pow):
        text, prec = _render(e.base)
        if isinstance(e.base, Const) or prec < _ATOM:
            text = f"({text})"
        return (f"{text}^{_exponent_text(e.exp)}", _POW)
    if isinstance(e, Div):
        n, pn = _render(e.num)
        d, pd = _render(e.den)
        return (f"{_wrap(n, pn, _MUL)}/{_wrap(d, pd, _POW)}", _MUL)
    if isinstance(e, Mul):
        args = list(e.args)
        sign = ""
        if args and isinstance(args[0], Const) and args[0].value < 0:
            sign = "-"
            c = -args[0].value
            args = args[1:] if c == 1 else [Const(c)] + args[1:]
        if not args:
            return ("-1", _UNARY) if sign else ("1", _ATOM)
        parts = []
        for a in args:
            t, p = _render(a)
            # right operand of '*' must bind tighter than '*' itself when it is a fraction
            need = _POW if isinstance(a, Const) and isinstance(a.value, Fraction) and a.value.denominator != 1 else _UNARY
            parts.append(_wrap(t, p, need if parts else _MUL))
        body = "*".join(parts)
        if sign:
            return (f"-{_wrap(body, _MUL, _MUL)}", _UNARY)
        return (body, _MUL if len(parts) > 1 else _render(args[0])[1])
    if isinstance(e, Add):
        if not e.args:
            return ("0", _ATOM)
        out = []
        for i, a in enumerate(e.args):
            t, p = _render(a)
            if i == 0:
                out.append(t)
            elif t.startswith("-") and p in (_UNARY, _MUL):
                out.append(f" - {t[1:]}")
            else:
                out.append(f" + {_wrap(t, p, _ADD + 1)}")
        return ("".join(out), _ADD)
    raise TypeError(f"not an expression node: {e!r}")


def to_text(e: Expr) -> str:
    """Render ``e`` as text accepted by :func:`affalg.symkernel.parse`."""
    return _render(e)[0]
