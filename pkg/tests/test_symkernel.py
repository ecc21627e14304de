import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from affalg.errors import EvaluationError, ParseError, UnknownIdentifier, UnknownVariable
from affalg.symkernel import (Chart, Const, Func, Var, Verdict, compile_expr, diff, evaluate, free_vars, is_zero,
                              parse, sample_points, sampling, sampling_config, simplify, substitute, to_text,
                              zero_test)

VARS = ("x", "y", "z")


def exprs():
    leaf = st.one_of(st.sampled_from([Var(v) for v in VARS]),
                     st.integers(-4, 4).map(Const),
                     st.fractions(min_value=-3, max_value=3, max_denominator=4).map(Const))

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda p: p[0] + p[1]),
            st.tuples(children, children).map(lambda p: p[0] - p[1]),
            st.tuples(children, children).map(lambda p: p[0] * p[1]),
            st.tuples(children, st.integers(0, 3)).map(lambda p: p[0] ** p[1]),
            st.tuples(children, st.integers(1, 5)).map(lambda p: p[0] / Const(p[1])),
            st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda p: Func(p[0], p[1])),
        )

    return st.recursive(leaf, extend, max_leaves=8)


def points():
    return st.fixed_dictionaries({v: st.floats(-1, 1) for v in VARS})


# -- parsing ------------------------------------------------------------------------

def test_parse_literal_zero():
    assert parse("0") == Const(0)


def test_parse_lagrangian_over_chart():
    e = simplify(parse("y1^2/2 - x^2/2", Chart(("t", "x", "y1"))))
    assert is_zero(e - (Var("y1") ** 2 / 2 - Var("x") ** 2 / 2)) is Verdict.ZERO
    assert free_vars(e) == {"x", "y1"}


def test_parse_decimal_is_exact():
    assert simplify(parse("0.1 + 0.2")) == Const(Fraction(3, 10))


def test_parse_precedence_and_unary_minus():
    assert evaluate(parse("-2^2"), {}) == -4
    assert evaluate(parse("2^-1"), {}) == 0.5
    assert evaluate(parse("2*3+4/2-1"), {}) == 7


@pytest.mark.parametrize("text,offset", [("x +", 3), ("(x", 2), ("x $ y", 2), ("sin x", 0), ("x^y", 2)])
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as info:
        parse("x + w", ("x",))
    assert info.value.name == "w" and info.value.offset == 4


def test_constants_are_substituted():
    assert simplify(parse("I1*x", ("x",), {"I1": 2})) == simplify(2 * Var("x"))


@given(exprs())
def test_print_parse_round_trip(e):
    assert simplify(parse(to_text(e))) == simplify(e)


# -- simplification ------------------------------------------------------------------

def test_structural_cancellation():
    x = Var("x")
    assert simplify(x - x) == Const(0)
    assert simplify(x ** 0) == Const(1)
    assert simplify(0 * Func("sin", x)) == Const(0)


def test_like_terms_collected():
    x, y = Var("x"), Var("y")
    assert simplify(x * y / 2 + y * x / 2) == simplify(x * y)


@given(exprs())
def test_simplify_idempotent(e):
    s = simplify(e)
    assert simplify(s) == s


@given(exprs(), points())
def test_simplify_preserves_value(e, p):
    try:
        a = evaluate(e, p)
        b = evaluate(simplify(e), p)
    except (EvaluationError, OverflowError):
        assume(False)
    assert b == pytest.approx(a, rel=1e-9, abs=1e-9)


# -- differentiation -----------------------------------------------------------------

def test_diff_constant_and_power_rule():
    x = Var("x")
    assert diff(Const(7), "x") == Const(0)
    assert diff(x ** 2 / 2, "x") == x


def test_diff_unknown_variable_rejected():
    with pytest.raises(UnknownVariable):
        diff(Var("x"), "q", Chart(("x",)))


@given(exprs(), points(), st.sampled_from(VARS))
def test_diff_matches_central_differences(e, p, v):
    h = 1e-5
    f = compile_expr(e, VARS)
    args = [p[n] for n in VARS]
    k = VARS.index(v)
    try:
        exact = compile_expr(diff(e, v), VARS)(*args)
        up = list(args)
        dn = list(args)
        up[k] += h
        dn[k] -= h
        fd = (f(*up) - f(*dn)) / (2 * h)
    except (EvaluationError, OverflowError):
        assume(False)
    assume(abs(exact) < 1e4)
    assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


def test_substitute():
    x, y = Var("x"), Var("y")
    assert simplify(substitute(x * y + x, {"x": 2})) == simplify(2 * y + 2)


# -- evaluation ----------------------------------------------------------------------

@pytest.mark.parametrize("text", ["log(x)", "sqrt(x)", "1/(x - x)", "x^(1/2)"])
def test_domain_errors_are_reported(text):
    with pytest.raises(EvaluationError):
        evaluate(parse(text), {"x": -1.0})


def test_evaluation_needs_every_variable():
    with pytest.raises(Exception):
        evaluate(parse("x + y"), {"x": 1.0})


# -- zero testing --------------------------------------------------------------------

def test_pythagorean_identity_is_zero():
    q = Var("q")
    assert is_zero(Func("sin", q) ** 2 + Func("cos", q) ** 2 - 1) is Verdict.ZERO


def test_nonzero_has_witness():
    t = zero_test(Var("x") ** 2 - Var("x"))
    assert t.verdict is Verdict.NONZERO
    assert "x" in t.witness and abs(t.value) > 1e-9


def test_domain_riddled_expression_is_unknown():
    assert is_zero(Func("log", -(Var("x") ** 2) - 1)) is Verdict.UNKNOWN


def test_verdict_refuses_truthiness():
    with pytest.raises(TypeError):
        bool(Verdict.ZERO)


def test_sampling_defaults_and_override():
    cfg = sampling_config()
    assert (cfg.samples, cfg.tol, cfg.low, cfg.high) == (25, 1e-9, -1.0, 1.0)
    with sampling(seed=7, tol=1e-6):
        assert sampling_config().seed == 7 and sampling_config().tol == 1e-6
    assert sampling_config().seed == cfg.seed


def test_sample_points_are_seeded():
    a = sample_points(("x", "y"), count=5, seed=3)
    b = sample_points(("x", "y"), count=5, seed=3)
    assert a == b and all(-1 <= p["x"] <= 1 for p in a)


def test_tolerance_is_respected():
    assert is_zero(Const(1e-12) * Var("x")) is Verdict.ZERO
    with sampling(tol=1e-15):
        assert is_zero(Const(1e-12) * (Var("x") + 2)) is Verdict.NONZERO


def test_chart_rejects_duplicates():
    with pytest.raises(ValueError):
        Chart(("x", "x"))


def _random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(VARS)) if rng.random() < 0.7 else Const(rng.randint(-3, 3))
    op = rng.choice(["+", "-", "*", "pow", "sin", "cos", "exp"])
    a = _random_tree(rng, depth - 1)
    if op in ("sin", "cos", "exp"):
        return Func(op, a)
    if op == "pow":
        return a ** rng.randint(0, 3)
    b = _random_tree(rng, depth - 1)
    return {"+": a + b, "-": a - b, "*": a * b}[op]


def test_diff_thousand_random_trees():
    import random

    rng = random.Random(2024)
    h = 1e-5
    trees = 0
    while trees < 1000:
        e = _random_tree(rng, 4)
        v = rng.choice(VARS)
        k = VARS.index(v)
        f = compile_expr(e, VARS)
        g = compile_expr(diff(e, v), VARS)
        rows = []
        try:
            for p in sample_points(VARS, count=5, seed=rng.randrange(1 << 30)):
                args = [p[n] for n in VARS]
                up, dn = list(args), list(args)
                up[k] += h
                dn[k] -= h
                rows.append((p, g(*args), f(*up), f(*dn)))
        except EvaluationError:
            continue  # overflowing tree (nested exp); draw another
        trees += 1
        for p, exact, fu, fdn in rows:
            fd = (fu - fdn) / (2 * h)
            # the difference quotient itself loses ~eps*|f|/h to cancellation
            roundoff = 4 * 2.2e-16 * max(abs(fu), abs(fdn)) / h
            assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact)) + roundoff, (to_text(e), v, p)
