import random

import pytest

from affalg.algebroid import Section, anchor_apply, bracket, validate
from affalg.calculus import KForm, contract, d
from affalg.errors import AlgebroidError
from affalg.lagrangian import force_placeholders
from affalg.prolong import (PseudoSode, complete_lift, contact_form, prolong, pullback_form, split_form,
                            vertical_endo, vertical_lift)
from affalg.symkernel import Const, Var, Verdict, is_zero, simplify
from helpers import POSITIVE, fixture, random_poly, random_section


def _P(name):
    return prolong(fixture(name).algebroid())


def test_canonical_prolongation_shape():
    P = _P("canonical_j1")
    assert P.frame == ("X_0", "X_y1", "V_y1")
    assert P.chart.names == ("t", "x", "y1")
    assert not P.structure or all(is_zero(v) is Verdict.ZERO for v in P.structure.values())


def test_trivial_prolongation_has_single_element():
    assert _P("trivial_vectorfield").frame == ("X_0",)


def test_euler_prolongation_brackets():
    P = _P("euler_top")
    b = bracket(P.basis(P.X(1)), P.basis(P.X(2)))
    assert b.coeffs[P.X(3)] == Const(1)
    for i in range(P.rank):
        for j in range(4, P.rank):
            assert bracket(P.basis(i), P.basis(j)).is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_prolongation_validates_and_differentials(name):
    P = _P(name)
    assert validate(P).passed
    A = P.source
    for i, x in enumerate(A.chart.names):
        dx = d(KForm.function(P, Var(x)))
        for a in range(A.rank):
            assert is_zero(dx[(P.X(a),)] - A.anchor[i][a]) is Verdict.ZERO
    for alpha, y in enumerate(A.fiber):
        assert (d(KForm.function(P, Var(y))) - KForm.coframe(P, P.V(alpha))).is_zero_literal


def test_prolong_rejects_invalid_source():
    with pytest.raises(AlgebroidError):
        prolong(fixture("broken_jacobi").algebroid())


def test_vertical_endomorphism_examples():
    P = _P("euler_top")
    assert vertical_endo(P.basis(P.X(2))).coeffs[P.V(1)] == Const(1)
    assert vertical_endo(P.basis(P.V(0))).is_zero() is Verdict.ZERO
    S0 = vertical_endo(P.basis(P.X(0)))
    for alpha, y in enumerate(P.source.fiber):
        assert S0.coeffs[P.V(alpha)] == -Var(y)


def test_vertical_lift_examples():
    P = _P("euler_top")
    A = P.source
    v0 = vertical_lift(P, A.basis(0))
    assert all(v0.coeffs[P.V(a)] == -Var(y) for a, y in enumerate(A.fiber))
    assert vertical_lift(P, A.basis(2)).coeffs == P.basis(P.V(1)).coeffs
    assert vertical_lift(P, A.zero_section()).is_zero() is Verdict.ZERO


def test_complete_lift_examples():
    P = _P("canonical_j1")
    assert complete_lift(P, P.source.basis(1)).coeffs == P.basis(P.X(1)).coeffs
    P = _P("euler_top")
    c = complete_lift(P, P.source.basis(1))
    y1, y2, y3 = (Var(y) for y in P.source.fiber)
    want = P.basis(P.X(1)) + P.basis(P.V(1)) * y3 - P.basis(P.V(2)) * y2
    assert (c - want).is_zero() is Verdict.ZERO


def test_complete_lift_of_e0_on_point_algebra():
    P = _P("affine_liealgebra_point")
    A = P.source
    c = complete_lift(P, A.basis(0))
    # C^alpha_beta (-y^beta): C^2_1 = C^2_{01} = 1, C^1_2 = C^1_{02} = -1
    y1, y2 = Var("y1"), Var("y2")
    want = P.basis(P.X(0)) + P.basis(P.V(0)) * y2 - P.basis(P.V(1)) * y1
    assert (c - want).is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_lift_commutators_and_S(name):
    P = _P(name)
    A = P.source
    rng = random.Random(17)
    for _ in range(4):
        z1, z2 = random_section(rng, A), random_section(rng, A)
        C1, C2 = complete_lift(P, z1), complete_lift(P, z2)
        V1, V2 = vertical_lift(P, z1), vertical_lift(P, z2)
        br = bracket(z1, z2)
        assert (bracket(C1, C2) - complete_lift(P, br)).is_zero() is Verdict.ZERO
        assert (bracket(C1, V2) - vertical_lift(P, br) - V2 * A.dot(z1.coeffs[0])).is_zero() is Verdict.ZERO
        assert (bracket(V1, V2) - V2 * z1.coeffs[0] + V1 * z2.coeffs[0]).is_zero() is Verdict.ZERO
        assert (vertical_endo(C1) - V1).is_zero() is Verdict.ZERO
        assert vertical_endo(V1).is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_vector_sections_lift_like_vector_algebroids(name):
    P = _P(name)
    A = P.source
    rng = random.Random(18)
    for _ in range(3):
        s = Section(A, (Const(0),) + random_section(rng, A).coeffs[1:])
        t = Section(A, (Const(0),) + random_section(rng, A).coeffs[1:])
        assert (bracket(complete_lift(P, s), vertical_lift(P, t))
                - vertical_lift(P, bracket(s, t))).is_zero() is Verdict.ZERO
        assert bracket(vertical_lift(P, s), vertical_lift(P, t)).is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_lift_actions_on_base_functions(name):
    P = _P(name)
    A = P.source
    rng = random.Random(19)
    for _ in range(3):
        z = random_section(rng, A)
        f = random_poly(rng, A.chart.names)
        assert is_zero(anchor_apply(vertical_lift(P, z), f)) is Verdict.ZERO
        assert is_zero(anchor_apply(complete_lift(P, z), f) - anchor_apply(z, f)) is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_vertical_lift_on_affine_functions(name):
    # d_{zeta^V} theta-hat equals theta_alpha (zeta^alpha - y^alpha zeta^0)
    P = _P(name)
    A = P.source
    rng = random.Random(20)
    for _ in range(3):
        z = random_section(rng, A)
        theta = KForm(A, 1, {(a,): random_poly(rng, A.chart.names) for a in range(A.rank)})
        hat, _ = split_form(P, theta)
        want = Const(0)
        for alpha, y in enumerate(A.fiber):
            want = want + theta[(alpha + 1,)] * (z.coeffs[alpha + 1] - Var(y) * z.coeffs[0])
        assert is_zero(anchor_apply(vertical_lift(P, z), hat) - want) is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_complete_lift_preserves_contact_forms(name):
    from affalg.calculus import lie_derive

    P = _P(name)
    A = P.source
    rng = random.Random(21)
    for _ in range(3):
        z = random_section(rng, A)
        for alpha in range(A.dim):
            L = lie_derive(complete_lift(P, z), contact_form(P, alpha))
            adm = Section(P, tuple([Const(1)] + [Var(y) for y in A.fiber] + list(force_placeholders(A.dim))))
            # annihilates every admissible direction: the result lies in the contact ideal
            assert is_zero(contract(adm, L).scalar) is Verdict.ZERO


def test_split_form_examples():
    P = _P("euler_top")
    A = P.source
    hat, bar = split_form(P, KForm.coframe(A, 2))
    assert hat == Var("y2")
    assert (bar - contact_form(P, 1)).is_zero_literal
    hat, bar = split_form(P, KForm.coframe(A, 0) * Var("t"))
    assert hat == Var("t") and bar.is_zero_literal


@pytest.mark.parametrize("name", POSITIVE)
def test_split_reconstructs_pullback(name):
    P = _P(name)
    A = P.source
    rng = random.Random(22)
    theta = KForm(A, 1, {(a,): random_poly(rng, A.chart.names) for a in range(A.rank)})
    hat, bar = split_form(P, theta)
    rebuilt = KForm.coframe(P, P.X(0)) * hat + bar
    assert (rebuilt - pullback_form(P, theta)).is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_pseudo_sode_structure(name):
    P = _P(name)
    A = P.source
    G = PseudoSode(P, force_placeholders(A.dim)).section()
    assert vertical_endo(G).is_zero() is Verdict.ZERO
    assert contract(G, KForm.coframe(P, P.X(0))).scalar == Const(1)
    for alpha in range(A.dim):
        assert is_zero(contract(G, contact_form(P, alpha)).scalar) is Verdict.ZERO


def test_pseudo_sode_requires_forces():
    with pytest.raises(ValueError):
        PseudoSode(_P("canonical_j1"))
