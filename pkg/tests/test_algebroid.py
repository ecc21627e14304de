import random

import pytest

from affalg.algebroid import AffineAlgebroid, Section, VectorAlgebroid, anchor_apply, bracket, validate
from affalg.errors import AlgebroidError
from affalg.symkernel import Chart, Const, Var, Verdict, is_zero, parse, simplify
from helpers import POSITIVE, fixture, random_poly, random_section


@pytest.fixture(scope="module")
def canonical():
    return fixture("canonical_j1").algebroid()


@pytest.fixture(scope="module")
def euler():
    return fixture("euler_top").algebroid()


def test_split_accessors(euler):
    assert euler.frame == ("e_0", "e_y1", "e_y2", "e_y3")
    assert euler.rho0(0) == Const(1)
    assert euler.C(2, 0, 1) == Const(1)
    assert euler.C(2, 1, 0) == Const(-1)
    assert euler.C0(0, 1) == Const(0)


def test_frame_bracket_e0_eb_gives_C0():
    A = fixture("affine_liealgebra_point").algebroid()
    b = bracket(A.basis(0), A.basis(1))
    assert b.coeffs == (Const(0), Const(0), Const(1))  # C^2_{01} e_2


def test_self_bracket_vanishes(euler):
    rng = random.Random(5)
    z = random_section(rng, euler)
    assert bracket(z, z).is_zero() is Verdict.ZERO


def test_canonical_bracket_with_function_coefficient(canonical):
    # [e0, x e1] = rho(e0)(x) e1 = 0 because rho^x_0 = 0
    z = Section(canonical, (Const(0), Var("x")))
    assert bracket(canonical.basis(0), z).is_zero() is Verdict.ZERO


def test_anchor_apply(canonical):
    assert anchor_apply(canonical.basis(0), Var("t")) == Const(1)
    assert anchor_apply(canonical.basis(1), Const(5)) == Const(0)
    # y1 enters as a frozen parameter of the section
    z = Section(canonical, (Const(1), Var("y1")))
    assert simplify(anchor_apply(z, Var("x"))) == Var("y1")


@pytest.mark.parametrize("name", POSITIVE)
def test_skew_symmetry_on_frame(name):
    A = fixture(name).algebroid()
    for a in range(A.rank):
        for b in range(A.rank):
            assert (bracket(A.basis(a), A.basis(b)) + bracket(A.basis(b), A.basis(a))).is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_leibniz_rule(name):
    A = fixture(name).algebroid()
    rng = random.Random(11)
    for _ in range(5):
        z1, z2 = random_section(rng, A), random_section(rng, A)
        f = random_poly(rng, A.chart.names)
        lhs = bracket(z1, z2 * f) - bracket(z1, z2) * f - z2 * anchor_apply(z1, f)
        assert lhs.is_zero() is Verdict.ZERO


@pytest.mark.parametrize("name", POSITIVE)
def test_fixtures_validate(name):
    spec = fixture(name)
    report = validate(spec.algebroid(), exact_function=spec.bound_exact(), debug=True)
    assert report.passed, report.to_dict()
    assert report["jacobi_brackets"].passed


def test_broken_fixture_fails_with_witness():
    report = validate(fixture("broken_jacobi").algebroid())
    assert not report.passed
    jac = report["jacobi"]
    assert jac.verdict is Verdict.NONZERO
    w = jac.failures[0]["witness"]
    assert w and abs(jac.failures[0]["value"]) > 1e-9


def test_direct_jacobi_detects_failure():
    A = fixture("broken_jacobi").algebroid()
    base = AffineAlgebroid.from_components(["x1"], ["y1", "y2", "y3"], ["0"], [["1", "0", "0"]],
                                           C={(0, 0, 1): "x1", (1, 1, 2): "1"})
    assert not validate(base, debug=True)["jacobi_brackets"].passed
    assert validate(A)["anchor_morphism"].verdict is Verdict.NONZERO


def test_non_affine_detected():
    A = AffineAlgebroid.from_vector(
        VectorAlgebroid(Chart(()), ("e_0", "e_y1"), [], {(0, 0, 1): Const(1)}), ("y1",))
    report = validate(A)
    assert report["affine"].verdict is Verdict.NONZERO
    assert report["jacobi"].passed


def test_e0_exact_probe():
    spec = fixture("canonical_j1")
    A = spec.algebroid()
    assert validate(A, exact_function=Var("t"))["e0_exact"].passed
    assert validate(A, exact_function=Var("x"))["e0_exact"].verdict is Verdict.NONZERO


def test_fiber_dependent_data_rejected():
    with pytest.raises(AlgebroidError):
        AffineAlgebroid.from_components(["x"], ["y1"], ["y1"], [["1"]])


def test_structure_needs_ordered_indices():
    with pytest.raises(AlgebroidError):
        AffineAlgebroid.from_components(["x"], ["y1", "y2"], ["0"], [["1", "0"]], C={(0, 1, 0): 1})


def test_mismatched_sections_rejected(euler, canonical):
    with pytest.raises(AlgebroidError):
        bracket(euler.basis(0), canonical.basis(0))


def test_report_is_serializable(euler):
    import json

    d = validate(euler).to_dict()
    assert json.loads(json.dumps(d))["passed"] is True
