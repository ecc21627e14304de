"""Cartan forms, Lagrangian pseudo-SODEs and the Legendre transformation."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebroid import AffineAlgebroid, Section, anchor_apply, as_expr
from .calculus import KForm, contract, d, evaluate_on, lie_derive, pair, wedge
from .errors import AlgebroidError, EvaluationError, SingularLagrangian
from .prolong import (
    ProlongedAlgebroid,
    PseudoSode,
    contact_form,
    prolong,
    prolong_dual,
    vertical_endo,
)
from .symkernel import ONE, ZERO, Var, compile_expr, diff, free_vars, sample_points, simplify, substitute

# |det g| at or below this at any probe point means the Lagrangian is singular
SINGULAR_DET = 1e-10


class Lagrangian:
    """A function L(x, y) on E together with its affine algebroid."""

    def __init__(self, algebroid: AffineAlgebroid, L, *, prolonged: ProlongedAlgebroid | None = None):
        self.algebroid = algebroid
        names = algebroid.chart.names + algebroid.fiber
        self.L = as_expr(L, names)
        extra = free_vars(self.L) - set(names)
        if extra:
            raise AlgebroidError(f"the Lagrangian may only depend on {names}; found {sorted(extra)}")
        self._prolonged = prolonged

    @property
    def prolonged(self) -> ProlongedAlgebroid:
        if self._prolonged is None:
            self._prolonged = prolong(self.algebroid)
        return self._prolonged

    @cached_property
    def momenta(self):
        """dL/dy^alpha."""
        return tuple(diff(self.L, y) for y in self.algebroid.fiber)

    @cached_property
    def hessian(self):
        """g_{alpha beta} = d^2 L / dy^alpha dy^beta."""
        return tuple(tuple(diff(p, y) for y in self.algebroid.fiber) for p in self.momenta)

    @cached_property
    def force_rhs(self):
        """rho^i_alpha dL/dx^i + C^g_alpha dL/dy^g - (rho^i_0 + rho^i_b y^b) d^2L/dx^i dy^alpha."""
        A = self.algebroid
        out = []
        for alpha in range(A.dim):
            r = A.apply_field(alpha + 1, self.L)
            for g in range(A.dim):
                r = r + A.Cy(g, alpha) * self.momenta[g]
            r = r - A.dot(self.momenta[alpha])
            out.append(r)
        return tuple(out)

    def __str__(self):
        return str(self.L)


def cartan_one_form(lag: Lagrangian) -> KForm:
    """Theta_L = dL/dy^alpha theta^alpha + L X^0."""
    P = lag.prolonged
    theta = KForm.coframe(P, P.X(0)) * lag.L
    for alpha, p in enumerate(lag.momenta):
        theta = theta + contact_form(P, alpha) * p
    return theta


def cartan_one_form_intrinsic(lag: Lagrangian) -> KForm:
    """Theta_L = dL o S + L X^0, computed through the exterior differential on the prolongation."""
    P = lag.prolonged
    dL = d(KForm.function(P, lag.L))
    comps = {(a,): pair(dL, vertical_endo(P.basis(a))) for a in range(P.rank)}
    return KForm(P, 1, comps) + KForm.coframe(P, P.X(0)) * lag.L


def cartan_two_form(lag: Lagrangian) -> KForm:
    """Omega_L = -d Theta_L."""
    return -d(cartan_one_form(lag))


def cartan_two_form_displayed(lag: Lagrangian, reference_forces) -> KForm:
    """Omega_L assembled from its coordinate expression in the basis {X^0, theta^alpha, psi^alpha}.

    ``psi^alpha = V^alpha - F0^alpha X^0`` for the reference pseudo-SODE with
    forces ``reference_forces``.
    """
    A, P = lag.algebroid, lag.prolonged
    n = A.dim
    G0 = PseudoSode(P, tuple(as_expr(f) for f in reference_forces)).section()
    X0 = KForm.coframe(P, P.X(0))
    th = [contact_form(P, a) for a in range(n)]
    psi = [KForm.coframe(P, P.V(a)) - X0 * as_expr(reference_forces[a]) for a in range(n)]
    omega = KForm(P, 2)
    for a in range(n):
        c = anchor_apply(G0, lag.momenta[a]) - A.apply_field(a + 1, lag.L)
        for g in range(n):
            c = c - lag.momenta[g] * A.Cy(g, a)
        omega = omega + wedge(th[a], X0) * c
        for b in range(n):
            omega = omega + wedge(th[a], psi[b]) * lag.hessian[a][b]
            half = (A.apply_field(b + 1, lag.momenta[a]) - A.apply_field(a + 1, lag.momenta[b])) * ONE
            for g in range(n):
                half = half + lag.momenta[g] * A.C(g, a, b)
            omega = omega + wedge(th[a], th[b]) * (half / 2)
    return omega


def _solve_symbolic(g, rhs):
    """Gaussian elimination on expression matrices (pivots must not vanish identically)."""
    n = len(rhs)
    M = [list(row) + [r] for row, r in zip(g, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not simplify(M[r][col]).is_zero_literal), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        for r in range(n):
            if r == col or M[r][col].is_zero_literal:
                continue
            f = M[r][col] / p
            M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return tuple(simplify(M[i][n] / M[i][i]) for i in range(n))


def regularity_probe(lag: Lagrangian, domain=None, samples=25):
    """Raise SingularLagrangian if det(g) is (numerically) zero at a probe point."""
    A = lag.algebroid
    n = A.dim
    if n == 0:
        return
    names = A.chart.names + A.fiber
    fns = [[compile_expr(e, names) for e in row] for row in lag.hessian]
    for p in sample_points(names, domain, count=samples):
        args = [p[v] for v in names]
        try:
            G = np.array([[f(*args) for f in row] for row in fns])
        except EvaluationError:
            continue
        det = float(np.linalg.det(G))
        if abs(det) <= SINGULAR_DET:
            raise SingularLagrangian(p, det)


def derive_sode(lag: Lagrangian, domain=None) -> PseudoSode:
    """Solve g_{ab} F^b = rhs_a for the forces of the Lagrangian pseudo-SODE.

    The system is solved symbolically when the Hessian does not depend on the
    fibre coordinates; otherwise the forces stay implicit and are solved
    numerically per evaluation point.
    """
    regularity_probe(lag, domain)
    A = lag.algebroid
    ys = set(A.fiber)
    g = lag.hessian
    if all(not (free_vars(e) & ys) for row in g for e in row):
        F = _solve_symbolic(g, lag.force_rhs)
        if F is not None:
            return PseudoSode(lag.prolonged, F)
    return PseudoSode(lag.prolonged, None, hessian=g, rhs=lag.force_rhs)


def force_placeholders(n):
    return tuple(Var(f"F_{a + 1}") for a in range(n))


def euler_lagrange_residual(lag: Lagrangian, sode: PseudoSode) -> KForm:
    """i_Gamma Omega_L, which vanishes exactly for Lagrangian pseudo-SODEs."""
    G = sode.section() if sode.explicit else sode.section(force_placeholders(lag.algebroid.dim))
    return contract(G, cartan_two_form(lag))


def variational_residual(lag: Lagrangian, sode: PseudoSode) -> KForm:
    """d_Gamma Theta_L - dL (Lie derivative along Gamma)."""
    G = sode.section() if sode.explicit else sode.section(force_placeholders(lag.algebroid.dim))
    P = lag.prolonged
    return lie_derive(G, cartan_one_form(lag)) - d(KForm.function(P, lag.L))


def implicit_residual_at(residual: KForm, sode: PseudoSode, points):
    """Numeric values of a residual built with force placeholders, at sample points."""
    names = sode.variables
    solve = sode.force_function()
    placeholders = [f"F_{a + 1}" for a in range(len(sode.rhs))]
    out = []
    for p in points:
        state = [p[v] for v in names]
        F = solve(state)
        env = dict(p)
        env.update(zip(placeholders, F))
        vals = {}
        for idx, c in residual.items():
            fv = tuple(sorted(free_vars(c)))
            vals[idx] = compile_expr(c, fv)(*(env[v] for v in fv))
        out.append(vals)
    return out


@dataclass(frozen=True)
class LegendreMap:
    """Coordinate expression (x^i, mu_0, mu_alpha) of the Legendre map E -> E-dagger."""

    lagrangian: Lagrangian
    components: dict

    def __getitem__(self, name):
        return self.components[name]

    def as_tuple(self):
        return tuple(self.components.values())


def legendre(lag: Lagrangian) -> LegendreMap:
    """F_L(x, y) = (x, L - y^alpha dL/dy^alpha, dL/dy^alpha)."""
    A = lag.algebroid
    comps = {x: Var(x) for x in A.chart.names}
    mu0 = lag.L
    for y, p in zip(A.fiber, lag.momenta):
        mu0 = mu0 - Var(y) * p
    comps["mu_0"] = mu0
    for y, p in zip(A.fiber, lag.momenta):
        comps[f"mu_{y}"] = p
    return LegendreMap(lag, comps)


def canonical_forms(A: AffineAlgebroid, prolonged_dual: ProlongedAlgebroid | None = None):
    """theta_0 = mu_0 X^0 + mu_alpha X^alpha and omega_0 = -d theta_0 on T(E-dagger)."""
    PD = prolonged_dual or prolong_dual(A)
    theta0 = KForm(PD, 1, {(a,): Var(mu) for a, mu in enumerate(PD.fiber_coords)})
    return theta0, -d(theta0)


def canonical_two_form_displayed(PD: ProlongedAlgebroid) -> KForm:
    """X^0^P^0 + X^alpha^P^alpha + mu_g C^g_{0b} X^0^X^b + 1/2 mu_g C^g_{ab} X^a^X^b."""
    A = PD.source
    mu = [Var(m) for m in PD.fiber_coords]
    comps = {}
    for a in range(A.rank):
        comps[(PD.X(a), PD.V(a))] = ONE
    for b in range(A.dim):
        v = ZERO
        for g in range(A.dim):
            v = v + mu[g + 1] * A.C0(g, b)
        comps[(PD.X(0), PD.X(b + 1))] = v
    for a in range(A.dim):
        for b in range(a + 1, A.dim):
            # 1/2 sum over ordered pairs = sum over a < b
            v = ZERO
            for g in range(A.dim):
                v = v + mu[g + 1] * A.C(g, a, b)
            comps[(PD.X(a + 1), PD.X(b + 1))] = v
    return KForm(PD, 2, comps)


def prolonged_legendre(lag: Lagrangian, PD: ProlongedAlgebroid):
    """Images of the frame of T(E) under the prolonged Legendre map, as sections of T(E-dagger).

    X_a -> X'_a + rho^i_a dPhi_I/dx^i P_I and V_alpha -> dPhi_I/dy^alpha P_I,
    with coefficients expressed on E.
    """
    P = lag.prolonged
    A = lag.algebroid
    phi = legendre(lag)
    fib = [phi[m] for m in PD.fiber_coords]
    images = []
    for a in range(A.rank):
        coeffs = [ZERO] * PD.rank
        coeffs[PD.X(a)] = ONE
        for I, f in enumerate(fib):
            coeffs[PD.V(I)] = A.apply_field(a, f)
        images.append(Section(PD, tuple(coeffs)))
    for y in A.fiber:
        coeffs = [ZERO] * PD.rank
        for I, f in enumerate(fib):
            coeffs[PD.V(I)] = diff(f, y)
        images.append(Section(PD, tuple(coeffs)))
    assert len(images) == P.rank
    return images


def pullback_by_legendre(lag: Lagrangian, form: KForm) -> KForm:
    """(T F_L)^* of a form on the prolongation of the extended dual."""
    PD = form.algebroid
    P = lag.prolonged
    phi = legendre(lag)
    subs = {m: phi[m] for m in PD.fiber_coords}
    on_E = form.map(lambda c: substitute(c, subs))
    images = prolonged_legendre(lag, PD)
    comps = {}
    for idx in itertools.combinations(range(P.rank), form.degree):
        v = evaluate_on(on_E, [images[i] for i in idx])
        if not v.is_zero_literal:
            comps[idx] = v
    return KForm(P, form.degree, comps)
