"""Prolongation of E (or of the extended dual) with respect to the bidual algebroid.

The prolongation is an ordinary :class:`VectorAlgebroid` over the chart
``(x^i, u^I)`` with frame ``(X_0, X_alpha, V_I)``::

    rho1(X_a) = rho^i_a d/dx^i      rho1(V_I) = d/du^I
    [X_a, X_b] = C^c_{ab} X_c       [X_a, V_J] = 0 = [V_I, V_J]
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebroid import AffineAlgebroid, Section, VectorAlgebroid, validate
from .calculus import KForm
from .errors import AlgebroidError, EvaluationError
from .poisson import dual_names
from .symkernel import ONE, ZERO, Chart, Var, compile_expr, lift, simplify


class ProlongedAlgebroid(VectorAlgebroid):
    """T^E P for P = E (fibre coordinates y) or P = E-dagger (fibre coordinates mu)."""

    def __init__(self, source: AffineAlgebroid, fiber_coords: Sequence[str], vertical_names: Sequence[str], *,
                 role="fiber", name=None):
        self.source = source
        self.fiber_coords = tuple(fiber_coords)
        base = source.chart
        nb, m, nf = len(base), source.rank, len(self.fiber_coords)
        chart = base + Chart(self.fiber_coords, (role,) * nf)
        frame = tuple("X_" + f[2:] if f.startswith("e_") else "X_" + f for f in source.frame) + tuple(vertical_names)
        anchor = []
        for i in range(nb):
            anchor.append(tuple(source.anchor[i]) + (ZERO,) * nf)
        for I in range(nf):
            anchor.append((ZERO,) * m + tuple(ONE if J == I else ZERO for J in range(nf)))
        super().__init__(chart, frame, anchor, dict(source.structure), name=name or f"T({source.name})")

    @property
    def n_x(self):
        return self.source.rank

    def X(self, a) -> int:
        """Frame position of X_a."""
        return a

    def V(self, I) -> int:
        """Frame position of the vertical element V_I."""
        return self.source.rank + I


def prolong(A: AffineAlgebroid, *, check=True) -> ProlongedAlgebroid:
    """The prolonged algebroid T^{E~}E over E with frame {X_0, X_alpha, V_alpha}."""
    if check:
        report = validate(A)
        if not report.passed:
            raise AlgebroidError(f"source algebroid {A.name!r} does not validate")
    return ProlongedAlgebroid(A, A.fiber, tuple(f"V_{y}" for y in A.fiber), name=f"T({A.name})")


def prolong_dual(A: AffineAlgebroid, *, check=True) -> ProlongedAlgebroid:
    """Prolongation of the extended dual, frame {X_0, X_alpha, P_0, P_alpha}."""
    if check:
        report = validate(A)
        if not report.passed:
            raise AlgebroidError(f"source algebroid {A.name!r} does not validate")
    mu = dual_names(A)
    return ProlongedAlgebroid(A, mu, tuple("P_" + m[3:] for m in mu), role="dual-fiber",
                              name=f"T({A.name}^dagger)")


def _y(P: ProlongedAlgebroid):
    return [Var(y) for y in P.source.fiber]


def _source_of(P, zeta):
    if zeta.algebroid is not P.source:
        raise AlgebroidError("section does not live on the source algebroid of this prolongation")


def vertical_endo(Z: Section) -> Section:
    """S(Z) = (Z^alpha - y^alpha Z^0) V_alpha."""
    P = Z.algebroid
    if not isinstance(P, ProlongedAlgebroid):
        raise AlgebroidError("the vertical endomorphism acts on sections of a prolongation")
    coeffs = [ZERO] * P.rank
    z0 = Z.coeffs[P.X(0)]
    for alpha, y in enumerate(_y(P)):
        coeffs[P.V(alpha)] = Z.coeffs[P.X(alpha + 1)] - y * z0
    return Section(P, tuple(coeffs))


def vertical_lift(P: ProlongedAlgebroid, zeta: Section) -> Section:
    """zeta^V = (zeta^alpha - y^alpha zeta^0) V_alpha."""
    _source_of(P, zeta)
    coeffs = [ZERO] * P.rank
    z0 = zeta.coeffs[0]
    for alpha, y in enumerate(_y(P)):
        coeffs[P.V(alpha)] = zeta.coeffs[alpha + 1] - y * z0
    return Section(P, tuple(coeffs))


def complete_lift(P: ProlongedAlgebroid, zeta: Section) -> Section:
    """zeta^C = zeta^a X_a + [(dot zeta^alpha - y^alpha dot zeta^0) + C^alpha_beta (zeta^beta - y^beta zeta^0)] V_alpha."""
    _source_of(P, zeta)
    A = P.source
    ys = _y(P)
    coeffs = [ZERO] * P.rank
    for a in range(A.rank):
        coeffs[P.X(a)] = zeta.coeffs[a]
    z0 = zeta.coeffs[0]
    dz0 = A.dot(z0)
    proj = [zeta.coeffs[b + 1] - ys[b] * z0 for b in range(A.dim)]
    for alpha in range(A.dim):
        v = A.dot(zeta.coeffs[alpha + 1]) - ys[alpha] * dz0
        for beta in range(A.dim):
            if not proj[beta].is_zero_literal:
                v = v + A.Cy(alpha, beta) * proj[beta]
        coeffs[P.V(alpha)] = v
    return Section(P, tuple(coeffs))


def pullback_form(P: ProlongedAlgebroid, theta: KForm) -> KForm:
    """pr_2^* of a form on the source: same components on the X part."""
    if theta.algebroid is not P.source:
        raise AlgebroidError("form does not live on the source algebroid")
    return KForm(P, theta.degree, {tuple(P.X(a) for a in idx): v for idx, v in theta.items()})


def contact_form(P: ProlongedAlgebroid, alpha) -> KForm:
    """theta^alpha = X^alpha - y^alpha X^0."""
    y = _y(P)[alpha]
    return KForm(P, 1, {(P.X(alpha + 1),): ONE, (P.X(0),): -y})


def split_form(P: ProlongedAlgebroid, theta: KForm):
    """Split pr_2^* theta = hat * X^0 + bar into an affine function and a contact form."""
    if theta.degree != 1:
        raise ValueError("only 1-forms can be split")
    if theta.algebroid is not P.source:
        raise AlgebroidError("form does not live on the source algebroid")
    ys = _y(P)
    hat = theta[(0,)]
    bar = KForm(P, 1)
    for alpha in range(P.source.dim):
        ta = theta[(alpha + 1,)]
        hat = hat + ta * ys[alpha]
        if not ta.is_zero_literal:
            bar = bar + contact_form(P, alpha) * ta
    return simplify(hat), bar


@dataclass(frozen=True, eq=False)
class PseudoSode:
    """Gamma = X_0 + y^alpha X_alpha + F^alpha V_alpha.

    Either ``forces`` holds explicit expressions, or ``hessian``/``rhs`` define
    the forces implicitly through the linear system ``hessian . F = rhs``.
    """

    prolonged: ProlongedAlgebroid
    forces: tuple | None = None
    hessian: tuple | None = None
    rhs: tuple | None = None

    def __post_init__(self):
        n = self.prolonged.source.dim
        if self.forces is None and (self.hessian is None or self.rhs is None):
            raise ValueError("either explicit forces or an implicit (hessian, rhs) system is required")
        if self.forces is not None and len(self.forces) != n:
            raise ValueError(f"{n} force components are required")

    @property
    def explicit(self):
        return self.forces is not None

    def section(self, forces=None) -> Section:
        """Gamma as a section; ``forces`` may supply placeholders for implicit systems."""
        P = self.prolonged
        F = self.forces if forces is None else tuple(lift(f) for f in forces)
        if F is None:
            raise ValueError("implicit pseudo-SODE: pass placeholder forces explicitly")
        coeffs = [ZERO] * P.rank
        coeffs[P.X(0)] = ONE
        for alpha, y in enumerate(_y(P)):
            coeffs[P.X(alpha + 1)] = y
            coeffs[P.V(alpha)] = F[alpha]
        return Section(P, tuple(coeffs))

    @property
    def variables(self):
        return self.prolonged.chart.names

    def base_field(self, forces=None):
        """Components rho1(Gamma)(z) for every coordinate z on E."""
        from .algebroid import anchor_apply

        G = self.section(forces)
        return tuple(anchor_apply(G, Var(z)) for z in self.variables)

    def force_function(self):
        """Numeric F(state) for states ordered as ``variables``."""
        names = self.variables
        if self.explicit:
            fns = [compile_expr(f, names) for f in self.forces]
            return lambda state: np.array([f(*state) for f in fns])
        n = len(self.rhs)
        gf = [[compile_expr(lift(g), names) for g in row] for row in self.hessian]
        rf = [compile_expr(lift(r), names) for r in self.rhs]

        def solve(state):
            G = np.array([[f(*state) for f in row] for row in gf])
            b = np.array([f(*state) for f in rf])
            try:
                return np.linalg.solve(G, b) if n else np.zeros(0)
            except np.linalg.LinAlgError:
                raise EvaluationError(f"singular force system at state {tuple(state)}") from None

        return solve
