"""Linear Poisson structure on the extended dual induced by a bidual algebroid."""
from __future__ import annotations

import itertools

from .algebroid import Section, VectorAlgebroid
from .errors import AlgebroidError
from .symkernel import ZERO, Chart, Var, Verdict, diff, free_vars, lift, simplify, zero_test


def dual_names(A: VectorAlgebroid):
    """Names of the dual fibre coordinates mu_a, one per frame element."""
    fiber = getattr(A, "fiber", None)
    if fiber is not None:
        return ("mu_0",) + tuple(f"mu_{y}" for y in fiber)
    return tuple(f"mu_{name}" for name in A.frame)


class PoissonTensor:
    """Component table {z_A, z_B} over the dual chart (x^i, mu_a)."""

    def __init__(self, A: VectorAlgebroid):
        self.algebroid = A
        self.mu = dual_names(A)
        clash = set(self.mu) & set(A.chart.names)
        if clash:
            raise AlgebroidError(f"dual coordinates clash with base coordinates: {sorted(clash)}")
        self.chart = A.chart + Chart(self.mu, ("dual-fiber",) * len(self.mu))
        table = {}
        for a, ma in enumerate(self.mu):
            for i, x in enumerate(A.chart.names):
                r = A.anchor[i][a]
                if not r.is_zero_literal:
                    table[(ma, x)] = r
                    table[(x, ma)] = -r
        for a, b in itertools.combinations(range(A.rank), 2):
            v = ZERO
            for c, mc in enumerate(self.mu):
                C = A.structure_function(c, a, b)
                if not C.is_zero_literal:
                    v = v + C * Var(mc)
            if not v.is_zero_literal:
                table[(self.mu[a], self.mu[b])] = v
                table[(self.mu[b], self.mu[a])] = -v
        self._table = table

    def __getitem__(self, pair):
        return self._table.get(tuple(pair), ZERO)

    def nonzero(self):
        return dict(self._table)

    def bracket(self, F, G):
        F, G = lift(F), lift(G)
        fv, gv = free_vars(F), free_vars(G)
        out = ZERO
        for (za, zb), lam in self._table.items():
            if za not in fv or zb not in gv:
                continue
            out = out + lam * diff(F, za) * diff(G, zb)
        return out

    def jacobi_terms(self):
        """Cyclic sums {z_A,{z_B,z_C}} + ... over all coordinate triples."""
        names = self.chart.names
        for a, b, c in itertools.combinations(names, 3):
            A, B, C = Var(a), Var(b), Var(c)
            total = (self.bracket(A, self.bracket(B, C)) + self.bracket(B, self.bracket(C, A))
                     + self.bracket(C, self.bracket(A, B)))
            yield (a, b, c), total

    def mu0_symmetry(self, domain=None) -> Verdict:
        """ZERO iff every component is independent of mu_0 (the affine criterion)."""
        mu0 = self.mu[0]
        verdict = Verdict.ZERO
        for lam in self._table.values():
            v = zero_test(diff(lam, mu0), domain).verdict
            if v is Verdict.NONZERO:
                return v
            if v is Verdict.UNKNOWN:
                verdict = v
        return verdict


def poisson_bracket(P: PoissonTensor, F, G):
    """{F, G} = sum Lambda^{AB} dF/dz_A dG/dz_B."""
    return P.bracket(F, G)


def linear_function_of(zeta: Section, P: PoissonTensor | None = None):
    """The fibre-linear function zeta^a mu_a on the dual."""
    mu = P.mu if P is not None else dual_names(zeta.algebroid)
    out = ZERO
    for c, m in zip(zeta.coeffs, mu):
        if not c.is_zero_literal:
            out = out + c * Var(m)
    return simplify(out)
