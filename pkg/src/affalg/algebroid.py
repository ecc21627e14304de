"""Lie algebroids given by a frame, anchor matrix and structure functions.

A :class:`VectorAlgebroid` stores the anchor ``rho[i][a]`` and the structure
functions ``C^c_{ab}`` (only for ``a < b``).  An :class:`AffineAlgebroid` is a
vector algebroid on the bidual frame ``(e_0, e_1, ..., e_n)`` where index 0 is
the distinguished element; the affine condition is that no bracket of frame
sections has an ``e_0`` component.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import AlgebroidError
from .symkernel import ZERO, Chart, Expr, Verdict, diff, free_vars, lift, parse, simplify, zero_test


def as_expr(value, names=None):
    """Expressions pass through, strings are parsed, numbers become constants."""
    if isinstance(value, str):
        return simplify(parse(value, names))
    return simplify(lift(value))


class VectorAlgebroid:
    """Lie algebroid data over a coordinate chart in a fixed local frame."""

    def __init__(self, chart: Chart, frame: Sequence[str], anchor, structure: Mapping | None = None, *, name=None):
        self.chart = chart if isinstance(chart, Chart) else Chart(tuple(chart))
        self.frame = tuple(frame)
        self.name = name
        if len(set(self.frame)) != len(self.frame):
            raise AlgebroidError(f"duplicate frame names in {self.frame}")
        n, m = len(self.chart), len(self.frame)
        rows = [tuple(as_expr(v) for v in row) for row in anchor]
        if len(rows) != n or any(len(r) != m for r in rows):
            raise AlgebroidError(f"anchor must be a {n}x{m} matrix")
        self.anchor = tuple(rows)
        table = {}
        for key, value in (structure or {}).items():
            c, a, b = key
            if not (0 <= c < m and 0 <= a < m and 0 <= b < m):
                raise AlgebroidError(f"structure index {key} out of range for a frame of size {m}")
            if not a < b:
                raise AlgebroidError(f"structure functions are stored for a < b only, got {key}")
            v = as_expr(value)
            if not v.is_zero_literal:
                table[(c, a, b)] = v
        self.structure = table
        allowed = set(self.chart.names)
        for e in itertools.chain(itertools.chain.from_iterable(self.anchor), self.structure.values()):
            extra = free_vars(e) - allowed
            if extra:
                raise AlgebroidError(
                    f"structure data may only depend on the coordinates {self.chart.names}; found {sorted(extra)}"
                )
        # anchor columns as sparse vector fields: frame index -> ((coord, coeff), ...)
        self._fields = tuple(
            tuple((self.chart.names[i], self.anchor[i][a]) for i in range(n) if not self.anchor[i][a].is_zero_literal)
            for a in range(m)
        )

    def __repr__(self):
        return f"{type(self).__name__}({self.name or ''!s}, chart={self.chart.names}, frame={self.frame})"

    @property
    def rank(self):
        return len(self.frame)

    def structure_function(self, c, a, b) -> Expr:
        """C^c_{ab} with skew-symmetry applied."""
        if a == b:
            return ZERO
        if a < b:
            return self.structure.get((c, a, b), ZERO)
        return -self.structure.get((c, b, a), ZERO)

    def frame_bracket(self, a, b):
        """Coefficients of [e_a, e_b]."""
        return tuple(self.structure_function(c, a, b) for c in range(self.rank))

    def vector_field(self, a):
        """The anchor image of e_a as sparse (coordinate, coefficient) pairs."""
        return self._fields[a]

    def apply_field(self, a, f: Expr) -> Expr:
        """rho(e_a)(f)."""
        out = ZERO
        for x, coeff in self._fields[a]:
            d = diff(f, x)
            if not d.is_zero_literal:
                out = out + coeff * d
        return out

    # sections ------------------------------------------------------------
    def section(self, coeffs) -> "Section":
        return Section(self, tuple(as_expr(c) for c in coeffs))

    def basis(self, a) -> "Section":
        return Section(self, tuple(lift(1 if b == a else 0) for b in range(self.rank)))

    def zero_section(self) -> "Section":
        return Section(self, (ZERO,) * self.rank)

    def default_domain(self):
        return {}


class AffineAlgebroid(VectorAlgebroid):
    """Affine Lie algebroid stored on its bidual frame ``(e_0, e_alpha)``.

    ``fiber`` holds the fibre coordinate names ``y^alpha`` of E, one per
    frame element ``e_alpha`` (frame positions 1..n).
    """

    def __init__(self, chart, frame, anchor, structure=None, *, fiber, name=None):
        super().__init__(chart, frame, anchor, structure, name=name)
        self.fiber = tuple(fiber)
        if len(self.fiber) != self.rank - 1:
            raise AlgebroidError("one fibre coordinate per non-distinguished frame element is required")
        clash = set(self.fiber) & set(self.chart.names)
        if clash:
            raise AlgebroidError(f"fibre coordinates clash with base coordinates: {sorted(clash)}")

    @classmethod
    def from_components(cls, base, fiber, rho0, rho, C0=None, C=None, *, name=None, frame=None):
        """Build from the split data rho^i_0, rho^i_alpha, C^g_{0b}, C^g_{ab}.

        ``rho0[i]``; ``rho[i][alpha]``; ``C0[(gamma, beta)]``;
        ``C[(gamma, alpha, beta)]`` with alpha < beta.  Fibre indices are
        0-based positions in ``fiber``.
        """
        base, fiber = tuple(base), tuple(fiber)
        n = len(fiber)
        if len(rho0) != len(base) or len(rho) != len(base):
            raise AlgebroidError("one anchor row per base coordinate is required")
        anchor = []
        for i in range(len(base)):
            if len(rho[i]) != n:
                raise AlgebroidError(f"anchor row {i} must have {n} entries")
            anchor.append((rho0[i],) + tuple(rho[i]))
        structure = {}
        for (g, b), v in (C0 or {}).items():
            _check_fiber_index(n, g, b)
            structure[(g + 1, 0, b + 1)] = v
        for (g, a, b), v in (C or {}).items():
            _check_fiber_index(n, g, a, b)
            if not a < b:
                raise AlgebroidError(f"structure entries need alpha < beta, got {(g, a, b)}")
            structure[(g + 1, a + 1, b + 1)] = v
        frame = tuple(frame) if frame else ("e_0",) + tuple(f"e_{y}" for y in fiber)
        return cls(Chart(base), frame, anchor, structure, fiber=fiber, name=name)

    @classmethod
    def from_vector(cls, algebroid: VectorAlgebroid, fiber, name=None):
        """View a vector algebroid on a bidual frame as affine (index 0 distinguished)."""
        return cls(algebroid.chart, algebroid.frame, algebroid.anchor, algebroid.structure, fiber=fiber,
                   name=name or algebroid.name)

    @property
    def dim(self):
        return len(self.fiber)

    def rho0(self, i):
        return self.anchor[i][0]

    def rho(self, i, alpha):
        return self.anchor[i][alpha + 1]

    def C0(self, gamma, beta):
        return self.structure_function(gamma + 1, 0, beta + 1)

    def C(self, gamma, alpha, beta):
        return self.structure_function(gamma + 1, alpha + 1, beta + 1)

    def Cy(self, gamma, alpha):
        """C^gamma_alpha = C^gamma_{0 alpha} + C^gamma_{beta alpha} y^beta (a function on E)."""
        out = self.C0(gamma, alpha)
        for b, yb in enumerate(self.fiber):
            out = out + self.C(gamma, b, alpha) * lift(yb)
        return out

    def dot(self, f: Expr) -> Expr:
        """Complete lift of a base function: (rho^i_0 + rho^i_alpha y^alpha) df/dx^i."""
        out = self.apply_field(0, f)
        for alpha, y in enumerate(self.fiber):
            out = out + lift(y) * self.apply_field(alpha + 1, f)
        return out

    @property
    def e0_components(self):
        """Entries C^0_{ab} that break the affine condition."""
        return {k: v for k, v in self.structure.items() if k[0] == 0}


def _check_fiber_index(n, *idx):
    for i in idx:
        if not 0 <= i < n:
            raise AlgebroidError(f"fibre index {i} out of range for fibre dimension {n}")


@dataclass(frozen=True, eq=False)
class Section:
    algebroid: VectorAlgebroid
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.algebroid.rank:
            raise AlgebroidError(f"a section needs {self.algebroid.rank} coefficients, got {len(self.coeffs)}")

    def __getitem__(self, a):
        return self.coeffs[a]

    def __iter__(self):
        return iter(self.coeffs)

    def _same(self, other):
        if not isinstance(other, Section) or other.algebroid is not self.algebroid:
            raise AlgebroidError("sections belong to different algebroids")

    def __add__(self, other):
        self._same(other)
        return Section(self.algebroid, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._same(other)
        return Section(self.algebroid, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return Section(self.algebroid, tuple(-a for a in self.coeffs))

    def __mul__(self, f):
        f = lift(f)
        return Section(self.algebroid, tuple(f * a for a in self.coeffs))

    __rmul__ = __mul__

    def __str__(self):
        terms = [f"({c})*{name}" for c, name in zip(self.coeffs, self.algebroid.frame) if not c.is_zero_literal]
        return " + ".join(terms) if terms else "0"

    def zero_test(self, domain=None):
        """Component-wise zero test; returns (verdict, index, witness) of the first failure."""
        worst = (Verdict.ZERO, None, None)
        for a, c in enumerate(self.coeffs):
            t = zero_test(c, domain)
            if t.verdict is Verdict.NONZERO:
                return (Verdict.NONZERO, a, t.witness)
            if t.verdict is Verdict.UNKNOWN:
                worst = (Verdict.UNKNOWN, a, None)
        return worst

    def is_zero(self, domain=None) -> Verdict:
        return self.zero_test(domain)[0]


def anchor_apply(zeta: Section, f) -> Expr:
    """rho(zeta)(f) = zeta^a rho^i_a df/dx^i."""
    A = zeta.algebroid
    f = lift(f)
    out = ZERO
    for a, za in enumerate(zeta.coeffs):
        if za.is_zero_literal:
            continue
        out = out + za * A.apply_field(a, f)
    return out


def bracket(s1: Section, s2: Section) -> Section:
    """Bracket of sections by Leibniz extension of the frame brackets."""
    s1._same(s2)
    A = s1.algebroid
    m = A.rank
    out = [ZERO] * m
    for a, f in enumerate(s1.coeffs):
        if f.is_zero_literal:
            continue
        for b, g in enumerate(s2.coeffs):
            if g.is_zero_literal:
                continue
            # f rho(e_a)(g) e_b - g rho(e_b)(f) e_a + f g C^c_{ab} e_c
            out[b] = out[b] + f * A.apply_field(a, g)
            out[a] = out[a] - g * A.apply_field(b, f)
            if a != b:
                fg = None
                for c in range(m):
                    C = A.structure_function(c, a, b)
                    if not C.is_zero_literal:
                        fg = f * g if fg is None else fg
                        out[c] = out[c] + fg * C
    return Section(A, tuple(out))


# -- validation ------------------------------------------------------------------

@dataclass
class AxiomResult:
    name: str
    verdict: Verdict = Verdict.ZERO
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return self.verdict is Verdict.ZERO

    def record(self, label, test):
        """Count one identity; ``test`` is None for an identity that vanished literally."""
        self.checked += 1
        if test is None:
            return
        if test.verdict is Verdict.NONZERO:
            self.verdict = Verdict.NONZERO
            self.failures.append({"identity": label, "witness": test.witness, "value": test.value})
        elif test.verdict is Verdict.UNKNOWN:
            if self.verdict is Verdict.ZERO:
                self.verdict = Verdict.UNKNOWN
            self.failures.append({"identity": label, "witness": None, "value": None})

    def to_dict(self):
        return {
            "axiom": self.name,
            "result": {Verdict.ZERO: "pass", Verdict.NONZERO: "fail", Verdict.UNKNOWN: "unknown"}[self.verdict],
            "checked": self.checked,
            "failures": self.failures,
        }


@dataclass
class ValidationReport:
    algebroid: str
    results: list

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def __getitem__(self, name):
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        return {"algebroid": self.algebroid, "passed": self.passed, "axioms": [r.to_dict() for r in self.results]}


def check_jacobi_brackets(A: VectorAlgebroid, domain=None) -> AxiomResult:
    """Direct Jacobi check on frame triples (debug cross-check of the d^2 = 0 route)."""
    res = AxiomResult("jacobi_brackets")
    for a, b, c in itertools.combinations(range(A.rank), 3):
        ea, eb, ec = A.basis(a), A.basis(b), A.basis(c)
        total = bracket(ea, bracket(eb, ec)) + bracket(eb, bracket(ec, ea)) + bracket(ec, bracket(ea, eb))
        for k, coeff in enumerate(total.coeffs):
            res.record(f"Jac({A.frame[a]},{A.frame[b]},{A.frame[c]})[{A.frame[k]}]", zero_test(coeff, domain))
    return res


def validate(A: VectorAlgebroid, *, exact_function=None, domain=None, debug=False) -> ValidationReport:
    """Check the algebroid axioms; failures carry one witness point each.

    ``exact_function`` optionally names a base function f for the probe
    ``df == e^0`` (affine algebroids only).
    """
    from .calculus import KForm, d

    domain = domain or A.default_domain()
    results = []

    jac = AxiomResult("jacobi")
    for x in A.chart.names:
        dd = d(d(KForm.function(A, lift(x))))
        if dd.is_zero_literal:
            jac.record(f"d^2 {x}", None)
        for idx, coeff in dd.items():
            jac.record(f"d^2 {x} [{','.join(A.frame[i] for i in idx)}]", zero_test(coeff, domain))
    for c in range(A.rank):
        dd = d(d(KForm.coframe(A, c)))
        if dd.is_zero_literal:
            jac.record(f"d^2 {A.frame[c]}*", None)
        for idx, coeff in dd.items():
            jac.record(f"d^2 {A.frame[c]}* [{','.join(A.frame[i] for i in idx)}]", zero_test(coeff, domain))
    results.append(jac)

    anc = AxiomResult("anchor_morphism")
    for a, b in itertools.combinations(range(A.rank), 2):
        ea, eb = A.basis(a), A.basis(b)
        br = bracket(ea, eb)
        for x in A.chart.names:
            xf = lift(x)
            lhs = anchor_apply(br, xf)
            rhs = anchor_apply(ea, anchor_apply(eb, xf)) - anchor_apply(eb, anchor_apply(ea, xf))
            anc.record(f"rho[{A.frame[a]},{A.frame[b]}]({x})", zero_test(lhs - rhs, domain))
    results.append(anc)

    if isinstance(A, AffineAlgebroid):
        aff = AxiomResult("affine")
        for a, b in itertools.combinations(range(A.rank), 2):
            aff.record(f"C^0_({A.frame[a]},{A.frame[b]})", zero_test(A.structure_function(0, a, b), domain))
        for idx, coeff in d(KForm.coframe(A, 0)).items():
            aff.record(f"d e^0 [{','.join(A.frame[i] for i in idx)}]", zero_test(coeff, domain))
        results.append(aff)
        if exact_function is not None:
            ex = AxiomResult("e0_exact")
            diffs = d(KForm.function(A, lift(exact_function))) - KForm.coframe(A, 0)
            for a in range(A.rank):
                ex.record(f"(df - e^0)[{A.frame[a]}]", zero_test(diffs[(a,)], domain))
            results.append(ex)

    if debug:
        results.append(check_jacobi_brackets(A, domain))
    return ValidationReport(A.name or "algebroid", results)
