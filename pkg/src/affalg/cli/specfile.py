"""Declarative algebroid spec files (``.alg``, YAML syntax).

Layout::

    name: euler_top
    base: [t]
    fiber: [y1, y2, y3]
    parameters: {I1: 1, I2: 2, I3: 3}
    anchor:
      rho0: ["1"]                 # one entry per base coordinate
      rho: [["0", "0", "0"]]      # rows = base coordinates, cols = fibre
    structure:
      C0: {"y2,y1": "..."}        # gamma, beta  -> [e_0, e_beta] component on e_gamma
      C:  {"y3,y1,y2": "1"}       # gamma, alpha, beta with alpha < beta
    exact: t                      # optional e^0 exactness probe
    lagrangian: "(I1*y1^2 + I2*y2^2 + I3*y3^2)/2"
    integrate:
      initial: {t: 0, y1: 1, y2: 1, y3: 1}
      t0: 0
      t1: 5
      h: 0.001
      monitors: {energy: "..."}
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from ..algebroid import AffineAlgebroid
from ..errors import AffalgError, ParseError
from ..symkernel import Const, Expr, parse, simplify, substitute, to_text

TOP_KEYS = {"name", "base", "fiber", "parameters", "anchor", "structure", "exact", "lagrangian", "integrate"}
INTEGRATE_KEYS = {"initial", "t0", "t1", "h", "monitors"}


class SpecError(AffalgError):
    """Malformed spec document; ``where`` is the key path of the offending entry."""

    def __init__(self, message, where=None, source=None):
        self.where = where
        self.source = source
        loc = ":".join(str(p) for p in (source, where) if p)
        super().__init__(f"{loc}: {message}" if loc else message)


def _names(value, where, source):
    if value is None:
        return ()
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, str) and v.isidentifier() for v in value):
        raise SpecError("expected a list of identifiers", where, source)
    if len(set(value)) != len(value):
        raise SpecError("duplicate coordinate names", where, source)
    return tuple(value)


def _number(value, where, source):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SpecError("expected a number", where, source)
    try:
        v = Fraction(value) if not isinstance(value, float) else value
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"expected a number, got {value!r}", where, source) from None
    return v


@dataclass
class AlgebroidSpec:
    """Parsed spec file.  Expressions keep parameter names; ``algebroid()`` substitutes them."""

    base: tuple
    fiber: tuple
    rho0: tuple
    rho: tuple
    C0: dict = field(default_factory=dict)
    C: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    name: str | None = None
    exact: Expr | None = None
    lagrangian: Expr | None = None
    integrate: dict | None = None
    source: str | None = None

    @property
    def names(self):
        return self.base + self.fiber

    def _bind(self, e):
        if e is None or not self.parameters:
            return e
        return simplify(substitute(e, {k: Const(v) for k, v in self.parameters.items()}))

    def algebroid(self) -> AffineAlgebroid:
        b = self._bind
        return AffineAlgebroid.from_components(
            self.base, self.fiber,
            [b(e) for e in self.rho0],
            [[b(e) for e in row] for row in self.rho],
            {k: b(v) for k, v in self.C0.items()},
            {k: b(v) for k, v in self.C.items()},
            name=self.name,
        )

    def bound_lagrangian(self):
        return self._bind(self.lagrangian)

    def bound_exact(self):
        return self._bind(self.exact)

    def bound_monitors(self):
        mons = (self.integrate or {}).get("monitors") or {}
        return {k: self._bind(v) for k, v in mons.items()}

    def to_dict(self):
        fy = self.fiber
        out = {"name": self.name} if self.name else {}
        out["base"] = list(self.base)
        out["fiber"] = list(self.fiber)
        if self.parameters:
            out["parameters"] = {k: _plain(v) for k, v in self.parameters.items()}
        out["anchor"] = {"rho0": [to_text(e) for e in self.rho0],
                         "rho": [[to_text(e) for e in row] for row in self.rho]}
        structure = {}
        if self.C0:
            structure["C0"] = {f"{fy[g]},{fy[b]}": to_text(v) for (g, b), v in sorted(self.C0.items())}
        if self.C:
            structure["C"] = {f"{fy[g]},{fy[a]},{fy[b]}": to_text(v) for (g, a, b), v in sorted(self.C.items())}
        if structure:
            out["structure"] = structure
        if self.exact is not None:
            out["exact"] = to_text(self.exact)
        if self.lagrangian is not None:
            out["lagrangian"] = to_text(self.lagrangian)
        if self.integrate is not None:
            blk = {}
            for k in ("t0", "t1", "h"):
                if k in self.integrate:
                    blk[k] = _plain(self.integrate[k])
            if "initial" in self.integrate:
                blk["initial"] = {k: _plain(v) for k, v in self.integrate["initial"].items()}
            if self.integrate.get("monitors"):
                blk["monitors"] = {k: to_text(v) for k, v in self.integrate["monitors"].items()}
            out["integrate"] = blk
        return out

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    def dump(self, path):
        Path(path).write_text(self.dumps())


def _plain(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return v


def loads(text: str, source=None) -> AlgebroidSpec:
    try:
        doc = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise SpecError(f"malformed YAML ({getattr(exc, 'problem', exc)})", where, source) from None
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a mapping", None, source)
    return from_dict(doc, source)


def load(path) -> AlgebroidSpec:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec file ({exc.strerror or exc})", None, str(path)) from None
    return loads(text, str(path))


def from_dict(doc: dict, source=None) -> AlgebroidSpec:
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise SpecError(f"unknown keys {sorted(unknown)}", None, source)
    base = _names(doc.get("base"), "base", source)
    fiber = _names(doc.get("fiber"), "fiber", source)
    if set(base) & set(fiber):
        raise SpecError(f"base and fibre share names {sorted(set(base) & set(fiber))}", "fiber", source)
    params = doc.get("parameters") or {}
    if not isinstance(params, dict):
        raise SpecError("expected a mapping", "parameters", source)
    parameters = {}
    for k, v in params.items():
        if not isinstance(k, str) or not k.isidentifier() or k in base or k in fiber:
            raise SpecError(f"invalid parameter name {k!r}", "parameters", source)
        parameters[k] = _number(v, f"parameters.{k}", source)
    pnames = tuple(parameters)

    def expr(value, where, allowed):
        if isinstance(value, bool) or value is None:
            raise SpecError("expected an expression", where, source)
        text = value if isinstance(value, str) else repr(value)
        try:
            return simplify(parse(text, allowed + pnames))
        except ParseError as exc:
            raise SpecError(str(exc), where, source) from None

    anchor = doc.get("anchor") or {}
    if not isinstance(anchor, dict):
        raise SpecError("expected a mapping", "anchor", source)
    raw0 = anchor.get("rho0", [0] * len(base))
    raw = anchor.get("rho", [[0] * len(fiber) for _ in base])
    if not isinstance(raw0, list) or len(raw0) != len(base):
        raise SpecError(f"expected {len(base)} entries (one per base coordinate)", "anchor.rho0", source)
    if not isinstance(raw, list) or len(raw) != len(base):
        raise SpecError(f"expected {len(base)} rows (one per base coordinate)", "anchor.rho", source)
    rho0 = tuple(expr(v, f"anchor.rho0[{i}]", base) for i, v in enumerate(raw0))
    rho = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != len(fiber):
            raise SpecError(f"expected {len(fiber)} entries", f"anchor.rho[{i}]", source)
        rho.append(tuple(expr(v, f"anchor.rho[{i}][{j}]", base) for j, v in enumerate(row)))

    structure = doc.get("structure") or {}
    if not isinstance(structure, dict) or set(structure) - {"C0", "C"}:
        raise SpecError("expected a mapping with keys C0 and C", "structure", source)

    def indices(key, n, where):
        parts = [p.strip() for p in str(key).split(",")]
        if len(parts) != n:
            raise SpecError(f"expected {n} comma-separated fibre names", where, source)
        try:
            return tuple(fiber.index(p) for p in parts)
        except ValueError:
            raise SpecError(f"fibre index out of range in {key!r}", where, source) from None

    C0, C = {}, {}
    for key, v in (structure.get("C0") or {}).items():
        where = f"structure.C0[{key}]"
        C0[indices(key, 2, where)] = expr(v, where, base)
    for key, v in (structure.get("C") or {}).items():
        where = f"structure.C[{key}]"
        g, a, b = indices(key, 3, where)
        if not a < b:
            raise SpecError("structure entries need alpha < beta", where, source)
        C[(g, a, b)] = expr(v, where, base)

    exact = expr(doc["exact"], "exact", base) if "exact" in doc else None
    lag = expr(doc["lagrangian"], "lagrangian", base + fiber) if "lagrangian" in doc else None

    integrate = None
    if "integrate" in doc:
        blk = doc["integrate"] or {}
        if not isinstance(blk, dict) or set(blk) - INTEGRATE_KEYS:
            raise SpecError(f"expected a mapping with keys {sorted(INTEGRATE_KEYS)}", "integrate", source)
        integrate = {}
        for k in ("t0", "t1", "h"):
            if k in blk:
                integrate[k] = _number(blk[k], f"integrate.{k}", source)
        if "initial" in blk:
            init = blk["initial"]
            if not isinstance(init, dict) or set(init) != set(base + fiber):
                raise SpecError(f"initial state must assign exactly {list(base + fiber)}", "integrate.initial",
                                source)
            integrate["initial"] = {k: _number(init[k], f"integrate.initial.{k}", source) for k in base + fiber}
        mons = blk.get("monitors") or {}
        if isinstance(mons, list):
            mons = {str(m): m for m in mons}
        if not isinstance(mons, dict):
            raise SpecError("expected a mapping label -> expression", "integrate.monitors", source)
        integrate["monitors"] = {str(k): expr(v, f"integrate.monitors.{k}", base + fiber) for k, v in mons.items()}

    name = doc.get("name")
    if name is None and source:
        name = Path(source).stem
    return AlgebroidSpec(base, fiber, rho0, tuple(rho), C0, C, parameters, name, exact, lag, integrate,
                         source)
