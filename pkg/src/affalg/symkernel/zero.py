"""Probabilistic zero testing and the sampling configuration it shares."""
from __future__ import annotations

import contextlib
import contextvars
import enum
import random
from dataclasses import dataclass, replace
from typing import Mapping

from ..errors import EvaluationError
from .nodes import Const, Expr, lift
from .ops import compile_expr, free_vars
from .simplify import simplify


class Verdict(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"

    def __bool__(self):
        raise TypeError("compare a Verdict explicitly, e.g. `v is Verdict.ZERO`")


@dataclass(frozen=True)
class SamplingConfig:
    samples: int = 25
    tol: float = 1e-9
    seed: int = 0
    low: float = -1.0
    high: float = 1.0


_config = contextvars.ContextVar("affalg_sampling", default=SamplingConfig())


def sampling_config() -> SamplingConfig:
    return _config.get()


@contextlib.contextmanager
def sampling(**overrides):
    """Temporarily override sample count, tolerance, seed or default box."""
    token = _config.set(replace(_config.get(), **{k: v for k, v in overrides.items() if v is not None}))
    try:
        yield _config.get()
    finally:
        _config.reset(token)


@dataclass(frozen=True)
class ZeroTest:
    verdict: Verdict
    witness: dict | None = None
    value: float | None = None


def sample_points(variables, domain: Mapping[str, tuple] | None = None, count=None, seed=None):
    """Deterministic pseudo-random points in the box ``domain``."""
    cfg = _config.get()
    rng = random.Random(cfg.seed if seed is None else seed)
    domain = domain or {}
    out = []
    for _ in range(cfg.samples if count is None else count):
        out.append({v: rng.uniform(*domain.get(v, (cfg.low, cfg.high))) for v in variables})
    return out


def zero_test(e, domain: Mapping[str, tuple] | None = None, *, samples=None, tol=None, seed=None) -> ZeroTest:
    cfg = _config.get()
    samples = cfg.samples if samples is None else samples
    tol = cfg.tol if tol is None else tol
    s = simplify(lift(e))
    if isinstance(s, Const):
        if s.value == 0:
            return ZeroTest(Verdict.ZERO)
        return ZeroTest(Verdict.NONZERO, {}, float(s.value))
    fv = tuple(sorted(free_vars(s)))
    fn = compile_expr(s, fv)
    pts = sample_points(fv, domain, count=4 * samples, seed=seed)
    good = 0
    for p in pts:
        try:
            val = fn(*(p[v] for v in fv))
        except EvaluationError:
            continue
        if abs(val) > tol:
            return ZeroTest(Verdict.NONZERO, p, val)
        good += 1
        if good >= samples:
            break
    if good < max(1, samples // 2):
        return ZeroTest(Verdict.UNKNOWN)
    return ZeroTest(Verdict.ZERO)


def is_zero(e, domain: Mapping[str, tuple] | None = None, **kw) -> Verdict:
    """Tri-state zero test: simplification first, then random sampling."""
    return zero_test(e, domain, **kw).verdict
