"""Shared generators for the test-suite (random polynomials, sections, forms)."""
from __future__ import annotations

import itertools
import random
from pathlib import Path

import affalg
from affalg.algebroid import Section
from affalg.calculus import KForm
from affalg.cli import load
from affalg.symkernel import Const, Var, simplify

FIXTURE_DIR = Path(affalg.__file__).parent / "fixtures"
POSITIVE = ("canonical_j1", "trivial_vectorfield", "affine_liealgebra_point", "euler_top")
LAGRANGIAN = ("canonical_j1", "euler_top")


def fixture_path(name):
    return str(FIXTURE_DIR / f"{name}.alg")


def fixture(name):
    return load(fixture_path(name))


def random_poly(rng: random.Random, names, terms=3, degree=2):
    """Small integer-coefficient polynomial in ``names`` (constant if names is empty)."""
    out = Const(0)
    for _ in range(rng.randint(1, terms)):
        t = Const(rng.randint(-3, 3))
        for _ in range(rng.randint(0, degree) if names else 0):
            t = t * Var(rng.choice(names))
        out = out + t
    return simplify(out)


def random_section(rng, A, names=None):
    names = A.chart.names if names is None else names
    return Section(A, tuple(random_poly(rng, names) for _ in range(A.rank)))


def random_form(rng, A, k, names=None):
    names = A.chart.names if names is None else names
    comps = {}
    for idx in itertools.combinations(range(A.rank), k):
        if rng.random() < 0.7:
            comps[idx] = random_poly(rng, names)
    return KForm(A, k, comps)
