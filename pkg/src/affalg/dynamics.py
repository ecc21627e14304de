"""Fixed-step integration of the base vector field of a pseudo-SODE."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EvaluationError, IntegrationAborted
from .prolong import PseudoSode
from .symkernel import Var, compile_expr, lift


@dataclass
class Trajectory:
    base_names: tuple
    fiber_names: tuple
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    residual: np.ndarray
    h: float
    monitors: dict = field(default_factory=dict)
    complete: bool = True

    @property
    def nodes(self):
        return len(self.t)

    def state(self, k):
        return dict(zip(self.base_names + self.fiber_names, np.concatenate([self.x[k], self.y[k]])))

    def endpoint(self):
        return self.state(self.nodes - 1)

    def header(self):
        return (["t"] + [f"x_{n}" for n in self.base_names] + [f"y_{n}" for n in self.fiber_names]
                + ["adm_residual"] + list(self.monitors))

    def rows(self):
        for k in range(self.nodes):
            row = [self.t[k], *self.x[k], *self.y[k], self.residual[k]]
            row += [self.monitors[m][k] for m in self.monitors]
            yield row

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.header())
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])

    def to_json_dict(self, metadata: Mapping | None = None):
        return {
            "metadata": dict(metadata or {}, h=self.h, nodes=self.nodes, complete=self.complete),
            "columns": self.header(),
            "data": [[float(v) for v in row] for row in self.rows()],
        }

    def to_json(self, path, metadata: Mapping | None = None):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(metadata), fh, indent=1)


def node_count(t0, t1, h):
    return int(math.floor((t1 - t0) / h + 1e-9)) + 1


def _vector_field(sode: PseudoSode):
    """(xdot(state), ydot(state), direct admissibility expressions) compiled on the state order."""
    P = sode.prolonged
    A = P.source
    names = sode.variables
    nb = len(A.chart)
    if sode.explicit:
        field_exprs = sode.base_field()
        x_fns = [compile_expr(e, names) for e in field_exprs[:nb]]
        y_fns = [compile_expr(e, names) for e in field_exprs[nb:]]

        def ydot(state):
            return np.array([f(*state) for f in y_fns])
    else:
        from .lagrangian import force_placeholders

        field_exprs = sode.base_field(force_placeholders(A.dim))
        x_fns = [compile_expr(e, names) for e in field_exprs[:nb]]
        ydot = sode.force_function()

    def xdot(state):
        return np.array([f(*state) for f in x_fns])

    # independent evaluation of rho^i_0 + rho^i_alpha y^alpha from the source anchor
    adm = []
    for i in range(nb):
        e = A.anchor[i][0]
        for alpha, y in enumerate(A.fiber):
            e = e + A.anchor[i][alpha + 1] * Var(y)
        adm.append(compile_expr(e, names))

    def admissible(state):
        return np.array([f(*state) for f in adm])

    return xdot, ydot, admissible


def integrate(sode: PseudoSode, state0, t0: float, t1: float, h: float, monitors=None) -> Trajectory:
    """Classical fourth-order Runge-Kutta on (x, y) with a uniform grid.

    ``state0`` maps coordinate names to values (or is a sequence in chart
    order).  Raises IntegrationAborted with the partial trajectory on
    evaluation failure or a non-finite state.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    P = sode.prolonged
    A = P.source
    names = sode.variables
    nb = len(A.chart)
    if isinstance(state0, Mapping):
        missing = [n for n in names if n not in state0]
        if missing:
            raise ValueError(f"initial state is missing {missing}")
        z = np.array([float(state0[n]) for n in names])
    else:
        z = np.asarray(state0, dtype=float)
        if z.shape != (len(names),):
            raise ValueError(f"initial state needs {len(names)} components")
    xdot, ydot, admissible = _vector_field(sode)

    def f(state):
        return np.concatenate([xdot(state), ydot(state)])

    N = node_count(t0, t1, h)
    Z = np.empty((N, len(names)))
    res = np.empty(N)
    ts = t0 + h * np.arange(N)

    def partial(k):
        traj = Trajectory(A.chart.names, A.fiber, ts[:k], Z[:k, :nb].copy(), Z[:k, nb:].copy(), res[:k].copy(), h,
                          complete=False)
        return traj

    for k in range(N):
        if not np.all(np.isfinite(z)):
            raise IntegrationAborted(f"non-finite state at node {k}", node=k, trajectory=partial(k))
        Z[k] = z
        try:
            res[k] = float(np.max(np.abs(xdot(z) - admissible(z)), initial=0.0))
            if k == N - 1:
                break
            k1 = f(z)
            k2 = f(z + 0.5 * h * k1)
            k3 = f(z + 0.5 * h * k2)
            k4 = f(z + h * k3)
        except EvaluationError as exc:
            raise IntegrationAborted(f"evaluation failed at node {k}: {exc}", node=k,
                                     trajectory=partial(k + 1)) from None
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    traj = Trajectory(A.chart.names, A.fiber, ts, Z[:, :nb].copy(), Z[:, nb:].copy(), res, h)
    if monitors:
        table = monitor(sode, monitors, traj)
        traj.monitors = table.values
    return traj


@dataclass
class MonitorTable:
    values: dict
    errors: list

    def __getitem__(self, name):
        return self.values[name]


def monitor(sode: PseudoSode, exprs, traj: Trajectory) -> MonitorTable:
    """Sample expressions over (x, y) at every node; failed nodes are listed in ``errors``."""
    from .algebroid import as_expr

    names = sode.variables
    if not isinstance(exprs, Mapping):
        exprs = {str(e): e for e in exprs}
    values, errors = {}, []
    for label, e in exprs.items():
        fn = compile_expr(as_expr(e, names) if isinstance(e, str) else lift(e), names)
        col = np.empty(traj.nodes)
        for k in range(traj.nodes):
            state = np.concatenate([traj.x[k], traj.y[k]])
            try:
                col[k] = fn(*state)
            except EvaluationError as exc:
                col[k] = np.nan
                errors.append((label, k, str(exc)))
        values[label] = col
    return MonitorTable(values, errors)


def integrate_batch(sode: PseudoSode, states: Sequence, t0, t1, h, monitors=None, workers=None):
    """Integrate several initial conditions concurrently (one trajectory per task)."""
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(integrate, sode, s, t0, t1, h, monitors) for s in states]
        return [fut.result() for fut in futures]
