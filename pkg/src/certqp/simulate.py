"""Closed-loop simulation of soft-constrained MPC."""

import io
import time
from dataclasses import dataclass, field

import numpy as np

from .certificate import flop_budget
from .condense import PlantModel, condense
from .errors import CertQPError, DimensionMismatch, SolverError
from .linalg import FlopCounter
from .penalty import precompute, solve_soft_qp


def step_plant(model, x, u):
    """``x+ = A x + B u``."""
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x.shape != (model.n_x,) or u.shape != (model.n_u,):
        raise DimensionMismatch(
            f"expected state of length {model.n_x} and input of length {model.n_u}"
        )
    return model.A @ x + model.B @ u


@dataclass
class SimConfig:
    plant: PlantModel
    mpc: object
    x0: np.ndarray = field(default_factory=lambda: np.array([0.0, -2.0]))
    steps: int = 60
    epsilon: float = 1e-6
    flops_per_second: float = 1e9

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        self.x0 = np.asarray(self.x0, dtype=float)


@dataclass
class Trajectory:
    """Per-step log of a closed-loop run.

    ``states[t]`` is the state at which the problem of step ``t`` was
    solved and ``inputs[t]`` the input applied from it.
    """

    states: np.ndarray
    inputs: np.ndarray
    soft_violation: np.ndarray
    hard_violation: np.ndarray
    iterations: np.ndarray
    online_flops: np.ndarray
    solve_seconds: np.ndarray
    final_state: np.ndarray
    certificate: object = None

    @property
    def steps(self):
        return self.states.shape[0]

    def header(self):
        xs = [f"x{i + 1}" for i in range(self.states.shape[1])]
        nu = self.inputs.shape[1]
        us = ["u"] if nu == 1 else [f"u{i + 1}" for i in range(nu)]
        return ["step"] + xs + us + ["soft_violation", "hard_violation",
                                     "iterations", "online_flops", "solve_seconds"]

    def to_csv(self):
        buf = io.StringIO()
        buf.write(",".join(self.header()) + "\n")
        for t in range(self.steps):
            floats = list(self.states[t]) + list(self.inputs[t]) + [
                self.soft_violation[t], self.hard_violation[t]]
            cells = [str(t)] + [f"{v:.12g}" for v in floats] + [
                str(int(self.iterations[t])), str(int(self.online_flops[t])),
                f"{self.solve_seconds[t]:.12g}"]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def summary(self):
        return {
            "max_abs_u": float(np.max(np.abs(self.inputs))),
            "max_soft_violation": float(np.max(self.soft_violation)),
            "max_hard_violation": float(np.max(self.hard_violation)),
            "iterations": sorted(set(int(k) for k in self.iterations)),
        }


def run(config):
    """Simulate the closed loop for ``config.steps`` steps.

    ``Q``'s factor and ``H`` are computed once; each step only rebuilds
    the state-dependent ``h``.  Solver errors are re-raised as
    :class:`SolverError` carrying the failing step index.
    """
    model, mpc = config.plant, config.mpc
    cqp = condense(model, mpc, config.x0)
    try:
        cached = precompute(cqp.qp, cqp.penalty)
    except CertQPError as exc:
        # the offline factorization belongs to the first solve
        raise SolverError(0, exc) from exc
    nx, nu = model.n_x, model.n_u
    steps = config.steps

    states = np.zeros((steps, nx))
    inputs = np.zeros((steps, nu))
    soft = np.zeros(steps)
    hard = np.zeros(steps)
    iters = np.zeros(steps, dtype=int)
    flops = np.zeros(steps, dtype=np.int64)
    seconds = np.zeros(steps)

    x = config.x0.copy()
    for t in range(steps):
        qp = cqp.at_state(x)
        counter = FlopCounter()
        start = time.perf_counter()
        try:
            res = solve_soft_qp(qp, cqp.penalty, config.epsilon, cached, counter)
        except CertQPError as exc:
            raise SolverError(t, exc) from exc
        seconds[t] = time.perf_counter() - start
        u = res.y[:nu]
        states[t] = x
        inputs[t] = u
        soft[t] = _soft_violation(mpc, x)
        hard[t] = max(0.0, float(np.max(u - mpc.u_max)), float(np.max(mpc.u_min - u)))
        iters[t] = res.iterations
        flops[t] = counter.total
        x = step_plant(model, x, u)

    cert = flop_budget(cqp.qp.m, cqp.qp.n, config.epsilon, True, config.flops_per_second)
    return Trajectory(states, inputs, soft, hard, iters, flops, seconds, x, cert)


def _soft_violation(mpc, x):
    if mpc.n_soft == 0:
        return 0.0
    return max(0.0, float(np.max(mpc.C @ x - mpc.d)))
