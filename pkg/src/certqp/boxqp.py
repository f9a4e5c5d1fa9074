"""Feasible full-Newton interior-point solver for box-constrained QPs.

Solves::

    minimize    1/2 z'Hz + z'h
    subject to  -e <= z <= e

with H symmetric positive semidefinite.  The iteration count is fixed in
advance by :func:`certqp.certificate.iteration_count` and never depends on
the data: no line search, no step clipping, no early exit.

Multiplier/slack naming: ``gamma`` and ``phi = e - z`` belong to the upper
bound, ``theta`` and ``psi = e + z`` to the lower bound.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .certificate import iteration_count
from .errors import DimensionMismatch, NonFiniteData
from .linalg import FlopCounter, as_matrix, as_vector, cholesky_flops, factor_into
from .linalg import backward_substitute, forward_substitute

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class BoxQp:
    """Box-constrained QP data ``(H, h)`` on the box ``[-1, 1]^n``."""

    H: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        H = as_matrix(self.H, "H")
        h = as_vector(self.h, "h")
        if H.shape != (h.size, h.size):
            raise DimensionMismatch(f"H has shape {H.shape} but h has length {h.size}")
        if h.size:
            scale = max(1.0, float(np.max(np.abs(H))))
            if np.max(np.abs(H - H.T)) > SYMMETRY_TOL * scale:
                raise ValueError("H is not symmetric")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)

    @property
    def n(self):
        return self.h.size

    @property
    def h_norm(self):
        return float(np.max(np.abs(self.h))) if self.n else 0.0

    @property
    def H_tilde(self):
        return self.H / self.h_norm

    @property
    def h_tilde(self):
        return self.h / self.h_norm

    def objective(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * z @ self.H @ z + z @ self.h


@dataclass(frozen=True)
class SolverParams:
    """Dimension-dependent constants of the solver.

    Use :meth:`for_dimension`; all fields are functions of ``n`` and
    ``epsilon`` only, so they can be computed offline.
    """

    n: int
    epsilon: float
    lam: float
    eta: float
    tau0: float
    iterations: int

    @classmethod
    def for_dimension(cls, n, epsilon=1e-6):
        if n < 1:
            raise ValueError("n must be at least 1")
        root2 = math.sqrt(2.0)
        eta = (root2 - 1.0) / (math.sqrt(2.0 * n) + root2 - 1.0)
        return cls(
            n=int(n),
            epsilon=float(epsilon),
            lam=1.0 / math.sqrt(n + 1.0),
            eta=eta,
            tau0=1.0 / (1.0 - eta),
            iterations=iteration_count(n, epsilon),
        )

    @property
    def shrink(self):
        """Per-iteration path factor ``1 - eta``."""
        return 1.0 - self.eta


@dataclass
class Iterate:
    """Interior-point state ``(z, gamma, theta, phi, psi, tau)``."""

    z: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    tau: float

    @property
    def v(self):
        return np.concatenate([self.gamma, self.theta])

    @property
    def s(self):
        return np.concatenate([self.phi, self.psi])

    @property
    def beta(self):
        return np.sqrt(self.v * self.s)

    @property
    def duality_gap(self):
        return float(self.gamma @ self.phi + self.theta @ self.psi)

    def min_positive(self):
        return float(min(self.gamma.min(), self.theta.min(), self.phi.min(), self.psi.min()))

    def copy(self):
        return Iterate(self.z.copy(), self.gamma.copy(), self.theta.copy(),
                       self.phi.copy(), self.psi.copy(), self.tau)


@dataclass
class NewtonDirection:
    dz: np.ndarray
    dgamma: np.ndarray
    dtheta: np.ndarray
    dphi: np.ndarray
    dpsi: np.ndarray


@dataclass
class BoxQpResult:
    """Outcome of :func:`solve`.

    ``duality_gap`` is ``v's`` of the scaled problem.  ``trace`` is filled
    only by an instrumented solve and holds one record per iteration.
    """

    z: np.ndarray
    duality_gap: float
    iterations: int
    flops: dict
    iterate: Iterate = None
    trace: list = field(default_factory=list)


def proximity(v, s, tau):
    """Distance ``||tau e - sqrt(v s)|| / tau`` to the central path.

    Examples
    --------
    >>> proximity([1.0, 4.0], [1.0, 1.0], 1.0)
    1.0
    """
    beta = np.sqrt(np.asarray(v, dtype=float) * np.asarray(s, dtype=float))
    return float(np.linalg.norm(tau - beta) / tau)


def init_iterate(boxqp, params, counter=None):
    """Strictly feasible starting point for the scaled problem.

    ``z = 0``, ``gamma = e - lam h~``, ``theta = e + lam h~``,
    ``phi = psi = e`` with ``h~ = h / ||h||_inf``.  Requires ``h != 0``.
    """
    n = boxqp.n
    lam_h = boxqp.h / boxqp.h_norm
    lam_h *= params.lam
    if counter is not None:
        counter.add(2 * n, "vector")
        counter.add(2 * n, "vector")
    return Iterate(
        z=np.zeros(n),
        gamma=1.0 - lam_h,
        theta=1.0 + lam_h,
        phi=np.ones(n),
        psi=np.ones(n),
        tau=params.tau0,
    )


class _Workspace:
    """Buffers reused across all iterations of one solve."""

    def __init__(self, scaled_H):
        n = scaled_H.shape[0]
        self.K0 = scaled_H
        self.K = np.empty((n, n))
        self.L = np.empty((n, n))
        self.diag = np.arange(n)
        self.p = np.empty(n)
        self.q = np.empty(n)
        self.sp = np.empty(n)
        self.sq = np.empty(n)
        self.a = np.empty(n)
        self.b = np.empty(n)
        self.rhs = np.empty(n)
        self.dgamma = np.empty(n)
        self.dtheta = np.empty(n)


def scaled_hessian(boxqp, params, counter=None):
    """``2 lam H~`` = ``(2 lam / ||h||_inf) H``."""
    n = boxqp.n
    c = 2.0 * params.lam / boxqp.h_norm
    if counter is not None:
        counter.add(1, "scalar")
        counter.add(n * n, "vector")
    return c * boxqp.H


def _direction(it, ws, counter):
    """Newton direction at ``it`` (with ``it.tau`` already updated).

    Returns ``dz, dgamma, dtheta`` as workspace buffers.
    """
    n = it.z.size
    tau = it.tau
    p, q, sp, sq, a, b = ws.p, ws.q, ws.sp, ws.sq, ws.a, ws.b

    np.divide(it.gamma, it.phi, out=p)
    np.divide(it.theta, it.psi, out=q)
    ws.K[...] = ws.K0
    ws.K[ws.diag, ws.diag] += p + q
    factor_into(ws.K, ws.L)

    np.sqrt(p, out=sp)
    np.sqrt(q, out=sq)
    # a = 2(tau sqrt(p) - gamma), b = 2(tau sqrt(q) - theta)
    np.multiply(sp, tau, out=a)
    a -= it.gamma
    a *= 2.0
    np.multiply(sq, tau, out=b)
    b -= it.theta
    b *= 2.0
    np.subtract(b, a, out=ws.rhs)

    if counter is not None:
        counter.add(2 * n, "vector")      # p, q
        counter.add(2 * n, "vector")      # diagonal of the Newton matrix
        counter.add(cholesky_flops(n), "factorize")
        counter.add(2 * n, "vector")      # square roots
        counter.add(7 * n, "vector")      # a, b, rhs
    dz = backward_substitute(ws.L, forward_substitute(ws.L, ws.rhs, counter), counter)

    np.multiply(p, dz, out=ws.dgamma)
    ws.dgamma += a
    np.multiply(q, dz, out=ws.dtheta)
    np.subtract(b, ws.dtheta, out=ws.dtheta)
    if counter is not None:
        counter.add(4 * n, "vector")
    return dz, ws.dgamma, ws.dtheta


def newton_step(iterate, boxqp, params, counter=None):
    """Full Newton direction at ``iterate`` for the scaled box QP.

    ``iterate.tau`` is the target path parameter.  The direction solves
    ``(2 lam H~ + diag(gamma/phi) + diag(theta/psi)) dz
    = 2 (sqrt(theta/psi) tau - sqrt(gamma/phi) tau + gamma - theta)``
    and ``dphi = -dz``, ``dpsi = dz``.
    """
    ws = _Workspace(scaled_hessian(boxqp, params))
    dz, dgamma, dtheta = _direction(iterate, ws, counter)
    return NewtonDirection(dz=dz, dgamma=dgamma.copy(), dtheta=dtheta.copy(),
                           dphi=-dz, dpsi=dz.copy())


def _trace_record(k, it, beta_before, tau):
    n = it.z.size
    xi_before = float(np.linalg.norm(tau - beta_before) / tau)
    xi_after = proximity(it.v, it.s, tau)
    gap = it.duality_gap
    return {
        "k": k,
        "tau": tau,
        "xi_before": xi_before,
        "xi_after": xi_after,
        "duality_gap": gap,
        "gap_bound": 2 * n * tau**2,
        "min_positive": it.min_positive(),
        "box_residual": float(max(np.max(np.abs(it.phi - (1.0 - it.z))),
                                  np.max(np.abs(it.psi - (1.0 + it.z))))),
    }


def solve(boxqp, params=None, counter=None, trace=False):
    """Solve a box QP in exactly ``params.iterations`` iterations.

    Parameters
    ----------
    boxqp : BoxQp
    params : SolverParams, optional
        Defaults to ``SolverParams.for_dimension(boxqp.n)``.
    counter : FlopCounter, optional
        Receives the flops of phases ``step3``, ``step4`` and ``step5``.
    trace : bool
        Instrumented mode: record proximity, duality gap and positivity
        after every iteration.

    Returns
    -------
    BoxQpResult
        ``iterations`` is 0 when ``h == 0`` (the minimizer is ``z = 0``).
    """
    if not isinstance(boxqp, BoxQp):
        raise TypeError("solve expects a BoxQp")
    if not (np.all(np.isfinite(boxqp.H)) and np.all(np.isfinite(boxqp.h))):
        raise NonFiniteData("box QP data contains non-finite entries")
    n = boxqp.n
    own = counter if counter is not None else FlopCounter()
    if n == 0:
        return BoxQpResult(np.zeros(0), 0.0, 0, own.snapshot())
    if params is None:
        params = SolverParams.for_dimension(n)
    elif params.n != n:
        raise DimensionMismatch(f"params built for n={params.n}, problem has n={n}")

    with own.phase("step3"):
        h_norm = boxqp.h_norm
        own.add(n, "scalar")
    if h_norm == 0.0:
        return BoxQpResult(np.zeros(n), 0.0, 0, own.snapshot())

    with own.phase("step4"):
        ws = _Workspace(scaled_hessian(boxqp, params, own))
        it = init_iterate(boxqp, params, own)

    records = []
    shrink = params.shrink
    with own.phase("step5"):
        for k in range(1, params.iterations + 1):
            it.tau *= shrink
            own.add(1, "scalar")
            beta_before = np.sqrt(it.v * it.s) if trace else None
            dz, dgamma, dtheta = _direction(it, ws, own)
            it.z += dz
            it.gamma += dgamma
            it.theta += dtheta
            it.phi -= dz
            it.psi += dz
            own.add(5 * n, "vector")
            if trace:
                records.append(_trace_record(k, it, beta_before, it.tau))

    return BoxQpResult(
        z=it.z.copy(),
        duality_gap=it.duality_gap,
        iterations=params.iterations,
        flops=own.snapshot(),
        iterate=it,
        trace=records,
    )
