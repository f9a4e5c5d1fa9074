"""Soft-constrained QPs via an l1 penalty and a box-QP reformulation.

The general QP::

    minimize    1/2 y'Qy + y'(Fx)
    subject to  G y <= g + Sx

is softened to ``1/2 y'Qy + y'Fx + rho' max(0, Gy - g - Sx)`` with a
per-row penalty vector ``rho``.  Eliminating ``y`` from the optimality
conditions of the smooth slack form leaves a QP in the constraint
multipliers ``zh`` on the box ``0 <= zh <= rho``; the substitution
``z = 2 zh / rho - e`` maps it to ``[-1, 1]^n`` with::

    M = G Q^{-1} G'          r = G Q^{-1} F x + g + S x
    H = diag(rho) M diag(rho)
    h = H e + 2 rho * r

and ``y = -Q^{-1} (Fx + G' zh)`` recovers the primal solution.  ``Q^{-1}``
is never formed; every product with it goes through the Cholesky factor.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import boxqp as _boxqp
from .errors import DimensionMismatch
from .linalg import (FlopCounter, LowerFactor, as_matrix, as_vector, cholesky,
                     forward_substitute, matmul, matvec, solve_spd)


@dataclass(frozen=True)
class QpInstance:
    """Data of ``min 1/2 y'Qy + y'Fx  s.t.  Gy <= g + Sx`` at one time step."""

    Q: np.ndarray
    F: np.ndarray
    G: np.ndarray
    g: np.ndarray
    S: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, "Q")
        G = as_matrix(self.G, "G")
        g = as_vector(self.g, "g")
        x = as_vector(self.x, "x")
        F = as_matrix(self.F, "F")
        S = as_matrix(self.S, "S")
        m, n, nx = Q.shape[0], G.shape[0], x.size
        if Q.shape != (m, m):
            raise DimensionMismatch(f"Q must be square, got {Q.shape}")
        if F.shape != (m, nx):
            raise DimensionMismatch(f"F must be {(m, nx)}, got {F.shape}")
        if G.shape != (n, m):
            raise DimensionMismatch(f"G must be {(n, m)}, got {G.shape}")
        if g.shape != (n,):
            raise DimensionMismatch(f"g must have length {n}, got {g.size}")
        if S.shape != (n, nx):
            raise DimensionMismatch(f"S must be {(n, nx)}, got {S.shape}")
        for name, value in (("Q", Q), ("F", F), ("G", G), ("g", g), ("S", S), ("x", x)):
            object.__setattr__(self, name, value)

    @classmethod
    def from_vectors(cls, Q, Fx, G, gSx):
        """Instance whose ``Fx`` and ``g + Sx`` are given directly (``n_x = 1``, ``x = 1``)."""
        Fx = np.asarray(Fx, dtype=float).reshape(-1, 1)
        gSx = np.asarray(gSx, dtype=float).ravel()
        return cls(Q=Q, F=Fx, G=G, g=gSx, S=np.zeros((gSx.size, 1)), x=np.ones(1))

    @property
    def m(self):
        return self.Q.shape[0]

    @property
    def n(self):
        return self.G.shape[0]

    @property
    def n_x(self):
        return self.x.size

    @property
    def Fx(self):
        return self.F @ self.x

    @property
    def Sx(self):
        return self.S @ self.x

    @property
    def bound(self):
        """Right-hand side ``g + Sx``."""
        return self.g + self.Sx

    def with_state(self, x):
        return QpInstance(self.Q, self.F, self.G, self.g, self.S, x)

    def objective(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * y @ self.Q @ y + y @ self.Fx


@dataclass(frozen=True)
class PenaltyVector:
    """Strictly positive per-row penalties with an optional hard/soft flag per row."""

    rho: np.ndarray
    hard: np.ndarray = None

    def __post_init__(self):
        rho = as_vector(self.rho, "rho")
        if not np.all(rho > 0):
            raise ValueError("penalties must be strictly positive")
        hard = (np.zeros(rho.size, dtype=bool) if self.hard is None
                else np.asarray(self.hard, dtype=bool))
        if hard.shape != rho.shape:
            raise DimensionMismatch("hard-row mask must match rho")
        if hard.any() and (~hard).any() and rho[hard].min() < rho[~hard].max():
            warnings.warn("some hard-row penalty is below a soft-row penalty; "
                          "hard constraints may be violated first", stacklevel=2)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "hard", hard)

    @classmethod
    def uniform(cls, n, value):
        return cls(np.full(n, float(value)))

    @property
    def n(self):
        return self.rho.size


def _rho(penalty):
    return penalty.rho if isinstance(penalty, PenaltyVector) else as_vector(penalty, "rho")


@dataclass(frozen=True)
class CachedData:
    """Offline data for time-invariant ``(Q, G, rho)``: factor of ``Q`` and ``H``."""

    factor: LowerFactor
    H: np.ndarray
    He: np.ndarray = None


def factor_q(qp, counter=None):
    """Cholesky factor of ``Q`` (charged to phase ``step1``)."""
    counter = counter if counter is not None else FlopCounter()
    with counter.phase("step1"):
        return cholesky(qp.Q, counter)


def _build_H(G, rho, factor, counter):
    # H = W'W with W = L^{-1} (diag(rho) G)'
    Gr = rho[:, None] * G
    if counter is not None:
        counter.add(G.size, "vector")
    W = forward_substitute(factor, Gr.T, counter)
    return matmul(W.T, W, counter)


def precompute(qp, penalty, counter=None):
    """Offline step for time-invariant problems: factor ``Q`` and build ``H``."""
    counter = counter if counter is not None else FlopCounter()
    rho = _rho(penalty)
    factor = factor_q(qp, counter)
    with counter.phase("step2_H"):
        H = _build_H(qp.G, rho, factor, counter)
    return CachedData(factor=factor, H=H)


@dataclass
class Intermediates:
    """Byproducts of :func:`build_boxqp`: the factor of ``Q`` and ``r``."""

    factor: LowerFactor
    r: np.ndarray
    G: np.ndarray

    @property
    def M(self):
        """``G Q^{-1} G'`` (diagnostic; not flop-counted)."""
        V = forward_substitute(self.factor, self.G.T)
        return V.T @ V


def build_boxqp(qp, penalty, counter=None, cached=None):
    """Scaled box QP ``(H, h)`` for a soft QP.

    Parameters
    ----------
    qp : QpInstance
    penalty : PenaltyVector or array_like
    counter : FlopCounter, optional
        Charged under phases ``step1``, ``step2_H`` (only without
        ``cached``) and ``step2_h``.
    cached : CachedData, optional
        Offline factor of ``Q`` and ``H``; reused without online flops.

    Returns
    -------
    (BoxQp, Intermediates)
    """
    rho = _rho(penalty)
    if rho.size != qp.n:
        raise DimensionMismatch(f"rho has length {rho.size}, problem has {qp.n} rows")
    counter = counter if counter is not None else FlopCounter()
    if cached is None:
        cached = precompute(qp, rho, counter)
    factor, H = cached.factor, cached.H
    if factor.dimension != qp.m or H.shape != (qp.n, qp.n):
        raise DimensionMismatch("cached data does not match the problem dimensions")
    n = qp.n
    with counter.phase("step2_h"):
        u = solve_spd(factor, qp.Fx, counter)
        r = matvec(qp.G, u, counter) + qp.bound
        counter.add(2 * n, "vector")
        He = matvec(H, np.ones(n), counter)
        h = He + 2.0 * rho * r
        counter.add(3 * n, "vector")
    return _boxqp.BoxQp(H, h), Intermediates(factor=factor, r=r, G=qp.G)


@dataclass
class SoftQpResult:
    """Solution of a soft-constrained QP.

    ``multipliers`` are the constraint multipliers ``(rho z + rho) / 2``,
    which lie in ``[0, rho]``; ``violations`` is ``max(0, Gy - g - Sx)``.
    """

    y: np.ndarray
    z: np.ndarray
    multipliers: np.ndarray
    violations: np.ndarray
    duality_gap: float
    iterations: int
    flops: dict
    trace: list = None

    @property
    def online_flops(self):
        return self.flops.get("total", 0)


def recover_solution(qp, penalty, z, counter=None, factor=None):
    """Recover ``y = -Q^{-1}(Fx + G'(rho z + rho)/2)`` from a box-QP solution.

    Charged to phase ``step6``.  Multipliers and violations are reporting
    extras computed outside the counter.
    """
    rho = _rho(penalty)
    z = as_vector(z, "z")
    if z.size != qp.n or rho.size != qp.n:
        raise DimensionMismatch("z and rho must have one entry per constraint row")
    counter = counter if counter is not None else FlopCounter()
    if factor is None:
        factor = cholesky(qp.Q)
    m, n = qp.m, qp.n
    with counter.phase("step6"):
        t = rho * z + rho
        counter.add(2 * n, "vector")
        rhs = 0.5 * matvec(qp.G.T, t, counter) + qp.Fx
        counter.add(2 * m, "vector")
        y = -solve_spd(factor, rhs, counter)
    multipliers = 0.5 * t
    violations = np.maximum(0.0, qp.G @ y - qp.bound)
    return SoftQpResult(
        y=y, z=z, multipliers=multipliers, violations=violations,
        duality_gap=0.0, iterations=0, flops=counter.snapshot(),
    )


def solve_soft_qp(qp, penalty, epsilon=1e-6, cached=None, counter=None, trace=False):
    """Solve the l1-penalized QP in a data-independent number of iterations.

    Examples
    --------
    >>> qp = QpInstance.from_vectors([[1.0]], [1.0], [[1.0]], [0.5])
    >>> res = solve_soft_qp(qp, [10.0])
    >>> round(float(res.y[0]), 4), res.iterations
    (-1.0, 30)
    """
    counter = counter if counter is not None else FlopCounter()
    box, inter = build_boxqp(qp, penalty, counter, cached)
    params = _boxqp.SolverParams.for_dimension(box.n, epsilon) if box.n else None
    result = _boxqp.solve(box, params, counter, trace=trace)
    soft = recover_solution(qp, penalty, result.z, counter, inter.factor)
    soft.duality_gap = result.duality_gap
    soft.iterations = result.iterations
    soft.flops = counter.snapshot()
    soft.trace = result.trace
    return soft


def penalty_objective(qp, penalty, y):
    """Nonsmooth objective ``1/2 y'Qy + y'Fx + rho' max(0, Gy - g - Sx)``."""
    rho = _rho(penalty)
    y = np.asarray(y, dtype=float)
    return qp.objective(y) + rho @ np.maximum(0.0, qp.G @ y - qp.bound)


def smooth_objective(qp, penalty, y, w):
    """Objective of the slack form ``1/2 y'Qy + y'Fx + rho'w``."""
    return qp.objective(y) + _rho(penalty) @ np.asarray(w, dtype=float)


def kkt_residuals(qp, penalty, result):
    """Complementarity residuals of a soft solution.

    Returns ``delta = w - Gy + g + Sx`` and the two products
    ``zh * delta`` and ``w * (rho - zh)``.
    """
    rho = _rho(penalty)
    zh, w = result.multipliers, result.violations
    delta = w - qp.G @ result.y + qp.bound
    return {
        "delta": delta,
        "multiplier_slack": zh * delta,
        "violation_slack": w * (rho - zh),
        "stationarity": qp.Q @ result.y + qp.Fx + qp.G.T @ zh,
    }


def saturated_hard_rows(result, penalty, rel=0.01):
    """Indices of hard rows whose multiplier is within ``rel`` of its penalty.

    A hit suggests the hard penalty may be too small for exact recovery.
    """
    if not isinstance(penalty, PenaltyVector):
        return np.zeros(0, dtype=int)
    close = result.multipliers >= (1.0 - rel) * penalty.rho
    return np.flatnonzero(close & penalty.hard)
