"""Condensed MPC problems for linear time-invariant plants.

Decision variables are the inputs ``U = (u_0, ..., u_{T-1})``; predicted
states ``X = (x_1, ..., x_T) = Gamma x_0 + Phi U``.  The cost::

    sum_{k=1}^{T-1} x_k'Qx x_k + x_T'P x_T + sum_{k=0}^{T-1} u_k'R u_k

equals ``2 (1/2 U'QU + U'F x_0) + const`` with ``Q = Phi'Qbar Phi + Rbar``
and ``F = Phi'Qbar Gamma``.

Constraint rows: hard input bounds first (all upper bounds, then all
lower bounds, time-major), then soft state half-spaces ``c_i x_k <= d_i``
for ``k = 1..T`` (time-major).
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionMismatch
from .penalty import PenaltyVector, QpInstance


@dataclass(frozen=True)
class PlantModel:
    """Discrete-time model ``x+ = A x + B u``; ``dt`` is metadata only."""

    A: np.ndarray
    B: np.ndarray
    dt: float = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"incompatible A {A.shape} and B {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n_x(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.B.shape[1]


@dataclass(frozen=True)
class MpcConfig:
    horizon: int
    Qx: np.ndarray
    P: np.ndarray
    R: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    C: np.ndarray = None
    d: np.ndarray = None
    rho_hard: float = 100.0
    rho_soft: float = 10.0

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        Qx = np.atleast_2d(np.asarray(self.Qx, dtype=float))
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        u_min = np.atleast_1d(np.asarray(self.u_min, dtype=float))
        u_max = np.atleast_1d(np.asarray(self.u_max, dtype=float))
        if not np.all(u_min < u_max):
            raise ValueError("u_min must be strictly below u_max")
        if self.C is None:
            C = np.zeros((0, Qx.shape[0]))
            d = np.zeros(0)
        else:
            C = np.atleast_2d(np.asarray(self.C, dtype=float))
            d = np.atleast_1d(np.asarray(self.d, dtype=float))
        if C.shape[0] != d.size:
            raise DimensionMismatch("C and d must have the same number of rows")
        if not (self.rho_hard > 0 and self.rho_soft > 0):
            raise ValueError("penalties must be positive")
        for name, value in (("Qx", Qx), ("P", P), ("R", R), ("u_min", u_min),
                            ("u_max", u_max), ("C", C), ("d", d)):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def n_soft(self):
        """Number of state half-spaces per stage."""
        return self.C.shape[0]


@dataclass(frozen=True)
class RowLayout:
    hard: int
    soft: int

    @property
    def n(self):
        return self.hard + self.soft

    def mask(self):
        return np.arange(self.n) < self.hard


@dataclass
class CondensedQp:
    Gamma: np.ndarray
    Phi: np.ndarray
    qp: QpInstance
    layout: RowLayout
    penalty: PenaltyVector
    extras: dict = field(default_factory=dict)

    def at_state(self, x):
        return self.qp.with_state(np.asarray(x, dtype=float))


def prediction_matrices(A, B, horizon):
    """``Gamma`` (stacked ``A^k``, k=1..T) and ``Phi`` (``A^{k-j-1} B`` for j < k)."""
    nx, nu = B.shape
    Gamma = np.zeros((horizon * nx, nx))
    Phi = np.zeros((horizon * nx, horizon * nu))
    powers = [np.eye(nx)]
    for _ in range(horizon):
        powers.append(A @ powers[-1])
    for k in range(1, horizon + 1):
        rows = slice((k - 1) * nx, k * nx)
        Gamma[rows] = powers[k]
        for j in range(k):
            Phi[rows, j * nu:(j + 1) * nu] = powers[k - j - 1] @ B
    return Gamma, Phi


def assemble_penalty(config, layout):
    """Penalty vector: ``rho_hard`` on hard rows, ``rho_soft`` on soft rows."""
    rho = np.concatenate([np.full(layout.hard, float(config.rho_hard)),
                          np.full(layout.soft, float(config.rho_soft))])
    return PenaltyVector(rho, layout.mask())


def condense(model, config, x0=None):
    """Build the condensed QP of an MPC problem.

    ``x0`` only sets the state stored in the returned ``QpInstance``; all
    matrices are state independent.
    """
    nx, nu = model.n_x, model.n_u
    T = config.horizon
    if config.Qx.shape != (nx, nx) or config.P.shape != (nx, nx):
        raise DimensionMismatch("state weights must be n_x by n_x")
    if config.R.shape != (nu, nu):
        raise DimensionMismatch("input weight must be n_u by n_u")
    if config.u_min.size != nu or config.u_max.size != nu:
        raise DimensionMismatch("input bounds must have n_u entries")
    if config.C.shape[1] != nx:
        raise DimensionMismatch("state constraint rows must have n_x columns")

    Gamma, Phi = prediction_matrices(model.A, model.B, T)
    Qbar = block_diag(*([config.Qx] * (T - 1) + [config.P]))
    Rbar = block_diag(*([config.R] * T))
    QPhi = Qbar @ Phi
    Q = Phi.T @ QPhi + Rbar
    Q = 0.5 * (Q + Q.T)
    F = QPhi.T @ Gamma

    m = T * nu
    eye = np.eye(m)
    G_hard = np.vstack([eye, -eye])
    g_hard = np.concatenate([np.tile(config.u_max, T), -np.tile(config.u_min, T)])
    Cbar = np.kron(np.eye(T), config.C)
    G = np.vstack([G_hard, Cbar @ Phi])
    g = np.concatenate([g_hard, np.tile(config.d, T)])
    S = np.vstack([np.zeros((2 * m, nx)), -Cbar @ Gamma])

    layout = RowLayout(hard=2 * m, soft=T * config.n_soft)
    x = np.zeros(nx) if x0 is None else np.asarray(x0, dtype=float)
    qp = QpInstance(Q=Q, F=F, G=G, g=g, S=S, x=x)
    return CondensedQp(Gamma=Gamma, Phi=Phi, qp=qp, layout=layout,
                       penalty=assemble_penalty(config, layout),
                       extras={"Qbar": Qbar, "Rbar": Rbar})


def double_integrator(rho_hard=100.0, rho_soft=10.0, horizon=10):
    """Discrete double integrator with ``|u| <= 1`` and soft ``x_1 >= -1``."""
    model = PlantModel(A=[[1.0, 1.0], [0.0, 1.0]], B=[[0.0], [1.0]], dt=0.01)
    config = MpcConfig(
        horizon=horizon,
        Qx=np.eye(2),
        P=np.eye(2),
        R=[[0.1]],
        u_min=[-1.0],
        u_max=[1.0],
        C=[[-1.0, 0.0]],
        d=[1.0],
        rho_hard=rho_hard,
        rho_soft=rho_soft,
    )
    return model, config


def load_config(path):
    """Read a ``(PlantModel, MpcConfig)`` pair from a JSON file.

    Keys: ``A``, ``B``, ``dt`` (optional), ``horizon``, ``Qx``, ``P``,
    ``R``, ``u_min``, ``u_max``, ``C`` and ``d`` (optional), ``rho_hard``,
    ``rho_soft``.  Matrices are row-major nested lists.
    """
    with open(path) as fh:
        data = json.load(fh)
    return config_from_dict(data)


def config_from_dict(data):
    try:
        model = PlantModel(A=data["A"], B=data["B"], dt=data.get("dt"))
        config = MpcConfig(
            horizon=data["horizon"],
            Qx=data["Qx"],
            P=data.get("P", data["Qx"]),
            R=data["R"],
            u_min=data["u_min"],
            u_max=data["u_max"],
            C=data.get("C"),
            d=data.get("d"),
            rho_hard=data.get("rho_hard", 100.0),
            rho_soft=data.get("rho_soft", 10.0),
        )
    except KeyError as exc:
        raise ValueError(f"config is missing field {exc.args[0]!r}") from None
    return model, config
