"""Execution-time certified box-QP solver with an l1 soft-constraint front end."""

from .boxqp import BoxQp, BoxQpResult, SolverParams, solve
from .certificate import Certificate, flop_budget, iteration_count, time_estimate
from .condense import MpcConfig, PlantModel, condense, double_integrator
from .errors import (CertQPError, DimensionMismatch, InvalidTolerance, NonFiniteData,
                     NotPositiveDefinite, SolverError)
from .linalg import FlopCounter, cholesky, solve_spd
from .penalty import PenaltyVector, QpInstance, SoftQpResult, solve_soft_qp
from .simulate import SimConfig, Trajectory, run

__version__ = "0.1.0"
