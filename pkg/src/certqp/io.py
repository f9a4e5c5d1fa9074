"""JSON problem and solution files.

Problem file fields: ``m``, ``n``, ``n_x``, ``Q``, ``F``, ``G``, ``g``,
``S``, ``x``, ``rho``, ``hard_row_count`` (the first rows are hard) and
``epsilon``.  Matrices are row-major nested lists; floats are written with
Python's shortest round-trip representation, so a write/read cycle is
bit-exact.
"""

import json

import numpy as np

from .errors import CertQPError
from .penalty import PenaltyVector, QpInstance

PROBLEM_FIELDS = ("m", "n", "n_x", "Q", "F", "G", "g", "S", "x", "rho",
                  "hard_row_count", "epsilon")


class ProblemFileError(CertQPError, ValueError):
    """A problem file is malformed; the message names the offending field."""


def _matrix(data, key, shape):
    try:
        a = np.array(data[key], dtype=float)
    except KeyError:
        raise ProblemFileError(f"missing field {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(f"field {key!r} is not numeric: {exc}") from None
    if a.size == 0 and 0 in shape:
        a = a.reshape(shape)
    if a.shape != shape:
        raise ProblemFileError(f"field {key!r} has shape {a.shape}, expected {shape}")
    if not np.all(np.isfinite(a)):
        raise ProblemFileError(f"field {key!r} contains non-finite entries")
    return a


def problem_from_dict(data):
    """Validate a decoded problem file; returns ``(qp, penalty, epsilon)``."""
    for key in ("m", "n", "n_x"):
        if key not in data:
            raise ProblemFileError(f"missing field {key!r}")
        if not isinstance(data[key], int) or data[key] < 0:
            raise ProblemFileError(f"field {key!r} must be a non-negative integer")
    m, n, nx = data["m"], data["n"], data["n_x"]
    Q = _matrix(data, "Q", (m, m))
    if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(Q), initial=0.0)):
        raise ProblemFileError("field 'Q' is not symmetric")
    F = _matrix(data, "F", (m, nx))
    G = _matrix(data, "G", (n, m))
    g = _matrix(data, "g", (n,))
    S = _matrix(data, "S", (n, nx))
    x = _matrix(data, "x", (nx,))
    rho = _matrix(data, "rho", (n,))
    if not np.all(rho > 0):
        raise ProblemFileError("field 'rho' must be strictly positive")
    hard = data.get("hard_row_count", 0)
    if not isinstance(hard, int) or not 0 <= hard <= n:
        raise ProblemFileError(f"field 'hard_row_count' must be an integer in [0, {n}]")
    epsilon = data.get("epsilon", 1e-6)
    if not isinstance(epsilon, (int, float)) or not 0 < epsilon < 2 * max(n, 1):
        raise ProblemFileError("field 'epsilon' must be a number in (0, 2n)")
    qp = QpInstance(Q=Q, F=F, G=G, g=g, S=S, x=x)
    return qp, PenaltyVector(rho, np.arange(n) < hard), float(epsilon)


def load_problem(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ProblemFileError("problem file must hold a JSON object")
    return problem_from_dict(data)


def problem_to_dict(qp, penalty, epsilon=1e-6):
    hard = int(np.count_nonzero(penalty.hard))
    return {
        "m": qp.m, "n": qp.n, "n_x": qp.n_x,
        "Q": qp.Q.tolist(), "F": qp.F.tolist(), "G": qp.G.tolist(),
        "g": qp.g.tolist(), "S": qp.S.tolist(), "x": qp.x.tolist(),
        "rho": penalty.rho.tolist(), "hard_row_count": hard,
        "epsilon": float(epsilon),
    }


def save_problem(path, qp, penalty, epsilon=1e-6):
    with open(path, "w") as fh:
        json.dump(problem_to_dict(qp, penalty, epsilon), fh, indent=1)
        fh.write("\n")


def solution_to_dict(result):
    return {
        "y": result.y.tolist(),
        "z": result.z.tolist(),
        "multipliers": result.multipliers.tolist(),
        "violations": result.violations.tolist(),
        "duality_gap": float(result.duality_gap),
        "iterations": int(result.iterations),
        "online_flops": int(result.online_flops),
    }


def save_solution(path, result):
    with open(path, "w") as fh:
        json.dump(solution_to_dict(result), fh, indent=1)
        fh.write("\n")


def load_solution(path):
    with open(path) as fh:
        data = json.load(fh)
    for key in ("y", "z", "multipliers", "violations"):
        data[key] = np.array(data[key], dtype=float)
    return data
