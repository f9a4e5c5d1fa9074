"""A-priori execution-time certificates.

The solver runs a fixed number of iterations that depends only on the
problem dimension ``n`` and tolerance ``eps``::

    N = ceil( log(2n/eps) / (-2 log(sqrt(2n) / (sqrt(2n) + sqrt(2) - 1))) ) + 1

Together with per-step flop polynomials this gives a worst-case flop
count, and dividing by a sustained flop rate gives an execution-time
bound.
"""

import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidTolerance

CEIL_GUARD = 1e-12

STEPS = ("step1", "step2_H", "step2_h", "step3", "step4", "step5", "step6")
OFFLINE_STEPS = ("step1", "step2_H")


def iteration_count(n, epsilon):
    """Exact iteration count of the box-QP solver for dimension ``n``.

    Examples
    --------
    >>> iteration_count(30, 1e-6)
    173
    >>> iteration_count(1, 1e-6)
    30
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if not (epsilon > 0 and epsilon < 2 * n):
        raise InvalidTolerance(f"epsilon must lie in (0, {2 * n}), got {epsilon!r}")
    root = math.sqrt(2 * n)
    # -log(root / (root + sqrt2 - 1)) == log1p((sqrt2 - 1) / root)
    ratio = math.log(2 * n / epsilon) / (2.0 * math.log1p((math.sqrt(2.0) - 1.0) / root))
    nearest = round(ratio)
    if abs(ratio - nearest) <= CEIL_GUARD:
        ratio = float(nearest)
    return math.ceil(ratio) + 1


def _cubic(k):
    # k^3/3 + k^2/2 + k/6, always an integer
    return (2 * k**3 + 3 * k**2 + k) // 6


def per_iteration_flops(n):
    """Flops of one solver iteration in the published cost model."""
    return 1 + _cubic(n) + 2 * n**2 + 15 * n


def theorem_step_flops(m, n, iterations):
    """Per-step flop polynomials of the published cost model.

    Returns a dict keyed by :data:`STEPS`.
    """
    return {
        "step1": _cubic(m),
        "step2_H": n * m**2 + n * m + 2 * m * n**2,
        "step2_h": 2 * m**2 + 2 * m * n + 4 * n + 2 * n**2,
        "step3": n,
        "step4": 5 * n + 3,
        "step5": iterations * per_iteration_flops(n),
        "step6": 2 * n + 2 * m * n + 2 * m + 2 * m**2,
    }


def implementation_step_flops(m, n, iterations):
    """Per-step flops actually performed by this package's implementation.

    This is what a :class:`~certqp.linalg.FlopCounter` records during
    :func:`certqp.penalty.solve_soft_qp`; differences from
    :func:`theorem_step_flops` are listed by :func:`flop_audit`.
    """
    return {
        # factor Q
        "step1": _cubic(m),
        # diag(rho) G, L^{-1} (diag(rho) G)^T, W^T W
        "step2_H": n * m + n * m**2 + n * n * (2 * m - 1),
        # Q^{-1} Fx, G u, + g + Sx, H e, 2 rho r, sum
        "step2_h": 2 * m**2 + (2 * m * n - n) + 2 * n + (2 * n**2 - n) + 3 * n,
        # running max of |h_i|
        "step3": n,
        # scale factor, scaled matrix, h~, lambda h~, gamma0, theta0
        "step4": 1 + n**2 + 4 * n,
        # tau update, Newton matrix/rhs, factor, two substitutions, update
        "step5": iterations * (1 + _cubic(n) + 2 * n**2 + 22 * n),
        # rho z + rho, G^T t, 1/2, + Fx, Q^{-1}
        "step6": 2 * n + (2 * m * n - m) + 2 * m + 2 * m**2,
    }


@dataclass(frozen=True)
class Certificate:
    """Execution-time certificate for one problem size."""

    n: int
    m: int
    epsilon: float
    iterations: int
    online_flops: int
    offline_flops: int
    flops_per_sec: float
    est_seconds: float
    lti_cached: bool
    steps: dict

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        data = {
            k: getattr(self, k)
            for k in ("n", "m", "epsilon", "iterations", "online_flops",
                      "offline_flops", "flops_per_sec", "est_seconds", "lti_cached")
        }
        data["steps"] = dict(self.steps)
        return json.dumps(data, **kwargs)

    def report(self):
        """Key-value text block."""
        lines = [
            f"n = {self.n}",
            f"m = {self.m}",
            f"epsilon = {self.epsilon!r}",
            f"iterations = {self.iterations}",
            f"online_flops = {self.online_flops}",
            f"offline_flops = {self.offline_flops}",
            f"flops_per_sec = {self.flops_per_sec!r}",
            f"est_seconds = {self.est_seconds!r}",
            f"lti_cached = {str(self.lti_cached).lower()}",
        ]
        return "\n".join(lines)


def time_estimate(flops, flops_per_second):
    """Execution time in seconds under a flops-proportional timing model."""
    if not flops_per_second > 0:
        raise ValueError("flops_per_second must be positive")
    return flops / flops_per_second


def flop_budget(m, n, epsilon, lti_cached=True, flops_per_second=1e9):
    """Certificate for an ``m``-variable, ``n``-constraint soft QP.

    With ``lti_cached`` the Cholesky factor of ``Q`` and the box-QP matrix
    ``H`` are computed once offline and excluded from the online total.

    Examples
    --------
    >>> c = flop_budget(10, 30, 1e-6)
    >>> c.iterations, c.online_flops
    (173, 2028921)
    """
    if int(m) != m or m < 1 or int(n) != n or n < 1:
        raise ValueError("m and n must be positive integers")
    N = iteration_count(n, epsilon)
    steps = theorem_step_flops(m, n, N)
    offline = sum(steps[k] for k in OFFLINE_STEPS) if lti_cached else 0
    online = sum(steps.values()) - offline
    return Certificate(
        n=int(n), m=int(m), epsilon=float(epsilon), iterations=N,
        online_flops=online, offline_flops=offline,
        flops_per_sec=float(flops_per_second),
        est_seconds=time_estimate(online, flops_per_second),
        lti_cached=bool(lti_cached), steps=steps,
    )


def flop_audit(counter, m, n, iterations, lti_cached=False):
    """Compare measured per-step flops with both cost models.

    Returns a list of dicts with keys ``step``, ``measured``, ``theorem``,
    ``implementation``, ``residual`` (measured minus theorem).  Steps that
    were cached offline are reported with ``measured`` 0 and skipped in
    the comparison.
    """
    theorem = theorem_step_flops(m, n, iterations)
    impl = implementation_step_flops(m, n, iterations)
    rows = []
    for step in STEPS:
        if lti_cached and step in OFFLINE_STEPS:
            continue
        measured = counter.by_phase.get(step, 0)
        rows.append({
            "step": step,
            "measured": measured,
            "theorem": theorem[step],
            "implementation": impl[step],
            "residual": measured - theorem[step],
        })
    return rows


def measure_flop_rate(n=30, repeats=20):
    """Sustained flop rate of this package's dense kernels on this host.

    Times ``repeats`` rounds of one Cholesky factorization and one
    two-substitution solve at dimension ``n`` and divides the counted
    flops by the elapsed time.
    """
    from .linalg import FlopCounter, cholesky, solve_spd

    rng = np.random.default_rng(0)
    A = rng.standard_normal((n, n))
    A = A @ A.T + n * np.eye(n)
    b = rng.standard_normal(n)
    counter = FlopCounter()
    start = time.perf_counter()
    for _ in range(repeats):
        solve_spd(cholesky(A, counter), b, counter)
    elapsed = time.perf_counter() - start
    return counter.total / elapsed
