"""Dense linear algebra with operation counting.

Every kernel takes an optional :class:`FlopCounter`.  One flop is one
multiply, add, subtract or divide of two floats; a square root and a
comparison also count as one.  The counts charged are the counts the
kernel actually performs:

==================  =====================================
kernel              flops
==================  =====================================
cholesky (m x m)    m^3/3 + m^2/2 + m/6
triangular solve    m^2 per right-hand side
solve_spd           2 m^2 per right-hand side
matvec (r x c)      2rc - r
matmul (r x k x c)  rc(2k - 1)
==================  =====================================
"""

from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NonFiniteData, NotPositiveDefinite

SYMMETRY_TOL = 1e-12

KINDS = ("factorize", "substitute", "multiply", "vector", "scalar")


class FlopCounter:
    """Accumulates flop counts by algorithm phase and by kernel kind.

    The active phase is set with the :meth:`phase` context manager; flops
    charged outside any phase land in ``"unlabelled"``.

    Examples
    --------
    >>> c = FlopCounter()
    >>> with c.phase("step1"):
    ...     c.add(5, "factorize")
    >>> c.total, c.by_phase["step1"]
    (5, 5)
    """

    def __init__(self):
        self.total = 0
        self.by_phase = defaultdict(int)
        self.by_kind = defaultdict(int)
        self._phase = "unlabelled"

    def add(self, flops, kind="vector"):
        flops = int(flops)
        if flops < 0:
            raise ValueError("flop increments must be non-negative")
        self.total += flops
        self.by_phase[self._phase] += flops
        self.by_kind[kind] += flops

    @contextmanager
    def phase(self, name):
        previous = self._phase
        self._phase = name
        try:
            yield self
        finally:
            self._phase = previous

    def reset(self):
        self.total = 0
        self.by_phase.clear()
        self.by_kind.clear()
        self._phase = "unlabelled"

    def snapshot(self):
        """Plain-dict copy of the current totals."""
        return {
            "total": self.total,
            "by_phase": dict(self.by_phase),
            "by_kind": dict(self.by_kind),
        }

    def __repr__(self):
        return f"FlopCounter(total={self.total}, by_phase={dict(self.by_phase)})"


def _charge(counter, flops, kind):
    if counter is not None:
        counter.add(flops, kind)


def cholesky_flops(m):
    """Exact flop count of an m x m Cholesky factorization."""
    return (2 * m**3 + 3 * m**2 + m) // 6


@dataclass(frozen=True)
class LowerFactor:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == A``."""

    L: np.ndarray
    flop_cost: int

    @property
    def dimension(self):
        return self.L.shape[0]


def as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteData(f"{name} contains non-finite entries")
    return a


def as_vector(v, name="vector"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteData(f"{name} contains non-finite entries")
    return v


def check_symmetric(a, name="matrix", tol=SYMMETRY_TOL):
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > tol * scale:
        raise ValueError(f"{name} is not symmetric")


def factor_into(a, out):
    """Left-looking Cholesky of ``a`` written into the preallocated ``out``.

    Only the lower triangle of ``a`` is read.  No validation and no flop
    accounting; callers charge :func:`cholesky_flops`.
    """
    m = a.shape[0]
    out[...] = 0.0
    for j in range(m):
        lj = out[j, :j]
        d = a[j, j] - lj @ lj
        if not d > 0.0:
            raise NotPositiveDefinite(
                f"non-positive pivot {d:.3e} at column {j}", pivot=j
            )
        ljj = np.sqrt(d)
        out[j, j] = ljj
        if j + 1 < m:
            out[j + 1:, j] = (a[j + 1:, j] - out[j + 1:, :j] @ lj) / ljj
    return out


def cholesky(a, counter=None):
    """Cholesky factor of a symmetric positive definite matrix.

    Parameters
    ----------
    a : array_like, shape (m, m)
        Symmetric positive definite matrix.
    counter : FlopCounter, optional
        Charged ``m^3/3 + m^2/2 + m/6`` flops.

    Returns
    -------
    LowerFactor

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    a = as_matrix(a)
    check_symmetric(a)
    m = a.shape[0]
    L = factor_into(a, np.empty_like(a))
    cost = cholesky_flops(m)
    _charge(counter, cost, "factorize")
    return LowerFactor(L, cost)


def _rhs(l, b):
    L = l.L if isinstance(l, LowerFactor) else np.asarray(l, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != L.shape[0]:
        raise DimensionMismatch(
            f"right-hand side has {b.shape[0]} rows, factor has dimension {L.shape[0]}"
        )
    return L, b


def forward_substitute(l, b, counter=None):
    """Solve ``L x = b``; ``b`` may hold several right-hand sides as columns."""
    L, b = _rhs(l, b)
    k = 1 if b.ndim == 1 else b.shape[1]
    x = solve_triangular(L, b, lower=True, check_finite=False)
    _charge(counter, k * L.shape[0] ** 2, "substitute")
    return x


def backward_substitute(l, b, counter=None):
    """Solve ``L.T x = b``."""
    L, b = _rhs(l, b)
    k = 1 if b.ndim == 1 else b.shape[1]
    x = solve_triangular(L, b, lower=True, trans="T", check_finite=False)
    _charge(counter, k * L.shape[0] ** 2, "substitute")
    return x


def solve_spd(l, b, counter=None):
    """Solve ``(L L^T) x = b`` with one forward and one backward substitution.

    Charges ``2 m^2`` flops per right-hand side.

    Examples
    --------
    >>> f = cholesky([[4.0, 2.0], [2.0, 3.0]])
    >>> solve_spd(f, [6.0, 5.0])
    array([1., 1.])
    """
    return backward_substitute(l, forward_substitute(l, b, counter), counter)


def matvec(a, v, counter=None):
    """Matrix-vector product charging ``2 rows cols - rows`` flops."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    if a.ndim != 2 or v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {v.shape}")
    rows, cols = a.shape
    if cols:
        _charge(counter, 2 * rows * cols - rows, "multiply")
    return a @ v


def matmul(a, b, counter=None):
    """Matrix product charging ``rows cols (2 inner - 1)`` flops."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    rows, inner = a.shape
    cols = b.shape[1]
    if inner:
        _charge(counter, rows * cols * (2 * inner - 1), "multiply")
    return a @ b
