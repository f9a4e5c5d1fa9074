"""Soft constraints through an exact l1 penalty.

An infeasible pair ``y <= -1`` and ``y >= 1`` cannot be solved as a hard
QP, but the penalized problem always has a solution.  On a feasible
problem a large enough penalty recovers the hard solution exactly.
"""

import numpy as np

from certqp import QpInstance, solve_soft_qp
from certqp.penalty import penalty_objective

# min 1/2 y^2  s.t. y <= -1, -y <= -1  (infeasible)
qp = QpInstance.from_vectors([[1.0]], [0.0], [[1.0], [-1.0]], [-1.0, -1.0])
res = solve_soft_qp(qp, [10.0, 10.0])
print(f"infeasible pair: y = {res.y[0]:+.6f}, violations = {np.round(res.violations, 6)}")

# Penalties trade the two violations off against each other.
for rho in ([10.0, 1.0], [1.0, 10.0]):
    r = solve_soft_qp(qp, rho)
    print(f"  rho = {rho}: y = {r.y[0]:+.6f}, "
          f"objective = {penalty_objective(qp, rho, r.y):.6f}")

# Feasible problem: min 1/2|y|^2 + c'y  s.t. y1 + y2 <= 1, y1 >= 0.
Q = np.eye(2)
c = np.array([-2.0, -2.0])
G = np.array([[1.0, 1.0], [-1.0, 0.0]])
b = np.array([1.0, 0.0])
hard_y = np.array([0.5, 0.5])  # multiplier 1.5 on the first row
print("\nfeasible problem, hard solution", hard_y)
for rho in (0.5, 1.0, 2.0, 4.0):
    r = solve_soft_qp(QpInstance.from_vectors(Q, c, G, b), [rho, rho], 1e-9)
    print(f"  rho = {rho:3.1f}: y = {np.round(r.y, 6)}, "
          f"sum of violations = {r.violations.sum():.6f}")
print("once rho exceeds the largest multiplier the soft and hard solutions coincide")
