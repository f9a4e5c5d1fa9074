"""A box-constrained QP solved by the feasible full-Newton path follower.

We solve ``min 1/2 z'Hz + h'z`` over ``[-1, 1]^n``, watch the proximity
measure and duality gap along the way, and compare with brute-force
enumeration of all active sets.
"""

import itertools

import numpy as np

from certqp import BoxQp, SolverParams, solve

rng = np.random.default_rng(1)
n = 5
A = rng.standard_normal((n, n))
H = A @ A.T
h = 4 * rng.standard_normal(n)

params = SolverParams.for_dimension(n, 1e-9)
res = solve(BoxQp(H, h), params, trace=True)
print(f"n = {n}, eps = {params.epsilon:g}: {res.iterations} iterations "
      f"(fixed in advance), final gap {res.duality_gap:.2e}")

print("\n  k     tau        xi       gap")
for rec in res.trace[:: max(1, res.iterations // 8)]:
    print(f"{rec['k']:3d}  {rec['tau']:.2e}  {rec['xi_after']:.2e}  {rec['duality_gap']:.2e}")

# Brute force: fix each coordinate at -1, +1 or free and keep the best KKT point.
best, best_val = None, np.inf
for pattern in itertools.product((-1, 0, 1), repeat=n):
    pattern = np.array(pattern)
    free = pattern == 0
    z = pattern.astype(float)
    if free.any():
        z[free] = np.linalg.solve(H[np.ix_(free, free)],
                                  -(h[free] + H[np.ix_(free, ~free)] @ z[~free]))
    if np.all(np.abs(z) <= 1 + 1e-12):
        val = 0.5 * z @ H @ z + h @ z
        if val < best_val:
            best, best_val = z, val

print("\nIPM z       ", np.round(res.z, 6))
print("enumeration ", np.round(best, 6))
print(f"max difference {np.max(np.abs(res.z - best)):.2e}")
