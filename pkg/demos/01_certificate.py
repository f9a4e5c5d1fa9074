"""How many iterations, how many flops, how many seconds.

The solver's iteration count depends only on the box dimension ``n`` and
the tolerance ``eps``.  Adding up per-step flop polynomials turns that
count into a worst-case flop total, and a sustained flop rate turns the
total into an execution-time bound known before any data arrives.
"""

from certqp import flop_budget, iteration_count
from certqp.certificate import measure_flop_rate, per_iteration_flops

print("Iteration count N(n, 1e-6):")
for n in (1, 2, 5, 10, 30, 100):
    print(f"  n = {n:4d}  N = {iteration_count(n, 1e-6):4d}  "
          f"flops per iteration = {per_iteration_flops(n)}")

# The double-integrator MPC problem has 10 inputs and 30 constraint rows.
cert = flop_budget(m=10, n=30, epsilon=1e-6, lti_cached=True, flops_per_second=1e9)
print("\nCertificate for m = 10, n = 30 with the LTI data cached offline:")
print(cert.report())

print("\nPer-step breakdown:")
for step, flops in cert.steps.items():
    print(f"  {step:8s} {flops:>10d}")

# The same bound at this machine's rate for the package's own kernels.
rate = measure_flop_rate()
local = flop_budget(10, 30, 1e-6, True, rate)
print(f"\nAt a measured {rate:.3e} flop/s the bound is {local.est_seconds * 1e3:.2f} ms.")
