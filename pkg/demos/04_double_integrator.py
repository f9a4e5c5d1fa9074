"""Closed-loop MPC of a double integrator from an infeasible start.

From ``x0 = (0, -2)`` the next position is ``-2`` whatever the input, so
the state constraint ``x1 >= -1`` cannot hold and the hard MPC problem is
infeasible.  With equal penalties on the actuator limit and on the state
constraint the controller asks for more than ``|u| <= 1``; weighting the
actuator rows ten times higher keeps the input physical and lets the
state constraint absorb the violation for a few steps.

Pass a path as the first argument to also write the trajectory CSV.
"""

import sys

import numpy as np

from certqp import SimConfig, double_integrator, run

for rho_hard, rho_soft in ((10.0, 10.0), (100.0, 10.0)):
    model, config = double_integrator(rho_hard, rho_soft)
    traj = run(SimConfig(model, config, x0=[0.0, -2.0], steps=60))
    s = traj.summary()
    print(f"rho_hard = {rho_hard:5.1f}, rho_soft = {rho_soft:4.1f}: "
          f"max|u| = {s['max_abs_u']:.6f}, max soft violation = "
          f"{s['max_soft_violation']:.4f}, iterations per solve = {s['iterations']}")
    print("   t     x1       x2        u")
    for t in range(0, 12):
        x1, x2 = traj.states[t]
        print(f"  {t:2d}  {x1:+.4f}  {x2:+.4f}  {traj.inputs[t, 0]:+.4f}")
    print(f"  final state {np.round(traj.final_state, 5)}, "
          f"median solve {np.median(traj.solve_seconds) * 1e3:.1f} ms, "
          f"certified {traj.certificate.est_seconds * 1e3:.2f} ms at 1 GFLOP/s\n")
    if len(sys.argv) > 1 and rho_hard == 100.0:
        traj.write_csv(sys.argv[1])
