"""
A first swelling run
====================

Solve the default problem with the monolithic stepper and look at the
front, the content profile and the audits.
"""

import numpy as np

from poreswell import config
from poreswell.pde import solve_monolithic
from poreswell.verify import build_report

# the default preset: a = 1, s0 = 2, constant threshold h = 1
rc = config.build_run_config(config.preset("default"))
run = solve_monolithic(rc.model, rc.grid, rc.stepper, rc.steps)

# the front moves monotonically outwards while u(1) sits above phi(s)
for n in range(0, run.steps + 1, 100):
    print(f"t={run.t[n]:.2f}  s={run.s[n]:.6f}  s_t={run.s_t[n]:.5f}  u(0)={run.u[n, 0]:.4f}")

# content at the final time, on the physical nodes z = a + y (s - a)
z = rc.model.params.a + rc.grid.y * (run.s[-1] - rc.model.params.a)
print(np.round(np.column_stack([z, run.u[-1]])[::8], 4))

report = build_report(run)
print("bounds ok:", report.bounds.passed, " worst:", report.bounds.worst)
print("front rate ok:", report.rates.passed)
print("max mass error:", report.mass_error.max())
