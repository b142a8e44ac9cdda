"""
The energy and its bounds
=========================

Evaluate the convex energy on a few fields, check the coercivity bounds,
and verify that a time step is a subgradient step of that energy.
"""

import numpy as np

from poreswell import config
from poreswell.front import fixed_point_solve
from poreswell.functional import (ap_subgradient, coercivity_constants, gradient_energy,
                                  midpoint_gap, psi_eval, subdiff_residual)

rc = config.build_run_config(config.preset("default"))
m = rc.model
rng = np.random.default_rng(0)

u = rng.uniform(0, 2, 33)
v = rng.uniform(0, 2, 33)
print(psi_eval(m, u, 2.2, 1.0))

# negative content lies outside the domain of the energy
print(psi_eval(m, u - 3.0, 2.2, 1.0))

# convexity along the segment between two fields
print("midpoint gap:", midpoint_gap(m, u, v, 2.2, 1.0))

# the three coercivity bounds for fronts in [a + 0.5, L]
const = coercivity_constants(m, m.L_default, 0.5)
val = psi_eval(m, u, 2.2, 1.0).total
for name, X in [("u(0)^2", u[0] ** 2), ("u(1)^2", u[-1] ** 2),
                ("gradient", gradient_energy(m, u, 2.2))]:
    print(f"{name:<9} {X:9.4f} <= {const.C0 * val + const.C1:.4g}")

# each step of the fixed-point solution is a subgradient step
res = fixed_point_solve(m, rc.grid, rc.stepper, rc.steps)
n = rc.steps // 2
z = ap_subgradient(m, res.u[n], res.u[n - 1], res.path.s[n], res.path.s_t[n - 1], rc.stepper.dt)
print(subdiff_residual(m, res.u[n], res.path.s[n], float(m.h(res.path.t[n])), z))
