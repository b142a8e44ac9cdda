"""
Self-convergence
================

Halve the mesh, then the step, and watch the differences between
successive levels shrink.
"""

from poreswell import config
from poreswell.verify import refinement_study

rc = config.build_run_config(config.preset("default"))
study = refinement_study(rc.model, 16, 125, rc.horizon, levels=4)

for row in study.rows():
    diff = "" if row["diff"] is None else f"{row['diff']:.3e}"
    order = "" if row["order"] is None else f"{row['order']:.3f}"
    print(f"{row['kind']:<9} N={row['N']:<4} steps={row['steps']:<5} {diff:>10}  {order}")

# second order in space, first in time
print("spatial:", study.orders("spatial"))
print("temporal:", study.orders("temporal"))
print("error estimate at the base level:", study.discretization_error())

# a steady state is reproduced exactly at every level
eq = config.build_run_config(config.preset("equilibrium"))
print("equilibrium exact:", refinement_study(eq.model, 8, 10, 1.0, 3).exact)
