"""
How fast value iteration contracts
==================================

Booking ends once every slot is full, so the process is a stochastic shortest
path problem.  An auxiliary stationary DP gives weights ``v(x)`` for a
sup-norm in which one DP step shrinks distances by at least ``rho < 1``.
The running ratios of the actual trajectory stay below that bound.
"""

# %%
import numpy as np

from deliverydp import StateGrid, auxiliary_dp, fixed_point, running_ratios, solve_horizon, table1
from deliverydp.analysis import distances

inst = table1()
grid = StateGrid.for_instance(inst)
cert = auxiliary_dp(inst, grid)
print("rho =", cert.rho)
print("weights v(x):")
print(cert.v_star.reshape(grid.shape).round(2))

# %%
trajectory = solve_horizon(inst, grid)
V_star = fixed_point(inst, grid)
times, ratios = running_ratios(trajectory, V_star, cert)
print("largest running ratio:", ratios.max(), "at t =", times[ratios.argmax()])

# %%
# The geometric bound after the full horizon is loose by orders of magnitude.
dist = distances(trajectory, V_star, cert)
print("distance at t = 1:", dist[-1])
print("rho^200 bound:    ", cert.rho ** inst.horizon * dist[0])

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    ax.plot(times, ratios, label="running ratio")
    ax.axhline(cert.rho, color="r", label="rho")
    ax.invert_xaxis()
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig("contraction.png", dpi=120)
