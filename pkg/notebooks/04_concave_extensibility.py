"""
Concave extensibility along the trajectory
==========================================

A lattice function is concave extensible when no convex combination of
other lattice points interpolates above it.  The margin ``epsilon`` is the
worst gap over all states; it stays nonnegative for every V_t, which is
what lets the pricing subproblem be solved as a concave program.
"""

# %%
import numpy as np

from deliverydp import StateGrid, concave_closure_eval, extensibility_margin, solve_horizon, table1
from deliverydp.analysis import validate_assumptions

# A one-dimensional warm-up: a dip is filled in by the closure.
line = StateGrid([[2]])
print("closure of (0, -1, 0) at 1:", concave_closure_eval([0.0, -1.0, 0.0], line, [1]))
report = extensibility_margin([0.0, -1.0, 0.0], line)
print("margin:", report.epsilon, "witness:", report.witness)

# %%
inst = table1()
grid = StateGrid.for_instance(inst)
trajectory = solve_horizon(inst, grid)
eps = np.array([extensibility_margin(V, grid).epsilon for V in trajectory])
print("smallest margin over the horizon:", eps.min())
print("largest margin:", eps.max(), "at t =", trajectory[int(eps.argmax())].t)

# %%
# The arrival-rate bound that guarantees preservation is only sufficient:
# late in the horizon it falls below the instance's arrival probability
# although extensibility is never lost.
checks = validate_assumptions(inst, grid, trajectory, margins=eps).arrival
for c in checks[1:12]:
    print(f"t = {c.t:3d}  epsilon = {c.epsilon:.3e}  bound = {c.bound:.3e}  {c.status}")

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    ax.plot([V.t for V in trajectory], eps)
    ax.invert_xaxis()
    ax.set_xlabel("t")
    ax.set_ylabel("extensibility margin")
    fig.savefig("extensibility.png", dpi=120)
