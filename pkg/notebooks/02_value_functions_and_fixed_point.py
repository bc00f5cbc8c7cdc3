"""
Value functions and the fixed point
===================================

Backward induction over 200 booking steps on the one-area, two-slot
instance.  The value function starts at minus the delivery cost and climbs
toward the affine fixed point ``10 - 3 (x1 + x2)`` without overshooting it.
"""

# %%
import numpy as np

from deliverydp import StateGrid, fixed_point, fixed_point_residual, solve_horizon, table1

inst = table1()
grid = StateGrid.for_instance(inst)
trajectory = solve_horizon(inst, grid, record_prices=True)
V_star = np.asarray(fixed_point(inst, grid))
print("residual of the fixed point:", fixed_point_residual(inst, grid))

# %%
# Snapshots at the terminal step, ten steps earlier and the start of booking,
# laid out with x1 down the rows and x2 across the columns.
by_t = {V.t: np.asarray(V) for V in trajectory}
for t in (201, 190, 1):
    print(f"t = {t}")
    print(by_t[t].reshape(grid.shape).round(3))

# %%
# Every V_t lies between the terminal condition and the fixed point.
lower = -inst.cost.on_grid(grid.states)
V = np.array([np.asarray(v) for v in trajectory])
print("below -C by at most:", np.max(lower - V))
print("above V* by at most:", np.max(V - V_star))

# %%
# On this instance the marginal cost never exceeds the value of a sale, so
# every open slot is charged the maximum at every step; full slots close.
priced = [V.prices[:, 0, :] for V in trajectory[1:]]
print("all open slots at d_max:",
      all(np.all((P == inst.d_max) | np.isinf(P)) for P in priced))
print("closed pairs at t = 1:", int(np.isinf(priced[-1]).sum()))

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for t in (201, 190, 1):
        ax.plot(by_t[t].reshape(grid.shape)[0], marker="o", label=f"t = {t}")
    ax.plot(V_star.reshape(grid.shape)[0], "k--", label="fixed point")
    ax.set_xlabel("orders in slot 2 (slot 1 empty)")
    ax.set_ylabel("value")
    ax.legend()
    fig.savefig("value_functions.png", dpi=120)
