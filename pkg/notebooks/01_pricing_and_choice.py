"""
Slot prices and customer choice
===============================

A customer who arrives picks one of the offered delivery slots or leaves.
Choice follows a multinomial logit model, so charging more for a slot moves
demand to the other slots and to the no-purchase option.
"""

# %%
import numpy as np

from deliverydp import CLOSED, mnl_probabilities, price_from_probability, table1

inst = table1()
print(inst)

# %%
# At zero charges the popular first slot takes most of the demand.
probs = mnl_probabilities(inst, [[0.0, 0.0]])
print("slot shares:", probs.shares[0], "no purchase:", probs.no_purchase_share[0])

# Closing a slot removes it from the choice set altogether.
print("slot 1 closed:", mnl_probabilities(inst, [[CLOSED, 0.0]]).shares[0])

# %%
# Raising the first slot's charge over its whole range.
for d1 in np.linspace(inst.d_min, inst.d_max, 5):
    p = mnl_probabilities(inst, [[d1, 1.0]])
    print(f"d1 = {d1:4.2f}   p = {p.p[0].round(4)}   p0 = {p.p0[0]:.4f}")

# %%
# The map from charges to purchase probabilities is one to one, so the
# pricing problem can be written over probabilities instead.
d = np.array([[0.37, 1.61]])
back = price_from_probability(inst, mnl_probabilities(inst, d))
print("recovered charges:", back, "error:", np.abs(back - d).max())
