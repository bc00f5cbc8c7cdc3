"""Ready-made problem instances."""

from __future__ import annotations

from .model import CostModel, ProblemInstance, parse_config

TABLE1_CONFIG = """\
# one area, two slots
num_areas = 1
num_slots = 2
horizon = 200
lambda = 0.5
area_prob = 1
beta_c = 1
beta_slot = 1, -1
beta_d = -1
d_min = 0
d_max = 2
r = 1
capacity = 4, 4
cost.intercept = 2
cost.coefficients = 1, 2
"""


def table1(**changes) -> ProblemInstance:
    """The one-area, two-slot illustrative instance; keywords override fields."""
    inst = ProblemInstance(
        num_areas=1,
        num_slots=2,
        horizon=200,
        lam=0.5,
        area_prob=[1.0],
        beta_c=1.0,
        beta_slot=[1.0, -1.0],
        beta_d=-1.0,
        d_min=0.0,
        d_max=2.0,
        r=1.0,
        capacity=[[4, 4]],
        cost=CostModel.affine(2.0, [[1.0, 2.0]]),
    )
    return inst.replace(**changes) if changes else inst


def table1_from_config() -> ProblemInstance:
    return parse_config(TABLE1_CONFIG)
