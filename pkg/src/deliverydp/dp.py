"""Exact backward induction for the slot pricing DP.

One application of the operator maps the value function ``V_next`` of the
following time step to

    V(x) = V_next(x) + sum_a arrival_a * max_{d_a} sum_s Pi_{a,s}(d_a)
               * (r + d_{a,s} + V_next(x + 1_{a,s}) - V_next(x)),

where slots whose capacity is exhausted at ``x`` are closed.  The logit
denominators are area-local, so the maximization splits by area and each
area is solved by :func:`deliverydp.pricing.solve_area`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import StateGrid
from .model import CLOSED, ChoiceProbabilities, ProblemInstance, check_prices, mnl_probabilities
from .pricing import solve_area, solve_area_gradient

METHODS = ("exact", "gradient")


@dataclass
class ValueFunction:
    """Value function of one time step over the state indices of a grid.

    ``t`` is ``None`` for stationary functions such as the fixed point.
    ``prices`` optionally holds the maximizing charges (shape
    ``(size, A, S)``) of the backup that produced ``values``.
    """

    t: int | None
    values: np.ndarray
    prices: np.ndarray | None = None

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, index):
        return self.values[index]


@dataclass
class BackupResult:
    value: float
    argmax_prices: np.ndarray
    argmax_probs: ChoiceProbabilities


def _values(V) -> np.ndarray:
    values = np.asarray(V, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("value function must be finite on every state")
    return values


def _index(grid: StateGrid, x) -> int:
    if np.ndim(x) == 0:
        index = int(x)
        if not 0 <= index < grid.size:
            raise IndexError(f"state index {index} out of range")
        return index
    return grid.encode(x)


def terminal_value(inst: ProblemInstance, grid: StateGrid) -> ValueFunction:
    """Terminal condition: minus the delivery cost."""
    cost = inst.cost.on_grid(grid.states)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost must be finite on every state of the lattice")
    return ValueFunction(inst.horizon + 1, -np.asarray(cost, dtype=float))


def _backup(inst: ProblemInstance, grid: StateGrid, values: np.ndarray, index, method="exact"):
    """Backups of the states ``index``; returns ``(values, prices)``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    index = np.atleast_1d(np.asarray(index, dtype=int))
    A, S = inst.num_areas, inst.num_slots
    succ = grid.successors[index]
    offered = (succ >= 0).reshape(-1, A, S)
    gain = np.where(succ >= 0, values[np.maximum(succ, 0)] - values[index, None], 0.0)
    kappa = (inst.r + gain).reshape(-1, A, S)

    if method == "exact":
        area_value, prices = solve_area(
            inst.slot_utility, inst.beta_d, inst.d_min, inst.d_max, kappa, offered
        )
    else:
        area_value = np.empty(kappa.shape[:2])
        prices = np.empty(kappa.shape)
        for i in range(kappa.shape[0]):
            for a in range(A):
                area_value[i, a], prices[i, a] = solve_area_gradient(
                    inst.slot_utility, inst.beta_d, inst.d_min, inst.d_max,
                    kappa[i, a], offered[i, a],
                )
    return values[index] + area_value @ inst.arrival, prices


def inner_objective(inst: ProblemInstance, grid: StateGrid, V_next, x,
                    probs: ChoiceProbabilities) -> float:
    """Backup objective ``f(p) + g(x, p)`` written in purchase probabilities.

    ``f(p) = sum p_{a,s} (r + (ln(p_{a,s} / p_{a,0}) - beta_c - beta_s) / beta_d)``
    with ``0 ln 0 = 0``, and
    ``g(x, p) = sum p_{a,s} (V(x + 1_{a,s}) - V(x)) + V(x)``.
    """
    values = _values(V_next)
    i = _index(grid, x)
    p = np.asarray(probs.p, dtype=float).reshape(inst.num_areas, inst.num_slots)
    p0 = np.asarray(probs.p0, dtype=float)
    if np.any(p < 0):
        raise ValueError("purchase probabilities must be nonnegative")
    succ = grid.successors[i].reshape(p.shape)
    if np.any((succ < 0) & (p > 0)):
        raise ValueError("positive purchase probability on a slot with no capacity left")
    active = p > 0
    if np.any(p0[np.any(active, axis=1)] <= 0):
        raise ValueError("no-purchase probability must be positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(active, np.log(np.where(active, p, 1.0) / p0[:, None]), 0.0)
    price = (log_ratio - inst.slot_utility) / inst.beta_d
    f = np.sum(np.where(active, p * (inst.r + price), 0.0))
    gain = np.where(succ >= 0, values[np.maximum(succ, 0)] - values[i], 0.0)
    g = np.sum(p * gain) + values[i]
    return float(f + g)


def price_objective(inst: ProblemInstance, grid: StateGrid, V_next, x, d) -> float:
    """Backup objective evaluated directly at charges ``d``."""
    values = _values(V_next)
    i = _index(grid, x)
    d = check_prices(inst, d)
    succ = grid.successors[i].reshape(d.shape)
    if np.any((succ < 0) & ~np.isposinf(d)):
        raise ValueError("slots with no capacity left must be CLOSED")
    probs = mnl_probabilities(inst, d)
    gain = np.where(succ >= 0, values[np.maximum(succ, 0)] - values[i], 0.0)
    bracket = np.where(np.isposinf(d), 0.0, inst.r + np.where(np.isposinf(d), 0.0, d) + gain)
    return float(np.sum(probs.p * bracket) + values[i])


def backup_state(inst: ProblemInstance, grid: StateGrid, V_next, x,
                 method: str = "exact") -> BackupResult:
    """Optimal one-step backup at a single state (vector or index)."""
    values = _values(V_next)
    i = _index(grid, x)
    value, prices = _backup(inst, grid, values, [i], method=method)
    prices = prices[0]
    return BackupResult(float(value[0]), prices, mnl_probabilities(inst, prices))


def apply_operator(inst: ProblemInstance, grid: StateGrid, V_next, method: str = "exact",
                   return_prices: bool = False):
    """Apply the DP operator to ``V_next`` on every state.

    Returns the new value array, or ``(values, prices)`` when
    ``return_prices`` is set.
    """
    values = _values(V_next)
    if values.shape != (grid.size,):
        raise ValueError(f"value function must have {grid.size} entries")
    new, prices = _backup(inst, grid, values, np.arange(grid.size), method=method)
    return (new, prices) if return_prices else new


def solve_horizon(inst: ProblemInstance, grid: StateGrid, keep=None, method: str = "exact",
                  record_prices: bool = False) -> list[ValueFunction]:
    """Backward induction from the terminal condition down to ``t = 1``.

    Returns value functions ordered ``t = horizon + 1, horizon, ..., 1``.
    ``keep`` restricts the retained steps to the given times (the terminal
    step and ``t = 1`` are always kept).  With ``record_prices`` each
    non-terminal step carries the maximizing charges.
    """
    V = terminal_value(inst, grid)
    T = inst.horizon
    wanted = None if keep is None else set(keep) | {T + 1, 1}
    trajectory = [V]
    values = V.values
    for t in range(T, 0, -1):
        values, prices = apply_operator(inst, grid, values, method=method, return_prices=True)
        if wanted is None or t in wanted:
            trajectory.append(ValueFunction(t, values, prices if record_prices else None))
    return trajectory


def closed_prices(inst: ProblemInstance) -> np.ndarray:
    return np.full((inst.num_areas, inst.num_slots), CLOSED)
