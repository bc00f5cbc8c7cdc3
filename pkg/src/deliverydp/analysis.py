"""Fixed point, contraction modulus and assumption checks for the pricing DP.

The booking process is a stochastic shortest path problem whose absorbing
state is the full-capacity state.  The auxiliary stationary DP

    v(x) = 1 + max_d sum_y P_{x,y}(d) v(y),   v(full) = 1

gives the weights of the sup-norm in which the DP operator contracts with
modulus ``rho = max_x (v(x) - 1) / v(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .concavity import (
    EnclosingCombination,
    extensibility_margin,
    forward_difference_range,
    lambda_bound,
)
from .dp import ValueFunction, apply_operator, solve_horizon
from .grid import StateGrid
from .model import ProblemInstance, logit_shares
from .pricing import solve_area

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


class ImproperPolicyError(RuntimeError):
    """Raised when some non-full state can never reach full capacity."""


@dataclass
class ContractionCertificate:
    """Solution of the auxiliary DP and the resulting contraction modulus."""

    v_star: np.ndarray
    rho: float
    ratios: np.ndarray = field(repr=False)
    prices: np.ndarray | None = field(default=None, repr=False)


def fixed_point(inst: ProblemInstance, grid: StateGrid) -> ValueFunction:
    """Closed-form fixed point ``(d_max + r) * sum(capacity - x) - C(capacity)``."""
    top_cost = float(inst.cost.on_grid(grid.states[[grid.top]])[0])
    remaining = (grid.capacity - grid.states).sum(axis=1)
    return ValueFunction(None, (inst.d_max + inst.r) * remaining - top_cost)


def fixed_point_residual(inst: ProblemInstance, grid: StateGrid, V=None,
                         method: str = "exact") -> float:
    """Sup-norm of ``T V - V``; ``V`` defaults to the closed-form fixed point."""
    values = np.asarray(fixed_point(inst, grid) if V is None else V, dtype=float)
    return float(np.max(np.abs(apply_operator(inst, grid, values, method=method) - values)))


def auxiliary_dp(inst: ProblemInstance, grid: StateGrid, tol=1e-15, max_iter=200
                 ) -> ContractionCertificate:
    """Solve the auxiliary DP exactly by descending order count.

    Orders never leave the lattice and never decrease the order count, so a
    state's successors are solved before the state itself.  For fixed
    charges ``d`` the self-loop gives ``v_d(x) = (1 + sum p v(y)) / sum p``;
    ``v(x) = max_d v_d(x)`` is the root of the convex decreasing function
    ``G(theta) = 1 + sum_a arrival_a max_d sum_s Pi_{a,s}(d) (v(y_{a,s}) - theta)``,
    found by Newton's method from the left.
    """
    A, S = inst.num_areas, inst.num_slots
    arrival = inst.arrival
    v = np.ones(grid.size)
    prices = np.full((grid.size, A, S), np.inf)
    levels = grid.order_count
    for level in range(int(levels.max()) - 1, -1, -1):
        index = np.flatnonzero(levels == level)
        succ = grid.successors[index]
        offered = (succ >= 0).reshape(-1, A, S)
        reach = (offered & (arrival[None, :, None] > 0)).any(axis=(1, 2))
        if not np.all(reach):
            bad = grid.states[index[~reach][0]]
            raise ImproperPolicyError(
                f"state {bad.tolist()} cannot reach full capacity (no arrivals on open slots)"
            )
        follow = np.where(succ >= 0, v[np.maximum(succ, 0)], 0.0).reshape(-1, A, S)
        theta = np.where(offered, follow, np.inf).min(axis=(1, 2))
        for _ in range(max_iter):
            kappa = follow - theta[:, None, None]
            value, d = solve_area(inst.slot_utility, inst.beta_d, inst.d_min, inst.d_max,
                                  kappa, offered, price_weight=0.0)
            G = 1.0 + value @ arrival
            buy = _purchase_mass(inst, d)
            step = G / buy
            theta = theta + step
            if np.all(np.abs(step) <= tol * (1.0 + np.abs(theta))):
                break
        v[index] = theta
        prices[index] = d
    ratios = (v - 1.0) / v
    return ContractionCertificate(v, float(ratios.max()), ratios, prices)


def _purchase_mass(inst, d):
    shares, _ = logit_shares(inst.slot_utility, inst.beta_d, d)
    return (shares.sum(axis=-1) * inst.arrival).sum(axis=-1)


def weighted_norm(V, cert: ContractionCertificate) -> float:
    """``max_x |V(x)| / v(x)`` with the auxiliary-DP weights."""
    return float(np.max(np.abs(np.asarray(V, dtype=float)) / cert.v_star))


def contraction_check(inst: ProblemInstance, grid: StateGrid, cert: ContractionCertificate,
                      V, W, method: str = "exact") -> tuple[float, float]:
    """Both sides of ``||T V - T W|| <= rho ||V - W||`` in the weighted norm."""
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    lhs = weighted_norm(
        apply_operator(inst, grid, V, method=method) - apply_operator(inst, grid, W, method=method),
        cert,
    )
    return lhs, cert.rho * weighted_norm(V - W, cert)


def distances(trajectory, V_star, cert: ContractionCertificate | None = None) -> np.ndarray:
    """Distance of each trajectory step to ``V_star`` (weighted when ``cert`` is given)."""
    V_star = np.asarray(V_star, dtype=float)
    if cert is None:
        return np.array([np.max(np.abs(V_star - np.asarray(V))) for V in trajectory])
    return np.array([weighted_norm(V_star - np.asarray(V), cert) for V in trajectory])


def running_ratios(trajectory, V_star, cert: ContractionCertificate, floor=1e-13):
    """Running contraction ratios ``||V* - V_t|| / ||V* - V_{t+1}||``.

    ``trajectory`` runs backwards in time (terminal step first) with
    consecutive time labels.  The series stops at the first denominator
    below ``floor``.  Returns ``(times, ratios)``.
    """
    dist = distances(trajectory, V_star, cert)
    times, ratios = [], []
    for k in range(1, len(trajectory)):
        if dist[k - 1] < floor:
            break
        t = getattr(trajectory[k], "t", None)
        times.append(t if t is not None else len(trajectory) - k)
        ratios.append(dist[k] / dist[k - 1])
    return np.array(times, dtype=int), np.array(ratios)


@dataclass
class LambdaCheck:
    t: int | None
    epsilon: float
    w: float
    W: float
    bound: float
    lam: float
    status: str


@dataclass
class AssumptionReport:
    """Outcome of the checks on cost, marginal cost and arrival rate.

    ``concave_cost`` concerns extensibility of ``-C``; ``marginal_cost``
    the bound ``C(x + 1) - C(x) <= d_max + r``; ``arrival`` lists the
    per-step arrival-probability bounds.
    """

    concave_cost: str
    cost_epsilon: float
    cost_witness: EnclosingCombination | None
    marginal_cost: str
    max_marginal_cost: float
    marginal_cost_bound: float
    marginal_cost_witness: tuple | None
    arrival: list[LambdaCheck]

    @property
    def arrival_status(self) -> str:
        statuses = {c.status for c in self.arrival}
        if FAIL in statuses:
            return FAIL
        if statuses == {INCONCLUSIVE}:
            return INCONCLUSIVE
        return PASS


def check_marginal_cost(inst: ProblemInstance, grid: StateGrid):
    """Exhaustive check of the marginal-cost bound.

    Returns ``(status, max marginal cost, bound, witness)`` where the
    witness is ``(state, area, slot)`` of the largest marginal cost.
    """
    cost = inst.cost.on_grid(grid.states)
    diffs = grid.forward_differences(cost)
    bound = inst.d_max + inst.r
    if np.all(np.isnan(diffs)):
        return PASS, -np.inf, bound, None
    i, k = np.unravel_index(np.nanargmax(diffs), diffs.shape)
    worst = float(diffs[i, k])
    a, s = divmod(int(k), inst.num_slots)
    status = PASS if worst <= bound + 1e-12 else FAIL
    return status, worst, bound, (grid.states[i].copy(), a, s)


def validate_assumptions(inst: ProblemInstance, grid: StateGrid, trajectory,
                         d_ref=None, margins=None, margin_tol=1e-10) -> AssumptionReport:
    """Check the three standing assumptions on an instance and its trajectory.

    The arrival-rate bound of each step uses the purchase probabilities at
    ``d_ref`` (default: every slot at ``d_min``, the largest purchase
    mass, which gives the most conservative bound).  Steps whose strict
    margin vanishes are reported ``INCONCLUSIVE``: the bound is vacuous and
    the condition holds for any arrival rate.  ``margins`` may pass
    precomputed extensibility epsilons, one per trajectory step.
    """
    cost = inst.cost.on_grid(grid.states)
    report = extensibility_margin(-cost, grid)
    a1 = PASS if report.epsilon >= -1e-9 else FAIL

    a2, worst, bound, witness = check_marginal_cost(inst, grid)

    if d_ref is None:
        d_ref = np.full((inst.num_areas, inst.num_slots), inst.d_min)
    checks = []
    for k, V in enumerate(trajectory):
        eps = margins[k] if margins is not None else extensibility_margin(V, grid).epsilon
        w, W = forward_difference_range(V, grid)
        lam_max = lambda_bound(V, inst, grid, d_ref, margin_tol=margin_tol, epsilon=eps)
        if eps < -1e-9:
            status = FAIL
        elif eps <= margin_tol or not np.isfinite(lam_max):
            status = INCONCLUSIVE
        else:
            status = PASS if inst.lam <= lam_max else FAIL
        checks.append(LambdaCheck(getattr(V, "t", None), eps, w, W, lam_max, inst.lam, status))
    return AssumptionReport(a1, report.epsilon, report.witness, a2, worst, bound, witness, checks)


@dataclass
class AnalysisReport:
    rho: float
    rho_times: np.ndarray
    rho_series: np.ndarray
    fixed_point_residual: float
    times: np.ndarray
    weighted_distance: np.ndarray
    sup_distance: np.ndarray
    epsilon: np.ndarray
    assumptions: AssumptionReport
    certificate: ContractionCertificate = field(repr=False)


def analyze(inst: ProblemInstance, grid: StateGrid | None = None, trajectory=None,
            method: str = "exact") -> AnalysisReport:
    """Solve (unless given) and run every analysis on one instance."""
    grid = grid or StateGrid.for_instance(inst)
    if trajectory is None:
        trajectory = solve_horizon(inst, grid, method=method)
    V_star = fixed_point(inst, grid)
    cert = auxiliary_dp(inst, grid)
    rho_times, rho_series = running_ratios(trajectory, V_star, cert)
    eps = np.array([extensibility_margin(V, grid).epsilon for V in trajectory])
    return AnalysisReport(
        rho=cert.rho,
        rho_times=rho_times,
        rho_series=rho_series,
        fixed_point_residual=fixed_point_residual(inst, grid, V_star, method=method),
        times=np.array([V.t for V in trajectory]),
        weighted_distance=distances(trajectory, V_star, cert),
        sup_distance=distances(trajectory, V_star),
        epsilon=eps,
        assumptions=validate_assumptions(inst, grid, trajectory, margins=eps),
        certificate=cert,
    )
