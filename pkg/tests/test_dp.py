import numpy as np
import pytest

from deliverydp import (
    CLOSED,
    ChoiceProbabilities,
    CostModel,
    ProblemInstance,
    StateGrid,
    apply_operator,
    backup_state,
    fixed_point,
    inner_objective,
    mnl_probabilities,
    solve_horizon,
    terminal_value,
)
from deliverydp.dp import price_objective
from oracles import grid_backup


def test_terminal_value(inst, grid):
    V = terminal_value(inst, grid)
    assert V.t == 201
    assert V[grid.encode([0, 0])] == -2.0
    assert V[grid.encode([4, 4])] == -14.0


def test_terminal_value_zero_cost(inst, grid):
    V = terminal_value(inst.replace(cost=CostModel.affine(0.0, [[0.0, 0.0]])), grid)
    assert np.all(np.asarray(V) == 0.0)


def test_no_purchase_returns_current_value(inst, grid):
    V = terminal_value(inst, grid)
    probs = ChoiceProbabilities(np.zeros((1, 2)), np.array([inst.lam]), inst.arrival)
    i = grid.encode([2, 1])
    assert inner_objective(inst, grid, V, [2, 1], probs) == V[i]


def test_probability_and_price_objectives_agree(inst, grid):
    rng = np.random.default_rng(1)
    V = rng.normal(size=grid.size)
    for _ in range(50):
        x = rng.integers(0, 4, size=2)
        d = rng.uniform(0.0, 2.0, size=(1, 2))
        probs = mnl_probabilities(inst, d)
        assert inner_objective(inst, grid, V, x, probs) == pytest.approx(
            price_objective(inst, grid, V, x, d), abs=1e-12)


def test_full_state_keeps_its_value(inst, grid):
    V = np.random.default_rng(2).normal(size=grid.size)
    result = backup_state(inst, grid, V, [4, 4])
    assert result.value == V[grid.top]
    assert np.all(result.argmax_prices == CLOSED)
    assert result.argmax_probs.total == 0.0


def test_full_slot_is_closed(inst, grid):
    V = np.asarray(fixed_point(inst, grid))
    result = backup_state(inst, grid, V, [4, 1])
    assert result.argmax_prices[0, 0] == CLOSED and result.argmax_prices[0, 1] == 2.0
    probs = ChoiceProbabilities(np.array([[0.1, 0.1]]), np.array([0.3]), inst.arrival)
    with pytest.raises(ValueError):
        inner_objective(inst, grid, V, [4, 1], probs)


def test_fixed_point_is_priced_at_upper_bound(inst, grid):
    V = np.asarray(fixed_point(inst, grid))
    values, prices = apply_operator(inst, grid, V, return_prices=True)
    assert np.max(np.abs(values - V)) < 1e-12
    open_ = ~grid.full.reshape(-1, 1, 2)
    assert np.all(prices[open_] == 2.0)


def test_one_backup_matches_grid_search(inst, grid):
    V = np.asarray(terminal_value(inst, grid))
    values = apply_operator(inst, grid, V)
    for i in range(grid.size):
        oracle = grid_backup(inst, grid, V, i, n=501)
        assert oracle - 1e-12 <= values[i] <= oracle + 1e-5


def test_two_area_decomposition_matches_joint_search():
    inst = ProblemInstance(
        num_areas=2, num_slots=1, horizon=3, lam=0.6, area_prob=[0.3, 0.7], beta_c=0.5,
        beta_slot=[0.5], beta_d=-1.5, d_min=0.0, d_max=3.0, r=0.5, capacity=[[2], [2]],
        cost=CostModel.affine(1.0, [0.5, 1.0]),
    )
    grid = StateGrid.for_instance(inst)
    V = np.random.default_rng(3).uniform(-3.0, 3.0, grid.size)
    values = apply_operator(inst, grid, V)
    for i in range(grid.size):
        oracle = grid_backup(inst, grid, V, i, n=1001)
        assert oracle - 1e-12 <= values[i] <= oracle + 1e-6


def test_operator_is_monotone(inst, grid):
    rng = np.random.default_rng(4)
    for _ in range(20):
        W = rng.uniform(-10, 10, grid.size)
        V = W + rng.uniform(0, 3, grid.size)
        assert np.all(apply_operator(inst, grid, V) >= apply_operator(inst, grid, W) - 1e-12)


def test_operator_commutes_with_constants(inst, grid):
    V = np.random.default_rng(5).normal(size=grid.size)
    shifted = apply_operator(inst, grid, V + 7.0)
    assert np.allclose(shifted, apply_operator(inst, grid, V) + 7.0, atol=1e-12)


def test_gradient_method_matches_exact(inst, grid):
    V = np.random.default_rng(6).uniform(-10, 10, grid.size)
    exact = apply_operator(inst, grid, V)
    ascent = apply_operator(inst, grid, V, method="gradient")
    assert np.max(np.abs(exact - ascent)) < 1e-9


def _objective_along(inst, grid, V, x, p):
    p = np.asarray(p).reshape(1, 2)
    probs = ChoiceProbabilities(p, inst.arrival - p.sum(axis=1), inst.arrival)
    return inner_objective(inst, grid, V, x, probs)


def test_interior_maximizer_has_zero_gradient(inst, grid):
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(200):
        V = rng.uniform(-3, 3, grid.size)
        x = rng.integers(0, 4, size=2)
        best = backup_state(inst, grid, V, x)
        d = best.argmax_prices
        if np.any(d <= 1e-6) or np.any(d >= 2 - 1e-6):
            continue
        p = best.argmax_probs.p.ravel()
        h = 1e-6
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            slope = (_objective_along(inst, grid, V, x, p + e)
                     - _objective_along(inst, grid, V, x, p - e)) / (2 * h)
            assert abs(slope) < 1e-6
        checked += 1
    assert checked >= 10


def test_objective_is_concave_in_probabilities(inst, grid):
    rng = np.random.default_rng(8)
    V = rng.normal(size=grid.size)
    for _ in range(200):
        x = rng.integers(0, 4, size=2)
        p = mnl_probabilities(inst, rng.uniform(0, 2, (1, 2))).p
        q = mnl_probabilities(inst, rng.uniform(0, 2, (1, 2))).p
        mid = _objective_along(inst, grid, V, x, (p + q) / 2)
        ends = (_objective_along(inst, grid, V, x, p) + _objective_along(inst, grid, V, x, q)) / 2
        assert mid >= ends - 1e-10


def test_horizon_zero_returns_terminal(inst, grid):
    trajectory = solve_horizon(inst.replace(horizon=0), grid)
    assert len(trajectory) == 1 and trajectory[0].t == 1
    assert np.array_equal(trajectory[0].values, -inst.cost.on_grid(grid.states))


def test_trajectory_order_and_keep(inst, grid, trajectory):
    assert [V.t for V in trajectory[:3]] == [201, 200, 199] and trajectory[-1].t == 1
    kept = solve_horizon(inst, grid, keep=[150, 50], record_prices=True)
    assert [V.t for V in kept] == [201, 150, 50, 1]
    by_t = {V.t: V for V in trajectory}
    for V in kept:
        assert np.array_equal(V.values, by_t[V.t].values)
    assert kept[1].prices.shape == (25, 1, 2) and kept[0].prices is None


def test_table1_regression(trajectory, grid):
    # frozen from a run of the exact solver; the acceptance suite checks the
    # same trajectory against the fixed point and a price-grid oracle
    V1 = np.asarray(trajectory[-1])
    assert V1[grid.encode([0, 0])] == pytest.approx(9.996332331603751, rel=1e-12)
    assert V1[grid.top] == -14.0


@pytest.mark.parametrize("bad", [np.full(25, np.nan), np.zeros(24)])
def test_invalid_value_functions(inst, grid, bad):
    with pytest.raises(ValueError):
        apply_operator(inst, grid, bad)


def test_unknown_method(inst, grid):
    with pytest.raises(ValueError):
        apply_operator(inst, grid, np.zeros(25), method="newton")
