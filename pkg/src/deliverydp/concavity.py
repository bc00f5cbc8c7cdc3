"""Concave closures and concave extensibility of lattice functions.

The concave closure of ``f`` at a point ``x`` is the smallest value of an
affine majorant of ``f`` at ``x``.  By LP duality it equals

    max { sum_q mu_q f(q) : mu >= 0, sum_q mu_q = 1, sum_q mu_q q = x },

which is what :func:`concave_closure_eval` solves.  A function is concave
extensible when it coincides with its closure on the lattice, i.e. when no
convex combination of *other* lattice points interpolates above it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dp import apply_operator
from .grid import StateGrid
from .model import ChoiceProbabilities, ProblemInstance, mnl_probabilities
from .simplex import OPTIMAL, simplex_max

MAX_STATES = 10_000


@dataclass
class EnclosingCombination:
    """Convex combination of lattice points reproducing ``target``."""

    target: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    def residual(self) -> float:
        return float(np.max(np.abs(self.weights @ self.points - self.target), initial=0.0))

    def is_valid(self, tol=1e-12) -> bool:
        return (
            np.all(self.weights >= 0)
            and abs(self.weights.sum() - 1.0) <= tol
            and self.residual() <= tol
            and not np.any(np.all(self.points == self.target, axis=1))
        )


@dataclass
class ExtensibilityReport:
    """Worst-case interpolation margin of a lattice function.

    ``margins[i]`` is ``V(x_i)`` minus the best interpolation of ``V`` from
    the other lattice points, NaN for states (hull vertices) that no other
    points enclose.  ``epsilon`` is the smallest margin and ``witness`` the
    combination attaining it.
    """

    epsilon: float
    witness: EnclosingCombination | None
    margins: np.ndarray = field(repr=False)

    @property
    def extensible(self) -> bool:
        return self.epsilon >= -1e-9


def max_interpolation(points, fvals, x, feas_tol=1e-10):
    """Best convex interpolation of ``fvals`` at ``x`` from ``points``.

    Returns ``(value, weights)``, or ``None`` when ``x`` is outside the
    convex hull of ``points``.
    """
    points = np.asarray(points, dtype=float)
    fvals = np.asarray(fvals, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    A = np.vstack([points.T, np.ones(len(points))])
    b = np.append(x, 1.0)
    result = simplex_max(fvals, A, b, feas_tol=feas_tol)
    if result.status != OPTIMAL:
        return None
    return result.value, result.x


def concave_closure_eval(values, grid: StateGrid, x) -> float:
    """Concave closure of a lattice function at a real point ``x``."""
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (grid.dim,):
        raise ValueError(f"point must have {grid.dim} coordinates")
    if np.any(x < -1e-10) or np.any(x > grid.capacity + 1e-10):
        raise ValueError(f"point {x.tolist()} lies outside the convex hull of the lattice")
    found = max_interpolation(grid.states, values, x)
    if found is None:
        raise ValueError(f"point {x.tolist()} lies outside the convex hull of the lattice")
    return found[0]


def extensibility_margin(values, grid: StateGrid, max_states: int = MAX_STATES
                         ) -> ExtensibilityReport:
    """Margins ``V(x) - max_mu sum mu_q V(q)`` over ``q`` in the lattice minus ``x``.

    A nonnegative ``epsilon`` certifies concave extensibility.
    """
    values = np.asarray(values, dtype=float)
    if grid.size > max_states:
        raise ValueError(f"grid has {grid.size} states; exact margins are limited to {max_states}")
    states = grid.states
    margins = np.full(grid.size, np.nan)
    witness = None
    epsilon = np.inf
    for i in range(grid.size):
        others = np.delete(np.arange(grid.size), i)
        found = max_interpolation(states[others], values[others], states[i])
        if found is None:
            continue
        best, weights = found
        margins[i] = values[i] - best
        if margins[i] < epsilon:
            epsilon = margins[i]
            support = weights > 0
            witness = EnclosingCombination(
                states[i].copy(), states[others][support].copy(), weights[support]
            )
    if witness is None:
        epsilon = 0.0
    return ExtensibilityReport(float(epsilon), witness, margins)


def check_concavity_preservation(inst: ProblemInstance, grid: StateGrid, V, method="exact"):
    """Extensibility margins of ``V`` and of its image under the DP operator."""
    before = extensibility_margin(V, grid).epsilon
    after = extensibility_margin(apply_operator(inst, grid, V, method=method), grid).epsilon
    return before, after


def area_hessian(inst: ProblemInstance, probs: ChoiceProbabilities, area: int) -> np.ndarray:
    """Hessian of the area revenue term in ``(p_{a,1}, ..., p_{a,S}, p_{a,0})``."""
    p = np.asarray(probs.p, dtype=float)[area]
    p0 = float(np.asarray(probs.p0, dtype=float)[area])
    if np.any(p <= 0) or p0 <= 0:
        raise ValueError("Hessian needs strictly positive probabilities")
    S = p.size
    inv_bd = 1.0 / inst.beta_d
    H = np.zeros((S + 1, S + 1))
    H[np.arange(S), np.arange(S)] = inv_bd / p
    H[:S, S] = H[S, :S] = -inv_bd / p0
    H[S, S] = inv_bd * p.sum() / p0**2
    return H


def f_hessian_check(inst: ProblemInstance, probs: ChoiceProbabilities):
    """Largest Hessian eigenvalue and largest-magnitude Schur complement over areas.

    The Schur complement is taken of the diagonal slot block in each area
    Hessian; it vanishes identically, so the Hessian is negative
    semidefinite exactly when the slot block is negative definite.
    """
    max_eig = -np.inf
    schur = 0.0
    for a in range(inst.num_areas):
        H = area_hessian(inst, probs, a)
        A, B, C = H[:-1, :-1], H[:-1, -1], H[-1, -1]
        s = C - B @ (B / np.diag(A))
        max_eig = max(max_eig, float(np.linalg.eigvalsh(H).max()))
        if abs(s) > abs(schur):
            schur = float(s)
    return max_eig, schur


def forward_difference_range(values, grid: StateGrid) -> tuple[float, float]:
    """Smallest and largest ``V(x + 1_k) - V(x)`` over feasible moves."""
    diffs = grid.forward_differences(values)
    if np.all(np.isnan(diffs)):
        return 0.0, 0.0
    return float(np.nanmin(diffs)), float(np.nanmax(diffs))


def lambda_bound(values, inst: ProblemInstance, grid: StateGrid, d_ref, margin_tol=1e-10,
                 epsilon=None) -> float:
    """Arrival probability below which the strict margin of ``values`` survives a backup.

    Returns ``epsilon / ((W - w) * sum_a pi(a) sum_s Pi_{a,s}(d_ref))`` with
    ``w, W`` the extreme forward differences, or ``inf`` when the strict
    margin vanishes (the hyperplane case) or ``W == w``.
    """
    if epsilon is None:
        epsilon = extensibility_margin(values, grid).epsilon
    w, W = forward_difference_range(values, grid)
    if epsilon <= margin_tol or W <= w:
        return np.inf
    probs = mnl_probabilities(inst, d_ref)
    purchase = float((inst.area_prob[:, None] * probs.shares).sum())
    return float(epsilon / ((W - w) * purchase))
