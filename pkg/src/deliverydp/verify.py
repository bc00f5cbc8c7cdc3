"""Randomized property suites behind ``deliverydp verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import auxiliary_dp, contraction_check, fixed_point
from .concavity import (
    check_concavity_preservation,
    extensibility_margin,
    area_hessian,
    f_hessian_check,
    lambda_bound,
)
from .grid import StateGrid
from .model import (
    CLOSED,
    ProblemInstance,
    logit_shares,
    mnl_probabilities,
    price_from_probability,
)

CONTRACTION_TOL = 1e-9
PRESERVATION_TOL = 1e-9
EIGEN_TOL = 1e-9
SCHUR_TOL = 1e-12
FD_TOL = 1e-5
ROUNDTRIP_TOL = 1e-10


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int = 0
    worst: float = -np.inf
    counterexample: dict | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, excess: float, example: dict):
        """Log one trial; ``excess > 0`` marks a violation."""
        if excess > self.worst:
            self.worst = float(excess)
        if excess > 0:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = example


def random_prices(inst: ProblemInstance, rng, closed_prob=0.0) -> np.ndarray:
    d = rng.uniform(inst.d_min, inst.d_max, size=(inst.num_areas, inst.num_slots))
    if closed_prob > 0:
        d[rng.random(d.shape) < closed_prob] = CLOSED
    return d


def random_pair(grid: StateGrid, scale: float, rng):
    """Two bounded value functions agreeing on the absorbing full state."""
    V = rng.uniform(-scale, scale, grid.size)
    W = rng.uniform(-scale, scale, grid.size)
    W[grid.top] = V[grid.top]
    return V, W


def random_concave(grid: StateGrid, rng) -> np.ndarray:
    """Strictly concave quadratic plus a random affine part, sampled on the lattice."""
    X = grid.states.astype(float)
    M = rng.normal(size=(grid.dim, grid.dim))
    Q = M @ M.T + 0.1 * np.eye(grid.dim)
    b = rng.normal(scale=3.0, size=grid.dim)
    return -np.einsum("ij,jk,ik->i", X, Q, X) + X @ b + rng.normal()


def area_revenue(inst: ProblemInstance, area: int, z) -> float:
    """Area revenue term as a function of ``z = (p_{a,1}, ..., p_{a,S}, p_{a,0})``."""
    z = [float(v) for v in z]
    p, p0 = z[:-1], z[-1]
    terms = [
        ps * (inst.r + (math.log(ps / p0) - inst.beta_c - bs) / inst.beta_d)
        for ps, bs in zip(p, inst.beta_slot)
    ]
    return math.fsum(terms)


def _central_hessian(fun, z, h):
    n = z.size
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h[i]
            ej[j] = h[j]
            value = fun(z + ei + ej) - fun(z + ei - ej) - fun(z - ei + ej) + fun(z - ei - ej)
            H[i, j] = H[j, i] = value / (4 * h[i] * h[j])
    return H


def finite_difference_hessian(fun, z, rel_step=3e-3) -> np.ndarray:
    """Central-difference Hessian, Richardson-extrapolated over two step sizes.

    Steps are proportional to each coordinate, so ``z`` must be nonzero.
    """
    z = np.asarray(z, dtype=float)
    h = rel_step * np.abs(z)
    coarse = _central_hessian(fun, z, h)
    fine = _central_hessian(fun, z, h / 2)
    return (4 * fine - coarse) / 3


def contraction_suite(inst, grid, rng, trials) -> SuiteResult:
    cert = auxiliary_dp(inst, grid)
    scale = 1.0 + float(np.max(np.abs(np.asarray(fixed_point(inst, grid)))))
    result = SuiteResult("contraction", trials)
    for _ in range(trials):
        V, W = random_pair(grid, scale, rng)
        lhs, rhs = contraction_check(inst, grid, cert, V, W)
        result.record(lhs - rhs - CONTRACTION_TOL,
                      {"V": V.tolist(), "W": W.tolist(), "lhs": lhs, "rhs": rhs})
    return result


def preservation_suite(inst, grid, rng, trials) -> SuiteResult:
    result = SuiteResult("concavity_preservation", trials)
    d_ref = np.full((inst.num_areas, inst.num_slots), inst.d_min)
    for _ in range(trials):
        V = random_concave(grid, rng)
        eps = extensibility_margin(V, grid).epsilon
        bound = lambda_bound(V, inst, grid, d_ref, epsilon=eps)
        lam = min(0.5 * bound, inst.lam) if np.isfinite(bound) else inst.lam
        before, after = check_concavity_preservation(inst.replace(lam=lam), grid, V)
        result.record(-after - PRESERVATION_TOL,
                      {"V": V.tolist(), "lambda": lam, "before": before, "after": after})
    return result


def hessian_suite(inst, rng, trials) -> SuiteResult:
    result = SuiteResult("hessian", trials)
    for _ in range(trials):
        d = random_prices(inst, rng)
        probs = mnl_probabilities(inst, d)
        if np.any(probs.p <= 0):
            continue
        max_eig, schur = f_hessian_check(inst, probs)
        fd_err = 0.0
        for a in range(inst.num_areas):
            z = np.append(probs.p[a], probs.p0[a])
            fd = finite_difference_hessian(lambda v, a=a: area_revenue(inst, a, v), z)
            fd_err = max(fd_err, float(np.max(np.abs(fd - area_hessian(inst, probs, a)))))
        excess = max(max_eig - EIGEN_TOL, abs(schur) - SCHUR_TOL, fd_err - FD_TOL)
        result.record(excess, {"d": d.tolist(), "max_eig": max_eig, "schur": schur,
                               "fd_error": fd_err})
    return result


def roundtrip_suite(inst, rng, trials) -> SuiteResult:
    result = SuiteResult("price_roundtrip", trials)
    for _ in range(trials):
        d = random_prices(inst, rng, closed_prob=0.2)
        probs = mnl_probabilities(inst, d)
        d_back = price_from_probability(inst, probs)
        # the recovered prices may sit a rounding error outside the box
        shares, _ = logit_shares(inst.slot_utility, inst.beta_d, d_back)
        err = float(np.max(np.abs(inst.arrival[:, None] * shares - probs.p)))
        result.record(err - ROUNDTRIP_TOL, {"d": np.where(np.isinf(d), None, d).tolist(),
                                            "error": err})
    return result


def run_all(inst: ProblemInstance, seed: int, trials: int) -> list[SuiteResult]:
    """Run every suite with one seeded generator, in a fixed order."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    grid = StateGrid.for_instance(inst)
    return [
        contraction_suite(inst, grid, rng, trials),
        preservation_suite(inst, grid, rng, trials),
        hessian_suite(inst, rng, trials),
        roundtrip_suite(inst, rng, trials),
    ]

