"""Brute-force reference computations, independent of the solver code paths."""

import itertools
import math

import numpy as np


def logit(inst, d):
    """Per-area logit shares straight from the formula, CLOSED as +inf."""
    d = np.asarray(d, dtype=float)
    shares = np.zeros_like(d)
    for a in range(d.shape[0]):
        terms = [0.0 if math.isinf(d[a, s]) else
                 math.exp(inst.beta_c + inst.beta_slot[s] + inst.beta_d * d[a, s])
                 for s in range(d.shape[1])]
        denom = sum(terms) + 1.0
        shares[a] = [t / denom for t in terms]
    return shares


def grid_backup(inst, grid, V, index, n=2001):
    """Maximum of the backup bracket over a uniform price grid on every open pair."""
    V = np.asarray(V, dtype=float)
    x = grid.states[index]
    open_pairs = [k for k in range(grid.dim) if x[k] < grid.capacity[k]]
    S = inst.num_slots
    ticks = np.linspace(inst.d_min, inst.d_max, n)
    mesh = np.meshgrid(*([ticks] * len(open_pairs)), indexing="ij")
    total = np.zeros(mesh[0].shape if open_pairs else ())
    for a in range(inst.num_areas):
        num = np.zeros_like(total)
        den = np.ones_like(total)
        for m, k in enumerate(open_pairs):
            if k // S != a:
                continue
            s = k % S
            w = np.exp(inst.beta_c + inst.beta_slot[s] + inst.beta_d * mesh[m])
            y = index + grid.strides[k]
            num = num + w * (inst.r + mesh[m] + V[y] - V[index])
            den = den + w
        total = total + inst.lam * inst.area_prob[a] * num / den
    return V[index] + float(np.max(total))


def aux_by_enumeration(inst, grid, n=201):
    """Auxiliary DP by descending index with a price grid search per state."""
    v = np.ones(grid.size)
    ticks = np.linspace(inst.d_min, inst.d_max, n)
    S = inst.num_slots
    for i in range(grid.size - 2, -1, -1):
        x = grid.states[i]
        open_pairs = [k for k in range(grid.dim) if x[k] < grid.capacity[k]]
        best = -np.inf
        for prices in itertools.product(ticks, repeat=len(open_pairs)):
            d = np.full((inst.num_areas, S), np.inf)
            for k, price in zip(open_pairs, prices):
                d[k // S, k % S] = price
            p = inst.lam * inst.area_prob[:, None] * logit(inst, d)
            p = p.ravel()
            mass = sum(p[k] for k in open_pairs)
            value = (1.0 + sum(p[k] * v[i + grid.strides[k]] for k in open_pairs)) / mass
            best = max(best, value)
        v[i] = best
    return v


def caratheodory_closure(points, fvals, x, tol=1e-12):
    """Concave closure at x by enumerating affinely independent supports of size <= N+1."""
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    n, N = points.shape
    best = -np.inf
    for size in range(1, N + 2):
        for subset in itertools.combinations(range(n), size):
            Q = points[list(subset)]
            M = np.vstack([Q.T, np.ones(size)])
            if np.linalg.matrix_rank(M) < size:
                continue
            mu, *_ = np.linalg.lstsq(M, np.append(x, 1.0), rcond=None)
            if np.any(mu < -tol) or np.max(np.abs(M @ mu - np.append(x, 1.0))) > 1e-10:
                continue
            best = max(best, float(mu @ np.asarray(fvals)[list(subset)]))
    return best
