"""Small dense two-phase simplex method.

Solves ``max c @ x  s.t.  A @ x == b, x >= 0`` with a full tableau and
Bland's pivoting rule, which cannot cycle.  Intended for LPs with a handful
of rows and at most a few hundred columns.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPResult(NamedTuple):
    status: str
    x: np.ndarray | None
    value: float


def _pivot(T, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _run(T, basis, c, tol, max_iter):
    """Simplex iterations on tableau ``T`` (constraint rows only)."""
    m = T.shape[0]
    ncols = c.size
    for _ in range(max_iter):
        reduced = c[basis] @ T[:, :ncols] - c
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return OPTIMAL
        col = entering[0]
        column = T[:, col]
        candidates = np.flatnonzero(column > tol)
        if candidates.size == 0:
            return UNBOUNDED
        ratios = T[candidates, -1] / column[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + tol * max(1.0, abs(best))]
        row = ties[np.argmin([basis[i] for i in ties])]
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError(f"simplex did not terminate within {max_iter} pivots on {m} rows")


def simplex_max(c, A_eq, b_eq, tol=1e-12, feas_tol=1e-10, max_iter=10_000) -> LPResult:
    """Maximize ``c @ x`` over ``{x >= 0 : A_eq @ x == b_eq}``."""
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).ravel()
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")

    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    # phase 1: drive artificial variables to zero
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    _run(T, basis, c1, tol, max_iter)
    if -(c1[basis] @ T[:, -1]) > feas_tol:
        return LPResult(INFEASIBLE, None, np.nan)

    # pivot remaining artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if basis[i] < n:
            keep.append(i)
            continue
        cols = np.flatnonzero(np.abs(T[i, :n]) > 1e-9)
        if cols.size:
            _pivot(T, i, cols[0])
            basis[i] = cols[0]
            keep.append(i)
    T = np.hstack([T[keep, :n], T[keep, -1:]])
    basis = [basis[i] for i in keep]

    status = _run(T, basis, c, tol, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, np.inf)
    x = np.zeros(n)
    x[basis] = T[:, -1]
    x = np.maximum(x, 0.0)
    return LPResult(OPTIMAL, x, float(c @ x))
