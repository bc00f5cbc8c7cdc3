"""Per-area maximization of logit-weighted payoffs over box-constrained prices.

Both the DP backup and the auxiliary stationary DP reduce, area by area, to

    maximize_d  sum_s Pi_s(d) * (price_weight * d_s + kappa_s)
    subject to  d_s in [d_min, d_max] for offered slots,

where Pi are the logit shares of one area.  Writing w_s = exp(u_s + beta_d d_s)
and multiplying through by the logit denominator, the optimal value R* is the
unique root of the convex, strictly decreasing function

    H(R) = sum_s max_{d_s} w_s(d_s) * (price_weight * d_s + kappa_s - R) - R,

whose inner maxima separate per slot and have closed forms.  Newton's method
started left of the root converges monotonically.  ``solve_area_gradient``
is the slower ascent in share space, kept as a cross-check.
"""

from __future__ import annotations

import numpy as np

from .model import CLOSED, logit_shares


def _slot_prices(R, kappa, price_weight, b, lo, hi):
    # best price of each slot for a trial value R of the area payoff
    if price_weight > 0:
        return np.clip((R[..., None] - kappa) / price_weight + 1.0 / b, lo, hi)
    return np.where(kappa - R[..., None] > 0, lo, hi)


def solve_area(utility, beta_d, d_min, d_max, kappa, offered, price_weight=1.0,
               tol=1e-15, max_iter=200):
    """Maximize the logit-weighted payoff of one area, batched.

    Parameters
    ----------
    utility : array, shape (S,)
        Price-free slot utilities ``beta_c + beta_s``.
    beta_d : float
        Negative price sensitivity.
    d_min, d_max : float
        Price bounds for offered slots.
    kappa : array, shape (..., S)
        Price-free payoff of a sale in each slot.
    offered : bool array, shape (..., S)
        Slots that must be priced inside the box; all others are CLOSED.
    price_weight : float
        Coefficient of the charge in the payoff (1 for revenue, 0 when the
        charge itself is not collected).

    Returns
    -------
    value : array, shape (...)
        Optimal payoff per unit arrival mass.
    prices : array, shape (..., S)
        Maximizing charges, ``CLOSED`` where not offered.
    """
    if beta_d >= 0:
        raise ValueError("beta_d must be negative")
    if price_weight < 0:
        raise ValueError("price_weight must be nonnegative")
    utility = np.asarray(utility, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    offered = np.broadcast_to(np.asarray(offered, dtype=bool), kappa.shape)
    if not np.all(np.isfinite(kappa[offered])):
        raise ValueError("payoffs of offered slots must be finite")
    kappa = np.where(offered, kappa, 0.0)
    b = -beta_d

    # H(R) >= 0 at R = min(0, smallest attainable payoff)
    floor = np.where(offered, price_weight * d_min + kappa, np.inf).min(axis=-1)
    R = np.minimum(0.0, floor)
    for _ in range(max_iter):
        d = _slot_prices(R, kappa, price_weight, b, d_min, d_max)
        w = np.where(offered, np.exp(utility + beta_d * d), 0.0)
        H = (w * (price_weight * d + kappa - R[..., None])).sum(axis=-1) - R
        step = H / (w.sum(axis=-1) + 1.0)
        R = R + step
        if np.all(np.abs(step) <= tol * (1.0 + np.abs(R))):
            break

    d = _slot_prices(R, kappa, price_weight, b, d_min, d_max)
    prices = np.where(offered, d, CLOSED)
    shares, _ = logit_shares(utility, beta_d, prices)
    payoff = np.where(offered, price_weight * np.where(offered, d, 0.0) + kappa, 0.0)
    value = (shares * payoff).sum(axis=-1)
    return value, prices


def area_payoff(utility, beta_d, prices, kappa, price_weight=1.0) -> float:
    """Logit-weighted payoff of one area at given charges."""
    prices = np.asarray(prices, dtype=float)
    shares, _ = logit_shares(utility, beta_d, prices)
    offered = ~np.isposinf(prices)
    payoff = np.where(offered, price_weight * np.where(offered, prices, 0.0) + kappa, 0.0)
    return float((shares * payoff).sum())


def solve_area_gradient(utility, beta_d, d_min, d_max, kappa, offered, price_weight=1.0,
                        tol=1e-12, max_iter=10_000):
    """Projected gradient ascent in share space for a single area.

    The payoff is concave in the slot shares ``q`` (with the no-purchase
    share ``q0 = 1 - sum(q)``).  Price bounds are linear in share space:
    a slot at a bound keeps the fixed ratio ``q_s / q0``.  Each iteration
    pins the slots whose price sits at a bound the gradient pushes against,
    takes a backtracking ascent step in the shares of the remaining slots,
    maps back to prices and clamps them into the box.  Starts from the
    mid-interval price; stops when the reduced gradient of the free shares
    is below ``tol`` in every coordinate, when no ascent step improves the
    value any more, or after ``max_iter`` steps.

    Returns ``(value, prices)`` like :func:`solve_area` for one area.
    """
    utility = np.asarray(utility, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    offered = np.asarray(offered, dtype=bool)
    prices = np.full(kappa.shape, CLOSED)
    if not offered.any():
        return 0.0, prices
    u, k = utility[offered], kappa[offered]
    a, b = price_weight, -beta_d

    def evaluate(d):
        q, q0 = logit_shares(u, beta_d, d)
        return float(q @ (a * d + k)), q, float(q0)

    d = np.full(u.shape, 0.5 * (d_min + d_max))
    value, q, q0 = evaluate(d)
    eta = 1.0
    pinned_before = None
    for _ in range(max_iter):
        # sign of the price derivative decides which bounds are active
        d_grad = q * (a - b * (a * d + k - value))
        pinned = ((d >= d_max) & (d_grad >= 0)) | ((d <= d_min) & (d_grad <= 0))
        free = ~pinned
        if not free.any():
            break
        ratio = np.exp(u + beta_d * d)
        gamma = 1.0 / (1.0 + ratio[pinned].sum())
        pinned_payoff = ratio[pinned] @ (a * d[pinned] + k[pinned])
        grad = (a * d[free] + k[free] + (a / beta_d) * (1.0 + gamma * q[free].sum() / q0)
                - gamma * pinned_payoff)
        if np.max(np.abs(grad)) <= tol:
            break

        improved = False
        while eta > 1e-18:
            qf = q[free] + eta * grad
            q0_new = (1.0 - qf.sum()) * gamma
            if q0_new <= 0 or np.any(qf <= 0):
                eta *= 0.5
                continue
            d_new = d.copy()
            d_new[free] = np.clip((np.log(qf / q0_new) - u[free]) / beta_d, d_min, d_max)
            new_value, new_q, new_q0 = evaluate(d_new)
            if new_value > value:
                improved = True
                break
            eta *= 0.5
        same_set = pinned_before is not None and np.array_equal(pinned, pinned_before)
        pinned_before = pinned
        if not improved:
            if same_set:
                break
            eta = 1.0
            continue
        d, value, q, q0 = d_new, new_value, new_q, new_q0
        eta *= 2.0

    prices[offered] = d
    return value, prices
