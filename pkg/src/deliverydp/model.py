"""Problem data, the multinomial logit choice model and the delivery cost.

Everything indexed by a (sub-area, slot) pair is stored as a 2-D array of
shape ``(num_areas, num_slots)``. Order-count states ``x`` are the same
arrays flattened area-major, i.e. ``x.ravel()``.

A slot that is not offered carries the price ``CLOSED`` (``+inf``); its
exponential term in the logit denominator is then exactly zero.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CLOSED = np.inf

_COST_KINDS = ("affine", "tabulated")


class ConfigError(ValueError):
    """Raised when a problem configuration is invalid.

    ``field`` names the offending configuration key.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CostModel:
    """Delivery cost C on the order lattice.

    ``kind="affine"`` gives ``C(x) = intercept + sum(coefficients * x)``;
    ``kind="tabulated"`` looks the cost up in ``table``, an array of shape
    ``tuple(capacity.ravel() + 1)`` (so its C-order flat index is the state
    index of :class:`deliverydp.grid.StateGrid`).
    """

    kind: str = "affine"
    intercept: float = 0.0
    coefficients: np.ndarray | None = None
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _COST_KINDS:
            raise ConfigError("cost.kind", f"unknown cost kind {self.kind!r}")
        if self.kind == "affine":
            if self.coefficients is None:
                raise ConfigError("cost.coefficients", "affine cost needs coefficients")
            object.__setattr__(self, "coefficients", _frozen(self.coefficients))
            object.__setattr__(self, "intercept", float(self.intercept))
            if not np.all(np.isfinite(self.coefficients)) or not np.isfinite(self.intercept):
                raise ConfigError("cost.coefficients", "cost parameters must be finite")
        else:
            if self.table is None:
                raise ConfigError("cost.table", "tabulated cost needs a table")
            table = _frozen(self.table)
            if not np.all(np.isfinite(table)):
                raise ConfigError("cost.table", "cost must be finite on every state")
            object.__setattr__(self, "table", table)

    @classmethod
    def affine(cls, intercept, coefficients) -> "CostModel":
        return cls("affine", intercept=intercept, coefficients=coefficients)

    @classmethod
    def tabulated(cls, table) -> "CostModel":
        return cls("tabulated", table=table)

    def on_grid(self, states: np.ndarray) -> np.ndarray:
        """Vectorized cost on an ``(n, N)`` array of states known to lie in X."""
        states = np.asarray(states)
        if self.kind == "affine":
            return self.intercept + states @ self.coefficients.ravel()
        return self.table[tuple(states.T)]


def evaluate_cost(cost: CostModel, x, capacity) -> float:
    """Cost of the order state ``x``; ``+inf`` when ``x`` lies outside X."""
    x = np.asarray(x).ravel()
    cap = np.asarray(capacity).ravel()
    if x.shape != cap.shape:
        raise ValueError(f"state has {x.size} entries, lattice has {cap.size}")
    if np.any(x < 0) or np.any(x > cap) or np.any(x != np.round(x)):
        return np.inf
    return float(cost.on_grid(x.astype(int)[None, :])[0])


@dataclass(frozen=True)
class ProblemInstance:
    """Data of the slot pricing problem.

    Parameters
    ----------
    num_areas, num_slots : int
        Number of delivery sub-areas and of delivery slots.
    horizon : int
        Number of booking time steps.
    lam : float
        Probability that a customer arrives in one time step, in (0, 1).
    area_prob : array, shape (num_areas,)
        Probability that an arriving customer comes from each sub-area.
    beta_c, beta_slot, beta_d : float, array, float
        Logit constant, per-slot popularity and (negative) price sensitivity.
    d_min, d_max : float
        Bounds on the delivery charge of an offered slot.
    r : float
        Expected net revenue per order.
    capacity : int array, shape (num_areas, num_slots)
        Maximum number of orders per (area, slot) pair.
    cost : CostModel
    """

    num_areas: int
    num_slots: int
    horizon: int
    lam: float
    area_prob: np.ndarray
    beta_c: float
    beta_slot: np.ndarray
    beta_d: float
    d_min: float
    d_max: float
    r: float
    capacity: np.ndarray
    cost: CostModel = field(repr=False)

    def __post_init__(self):
        A, S = int(self.num_areas), int(self.num_slots)
        if A < 1:
            raise ConfigError("num_areas", "must be a positive integer")
        if S < 1:
            raise ConfigError("num_slots", "must be a positive integer")
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ConfigError("horizon", "must be a nonnegative integer")
        object.__setattr__(self, "num_areas", A)
        object.__setattr__(self, "num_slots", S)
        object.__setattr__(self, "horizon", int(self.horizon))

        for name in ("lam", "beta_c", "beta_d", "d_min", "d_max", "r"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ConfigError(name, "must be finite")
            object.__setattr__(self, name, value)
        if not 0.0 < self.lam < 1.0:
            raise ConfigError("lambda", f"must lie in (0, 1), got {self.lam}")
        if self.beta_d >= 0.0:
            raise ConfigError("beta_d", f"price sensitivity must be negative, got {self.beta_d}")
        if self.d_min > self.d_max:
            raise ConfigError("d_min", "d_min must not exceed d_max")

        area_prob = _frozen(self.area_prob)
        if area_prob.shape != (A,):
            raise ConfigError("area_prob", f"expected {A} entries, got {area_prob.size}")
        if np.any(area_prob < 0) or np.any(area_prob > 1):
            raise ConfigError("area_prob", "entries must lie in [0, 1]")
        if abs(area_prob.sum() - 1.0) > 1e-12:
            raise ConfigError("area_prob", f"must sum to 1, sums to {area_prob.sum()!r}")
        object.__setattr__(self, "area_prob", area_prob)

        beta_slot = _frozen(self.beta_slot)
        if beta_slot.shape != (S,) or not np.all(np.isfinite(beta_slot)):
            raise ConfigError("beta_slot", f"expected {S} finite entries")
        object.__setattr__(self, "beta_slot", beta_slot)

        capacity = np.asarray(self.capacity)
        if capacity.size != A * S:
            raise ConfigError("capacity", f"expected {A * S} entries, got {capacity.size}")
        if np.any(capacity != np.round(capacity)) or np.any(capacity < 0):
            raise ConfigError("capacity", "entries must be nonnegative integers")
        object.__setattr__(self, "capacity", _frozen(capacity.reshape(A, S), dtype=int))

        if not isinstance(self.cost, CostModel):
            raise ConfigError("cost", "expected a CostModel")
        if self.cost.kind == "affine" and self.cost.coefficients.size != A * S:
            raise ConfigError("cost.coefficients", f"expected {A * S} entries")
        if self.cost.kind == "tabulated" and self.cost.table.shape != tuple(
            self.capacity.ravel() + 1
        ):
            raise ConfigError("cost.table", "table shape must be capacity + 1 per pair")

    @property
    def dim(self) -> int:
        return self.num_areas * self.num_slots

    @property
    def arrival(self) -> np.ndarray:
        """Per-area arrival probability ``lam * area_prob``."""
        return self.lam * self.area_prob

    @property
    def slot_utility(self) -> np.ndarray:
        """Price-free part of each slot's utility, ``beta_c + beta_s``."""
        return self.beta_c + self.beta_slot

    def replace(self, **changes) -> "ProblemInstance":
        fields = {name: getattr(self, name) for name in self.__dataclass_fields__}
        fields.update(changes)
        return ProblemInstance(**fields)


@dataclass(frozen=True)
class ChoiceProbabilities:
    """Purchase probabilities of one time step.

    ``p[a, s]`` is the probability that a customer arrives from area ``a``
    and books slot ``s``; ``p0[a]`` is the probability that a customer from
    area ``a`` arrives and leaves without booking.  ``arrival[a]`` is the
    area's total arrival mass, so ``p[a].sum() + p0[a] == arrival[a]``.
    """

    p: np.ndarray
    p0: np.ndarray
    arrival: np.ndarray

    @property
    def shares(self) -> np.ndarray:
        """Conditional slot choice probabilities within each area."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.arrival[:, None] > 0, self.p / self.arrival[:, None], 0.0)

    @property
    def no_purchase_share(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.arrival > 0, self.p0 / self.arrival, 1.0)

    @property
    def total(self) -> float:
        return float(self.p.sum())


def logit_shares(utility, beta_d, prices) -> tuple[np.ndarray, np.ndarray]:
    """Logit shares of each slot and of the no-purchase option.

    ``utility`` is the price-free utility per slot and ``prices`` has the
    slot axis last; ``CLOSED`` prices contribute nothing.  No bounds are
    imposed on ``prices``.  Returns ``(shares, no_purchase_share)``.
    """
    prices = np.asarray(prices, dtype=float)
    if np.any(np.isnan(prices)):
        raise ValueError("prices must not be NaN")
    closed = np.isposinf(prices)
    with np.errstate(invalid="ignore"):
        z = np.where(closed, -np.inf, utility + beta_d * np.where(closed, 0.0, prices))
    # shift by the largest utility (the no-purchase option has utility 0)
    shift = np.maximum(np.max(z, axis=-1, initial=-np.inf), 0.0)
    ez = np.exp(z - shift[..., None])
    e0 = np.exp(-shift)
    denom = ez.sum(axis=-1) + e0
    return ez / denom[..., None], e0 / denom


def check_prices(inst: ProblemInstance, d) -> np.ndarray:
    """Validate a price array: finite entries within bounds or ``CLOSED``."""
    d = np.asarray(d, dtype=float)
    if d.shape != (inst.num_areas, inst.num_slots):
        raise ValueError(f"price array must have shape {(inst.num_areas, inst.num_slots)}")
    if np.any(np.isnan(d)):
        raise ValueError("prices must not be NaN")
    open_ = ~np.isposinf(d)
    if np.any((d[open_] < inst.d_min) | (d[open_] > inst.d_max)):
        raise ValueError(f"offered prices must lie in [{inst.d_min}, {inst.d_max}]")
    return d


def mnl_probabilities(inst: ProblemInstance, d) -> ChoiceProbabilities:
    """Purchase probabilities induced by the charges ``d`` (shape ``(A, S)``)."""
    d = check_prices(inst, d)
    shares, share0 = logit_shares(inst.slot_utility, inst.beta_d, d)
    arrival = inst.arrival
    return ChoiceProbabilities(arrival[:, None] * shares, arrival * share0, arrival)


def price_from_probability(inst: ProblemInstance, probs: ChoiceProbabilities, open_slots=None):
    """Charges that induce the purchase probabilities ``probs``.

    Slots with zero probability map to ``CLOSED`` unless ``open_slots``
    marks them as offered, in which case the probability is out of domain.
    """
    p = np.asarray(probs.p, dtype=float)
    p0 = np.asarray(probs.p0, dtype=float)
    if np.any(p < 0):
        raise ValueError("purchase probabilities must be nonnegative")
    if np.any(p0 <= 0):
        raise ValueError("no-purchase probability must be positive in every area")
    if open_slots is not None and np.any(np.asarray(open_slots) & (p <= 0)):
        raise ValueError("offered slots need a strictly positive purchase probability")
    pos = p > 0
    with np.errstate(divide="ignore"):
        log_ratio = np.log(np.where(pos, p, 1.0) / p0[:, None])
    d = (log_ratio - inst.slot_utility) / inst.beta_d
    return np.where(pos, d, CLOSED)


def _parse_vector(text: str) -> list[float]:
    text = text.strip().strip("[]()")
    return [float(tok) for tok in text.replace(",", " ").split()]


def parse_config(text: str, source: str = "<string>") -> ProblemInstance:
    """Build a :class:`ProblemInstance` from ``key = value`` text.

    Vectors are written as comma or space separated lists, optionally in
    brackets.  Keys over (area, slot) pairs (``capacity``,
    ``cost.coefficients``) list the pairs area-major.  ``cost.table`` may
    replace the affine cost with a dense table in state-index order.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    stripped = text.lstrip()
    if not stripped.startswith("["):
        text = "[instance]\n" + text
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc)) from exc
    items: dict[str, str] = {}
    for section in parser.sections():
        prefix = "" if section in ("instance", "problem") else section + "."
        for key, value in parser.items(section):
            items[prefix + key] = value

    def get(key, convert, default=None):
        if key not in items:
            if default is not None:
                return default
            raise ConfigError(key, "missing")
        try:
            return convert(items[key])
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {items[key]!r}") from exc

    def integer(s):
        v = float(s)
        if v != int(v):
            raise ValueError(s)
        return int(v)

    num_areas = get("num_areas", integer)
    num_slots = get("num_slots", integer)
    capacity = get("capacity", _parse_vector)
    if "cost.table" in items:
        table = np.asarray(get("cost.table", _parse_vector))
        shape = tuple(np.asarray(capacity, dtype=int) + 1)
        if table.size != int(np.prod(shape)):
            raise ConfigError("cost.table", f"expected {int(np.prod(shape))} entries")
        cost = CostModel.tabulated(table.reshape(shape))
    else:
        cost = CostModel.affine(
            get("cost.intercept", float),
            np.reshape(get("cost.coefficients", _parse_vector), -1),
        )
    return ProblemInstance(
        num_areas=num_areas,
        num_slots=num_slots,
        horizon=get("horizon", integer),
        lam=get("lambda", float),
        area_prob=get("area_prob", _parse_vector),
        beta_c=get("beta_c", float),
        beta_slot=get("beta_slot", _parse_vector),
        beta_d=get("beta_d", float),
        d_min=get("d_min", float),
        d_max=get("d_max", float),
        r=get("r", float),
        capacity=capacity,
        cost=cost,
    )


def load_config(path) -> ProblemInstance:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))
