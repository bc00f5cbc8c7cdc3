"""The order lattice X = {x : 0 <= x <= capacity} with mixed-radix indexing."""

from __future__ import annotations

import numpy as np


class StateGrid:
    """Enumerates the order lattice.

    States are flattened (area, slot) count vectors of length ``dim``.  The
    flat index is the C-order mixed-radix code with radices
    ``capacity + 1``, so adding one order to any pair always increases the
    index; iterating indices downwards visits successors before
    predecessors.
    """

    def __init__(self, capacity):
        capacity = np.asarray(capacity, dtype=int)
        if np.any(capacity < 0):
            raise ValueError("capacity must be nonnegative")
        self.pair_shape = capacity.shape
        self.capacity = capacity.ravel().copy()
        self.capacity.setflags(write=False)
        self.shape = tuple(int(c) + 1 for c in self.capacity)
        self.dim = self.capacity.size
        self.size = int(np.prod(self.shape))

        radix = np.array(self.shape, dtype=np.int64)
        self.strides = np.ones(self.dim, dtype=np.int64)
        for k in range(self.dim - 2, -1, -1):
            self.strides[k] = self.strides[k + 1] * radix[k + 1]

        states = np.indices(self.shape).reshape(self.dim, -1).T
        states.setflags(write=False)
        self.states = states

        full = states == self.capacity
        succ = np.arange(self.size)[:, None] + self.strides[None, :]
        succ = np.where(full, -1, succ)
        full.setflags(write=False)
        succ.setflags(write=False)
        self.full = full
        self.successors = succ
        self.order_count = states.sum(axis=1)

    @classmethod
    def for_instance(cls, inst) -> "StateGrid":
        return cls(inst.capacity)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"StateGrid(capacity={self.capacity.tolist()}, size={self.size})"

    @property
    def top(self) -> int:
        """Index of the full-capacity state."""
        return self.size - 1

    def encode(self, x) -> int:
        x = np.asarray(x, dtype=np.int64).ravel()
        if x.shape != (self.dim,):
            raise ValueError(f"state must have {self.dim} entries")
        if np.any(x < 0) or np.any(x > self.capacity):
            raise ValueError(f"state {x.tolist()} lies outside the lattice")
        return int(x @ self.strides)

    def decode(self, index: int) -> np.ndarray:
        if not 0 <= index < self.size:
            raise IndexError(f"state index {index} out of range")
        return self.states[index].copy()

    def contains(self, x) -> bool:
        x = np.asarray(x).ravel()
        return x.shape == (self.dim,) and bool(np.all((x >= 0) & (x <= self.capacity)))

    def neighbors(self, index: int) -> list[tuple[int, int]]:
        """Feasible successors ``(pair, successor index)`` of a state."""
        row = self.successors[index]
        return [(k, int(j)) for k, j in enumerate(row) if j >= 0]

    def forward_differences(self, values) -> np.ndarray:
        """``V(x + 1_k) - V(x)`` for every state and pair; NaN where infeasible."""
        values = np.asarray(values, dtype=float)
        succ = self.successors
        out = np.where(succ >= 0, values[np.maximum(succ, 0)] - values[:, None], np.nan)
        return out
