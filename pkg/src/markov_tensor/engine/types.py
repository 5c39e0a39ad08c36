from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionMismatch, NotOnSimplex, ShapeMismatch

DEFAULT_VALIDATION_TOLERANCE = 1e-12
SIMPLEX_TOLERANCE = 1e-12

# Tensor storage: entries[i, j, k] = p_ijk, the probability of moving to state i
# when the last state is j and the one before it is k. Every fiber entries[:, j, k]
# sums to 1. On disk the tensor is written as slices P(:, :, k), i.e. entries[:, :, k].


@dataclass(frozen=True, eq=False)
class TransitionTensor:
    """Dense third-order transition probability tensor.

    Build instances with ``tensor_core.validate``; the constructor only
    checks the shape and freezes the array.
    """
    entries: np.ndarray
    validation_tolerance: float = DEFAULT_VALIDATION_TOLERANCE

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 3 or arr.shape[0] < 1 or len(set(arr.shape)) != 1:
            raise ShapeMismatch(arr.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def slices_by_last_index(self) -> np.ndarray:
        """Return an (n, n, n) array whose k-th element is the matrix P(:, :, k)."""
        return np.moveaxis(self.entries, 2, 0)

    def __repr__(self) -> str:
        return f"TransitionTensor(n={self.n}, min_entry={float(self.entries.min()):.6g})"


@dataclass(frozen=True, eq=False)
class SimplexVector:
    """A point of the probability simplex: nonnegative entries summing to 1."""
    x: np.ndarray

    def __post_init__(self):
        arr = np.array(self.x, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise NotOnSimplex(f"expected a nonempty 1-d vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NotOnSimplex("vector has non-finite entries")
        if (arr < 0).any():
            i = int(np.argmin(arr))
            raise NotOnSimplex(f"entry {i} = {arr[i]!r} is negative")
        total = float(arr.sum())
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise NotOnSimplex(f"entries sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "x", arr)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @classmethod
    def normalized(cls, values: Iterable[float]) -> "SimplexVector":
        """Divide a nonnegative vector by its exact entry sum."""
        arr = np.asarray(values, dtype=float)
        return cls(arr / arr.sum())

    @classmethod
    def uniform(cls, n: int) -> "SimplexVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def vertex(cls, n: int, i: int) -> "SimplexVector":
        e = np.zeros(n)
        e[i] = 1.0
        return cls(e)

    def l1_distance(self, other: "SimplexVector") -> float:
        if other.n != self.n:
            raise DimensionMismatch(self.n, other.n)
        return float(np.abs(self.x - other.x).sum())

    def __array__(self, dtype=None, copy=None):
        if copy:
            return np.array(self.x, dtype=dtype)
        return np.asarray(self.x, dtype=dtype)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        body = ", ".join(f"{v:.6g}" for v in self.x[:8])
        tail = ", ..." if self.n > 8 else ""
        return f"SimplexVector([{body}{tail}])"


@dataclass(frozen=True)
class StatePair:
    """z = (x, y): current and previous distribution of the second-order chain."""
    x: SimplexVector
    y: SimplexVector

    def __post_init__(self):
        if self.x.n != self.y.n:
            raise DimensionMismatch(self.x.n, self.y.n, what="previous-state vector")

    @property
    def n(self) -> int:
        return self.x.n

    def l1_distance(self, other: "StatePair") -> float:
        return self.x.l1_distance(other.x) + self.y.l1_distance(other.y)


def check_dimension(P: TransitionTensor, v: SimplexVector, what: str = "vector") -> None:
    if v.n != P.n:
        raise DimensionMismatch(P.n, v.n, what=what)

