"""
Transition tensor validation and the multilinear maps Pxy and F_P(x) = Px^2.

The map evaluations use NumPy contractions: (P @ y) contracts the last index,
and the result @ x contracts the middle one.
"""
from __future__ import annotations
import numpy as np
from numpy.typing import ArrayLike

from .types import (
    TransitionTensor, SimplexVector, check_dimension,
    DEFAULT_VALIDATION_TOLERANCE,
)
from .errors import (
    ShapeMismatch, NonFiniteEntry, NegativeEntry, EntryAboveOne,
    FiberSumViolation, IndexOutOfRange,
)


def validate(raw: ArrayLike, tol: float = DEFAULT_VALIDATION_TOLERANCE) -> TransitionTensor:
    """
    Check raw data against the transition-tensor invariants.

    Args:
        raw: array with raw[i][j][k] = p_ijk, shape (n, n, n)
        tol: allowed deviation of every fiber sum p[:, j, k] from 1

    Returns:
        TransitionTensor holding the entries unmodified

    Raises:
        ShapeMismatch, NonFiniteEntry, NegativeEntry, EntryAboveOne,
        FiberSumViolation (the first violation found, in that order)
    """
    if tol < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol!r}")
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        # ragged nesting
        raise ShapeMismatch(()) from exc
    if arr.ndim != 3 or arr.shape[0] < 1 or len(set(arr.shape)) != 1:
        raise ShapeMismatch(arr.shape)

    bad = np.argwhere(~np.isfinite(arr))
    if len(bad):
        i, j, k = (int(t) for t in bad[0])
        raise NonFiniteEntry(i, j, k, float(arr[i, j, k]))

    bad = np.argwhere(arr < 0)
    if len(bad):
        i, j, k = (int(t) for t in bad[0])
        raise NegativeEntry(i, j, k, float(arr[i, j, k]))

    bad = np.argwhere(arr > 1.0)
    if len(bad):
        i, j, k = (int(t) for t in bad[0])
        raise EntryAboveOne(i, j, k, float(arr[i, j, k]))

    sums = arr.sum(axis=0)
    bad = np.argwhere(np.abs(sums - 1.0) > tol)
    if len(bad):
        j, k = (int(t) for t in bad[0])
        raise FiberSumViolation(j, k, float(sums[j, k]), tol)

    return TransitionTensor(arr, validation_tolerance=tol)


def fiber_sums(P: TransitionTensor) -> np.ndarray:
    """Matrix of fiber sums, element (j, k) = sum_i p_ijk."""
    return P.entries.sum(axis=0)


def bilinear_raw(P: TransitionTensor, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """sum_{j,k} p_ijk x_j y_k for arbitrary real vectors, without renormalization."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (P.entries @ y) @ x


def bilinear_apply(P: TransitionTensor, x: SimplexVector, y: SimplexVector) -> SimplexVector:
    """Pxy, renormalized to sum exactly to 1."""
    check_dimension(P, x)
    check_dimension(P, y, what="second vector")
    return SimplexVector.normalized(bilinear_raw(P, x.x, y.x))


def f_p(P: TransitionTensor, x: SimplexVector) -> SimplexVector:
    """F_P(x) = Px^2, the power-method map."""
    return bilinear_apply(P, x, x)


def slice_matrix(P: TransitionTensor, i: int) -> np.ndarray:
    """A_i with (A_i)[j, k] = p_ijk."""
    if not 0 <= i < P.n:
        raise IndexOutOfRange(i, P.n)
    return np.array(P.entries[i])


def min_entry(P: TransitionTensor) -> float:
    """Smallest entry: the largest delta with p_ijk >= delta everywhere."""
    return float(P.entries.min())
