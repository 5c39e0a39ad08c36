"""Exception hierarchy for tensor validation, analysis and solvers.

All indices carried by these exceptions are 0-based.
"""
from __future__ import annotations
from typing import Any, List, Optional


class MarkovTensorError(Exception):
    """Base class for every error raised by this package."""


# --- validation ---

class TensorValidationError(MarkovTensorError, ValueError):
    """Raw data does not describe a transition probability tensor."""


class ShapeMismatch(TensorValidationError):
    def __init__(self, shape: tuple):
        self.shape = tuple(shape)
        super().__init__(f"expected a cubic n x n x n array with n >= 1, got shape {self.shape}")


class NonFiniteEntry(TensorValidationError):
    def __init__(self, i: int, j: int, k: int, value: float):
        self.index = (i, j, k)
        self.value = value
        super().__init__(f"entry p[{i}, {j}, {k}] = {value!r} is not finite")


class NegativeEntry(TensorValidationError):
    def __init__(self, i: int, j: int, k: int, value: float):
        self.index = (i, j, k)
        self.value = value
        super().__init__(f"entry p[{i}, {j}, {k}] = {value!r} is negative")


class EntryAboveOne(TensorValidationError):
    def __init__(self, i: int, j: int, k: int, value: float):
        self.index = (i, j, k)
        self.value = value
        super().__init__(f"entry p[{i}, {j}, {k}] = {value!r} exceeds 1")


class FiberSumViolation(TensorValidationError):
    def __init__(self, j: int, k: int, observed_sum: float, tol: float):
        self.fiber = (j, k)
        self.observed_sum = observed_sum
        self.tol = tol
        super().__init__(
            f"fiber p[:, {j}, {k}] sums to {observed_sum!r}, "
            f"deviation {abs(observed_sum - 1.0):.3e} exceeds tolerance {tol:.1e}"
        )


class NotOnSimplex(TensorValidationError):
    """A vector is not a point of the probability simplex."""


# --- shapes and indices ---

class DimensionMismatch(MarkovTensorError, ValueError):
    def __init__(self, expected: int, got: int, what: str = "vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class IndexOutOfRange(MarkovTensorError, IndexError):
    def __init__(self, index: int, n: int):
        self.index = index
        self.n = n
        super().__init__(f"slice index {index} outside 0..{n - 1}")


# --- analysis ---

class PreconditionViolated(MarkovTensorError, ValueError):
    """Input to a decomposition does not satisfy its stated preconditions."""


class DegenerateDelta(PreconditionViolated):
    def __init__(self, n_delta: float):
        self.n_delta = n_delta
        super().__init__(
            f"n*delta = {n_delta!r} reaches 1: the tensor is uniform, its stationary "
            "vector is e/n and the stochastic factor is undefined"
        )


class HypothesisNotSatisfied(MarkovTensorError, ValueError):
    def __init__(self, delta: float, threshold: float, what: str = "bound"):
        self.delta = delta
        self.threshold = threshold
        super().__init__(
            f"{what} unavailable: min entry {delta:.6g} <= 1/(2n) = {threshold:.6g}"
        )


class DimensionTooLargeForExactCheck(MarkovTensorError, ValueError):
    def __init__(self, n: int, limit: int):
        self.n = n
        self.limit = limit
        super().__init__(
            f"exact irreducibility check capped at n = {limit}; tensor has n = {n} and zero entries"
        )


class NumericalFailure(MarkovTensorError, ArithmeticError):
    """A LAPACK routine did not converge."""


# --- generation ---

class InfeasibleDelta(MarkovTensorError, ValueError):
    def __init__(self, n: int, delta: float):
        self.n = n
        self.delta = delta
        super().__init__(f"delta must satisfy 0 < delta < 1/n = {1.0 / n:.6g}, got {delta!r}")


# --- solvers ---

class MaxIterationsExceeded(MarkovTensorError, RuntimeError):
    def __init__(self, method: str, max_iterations: int, residual: float,
                 x_last: Any = None, trace: Any = None):
        self.method = method
        self.max_iterations = max_iterations
        self.residual = residual
        self.x_last = x_last
        self.trace = trace
        super().__init__(
            f"{method} did not converge in {max_iterations} iterations "
            f"(last residual {residual:.3e})"
        )


class NoRootInUnitInterval(MarkovTensorError, ValueError):
    def __init__(self, candidates: Optional[List[Any]] = None, diagnostics: Any = None):
        self.candidates = list(candidates or [])
        self.diagnostics = diagnostics
        if self.candidates:
            where = ", ".join(f"s={c.x[0]:g}" for c in self.candidates)
            msg = f"no interior root in (0, 1); boundary candidates: {where}"
        else:
            msg = "no root of the 2x2x2 stationarity equation in [0, 1]"
        super().__init__(msg)


class TheoryViolation(MarkovTensorError, RuntimeError):
    """Two distinct interior stationary points found for a 2x2x2 tensor."""


# --- files ---

class TensorFileError(MarkovTensorError, ValueError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")
