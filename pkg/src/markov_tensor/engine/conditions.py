"""
Jacobian of F_P and the sufficient conditions for a unique stationary vector.

Row i of the Jacobian is x^T (A_i + A_i^T). Every column of it sums to 2, so
J/2 is column stochastic; when all entries of P are at least delta the matrix
splits as J = (1 - n*delta) * 2S + n*delta * (2/n) ee^T with S column
stochastic, and every eigenvalue other than 2 has modulus at most
2(1 - n*delta).
"""
from __future__ import annotations
import logging
from typing import NamedTuple, Optional
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .types import TransitionTensor, SimplexVector, check_dimension
from .tensor_core import min_entry
from .errors import (
    PreconditionViolated, DegenerateDelta, DimensionTooLargeForExactCheck,
    NumericalFailure,
)

logger = logging.getLogger(__name__)

DEFAULT_EIGEN_TOL = 1e-10
IRREDUCIBILITY_EXACT_LIMIT = 20
COLUMN_SUM_TOL = 1e-10
DEGENERATE_MARGIN = 1e-12


class MinEntryCheck(NamedTuple):
    holds: bool
    delta: float
    threshold: float


class JacobianEntryCheck(NamedTuple):
    holds: bool
    margin: float


class EigenOneCheck(NamedTuple):
    excluded: bool
    margin: float
    certified: bool  # min-entry condition guarantees exclusion on the whole simplex


@dataclass(frozen=True, eq=False)
class StochasticDecomposition:
    n_delta: float
    S: np.ndarray
    residual: float


def jacobian(P: TransitionTensor, x: SimplexVector) -> np.ndarray:
    """Jacobian of F_P at x: element (i, k) = sum_j p_ijk x_j + sum_j p_ikj x_j."""
    check_dimension(P, x)
    return np.einsum("ijk,j->ik", P.entries, x.x) + P.entries @ x.x


def secant_matrix(P: TransitionTensor, x: ArrayLike, x_ref: ArrayLike) -> np.ndarray:
    """
    K with rows x^T A_i + x_ref^T A_i^T, so that F_P(x) - F_P(x_ref) = K (x - x_ref).

    For x, x_ref on the simplex the columns of K sum to 2.
    """
    x = np.asarray(x, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    return np.einsum("ijk,j->ik", P.entries, x) + P.entries @ x_ref


def check_min_entry_condition(P: TransitionTensor) -> MinEntryCheck:
    """min p_ijk > 1/(2n): uniqueness plus linear convergence of both iterations."""
    delta = min_entry(P)
    threshold = 1.0 / (2 * P.n)
    return MinEntryCheck(delta > threshold, delta, threshold)


def spectral_bound(P: TransitionTensor) -> float:
    """2(1 - n*delta): bound on the non-Perron eigenvalues of the Jacobian."""
    return 2.0 * (1.0 - P.n * min_entry(P))


def check_jacobian_entry_condition(P: TransitionTensor, x: SimplexVector) -> JacobianEntryCheck:
    """Pointwise condition: every Jacobian entry at x exceeds 1/n."""
    m = float(jacobian(P, x).min())
    margin = m - 1.0 / P.n
    return JacobianEntryCheck(margin > 0, margin)


def eigen_one_excluded(P: TransitionTensor, x: SimplexVector,
                       tol: float = DEFAULT_EIGEN_TOL) -> EigenOneCheck:
    """
    Test whether 1 is an eigenvalue of the Jacobian at x.

    Uses the smallest singular value of J - I as the margin: it is zero
    exactly when 1 is an eigenvalue.

    Raises:
        NumericalFailure: the SVD did not converge
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    M = jacobian(P, x) - np.eye(P.n)
    try:
        sigma = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD of J - I did not converge: {exc}") from exc
    margin = float(sigma.min())
    excluded = margin > tol
    certified = check_min_entry_condition(P).holds
    if certified and not excluded:
        logger.warning(
            "sigma_min(J - I) = %.3e at a point where the min-entry condition "
            "rules out eigenvalue 1", margin,
        )
    return EigenOneCheck(excluded, margin, certified)


def nonunit_spectrum(P: TransitionTensor, x: SimplexVector) -> np.ndarray:
    """Eigenvalues of the Jacobian at x with the Perron eigenvalue 2 removed."""
    try:
        eig = np.linalg.eigvals(jacobian(P, x))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue computation did not converge: {exc}") from exc
    return np.delete(eig, int(np.argmin(np.abs(eig - 2.0))))


def decompose_stochastic(M: ArrayLike, delta: float) -> StochasticDecomposition:
    """
    Split M = (1 - n*delta) * 2S + n*delta * (2/n) ee^T with S column stochastic.

    Raises:
        PreconditionViolated: column sums differ from 2, or M < 2*delta somewhere
        DegenerateDelta: n*delta >= 1, the factor S is undefined
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise PreconditionViolated(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    col = M.sum(axis=0)
    worst = int(np.argmax(np.abs(col - 2.0)))
    if abs(col[worst] - 2.0) > COLUMN_SUM_TOL:
        raise PreconditionViolated(f"column {worst} sums to {col[worst]!r}, expected 2")

    n_delta = n * delta
    if n_delta >= 1.0 - DEGENERATE_MARGIN:
        raise DegenerateDelta(n_delta)

    shifted = M - 2.0 * delta
    if shifted.min() < -DEGENERATE_MARGIN:
        j, k = np.unravel_index(int(np.argmin(shifted)), shifted.shape)
        raise PreconditionViolated(
            f"entry ({j}, {k}) = {M[j, k]!r} is below 2*delta = {2.0 * delta!r}"
        )
    S = shifted / (2.0 * (1.0 - n_delta))
    dec = StochasticDecomposition(n_delta, S, 0.0)
    residual = float(np.abs(reconstruct(dec) - M).max())
    return StochasticDecomposition(n_delta, S, residual)


def reconstruct(dec: StochasticDecomposition) -> np.ndarray:
    n = dec.S.shape[0]
    return (1.0 - dec.n_delta) * 2.0 * dec.S + dec.n_delta * (2.0 / n) * np.ones((n, n))


def _closure(positive: np.ndarray, seed: int) -> np.ndarray:
    """Smallest state set containing seed that no positive transition leaves."""
    member = np.zeros(positive.shape[0], dtype=bool)
    member[seed] = True
    while True:
        reach = positive[:, member][:, :, member].any(axis=(1, 2))
        grown = member | reach
        if grown.sum() == member.sum():
            return member
        member = grown


def is_irreducible(P: TransitionTensor,
                   max_exact_dim: Optional[int] = IRREDUCIBILITY_EXACT_LIMIT) -> bool:
    """
    True iff no nonempty proper I has p_ijk = 0 for all i in I and j, k outside I.

    Such an I exists exactly when some state's closure (the states reachable
    from pairs of already reached states) is a proper subset, so one closure
    per state decides it.

    Raises:
        DimensionTooLargeForExactCheck: zero entries present and n > max_exact_dim
    """
    positive = P.entries > 0
    if positive.all():
        return True
    if max_exact_dim is not None and P.n > max_exact_dim:
        raise DimensionTooLargeForExactCheck(P.n, max_exact_dim)
    return all(_closure(positive, s).all() for s in range(P.n))
