"""
Stationary distributions of the second-order chain.

Three routes:

- ``power_method``: x(k+1) = P x(k)^2.
- ``markov_process``: the chain itself, x(s) = P x(s-1) x(s-2), iterated as the
  self-map g(x, y) = (Pxy, x) on pairs.
- ``solve_2x2x2``: the closed-form quadratic for two states.

When every entry is at least delta > 1/(2n) the power-method error contracts by
r = 2(1 - n*delta) per step, and the chain's error obeys
e(s) <= (1 - n*delta)(e(s-1) + e(s-2)), which gives e(s) <= r^ceil((s-a+2)/2)
from the first pair of iterates a-1, a with all entries >= delta. The traces
record these bounds next to the observed errors.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from markov_tensor.profiling import profile_function
from .types import TransitionTensor, SimplexVector, StatePair, check_dimension
from .tensor_core import bilinear_apply, f_p, validate
from .conditions import check_min_entry_condition, is_irreducible
from .generator import random_simplex
from .errors import (
    DimensionMismatch, HypothesisNotSatisfied, MaxIterationsExceeded,
    NoRootInUnitInterval, TheoryViolation,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERATIONS = 10000
ORACLE_TOLERANCE = 1e-13
ORACLE_MAX_ITERATIONS = 100000
EXACT_FIXED_POINT = 1e-14   # fixed-point residual treated as x = Px^2
ROOT_TOLERANCE = 1e-12
COEFFICIENT_EPS = 1e-14
LOWER_BOUND_SLACK = 1e-12


class Method(str, Enum):
    POWER = "power"
    MARKOV = "markov"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    record_trace: bool = True
    reference_solution: Optional[SimplexVector] = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")


@dataclass(frozen=True, eq=False)
class TraceStep:
    k: int
    x: np.ndarray
    residual: float                     # ||x(k) - x(k-1)||_1
    fixed_point_residual: float         # ||F_P(x(k)) - x(k)||_1
    error: Optional[float] = None       # ||x(k) - x*||_1
    observed_ratio: Optional[float] = None
    bound: Optional[float] = None       # contraction factor (power) or error bound (markov)
    step_bound: Optional[float] = None  # one-step bound from the previous errors
    z_error: Optional[float] = None
    z_bound: Optional[float] = None


@dataclass
class IterationTrace:
    method: Method
    steps: List[TraceStep] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0
    delta: float = float("nan")
    bounds_available: bool = False
    bound_applies_to: str = ""
    anchor: Optional[int] = None
    note: str = ""

    def column(self, name: str) -> list:
        return [getattr(step, name) for step in self.steps]


@dataclass(frozen=True)
class BoundCurve:
    """Bounds for k = 1..k_max on ||z(k+1) - z*||_1 and ||x(k+1) - x*||_1."""
    r: float
    z: List[float]
    x: List[float]


def _ceil_half(m: int) -> int:
    return -(-m // 2)


def x_error_bound(r: float, m: int) -> float:
    """r^ceil((m+2)/2): error bound m iterates past the anchor."""
    return r ** _ceil_half(m + 2)


def z_error_bound(r: float, m: int) -> float:
    return r ** _ceil_half(m + 2) + r ** _ceil_half(m + 1)


def power_contraction_bound(P: TransitionTensor) -> float:
    """
    Per-step factor 2(1 - n*delta) of the power-method error.

    Raises:
        HypothesisNotSatisfied: min entry <= 1/(2n), the factor is not below 1
    """
    cond = check_min_entry_condition(P)
    if not cond.holds:
        raise HypothesisNotSatisfied(cond.delta, cond.threshold, what="contraction factor")
    return 2.0 * (1.0 - P.n * cond.delta)


def markov_bound_curve(P: TransitionTensor, k_max: int) -> BoundCurve:
    """
    R-linear bounds r^ceil((k+2)/2) + r^ceil((k+1)/2) (z) and r^ceil((k+2)/2) (x),
    r = 2 - 2n*delta, for k = 1..k_max.

    Raises:
        HypothesisNotSatisfied: min entry <= 1/(2n)
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    r = power_contraction_bound(P)
    ks = range(1, k_max + 1)
    return BoundCurve(r, [z_error_bound(r, k) for k in ks], [x_error_bound(r, k) for k in ks])


def augmented_map(P: TransitionTensor, z: StatePair) -> StatePair:
    """g(x, y) = (Pxy, x)."""
    check_dimension(P, z.x)
    return StatePair(bilinear_apply(P, z.x, z.y), z.x)


def _reference(P: TransitionTensor, opts: SolveOptions) -> Optional[SimplexVector]:
    ref = opts.reference_solution
    if ref is not None:
        check_dimension(P, ref, what="reference solution")
    return ref


@profile_function
def power_method(P: TransitionTensor, x0: SimplexVector,
                 opts: Optional[SolveOptions] = None) -> Tuple[SimplexVector, IterationTrace]:
    """
    Iterate x(k+1) = F_P(x(k)) until ||x(k) - x(k-1)||_1 < tolerance.

    Also stops when x(k) is a fixed point to machine precision. With a
    reference solution the trace carries errors, observed ratios and, when the
    min-entry condition holds, the contraction factor.

    Raises:
        MaxIterationsExceeded: carries the last iterate and the partial trace
    """
    opts = opts or SolveOptions()
    check_dimension(P, x0, what="starting vector")
    ref = _reference(P, opts)
    cond = check_min_entry_condition(P)
    factor = 2.0 * (1.0 - P.n * cond.delta) if cond.holds else None
    if factor is None:
        logger.info("min entry %.4g <= 1/(2n) = %.4g: contraction bound unavailable",
                    cond.delta, cond.threshold)

    trace = IterationTrace(Method.POWER, delta=cond.delta, bounds_available=cond.holds,
                           bound_applies_to="observed_ratio")
    prev_error = x0.l1_distance(ref) if ref is not None else None
    prev, cur = x0, f_p(P, x0)
    residual = math.inf
    for k in range(1, opts.max_iterations + 1):
        nxt = f_p(P, cur)
        residual = cur.l1_distance(prev)
        fp_residual = nxt.l1_distance(cur)
        if opts.record_trace:
            error = cur.l1_distance(ref) if ref is not None else None
            # ratios start at k = 2, between two iterates
            ratio = error / prev_error if k > 1 and error is not None and prev_error else None
            step_bound = factor * prev_error if factor is not None and prev_error is not None else None
            trace.steps.append(TraceStep(k, cur.x, residual, fp_residual, error, ratio,
                                         bound=factor, step_bound=step_bound))
            prev_error = error
        logger.debug("power k=%d residual=%.3e", k, residual)
        if residual < opts.tolerance or fp_residual <= EXACT_FIXED_POINT:
            trace.converged = True
            trace.iterations_used = k
            logger.info("power method converged in %d iterations", k)
            return cur, trace
        prev, cur = cur, nxt

    trace.iterations_used = opts.max_iterations
    raise MaxIterationsExceeded(Method.POWER.value, opts.max_iterations, residual,
                                x_last=cur, trace=trace)


def _above(v: SimplexVector, delta: float) -> bool:
    return float(v.x.min()) >= delta - LOWER_BOUND_SLACK


@profile_function
def markov_process(P: TransitionTensor, x0: SimplexVector, x1: SimplexVector,
                   opts: Optional[SolveOptions] = None) -> Tuple[SimplexVector, IterationTrace]:
    """
    Run the chain x(s) = P x(s-1) x(s-2), s = 2, 3, ...; trace step k holds x(k+1).

    Stops when ||x(s) - x(s-1)||_1 < tolerance or x(s) is a fixed point of F_P
    to machine precision. Error bounds are anchored at the first pair of
    consecutive iterates with all entries >= delta.

    Raises:
        MaxIterationsExceeded: carries the last iterate and the partial trace
    """
    opts = opts or SolveOptions()
    check_dimension(P, x0, what="starting vector x0")
    check_dimension(P, x1, what="starting vector x1")
    ref = _reference(P, opts)
    cond = check_min_entry_condition(P)
    delta = cond.delta
    r = 2.0 * (1.0 - P.n * delta) if cond.holds else None
    if r is None:
        logger.info("min entry %.4g <= 1/(2n) = %.4g: R-linear bound unavailable",
                    delta, cond.threshold)

    trace = IterationTrace(Method.MARKOV, delta=delta, bounds_available=cond.holds,
                           bound_applies_to="error")
    anchor = 1 if r is not None and _above(x0, delta) and _above(x1, delta) else None
    errors = [x0.l1_distance(ref), x1.l1_distance(ref)] if ref is not None else None

    z = StatePair(x1, x0)
    residual = math.inf
    for k in range(1, opts.max_iterations + 1):
        s = k + 1
        z = augmented_map(P, z)
        cur, prev = z.x, z.y
        residual = cur.l1_distance(prev)
        fp_residual = f_p(P, cur).l1_distance(cur)
        if anchor is None and r is not None and _above(cur, delta) and _above(prev, delta):
            anchor = s
            trace.anchor = anchor
        if opts.record_trace:
            error = ratio = step_bound = z_err = None
            if errors is not None:
                error = cur.l1_distance(ref)
                ratio = error / errors[-1] if errors[-1] else None
                z_err = error + errors[-1]
                if r is not None:
                    step_bound = (1.0 - P.n * delta) * (errors[-1] + errors[-2])
                errors.append(error)
            bound = z_bnd = None
            if anchor is not None:
                bound = x_error_bound(r, s - anchor)
                z_bnd = z_error_bound(r, s - anchor)
            trace.steps.append(TraceStep(k, cur.x, residual, fp_residual, error, ratio,
                                         bound=bound, step_bound=step_bound,
                                         z_error=z_err, z_bound=z_bnd))
        logger.debug("markov s=%d residual=%.3e", s, residual)
        if residual < opts.tolerance or fp_residual <= EXACT_FIXED_POINT:
            trace.converged = True
            trace.iterations_used = k
            trace.anchor = anchor
            logger.info("markov process converged in %d iterations", k)
            return cur, trace

    trace.iterations_used = opts.max_iterations
    trace.anchor = anchor
    raise MaxIterationsExceeded(Method.MARKOV.value, opts.max_iterations, residual,
                                x_last=z.x, trace=trace)


def oracle_solution(P: TransitionTensor, x0: Optional[SimplexVector] = None) -> SimplexVector:
    """Reference x*: power method from the barycenter down to residual 1e-13."""
    opts = SolveOptions(ORACLE_TOLERANCE, ORACLE_MAX_ITERATIONS, record_trace=False)
    x, _ = power_method(P, x0 or SimplexVector.uniform(P.n), opts)
    return x


# --- two states ---

@dataclass(frozen=True)
class Quadratic222:
    """
    2x2x2 tensor by its first-state probabilities: p_111 = alpha, p_112 = beta,
    p_121 = gamma, p_122 = tau (1-based); the second state takes the complements.
    """
    alpha: float
    beta: float
    gamma: float
    tau: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "tau"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    def coefficients(self) -> Tuple[float, float, float]:
        """(a, b, c) of a s^2 + b s + c = 0, s the probability of the first state."""
        a = self.alpha + self.tau - self.beta - self.gamma
        b = self.beta + self.gamma - 1.0 - 2.0 * self.tau
        return a, b, self.tau

    def to_tensor(self) -> TransitionTensor:
        p = np.empty((2, 2, 2))
        p[0] = [[self.alpha, self.beta], [self.gamma, self.tau]]
        p[1] = 1.0 - p[0]
        return validate(p)

    @classmethod
    def from_tensor(cls, P: TransitionTensor) -> "Quadratic222":
        if P.n != 2:
            raise DimensionMismatch(2, P.n, what="tensor")
        e = P.entries
        return cls(float(e[0, 0, 0]), float(e[0, 0, 1]), float(e[0, 1, 0]), float(e[0, 1, 1]))


@dataclass(frozen=True)
class QuadraticDiagnostics:
    coefficients: Tuple[float, float, float]
    case: str                        # 'linear', 'quadratic' or 'degenerate'
    discriminant: Optional[float]
    real_roots: Tuple[float, ...]
    interior_roots: Tuple[float, ...]
    boundary_candidates: Tuple[SimplexVector, ...]
    irreducible: bool
    unique: bool
    fixed_point_residual: Optional[float] = None
    note: str = ""


def _real_roots(a: float, b: float, c: float) -> Tuple[Tuple[float, ...], Optional[float], str]:
    if abs(a) <= COEFFICIENT_EPS:
        if abs(b) <= COEFFICIENT_EPS:
            return (), None, "degenerate" if abs(c) <= COEFFICIENT_EPS else "linear"
        return (-c / b,), None, "linear"
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc < -ROOT_TOLERANCE:
            return (), disc, "quadratic"
        disc = 0.0
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return (0.0,), disc, "quadratic"
    return (q / a, c / q), disc, "quadratic"


def solve_2x2x2(q: Quadratic222) -> Tuple[SimplexVector, QuadraticDiagnostics]:
    """
    Closed-form stationary vector (s, 1 - s) of a 2x2x2 tensor.

    Raises:
        NoRootInUnitInterval: only boundary roots s in {0, 1} (reducible tensors);
            the exception carries them as candidates
        TheoryViolation: two distinct interior roots
    """
    a, b, c = q.coefficients()
    P = q.to_tensor()
    irreducible = is_irreducible(P)
    roots, disc, case = _real_roots(a, b, c)

    if case == "degenerate":
        x = SimplexVector.uniform(2)
        logger.info("all coefficients vanish: every s in [0, 1] is stationary")
        return x, QuadraticDiagnostics(
            (a, b, c), case, None, (), (), (), irreducible, unique=False,
            fixed_point_residual=f_p(P, x).l1_distance(x),
            note="non-unique line of fixed points",
        )

    in_unit = sorted(min(max(s, 0.0), 1.0) for s in roots
                     if -ROOT_TOLERANCE <= s <= 1.0 + ROOT_TOLERANCE)
    interior: List[float] = []
    for s in in_unit:
        if ROOT_TOLERANCE < s < 1.0 - ROOT_TOLERANCE and not any(abs(s - t) <= 1e-9 for t in interior):
            interior.append(s)
    boundary = tuple(SimplexVector([s, 1.0 - s]) for s in sorted(set(in_unit)) if s not in interior)

    diag = QuadraticDiagnostics((a, b, c), case, disc, tuple(roots), tuple(interior),
                                boundary, irreducible, unique=len(interior) == 1)
    if len(interior) > 1:
        raise TheoryViolation(
            f"two interior stationary points s = {interior[0]!r}, {interior[1]!r} "
            f"for {q}; at most one can exist"
        )
    if not interior:
        raise NoRootInUnitInterval(candidates=list(boundary), diagnostics=diag)

    x = SimplexVector.normalized([interior[0], 1.0 - interior[0]])
    residual = f_p(P, x).l1_distance(x)
    return x, QuadraticDiagnostics(
        diag.coefficients, case, disc, diag.real_roots, diag.interior_roots,
        boundary, irreducible, unique=True, fixed_point_residual=residual,
    )


def quadratic_trace(x: SimplexVector, diag: QuadraticDiagnostics) -> IterationTrace:
    """Single-record trace so the closed form can be exported like the iterations."""
    step = TraceStep(1, x.x, 0.0, diag.fixed_point_residual or 0.0)
    return IterationTrace(Method.QUADRATIC, steps=[step], converged=True, iterations_used=1,
                          note=diag.note or diag.case)


# --- repeated runs ---

@dataclass(frozen=True)
class RunStatistics:
    method: Method
    iterations: List[int]
    solutions: List[SimplexVector]
    traces: List[IterationTrace] = field(default_factory=list)

    @property
    def mean_iterations(self) -> float:
        return float(np.mean(self.iterations))

    @property
    def spread(self) -> float:
        """Largest pairwise 1-norm distance between the solutions."""
        return max((a.l1_distance(b) for a, b in combinations(self.solutions, 2)), default=0.0)


def iteration_statistics(P: TransitionTensor, method: Method, runs: int = 10, seed: int = 0,
                         opts: Optional[SolveOptions] = None) -> RunStatistics:
    """
    Solve from `runs` random starts; run r draws x0 with seed + r.

    The Markov process starts from x0 and x1 = F_P(x0). A run that hits the
    iteration cap re-raises MaxIterationsExceeded with its index set as `.run`.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    method = Method(method)
    opts = opts or SolveOptions(record_trace=False)
    iterations: List[int] = []
    solutions: List[SimplexVector] = []
    traces: List[IterationTrace] = []
    if method is Method.QUADRATIC:
        raise ValueError("repeated runs need an iterative method, got quadratic")
    for run in range(runs):
        x0 = random_simplex(P.n, seed + run)
        try:
            if method is Method.POWER:
                x, trace = power_method(P, x0, opts)
            else:
                x, trace = markov_process(P, x0, f_p(P, x0), opts)
        except MaxIterationsExceeded as exc:
            exc.run = run
            raise
        logger.debug("run %d: %d iterations", run, trace.iterations_used)
        iterations.append(trace.iterations_used)
        solutions.append(x)
        traces.append(trace)
    return RunStatistics(method, iterations, solutions, traces)
