"""
Condition report for a transition tensor.

Collects the min-entry verdict, positivity, irreducibility and the pointwise
Jacobian checks over sampled simplex points into one report, with a text
rendering for the terminal and a dict form for JSON.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from markov_tensor.profiling import profile_function, profile_section
from markov_tensor.engine.types import TransitionTensor, SimplexVector
from markov_tensor.engine.conditions import (
    check_min_entry_condition, check_jacobian_entry_condition, eigen_one_excluded,
    is_irreducible, DEFAULT_EIGEN_TOL,
)
from markov_tensor.engine.errors import DimensionTooLargeForExactCheck

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 100
VERTEX_PULL = 1e-6
UNKNOWN_CAPPED = "unknown-capped"


@dataclass
class EigenSample:
    """Eigenvalue-1 test at one sampled point."""
    point: np.ndarray
    excluded: bool
    margin: float


@dataclass
class JacobianSample:
    """Margin min J(x) - 1/n at one sampled point."""
    point: np.ndarray
    margin: float


@dataclass
class ConditionReport:
    n: int
    delta: float
    threshold: float
    min_entry_condition_holds: bool
    is_positive: bool
    is_irreducible: Union[bool, str]  # True, False or "unknown-capped"
    eigen_one_excluded_at_samples: List[EigenSample] = field(default_factory=list)
    jacobian_margin_at_samples: List[JacobianSample] = field(default_factory=list)
    contraction: Optional[float] = None
    seed: Optional[int] = None

    @property
    def eigen_one_excluded_everywhere(self) -> bool:
        return all(s.excluded for s in self.eigen_one_excluded_at_samples)

    @property
    def min_eigen_margin(self) -> float:
        return min((s.margin for s in self.eigen_one_excluded_at_samples), default=float("nan"))

    @property
    def min_jacobian_margin(self) -> float:
        return min((s.margin for s in self.jacobian_margin_at_samples), default=float("nan"))


def sample_simplex_points(n: int, count: int = DEFAULT_SAMPLES, seed: int = 0) -> List[SimplexVector]:
    """
    Barycenter, the n vertices pulled 1e-6 toward it, then `count` Dirichlet(1, ..., 1) points.

    All points lie in the relative interior of the simplex.
    """
    if count < 0:
        raise ValueError(f"sample count must be nonnegative, got {count}")
    points = [SimplexVector.uniform(n)]
    for i in range(n):
        v = np.full(n, VERTEX_PULL / n)
        v[i] += 1.0 - VERTEX_PULL
        points.append(SimplexVector.normalized(v))
    rng = np.random.default_rng(seed)
    for row in rng.dirichlet(np.ones(n), size=count):
        points.append(SimplexVector.normalized(row))
    return points


@profile_function
def diagnose(P: TransitionTensor, samples: int = DEFAULT_SAMPLES, seed: int = 0,
             eigen_tol: float = DEFAULT_EIGEN_TOL) -> ConditionReport:
    """
    Build the condition report for P.

    Args:
        P: validated tensor
        samples: number of random simplex points beyond the barycenter and vertices
        seed: seed for the random points
        eigen_tol: threshold on sigma_min(J - I)

    Returns:
        ConditionReport
    """
    cond = check_min_entry_condition(P)
    try:
        irreducible: Union[bool, str] = is_irreducible(P)
    except DimensionTooLargeForExactCheck as exc:
        logger.info("%s", exc)
        irreducible = UNKNOWN_CAPPED

    report = ConditionReport(
        n=P.n,
        delta=cond.delta,
        threshold=cond.threshold,
        min_entry_condition_holds=cond.holds,
        is_positive=bool((P.entries > 0).all()),
        is_irreducible=irreducible,
        contraction=2.0 * (1.0 - P.n * cond.delta) if cond.holds else None,
        seed=seed,
    )
    with profile_section("diagnose.samples"):
        for x in sample_simplex_points(P.n, samples, seed):
            eig = eigen_one_excluded(P, x, eigen_tol)
            report.eigen_one_excluded_at_samples.append(EigenSample(x.x, eig.excluded, eig.margin))
            jac = check_jacobian_entry_condition(P, x)
            report.jacobian_margin_at_samples.append(JacobianSample(x.x, jac.margin))
    return report


def format_verdict(report: ConditionReport) -> str:
    """One-line min-entry verdict, e.g. 'min-entry condition: HOLDS (delta=0.2 > 0.1667), contraction=0.8'."""
    if report.min_entry_condition_holds:
        return (f"min-entry condition: HOLDS (delta={report.delta:.4g} > {report.threshold:.4g}), "
                f"contraction={report.contraction:.4g}")
    return f"min-entry condition: FAILS (delta={report.delta:.4g} <= {report.threshold:.4g})"


def format_condition_report(report: ConditionReport, verbose: bool = False) -> str:
    """
    Generate a text report.

    Args:
        report: report from diagnose
        verbose: list every sampled point

    Returns:
        Formatted text report
    """
    lines = []
    lines.append(f"{'=' * 60}")
    lines.append(f"CONDITION REPORT: n = {report.n}")
    lines.append(f"{'=' * 60}")
    lines.append(format_verdict(report))
    lines.append(f"min entry (delta): {report.delta:.6g}")
    lines.append(f"1/(2n):            {report.threshold:.6g}")
    lines.append(f"positive:          {'yes' if report.is_positive else 'no'}")
    if report.is_irreducible == UNKNOWN_CAPPED:
        lines.append(f"irreducible:       {UNKNOWN_CAPPED}")
    else:
        lines.append(f"irreducible:       {'yes' if report.is_irreducible else 'no'}")
    lines.append("")

    count = len(report.eigen_one_excluded_at_samples)
    excluded = sum(1 for s in report.eigen_one_excluded_at_samples if s.excluded)
    lines.append(f"{'─' * 60}")
    lines.append(f"SAMPLED POINTS ({count}, seed {report.seed})")
    lines.append(f"{'─' * 60}")
    lines.append(f"eigenvalue 1 excluded: {excluded}/{count}, "
                 f"min sigma_min(J - I) = {report.min_eigen_margin:.4g}")
    jac_ok = sum(1 for s in report.jacobian_margin_at_samples if s.margin > 0)
    lines.append(f"Jacobian entries > 1/n: {jac_ok}/{count}, "
                 f"min margin = {report.min_jacobian_margin:.4g}")

    if verbose:
        lines.append("")
        for eig, jac in zip(report.eigen_one_excluded_at_samples, report.jacobian_margin_at_samples):
            point = ", ".join(f"{v:.4f}" for v in eig.point[:6])
            if len(eig.point) > 6:
                point += ", ..."
            lines.append(f"  ({point})  sigma_min={eig.margin:.4g}  jacobian_margin={jac.margin:+.4g}")

    lines.append(f"{'=' * 60}")
    return "\n".join(lines)


def report_to_dict(report: ConditionReport) -> Dict[str, Any]:
    """JSON-ready form of the report."""
    return {
        "n": report.n,
        "delta": report.delta,
        "threshold": report.threshold,
        "min_entry_condition_holds": report.min_entry_condition_holds,
        "is_positive": report.is_positive,
        "is_irreducible": report.is_irreducible,
        "contraction": report.contraction,
        "seed": report.seed,
        "eigen_one_excluded_at_samples": [
            {"point": s.point.tolist(), "excluded": bool(s.excluded), "margin": s.margin}
            for s in report.eigen_one_excluded_at_samples
        ],
        "jacobian_margin_at_samples": [
            {"point": s.point.tolist(), "margin": s.margin}
            for s in report.jacobian_margin_at_samples
        ],
    }
