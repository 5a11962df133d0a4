"""Solvability analysis: alpha sweeps, verdicts, witnesses, and the range oracle.

The analyzer runs the regularized solve over a geometric alpha schedule and
reads the small-alpha behavior of the indicator (alpha times the costate):
a vanishing indicator marks the equation solvable with the constraint matched
exactly, a stable nonzero limit yields a witness vector that separates the
right-hand side from everything the equation can reach under the constraint.
An independent constrained least-squares oracle provides the second route for
cross-checking every verdict.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .hilbert import ProblemInstance, Projector, ValidationError
from .resolvent import RegularizedSolution, SingularSystem, solve_regularized

__all__ = [
    "AlphaSchedule",
    "Verdict",
    "SweepRecord",
    "SweepReport",
    "Decision",
    "OracleDecision",
    "InvertibilityReport",
    "alpha_sweep",
    "decide",
    "extract_witness",
    "witness_correlation",
    "range_oracle",
    "factor_invertibility",
]


@dataclass(frozen=True)
class AlphaSchedule:
    """Geometric schedule alpha_k = alpha0 * ratio**k for k = 0..count-1."""

    alpha0: float = 1.0
    ratio: float = 0.1
    count: int = 8

    def __post_init__(self) -> None:
        if not (np.isfinite(self.alpha0) and self.alpha0 > 0):
            raise ValidationError(f"alpha0 must be positive, got {self.alpha0!r}")
        if not (np.isfinite(self.ratio) and 0 < self.ratio < 1):
            raise ValidationError(f"ratio must lie strictly between 0 and 1, got {self.ratio!r}")
        if not (isinstance(self.count, (int, np.integer)) and self.count >= 1):
            raise ValidationError(f"count must be a positive integer, got {self.count!r}")

    def values(self) -> list[float]:
        """Alphas in decreasing order."""
        return [self.alpha0 * self.ratio**k for k in range(self.count)]


class Verdict(enum.Enum):
    SOLVABLE = "SOLVABLE"
    NOT_SOLVABLE = "NOT_SOLVABLE"
    SINGULAR = "SINGULAR"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SweepRecord:
    """Scalar summary of one alpha step; ``indicator`` kept for limit tests."""

    alpha: float
    singular: bool
    norm_indicator: float
    norm_residual: float
    norm_constraint_residual: float
    indicator: Optional[np.ndarray]


@dataclass(frozen=True)
class SweepReport:
    """Records of a full schedule sweep, ordered by decreasing alpha."""

    problem: ProblemInstance
    schedule: AlphaSchedule
    records: tuple[SweepRecord, ...]

    @property
    def rhs_norm(self) -> float:
        return float(np.linalg.norm(self.problem.rhs))

    def nonsingular_records(self) -> tuple[SweepRecord, ...]:
        return tuple(r for r in self.records if not r.singular)

    @property
    def final_indicator(self) -> Optional[np.ndarray]:
        """Indicator vector at the smallest nonsingular alpha, if any."""
        nonsingular = self.nonsingular_records()
        return nonsingular[-1].indicator if nonsingular else None


def _record(alpha: float, problem: ProblemInstance) -> SweepRecord:
    solution = solve_regularized(alpha, problem)
    if isinstance(solution, SingularSystem):
        return SweepRecord(
            alpha=float(alpha),
            singular=True,
            norm_indicator=math.nan,
            norm_residual=math.nan,
            norm_constraint_residual=math.nan,
            indicator=None,
        )
    return SweepRecord(
        alpha=float(alpha),
        singular=False,
        norm_indicator=float(np.linalg.norm(solution.indicator)),
        norm_residual=float(np.linalg.norm(solution.residual)),
        norm_constraint_residual=float(np.linalg.norm(solution.constraint_residual)),
        indicator=solution.indicator,
    )


def alpha_sweep(
    problem: ProblemInstance,
    schedule: Optional[AlphaSchedule] = None,
    jobs: int = 1,
) -> SweepReport:
    """Run the regularized solve at every alpha of the schedule.

    Steps are independent; ``jobs > 1`` runs them on a thread pool. Records
    are assembled in schedule order either way, so output is deterministic.
    """
    if schedule is None:
        schedule = AlphaSchedule()
    alphas = schedule.values()
    if jobs is None or jobs <= 1 or len(alphas) <= 1:
        records = [_record(a, problem) for a in alphas]
    else:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            records = list(pool.map(lambda a: _record(a, problem), alphas))
    return SweepReport(problem=problem, schedule=schedule, records=tuple(records))


@dataclass(frozen=True)
class Decision:
    """Verdict of a sweep plus the evidence it rests on.

    ``witness`` and ``indicator_limit`` are populated exactly when the
    verdict is NOT_SOLVABLE: the limit is the stable indicator vector, the
    witness is its component outside the constraint's range.
    """

    verdict: Verdict
    witness: Optional[np.ndarray]
    indicator_limit: Optional[np.ndarray]
    diagnostics: Mapping[str, float]


def decide(report: SweepReport, decision_tol: Optional[float] = None) -> Decision:
    """Map sweep behavior to a verdict.

    SOLVABLE when the indicator norm at the smallest nonsingular alpha is at
    most ``decision_tol * ||h||`` and the last three indicator norms are
    non-increasing within ten percent. NOT_SOLVABLE when the last two
    indicator vectors agree within ``decision_tol * ||h||`` and both the
    limit and its component outside the constraint's range stay above the
    threshold; the witness is that outside component. SINGULAR when every
    scheduled alpha was singular, INCONCLUSIVE otherwise.
    """
    tol = decision_tol if decision_tol is not None else report.problem.tols.decision_tol
    if not (np.isfinite(tol) and tol > 0):
        raise ValidationError(f"decision_tol must be positive, got {tol!r}")
    h_norm = report.rhs_norm
    threshold = tol * h_norm
    nonsingular = report.nonsingular_records()
    diagnostics: dict[str, float] = {
        "decision_tol": float(tol),
        "rhs_norm": h_norm,
        "nonsingular_count": float(len(nonsingular)),
    }
    if not nonsingular:
        return Decision(Verdict.SINGULAR, None, None, diagnostics)

    last = nonsingular[-1]
    diagnostics["final_alpha"] = last.alpha
    diagnostics["final_norm_indicator"] = last.norm_indicator

    tail = nonsingular[-3:]
    tail_nonincreasing = all(
        tail[i + 1].norm_indicator <= 1.1 * tail[i].norm_indicator for i in range(len(tail) - 1)
    )
    if last.norm_indicator <= threshold and tail_nonincreasing:
        return Decision(Verdict.SOLVABLE, None, None, diagnostics)

    if len(nonsingular) >= 2:
        previous = nonsingular[-2]
        step = float(np.linalg.norm(last.indicator - previous.indicator))
        diagnostics["tail_difference"] = step
        if step <= threshold and last.norm_indicator > threshold:
            witness = report.problem.complement_matrix @ last.indicator
            witness_norm = float(np.linalg.norm(witness))
            diagnostics["witness_norm"] = witness_norm
            if witness_norm > threshold:
                return Decision(Verdict.NOT_SOLVABLE, witness, last.indicator, diagnostics)

    return Decision(Verdict.INCONCLUSIVE, None, None, diagnostics)


def extract_witness(report: SweepReport, decision_tol: Optional[float] = None) -> np.ndarray:
    """Witness vector of a NOT_SOLVABLE sweep.

    The witness is v = (I - P) y for the stable indicator limit y. It is
    annihilated by the constraint map to rounding, and the inner products
    <image - h, v> stay near -||v||^2 for small alpha, certifying that no
    constraint-respecting approximation can reach h. Raises when the sweep
    does not have a stable nonzero limit.
    """
    decision = decide(report, decision_tol=decision_tol)
    if decision.verdict is not Verdict.NOT_SOLVABLE or decision.witness is None:
        raise ValidationError(
            f"witness extraction needs a stable nonzero indicator limit, verdict was {decision.verdict.value}"
        )
    return decision.witness


def witness_correlation(
    problem: ProblemInstance,
    witness: np.ndarray,
    schedule: Optional[AlphaSchedule] = None,
) -> list[tuple[float, float]]:
    """Inner products <image(alpha) - h, witness> along the schedule.

    Singular alphas are skipped. For a correct witness the values converge to
    -||witness||^2 as alpha decreases (equivalently -||y||^2 when the limit y
    already lies outside the constraint's range).
    """
    if schedule is None:
        schedule = AlphaSchedule()
    v = np.asarray(witness, dtype=float)
    out: list[tuple[float, float]] = []
    for alpha in schedule.values():
        solution = solve_regularized(alpha, problem)
        if isinstance(solution, SingularSystem):
            continue
        out.append((float(alpha), float(solution.residual @ v)))
    return out


@dataclass(frozen=True)
class OracleDecision:
    """Both range-criterion verdicts, reported separately.

    The decomposed route checks the two membership conditions
    P h in Range(P L) and (I - P) h in Range(L) by least-squares residuals.
    The constrained route minimizes ||L u - h|| subject to P L u = P h by
    nullspace elimination; ``distance`` is the achieved minimum (infinity
    when the constraint set is empty). The two criteria are genuinely
    different tests and can disagree; ``agree`` just records whether they did.
    """

    decomposed_solvable: bool
    constrained_solvable: bool
    agree: bool
    exact_part_residual: float
    complement_residual: float
    feasible: bool
    distance: float
    control: Optional[np.ndarray]


def _lstsq_residual(
    a: np.ndarray, b: np.ndarray, scale: Optional[float] = None
) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares with a rank cutoff relative to ``scale``.

    Submatrices of a rank-deficient operator can consist entirely of rounding
    noise; judged against their own largest singular value they look full
    rank, and inverting them produces enormous spurious solutions. Passing
    the parent operator's scale keeps the cutoff anchored where the noise
    floor actually is.
    """
    if a.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(b))
    rcond = None
    if scale is not None and scale > 0 and min(a.shape) > 0:
        smax = float(np.linalg.svd(a, compute_uv=False)[0])
        floor = max(a.shape) * np.finfo(float).eps * scale
        if smax <= floor:
            x = np.zeros(a.shape[1])
            return x, float(np.linalg.norm(b))
        rcond = floor / smax
    x, *_ = np.linalg.lstsq(a, b, rcond=rcond)
    return x, float(np.linalg.norm(a @ x - b))


def _nullspace_rcond(a: np.ndarray, scale: float) -> Optional[float]:
    """Cutoff for null_space so noise-level rows count as zero rows."""
    if scale <= 0 or min(a.shape) == 0:
        return None
    smax = float(np.linalg.svd(a, compute_uv=False)[0])
    if smax == 0.0:
        return None
    floor = max(a.shape) * np.finfo(float).eps * scale
    # scipy keeps singular values strictly above rcond * smax, so a cutoff of
    # one declares the whole matrix zero when even its largest value is noise
    return 1.0 if smax <= floor else floor / smax


def range_oracle(problem: ProblemInstance, oracle_tol: Optional[float] = None) -> OracleDecision:
    """Decide solvability directly from the operator, independent of sweeps.

    Needs the operator; raises on Gram-only instances (a Gram operator alone
    does not determine what the equation can reach jointly with the
    constraint, which is what non-representable instances demonstrate).
    """
    if problem.operator is None:
        raise ValidationError(
            "range oracle needs the operator; this instance only carries a gram matrix"
        )
    tol = oracle_tol if oracle_tol is not None else problem.tols.oracle_tol
    if not (np.isfinite(tol) and tol > 0):
        raise ValidationError(f"oracle_tol must be positive, got {tol!r}")

    l = problem.operator
    p = problem.constraint_matrix
    h = problem.rhs
    h_norm = float(np.linalg.norm(h))
    threshold = tol * h_norm

    operator_scale = float(np.linalg.svd(l, compute_uv=False)[0]) if min(l.shape) else 0.0

    exact_part = p @ h
    complement_part = h - exact_part
    _w0, exact_residual = _lstsq_residual(p @ l, exact_part, scale=operator_scale)
    _w1, complement_residual = _lstsq_residual(l, complement_part, scale=operator_scale)
    decomposed = exact_residual <= threshold and complement_residual <= threshold

    # Constrained route: reduce the constraint to independent rows, find a
    # particular feasible control, then minimize over the constraint nullspace.
    if isinstance(problem.constraint, Projector):
        rows = problem.constraint.basis.T
    else:
        rows = p
    a = rows @ l
    b = rows @ h
    if a.shape[0] == 0:
        u_particular = np.zeros(problem.control_dim)
        feasibility_residual = 0.0
        nullspace = np.eye(problem.control_dim)
    else:
        u_particular, feasibility_residual = _lstsq_residual(a, b, scale=operator_scale)
        nullspace = scipy.linalg.null_space(a, rcond=_nullspace_rcond(a, operator_scale))
    feasible = feasibility_residual <= threshold

    if not feasible:
        distance = math.inf
        control = None
    else:
        base = l @ u_particular - h
        if nullspace.shape[1]:
            t, _ = _lstsq_residual(l @ nullspace, -base, scale=operator_scale)
            control = u_particular + nullspace @ t
        else:
            control = u_particular
        distance = float(np.linalg.norm(l @ control - h))
    constrained = feasible and distance <= threshold

    return OracleDecision(
        decomposed_solvable=bool(decomposed),
        constrained_solvable=bool(constrained),
        agree=bool(decomposed == constrained),
        exact_part_residual=exact_residual,
        complement_residual=complement_residual,
        feasible=bool(feasible),
        distance=distance,
        control=control,
    )


@dataclass(frozen=True)
class InvertibilityReport:
    alpha: float
    smallest_singular_value: float
    largest_singular_value: float
    invertible: bool


def factor_invertibility(alpha: float, problem: ProblemInstance) -> InvertibilityReport:
    """Invertibility certificate for the factor I - alpha (alpha I + G)^{-1} P.

    The regularized operator factors as (alpha I + G) times this matrix, and
    alpha I + G is always invertible for alpha > 0, so invertibility of the
    factor certifies invertibility of the whole regularized system.
    """
    if not (np.isfinite(alpha) and alpha > 0):
        raise ValidationError(f"alpha must be positive and finite, got {alpha!r}")
    n = problem.ambient_dim
    shifted = alpha * np.eye(n) + problem.gram
    applied = scipy.linalg.solve(shifted, problem.constraint_matrix, assume_a="pos")
    q = np.eye(n) - alpha * applied
    s = np.linalg.svd(q, compute_uv=False)
    largest = float(s[0]) if s.size else 0.0
    smallest = float(s[-1]) if s.size else 0.0
    invertible = largest > 0 and smallest > problem.tols.singular_tol * largest
    return InvertibilityReport(
        alpha=float(alpha),
        smallest_singular_value=smallest,
        largest_singular_value=largest,
        invertible=bool(invertible),
    )
