"""Galerkin approximation of the constraint by nested subspace families.

When the constraint's subspace is too large or only known through a family of
finite approximations, the sweep is run against projectors onto nested
subspaces H_1 subset H_2 subset ... while alpha decreases along a diagonal
schedule. Each step still matches its own finite constraint exactly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .hilbert import (
    DEFAULT_TOLERANCES,
    ProblemInstance,
    Projector,
    Tolerances,
    ValidationError,
    orthonormal_columns,
    _readonly,
)
from .resolvent import SingularSystem, solve_regularized

__all__ = [
    "SubspaceFamily",
    "GalerkinRecord",
    "GalerkinReport",
    "coordinate_family",
    "sine_family",
    "midpoint_grid",
    "sample_midpoint",
    "family_projector",
    "strong_convergence_probe",
    "diagonal_steps",
    "galerkin_sweep",
]


@dataclass(frozen=True)
class SubspaceFamily:
    """Nested family of subspaces given by a level generator.

    ``generator(n)`` returns the level-n basis vectors as columns of a
    ``(dim, k_n)`` array; level n must extend level n-1 by appending columns
    (prefix nesting). Levels are defined for 1 <= n <= max_n; level 0 is the
    zero subspace by convention and never consults the generator.
    """

    generator: Callable[[int], np.ndarray]
    description: str
    max_n: int
    dim: int

    def level(self, n: int) -> np.ndarray:
        if not (isinstance(n, (int, np.integer)) and 1 <= n <= self.max_n):
            raise ValidationError(
                f"level must be an integer in [1, {self.max_n}] for this family, got {n!r}"
            )
        columns = np.asarray(self.generator(n), dtype=float)
        if columns.ndim != 2 or columns.shape[0] != self.dim:
            raise ValidationError(
                f"family generator returned shape {columns.shape}, expected ({self.dim}, k)"
            )
        if not np.all(np.isfinite(columns)):
            raise ValidationError(f"family level {n} contains non-finite entries")
        return columns


def coordinate_family(dim: int) -> SubspaceFamily:
    """Nested spans of the first n coordinate directions in R^dim."""
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise ValidationError(f"dim must be a positive integer, got {dim!r}")
    eye = np.eye(int(dim))
    return SubspaceFamily(
        generator=lambda n: eye[:, :n],
        description=f"first coordinate directions of R^{int(dim)}",
        max_n=int(dim),
        dim=int(dim),
    )


def midpoint_grid(grid_size: int) -> np.ndarray:
    """Midpoints (j + 1/2) / M of a uniform partition of (0, 1)."""
    if not (isinstance(grid_size, (int, np.integer)) and grid_size >= 1):
        raise ValidationError(f"grid_size must be a positive integer, got {grid_size!r}")
    m = int(grid_size)
    return (np.arange(m) + 0.5) / m


def sample_midpoint(func: Callable[[np.ndarray], np.ndarray], grid_size: int) -> np.ndarray:
    """Embed a function on (0, 1) into discretized coordinates.

    Samples at the midpoints and scales by 1/sqrt(M), so the standard dot
    product of embedded vectors equals the discrete inner product
    (1/M) sum f(x_j) g(x_j). The constant function 1 embeds with norm one.
    """
    x = midpoint_grid(grid_size)
    values = np.asarray(func(x), dtype=float)
    if values.shape != x.shape:
        raise ValidationError(f"sampled function returned shape {values.shape}, expected {x.shape}")
    return values / np.sqrt(float(grid_size))


def sine_family(grid_size: int) -> SubspaceFamily:
    """Constant plus first n full-period sine modes on the midpoint grid.

    Level n holds the samples of {1, sin(2 pi x), ..., sin(2 pi n x)} in the
    discrete inner product embedding. Levels run up to floor((M - 2) / 2),
    which keeps every requested mode strictly below the grid's aliasing
    limit; requesting more is rejected.
    """
    if not (isinstance(grid_size, (int, np.integer)) and grid_size >= 4):
        raise ValidationError(f"sine family needs a grid of at least 4 points, got {grid_size!r}")
    m = int(grid_size)
    x = midpoint_grid(m)
    scale = 1.0 / np.sqrt(float(m))
    max_n = (m - 2) // 2

    def level(n: int) -> np.ndarray:
        columns = np.empty((m, n + 1))
        columns[:, 0] = scale
        for k in range(1, n + 1):
            columns[:, k] = np.sin(2.0 * np.pi * k * x) * scale
        return columns

    return SubspaceFamily(
        generator=level,
        description=f"constant plus first sine modes on {m} midpoints of (0, 1)",
        max_n=max_n,
        dim=m,
    )


def family_projector(
    family: SubspaceFamily, n: int, tols: Tolerances = DEFAULT_TOLERANCES
) -> Projector:
    """Orthogonal projector onto the family's level-n subspace.

    Level 0 is the zero projector. Unlike general projector construction,
    a family level is required to be independent: any dropped column is an
    error naming the offending level, because a dependent family level means
    the discretization itself is broken.
    """
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= family.max_n):
        raise ValidationError(
            f"family level must be an integer in [0, {family.max_n}], got {n!r}"
        )
    if n == 0:
        basis = np.zeros((family.dim, 0))
        return Projector(basis=_readonly(basis), matrix=_readonly(np.zeros((family.dim, family.dim))), rank=0)
    columns = family.level(int(n))
    basis, dropped = orthonormal_columns(columns, tols.rank_tol)
    if dropped:
        raise ValidationError(
            f"family level {n} has linearly dependent basis vectors (columns {dropped} dropped)"
        )
    matrix = basis @ basis.T
    matrix = (matrix + matrix.T) / 2.0
    return Projector(basis=_readonly(basis), matrix=_readonly(matrix), rank=basis.shape[1])


def strong_convergence_probe(
    family: SubspaceFamily,
    target: Projector,
    probes: Sequence[np.ndarray],
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Defect table ||P_n x - P x|| for each probe x and each level n.

    Row n-1 holds level n, columns follow the probes. When every family level
    lies inside the target's range, each column is non-increasing, and strong
    convergence of the family to the target shows up as columns decreasing
    toward zero.
    """
    if target.dim != family.dim:
        raise ValidationError(
            f"target projector dimension {target.dim} does not match family dimension {family.dim}"
        )
    probe_list = [np.asarray(x, dtype=float) for x in probes]
    for i, x in enumerate(probe_list):
        if x.shape != (family.dim,):
            raise ValidationError(f"probe {i} has shape {x.shape}, expected ({family.dim},)")
    table = np.empty((family.max_n, len(probe_list)))
    targeted = [target.matrix @ x for x in probe_list]
    for n in range(1, family.max_n + 1):
        p_n = family_projector(family, n, tols=tols)
        for i, x in enumerate(probe_list):
            table[n - 1, i] = np.linalg.norm(p_n.matrix @ x - targeted[i])
    return table


def diagonal_steps(
    count: int = 8,
    max_n: Optional[int] = None,
    alpha0: float = 1.0,
    ratio: float = 0.1,
) -> list[tuple[int, float]]:
    """Default diagonal schedule: step k pairs level min(k, max_n) with alpha0 * ratio**k."""
    if not (isinstance(count, (int, np.integer)) and count >= 1):
        raise ValidationError(f"count must be a positive integer, got {count!r}")
    if not (np.isfinite(alpha0) and alpha0 > 0):
        raise ValidationError(f"alpha0 must be positive, got {alpha0!r}")
    if not (np.isfinite(ratio) and 0 < ratio < 1):
        raise ValidationError(f"ratio must lie strictly between 0 and 1, got {ratio!r}")
    steps = []
    for k in range(1, int(count) + 1):
        n = k if max_n is None else min(k, int(max_n))
        steps.append((n, alpha0 * ratio**k))
    return steps


@dataclass(frozen=True)
class GalerkinRecord:
    step: int
    n: int
    alpha: float
    singular: bool
    norm_residual: float
    norm_constraint_residual: float
    norm_constraint_residual_target: Optional[float]


@dataclass(frozen=True)
class GalerkinReport:
    records: tuple[GalerkinRecord, ...]
    rhs_norm: float

    @property
    def final_norm_residual(self) -> float:
        nonsingular = [r for r in self.records if not r.singular]
        return nonsingular[-1].norm_residual if nonsingular else float("nan")


def galerkin_sweep(
    problem: ProblemInstance,
    family: SubspaceFamily,
    steps: Sequence[tuple[int, float]],
    target: Optional[Projector] = None,
    tols: Optional[Tolerances] = None,
    jobs: int = 1,
) -> GalerkinReport:
    """Run the regularized solve with the constraint replaced level by level.

    Each step (n, alpha) solves the problem under the level-n projector, so
    the level-n component of the equation is matched exactly at every step.
    ``target`` defaults to the problem's own constraint when that is a
    projector; when present, the residual is additionally measured under it.
    """
    if family.dim != problem.ambient_dim:
        raise ValidationError(
            f"family dimension {family.dim} does not match problem dimension {problem.ambient_dim}"
        )
    if target is None and isinstance(problem.constraint, Projector):
        target = problem.constraint
    step_list = [(int(n), float(alpha)) for n, alpha in steps]
    effective_tols = tols if tols is not None else problem.tols

    def run(entry: tuple[int, tuple[int, float]]) -> GalerkinRecord:
        index, (n, alpha) = entry
        projector = family_projector(family, n, tols=effective_tols)
        posed = problem.constrained(projector)
        solution = solve_regularized(alpha, posed)
        if isinstance(solution, SingularSystem):
            return GalerkinRecord(
                step=index,
                n=n,
                alpha=alpha,
                singular=True,
                norm_residual=float("nan"),
                norm_constraint_residual=float("nan"),
                norm_constraint_residual_target=None,
            )
        target_norm = (
            float(np.linalg.norm(target.matrix @ solution.residual)) if target is not None else None
        )
        return GalerkinRecord(
            step=index,
            n=n,
            alpha=alpha,
            singular=False,
            norm_residual=float(np.linalg.norm(solution.residual)),
            norm_constraint_residual=float(np.linalg.norm(solution.constraint_residual)),
            norm_constraint_residual_target=target_norm,
        )

    entries = list(enumerate(step_list, start=1))
    if jobs is None or jobs <= 1 or len(entries) <= 1:
        records = [run(e) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            records = list(pool.map(run, entries))
    return GalerkinReport(records=tuple(records), rhs_norm=float(np.linalg.norm(problem.rhs)))
