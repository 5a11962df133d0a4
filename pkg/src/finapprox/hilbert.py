"""Finite-coordinate Hilbert space primitives.

Vectors are 1-D float64 arrays, operators are 2-D float64 arrays. The types
here bundle them with the structure the rest of the library relies on:
orthogonal projectors stored basis-first, Gram operators with their
factorability diagnostics, and validated problem instances.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "ValidationError",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "Projector",
    "ProjectorReport",
    "RepresentabilityReport",
    "ValidationRecord",
    "ProblemInstance",
    "as_vector",
    "as_operator",
    "orthonormal_columns",
    "make_projector",
    "projector_defects",
    "gram",
    "gram_representable",
    "make_problem",
]


class ValidationError(ValueError):
    """An operator, projector, or problem instance failed its structural checks."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used across construction, solving, and decisions.

    Every tolerance is applied relative to the natural scale of the quantity
    it guards (Frobenius norm, right-hand-side norm, largest singular value)
    whenever such a scale exists.

    Attributes
    ----------
    tol_ortho : orthonormality defect allowed in a projector basis.
    tol_proj : idempotency/symmetry defect allowed before a square matrix
        stops counting as an orthogonal projector.
    tol_sym : symmetry defect allowed in a supplied Gram operator.
    tol_psd : negative spectrum allowed in a supplied Gram operator.
    tol_gram : mismatch allowed between a supplied operator's Gram product
        and a supplied Gram operator.
    rank_tol : relative singular-value threshold for rank decisions.
    singular_tol : relative smallest-singular-value threshold below which a
        linear system is reported singular instead of solved.
    id_tol : relative defect allowed in the algebraic identities every
        regularized solve must satisfy.
    decision_tol : relative threshold steering the solvability verdict.
    oracle_tol : relative residual threshold used by the range oracle.
    """

    tol_ortho: float = 1e-10
    tol_proj: float = 1e-10
    tol_sym: float = 1e-10
    tol_psd: float = 1e-10
    tol_gram: float = 1e-10
    rank_tol: float = 1e-10
    singular_tol: float = 1e-12
    id_tol: float = 1e-9
    decision_tol: float = 1e-6
    oracle_tol: float = 1e-8

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and np.isfinite(value) and value > 0):
                raise ValidationError(f"tolerance {name} must be a positive finite number, got {value!r}")


DEFAULT_TOLERANCES = Tolerances()


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def as_vector(x, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} contains non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise ValidationError(f"{name} has length {v.shape[0]}, expected {dim}")
    return v


def as_operator(a, shape: Optional[tuple] = None, name: str = "operator") -> np.ndarray:
    """Coerce to a finite 2-D float array, optionally checking its shape."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    if shape is not None and m.shape != shape:
        raise ValidationError(f"{name} has shape {m.shape}, expected {shape}")
    return m


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector stored as an orthonormal basis plus its matrix.

    ``matrix`` equals ``basis @ basis.T`` symmetrized, so it is exactly
    symmetric and idempotent to rounding. ``rank`` is the number of basis
    columns.
    """

    basis: np.ndarray
    matrix: np.ndarray
    rank: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Project ``x`` onto the range."""
        return self.matrix @ x

    def complement_matrix(self) -> np.ndarray:
        return np.eye(self.dim) - self.matrix


def orthonormal_columns(columns: np.ndarray, rank_tol: float) -> tuple[np.ndarray, list[int]]:
    """Orthonormalize the columns of a matrix by modified Gram-Schmidt.

    A second re-orthogonalization pass keeps the result orthonormal to
    rounding even for nearly dependent inputs. Columns whose remainder after
    projection falls below ``rank_tol`` times the largest input column norm
    are dropped.

    Returns the orthonormal matrix and the indices of dropped columns.
    """
    dim, count = columns.shape
    if count == 0:
        return np.zeros((dim, 0)), []
    scale = float(np.max(np.linalg.norm(columns, axis=0)))
    threshold = rank_tol * scale
    kept: list[np.ndarray] = []
    dropped: list[int] = []
    for j in range(count):
        v = columns[:, j].astype(float, copy=True)
        for _ in range(2):
            for q in kept:
                v -= (q @ v) * q
        norm = float(np.linalg.norm(v))
        if norm > threshold and norm > 0.0:
            kept.append(v / norm)
        else:
            dropped.append(j)
    if kept:
        return np.column_stack(kept), dropped
    return np.zeros((dim, 0)), dropped


def make_projector(
    vectors: Sequence,
    dim: Optional[int] = None,
    tols: Tolerances = DEFAULT_TOLERANCES,
    min_rank: int = 0,
) -> Projector:
    """Build the orthogonal projector onto the span of ``vectors``.

    Linearly dependent inputs are dropped, so the result's rank can be lower
    than the number of vectors supplied. An empty list needs an explicit
    ``dim`` and yields the zero projector. ``min_rank`` lets callers demand a
    minimum achieved rank and turns falling short into an error.

    Vectors that are already orthonormal within ``tol_ortho`` are kept
    verbatim, which makes the construction idempotent: feeding a projector's
    basis back in reproduces the projector bit for bit.
    """
    vecs = [as_vector(v, name=f"basis vector {i}") for i, v in enumerate(vectors)]
    if vecs:
        lengths = {v.shape[0] for v in vecs}
        if len(lengths) != 1:
            raise ValidationError(f"basis vectors have mixed lengths {sorted(lengths)}")
        inferred = lengths.pop()
        if dim is not None and dim != inferred:
            raise ValidationError(f"basis vectors have length {inferred}, expected dim {dim}")
        dim = inferred
        columns = np.column_stack(vecs)
    else:
        if dim is None:
            raise ValidationError("an empty basis needs an explicit dim")
        columns = np.zeros((dim, 0))
    if dim <= 0:
        raise ValidationError(f"dim must be positive, got {dim}")

    if columns.shape[1] and columns.shape[1] <= dim:
        input_defect = float(
            np.linalg.norm(columns.T @ columns - np.eye(columns.shape[1]))
        )
    else:
        input_defect = np.inf
    if input_defect <= tols.tol_ortho:
        basis = columns
    else:
        basis, _dropped = orthonormal_columns(columns, tols.rank_tol)
    rank = basis.shape[1]
    if rank < min_rank:
        raise ValidationError(f"projector rank {rank} fell below the required minimum {min_rank}")

    if rank:
        ortho_defect = float(np.linalg.norm(basis.T @ basis - np.eye(rank)))
        if ortho_defect > tols.tol_ortho:
            raise ValidationError(f"orthonormalization defect {ortho_defect:.3e} exceeds tol_ortho")
    matrix = basis @ basis.T
    matrix = (matrix + matrix.T) / 2.0
    return Projector(basis=_readonly(basis), matrix=_readonly(matrix), rank=rank)


@dataclass(frozen=True)
class ProjectorReport:
    """Diagnostics saying how far a square matrix is from an orthogonal projector."""

    idempotency_defect: float
    symmetry_defect: float
    rank: int
    is_orthogonal_projector: bool


def projector_defects(matrix, tol: Optional[float] = None, tols: Tolerances = DEFAULT_TOLERANCES) -> ProjectorReport:
    """Measure idempotency and symmetry defects of a candidate projector matrix.

    ``is_orthogonal_projector`` holds when both defects stay within the
    tolerance relative to ``max(1, ||P||_F)``.
    """
    p = as_operator(matrix, name="candidate projector")
    n, m = p.shape
    if n != m:
        raise ValidationError(f"candidate projector must be square, got shape {p.shape}")
    if tol is None:
        tol = tols.tol_proj
    idem = float(np.linalg.norm(p @ p - p))
    sym = float(np.linalg.norm(p - p.T))
    scale = max(1.0, float(np.linalg.norm(p)))
    singular_values = np.linalg.svd(p, compute_uv=False)
    if singular_values.size and singular_values[0] > 0:
        rank = int(np.sum(singular_values > tols.rank_tol * singular_values[0]))
    else:
        rank = 0
    ok = idem <= tol * scale and sym <= tol * scale
    return ProjectorReport(idempotency_defect=idem, symmetry_defect=sym, rank=rank, is_orthogonal_projector=ok)


def gram(operator) -> np.ndarray:
    """Gram operator of a linear map, symmetrized exactly: (L L^T + (L L^T)^T) / 2."""
    l = as_operator(operator, name="operator")
    g = l @ l.T
    return (g + g.T) / 2.0


@dataclass(frozen=True)
class RepresentabilityReport:
    """Whether a symmetric PSD matrix factors as L L^T with a given control dimension."""

    representable: bool
    rank: int
    symmetry_defect: float
    min_eigenvalue: float
    factor: Optional[np.ndarray]


def gram_representable(
    gram_matrix,
    control_dim: int,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> RepresentabilityReport:
    """Decide whether ``gram_matrix`` is the Gram operator of some map from a
    ``control_dim``-dimensional space.

    The matrix must be symmetric and positive semidefinite within tolerance,
    and its numerical rank must not exceed ``control_dim``. On success the
    report carries a factor built from the spectral decomposition: columns
    sqrt(lambda_i) v_i for the leading eigenpairs, zero-padded to
    ``control_dim`` columns.
    """
    g = as_operator(gram_matrix, name="gram matrix")
    n, m = g.shape
    if n != m:
        raise ValidationError(f"gram matrix must be square, got shape {g.shape}")
    if not (isinstance(control_dim, (int, np.integer)) and control_dim >= 1):
        raise ValidationError(f"control_dim must be a positive integer, got {control_dim!r}")

    sym_defect = float(np.linalg.norm(g - g.T))
    scale = max(1.0, float(np.linalg.norm(g)))
    symmetric_part = (g + g.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(symmetric_part)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    min_eig = float(eigenvalues[-1]) if eigenvalues.size else 0.0
    top = float(eigenvalues[0]) if eigenvalues.size else 0.0
    rank = int(np.sum(eigenvalues > tols.rank_tol * max(top, 0.0))) if top > 0 else 0

    ok = (
        sym_defect <= tols.tol_sym * scale
        and min_eig >= -tols.tol_psd * scale
        and rank <= control_dim
    )
    factor = None
    if ok:
        factor = np.zeros((n, control_dim))
        for k in range(rank):
            factor[:, k] = np.sqrt(max(eigenvalues[k], 0.0)) * eigenvectors[:, k]
    return RepresentabilityReport(
        representable=ok,
        rank=rank,
        symmetry_defect=sym_defect,
        min_eigenvalue=min_eig,
        factor=_readonly(factor) if factor is not None else None,
    )


@dataclass(frozen=True)
class ValidationRecord:
    """Defect norms and flags recorded while assembling a problem instance."""

    gram_symmetry_defect: float
    gram_min_eigenvalue: float
    gram_factor_defect: Optional[float]
    constraint_symmetry_defect: float
    constraint_idempotency_defect: float
    constraint_is_projector: bool
    constraint_supplied_raw: bool
    representable: bool
    representable_rank: int


@dataclass(frozen=True)
class ProblemInstance:
    """A constrained operator equation in finite coordinates.

    ``operator`` maps controls (dimension ``control_dim``) into the ambient
    space (dimension ``ambient_dim``) and may be absent when only the Gram
    operator is known. ``constraint`` is the component of the equation that
    must be matched exactly: an orthogonal :class:`Projector`, or a raw
    square matrix admitted for counterexample studies and flagged as such in
    ``validation``.
    """

    operator: Optional[np.ndarray]
    gram: np.ndarray
    constraint: Union[Projector, np.ndarray]
    rhs: np.ndarray
    ambient_dim: int
    control_dim: int
    tols: Tolerances
    validation: ValidationRecord

    @property
    def constraint_matrix(self) -> np.ndarray:
        if isinstance(self.constraint, Projector):
            return self.constraint.matrix
        return self.constraint

    @property
    def constraint_is_projector(self) -> bool:
        return self.validation.constraint_is_projector

    @property
    def complement_matrix(self) -> np.ndarray:
        """Matrix of I minus the constraint map."""
        return np.eye(self.ambient_dim) - self.constraint_matrix

    def constrained(self, projector: Projector) -> "ProblemInstance":
        """Same equation under a different projector constraint.

        Used by the Galerkin sweep to re-pose the problem at each subspace
        level without revalidating the operator data.
        """
        if projector.dim != self.ambient_dim:
            raise ValidationError(
                f"replacement projector acts on dimension {projector.dim}, expected {self.ambient_dim}"
            )
        record = replace(
            self.validation,
            constraint_symmetry_defect=0.0,
            constraint_idempotency_defect=float(
                np.linalg.norm(projector.matrix @ projector.matrix - projector.matrix)
            ),
            constraint_is_projector=True,
            constraint_supplied_raw=False,
        )
        return replace(self, constraint=projector, validation=record)


def make_problem(
    operator=None,
    gram_matrix=None,
    constraint: Union[Projector, np.ndarray, None] = None,
    rhs=None,
    control_dim: Optional[int] = None,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> ProblemInstance:
    """Validate and bundle a problem instance.

    At least one of ``operator`` and ``gram_matrix`` must be given. When both
    are given they must agree (``||L L^T - G||_F <= tol_gram`` relative).
    When only the Gram operator is given, ``control_dim`` must be declared
    and the instance records whether the Gram operator is representable at
    that control dimension; a non-representable instance is still built, the
    flag is how downstream consumers learn that no operator exists.

    A raw (non-:class:`Projector`) constraint matrix is admitted but flagged:
    ``validation.constraint_supplied_raw`` is set, and
    ``validation.constraint_is_projector`` records whether it happens to pass
    the projector checks anyway.
    """
    if operator is None and gram_matrix is None:
        raise ValidationError("a problem needs an operator, a gram matrix, or both")
    if constraint is None:
        raise ValidationError("a problem needs a constraint")
    if rhs is None:
        raise ValidationError("a problem needs a right-hand side")

    l = as_operator(operator, name="operator") if operator is not None else None

    gram_factor_defect: Optional[float] = None
    if l is not None:
        if control_dim is not None and control_dim != l.shape[1]:
            raise ValidationError(
                f"declared control_dim {control_dim} conflicts with operator shape {l.shape}"
            )
        control_dim = l.shape[1]
        ambient_dim = l.shape[0]
        product = gram(l)
        if gram_matrix is not None:
            g_given = as_operator(gram_matrix, shape=(ambient_dim, ambient_dim), name="gram matrix")
            gram_factor_defect = float(np.linalg.norm(product - g_given))
            scale = max(1.0, float(np.linalg.norm(g_given)))
            if gram_factor_defect > tols.tol_gram * scale:
                raise ValidationError(
                    f"gram matrix disagrees with the operator's gram product "
                    f"(defect {gram_factor_defect:.3e} exceeds tol_gram)"
                )
        g = product
    else:
        g = as_operator(gram_matrix, name="gram matrix")
        if g.shape[0] != g.shape[1]:
            raise ValidationError(f"gram matrix must be square, got shape {g.shape}")
        ambient_dim = g.shape[0]
        if control_dim is None:
            raise ValidationError("control_dim must be declared when no operator is given")
        if not (isinstance(control_dim, (int, np.integer)) and control_dim >= 1):
            raise ValidationError(f"control_dim must be a positive integer, got {control_dim!r}")

    gram_scale = max(1.0, float(np.linalg.norm(g)))
    gram_sym_defect = float(np.linalg.norm(g - g.T))
    if gram_sym_defect > tols.tol_sym * gram_scale:
        raise ValidationError(
            f"gram matrix symmetry defect {gram_sym_defect:.3e} exceeds tol_sym"
        )
    g = (g + g.T) / 2.0
    min_eig = float(np.linalg.eigvalsh(g)[0]) if ambient_dim else 0.0
    if min_eig < -tols.tol_psd * gram_scale:
        raise ValidationError(
            f"gram matrix is not positive semidefinite (smallest eigenvalue {min_eig:.3e})"
        )

    if l is not None:
        representable = True
        if min(l.shape):
            sv = np.linalg.svd(l, compute_uv=False)
            representable_rank = int(np.sum(sv > tols.rank_tol * sv[0])) if sv[0] > 0 else 0
        else:
            representable_rank = 0
    else:
        report = gram_representable(g, control_dim, tols=tols)
        representable = report.representable
        representable_rank = report.rank

    if isinstance(constraint, Projector):
        if constraint.dim != ambient_dim:
            raise ValidationError(
                f"constraint projector acts on dimension {constraint.dim}, expected {ambient_dim}"
            )
        p = constraint
        c_report = projector_defects(p.matrix, tols=tols)
        constraint_is_projector = True
        constraint_supplied_raw = False
    else:
        raw = as_operator(constraint, shape=(ambient_dim, ambient_dim), name="constraint matrix")
        p = _readonly(raw)
        c_report = projector_defects(raw, tols=tols)
        constraint_is_projector = c_report.is_orthogonal_projector
        constraint_supplied_raw = True

    h = as_vector(rhs, dim=ambient_dim, name="rhs")

    record = ValidationRecord(
        gram_symmetry_defect=gram_sym_defect,
        gram_min_eigenvalue=min_eig,
        gram_factor_defect=gram_factor_defect,
        constraint_symmetry_defect=c_report.symmetry_defect,
        constraint_idempotency_defect=c_report.idempotency_defect,
        constraint_is_projector=constraint_is_projector,
        constraint_supplied_raw=constraint_supplied_raw,
        representable=representable,
        representable_rank=representable_rank,
    )
    return ProblemInstance(
        operator=_readonly(l) if l is not None else None,
        gram=_readonly(g),
        constraint=p,
        rhs=_readonly(h),
        ambient_dim=ambient_dim,
        control_dim=int(control_dim),
        tols=tols,
        validation=record,
    )
