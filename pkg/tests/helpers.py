"""Shared random instance generators for the test suite.

Every generator takes an explicit ``numpy.random.Generator`` so each test
controls its own seed. The transversality guard keeps the constraint's range
at a uniformly positive angle to the Gram operator's kernel, which is the
regime where the regularized system is invertible at every alpha and the
sweep verdict is crisp rather than borderline.
"""

import numpy as np
import scipy.linalg

from finapprox import make_problem, make_projector

TRANSVERSALITY_FLOOR = 0.05


def random_orthonormal(rng, dim, k):
    q, _ = np.linalg.qr(rng.standard_normal((dim, k)))
    return q[:, :k]


def random_operator(rng, dim, dim_u, rank):
    """Operator with prescribed rank and singular values in [0.5, 1.5]."""
    u = random_orthonormal(rng, dim, rank)
    v = random_orthonormal(rng, dim_u, rank)
    s = rng.uniform(0.5, 1.5, size=rank)
    return u @ (s[:, None] * v.T)


def transversal_projector(rng, operator, max_rank=3, floor=TRANSVERSALITY_FLOOR):
    """Random projector whose range meets the Gram kernel only at zero.

    Keeps the smallest eigenvalue of B^T (L L^T) B at least ``floor`` for an
    orthonormal basis B of the range, resampling as needed. Possible only
    when the requested rank does not exceed the operator's rank.
    """
    dim = operator.shape[0]
    gram_matrix = operator @ operator.T
    operator_rank = int(np.linalg.matrix_rank(operator, tol=1e-10))
    top = min(max_rank, operator_rank)
    for _ in range(200):
        rank = int(rng.integers(1, top + 1))
        proj = make_projector([rng.standard_normal(dim) for _ in range(rank)])
        pinched = proj.basis.T @ gram_matrix @ proj.basis
        if np.linalg.eigvalsh(pinched)[0] >= floor:
            return proj
    raise AssertionError("failed to draw a transversal projector in 200 attempts")


def reachable_rhs(rng, operator):
    """Right-hand side inside the operator's range, with unit-scale norm."""
    for _ in range(100):
        h = operator @ rng.standard_normal(operator.shape[1])
        if np.linalg.norm(h) >= 0.3:
            return h
    raise AssertionError("failed to draw a well-scaled reachable rhs")


def unreachable_rhs(rng, operator):
    """Right-hand side with a substantial component outside the range."""
    kernel = scipy.linalg.null_space(operator.T)
    if kernel.shape[1] == 0:
        raise AssertionError("operator has full row rank, nothing is unreachable")
    direction = kernel @ rng.standard_normal(kernel.shape[1])
    direction = direction / np.linalg.norm(direction)
    base = operator @ rng.standard_normal(operator.shape[1])
    return base + rng.uniform(0.3, 1.0) * max(1.0, np.linalg.norm(base)) * direction


def _full_rank_draw(rng, dim, max_dim):
    dim_u = int(rng.integers(dim, max_dim + 1))
    operator = random_operator(rng, dim, dim_u, dim)
    h = rng.standard_normal(dim)
    while np.linalg.norm(h) < 0.3:
        h = rng.standard_normal(dim)
    return operator, h


def _deficient_draw(rng, dim, max_dim):
    dim_u = int(rng.integers(1, max_dim + 1))
    top = max(1, min(dim - 1, dim_u))
    rank = int(rng.integers(1, top + 1))
    return random_operator(rng, dim, dim_u, rank)


def random_well_posed_problem(rng, max_dim=8):
    """Instance whose costate stays bounded along the whole schedule.

    Either the Gram operator has full rank (any rhs works) or it is rank
    deficient with a reachable rhs; both keep the solve well conditioned all
    the way down to the smallest alpha, so identity defects sit at rounding
    level rather than being amplified by 1/alpha.
    """
    dim = int(rng.integers(2, max_dim + 1))
    if bool(rng.integers(0, 2)):
        operator, h = _full_rank_draw(rng, dim, max_dim)
    else:
        operator = _deficient_draw(rng, dim, max_dim)
        h = reachable_rhs(rng, operator)
    proj = transversal_projector(rng, operator)
    return make_problem(operator=operator, constraint=proj, rhs=h)


def random_decision_problem(rng, max_dim=8):
    """Instance for verdict comparisons; returns (problem, expected_solvable).

    Mixes full-rank Gram operators (always solvable) with rank-deficient
    ones carrying reachable or unreachable right-hand sides.
    """
    dim = int(rng.integers(2, max_dim + 1))
    kind = int(rng.integers(0, 3))
    if kind == 0:
        operator, h = _full_rank_draw(rng, dim, max_dim)
        solvable = True
    else:
        operator = _deficient_draw(rng, dim, max_dim)
        if kind == 1:
            h = reachable_rhs(rng, operator)
            solvable = True
        else:
            h = unreachable_rhs(rng, operator)
            solvable = False
    proj = transversal_projector(rng, operator)
    problem = make_problem(operator=operator, constraint=proj, rhs=h)
    return problem, solvable


def random_strictly_positive_problem(rng, max_dim=8):
    """Instance whose Gram operator is strictly positive.

    Square full-rank operator with singular values in [0.5, 1.5], so the
    smallest Gram eigenvalue is at least 0.25.
    """
    dim = int(rng.integers(2, max_dim + 1))
    operator = random_operator(rng, dim, dim, dim)
    proj = transversal_projector(rng, operator)
    h = rng.standard_normal(dim)
    return make_problem(operator=operator, constraint=proj, rhs=h)
