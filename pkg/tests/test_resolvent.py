"""Regularized solves: closed forms, identities, and singular systems."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from finapprox import (
    RegularizedSolution,
    SingularSystem,
    ValidationError,
    build_scenario,
    identity_residuals,
    make_problem,
    make_projector,
    regularized_operator,
    solve_regularized,
)


def random_projector_problem(rng, dim=None, full_rank=True):
    """Random operator problem with a projector constraint.

    With ``full_rank`` the Gram operator is strictly positive (singular
    values of L bounded away from zero), so the regularized system stays
    well conditioned along the whole schedule.
    """
    if dim is None:
        dim = int(rng.integers(2, 9))
    rank = int(rng.integers(1, dim))
    u, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    v, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    s = rng.uniform(0.5, 1.5, size=dim)
    if not full_rank:
        s[rng.integers(1, dim)] = 0.0
    l = u @ np.diag(s) @ v.T
    proj = make_projector([rng.standard_normal(dim) for _ in range(rank)])
    h = rng.standard_normal(dim)
    return make_problem(operator=l, constraint=proj, rhs=h)


def test_regularized_operator_assembly():
    problem = build_scenario("diagonal_solvable").problem
    t = regularized_operator(0.5, problem)
    assert_allclose(t, np.diag([1.0, 1.5]), atol=0)
    # projector constraints give an exactly symmetric matrix
    assert np.array_equal(t, t.T)


def test_regularized_operator_rejects_bad_alpha():
    problem = build_scenario("diagonal_solvable").problem
    for alpha in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(ValidationError):
            regularized_operator(alpha, problem)


def test_diagonal_closed_form():
    """Identity operator, constraint on e1, rhs (1, 1).

    T_alpha = diag(1, 1 + alpha), so the costate is (1, 1/(1+alpha)), the
    constrained coordinate of the image matches the rhs exactly, and the
    residual lives on the free coordinate with norm alpha/(1+alpha).
    """
    problem = build_scenario("diagonal_solvable").problem
    for alpha in (1.0, 0.1, 1e-3, 1e-7):
        sol = solve_regularized(alpha, problem)
        assert isinstance(sol, RegularizedSolution)
        assert_allclose(sol.costate, [1.0, 1.0 / (1.0 + alpha)], rtol=1e-14)
        assert_allclose(sol.image, [1.0, 1.0 / (1.0 + alpha)], rtol=1e-14)
        assert_allclose(sol.control, sol.costate, rtol=1e-14)
        # residual comes from the cancellation image - h, so allow eps/alpha
        assert_allclose(np.linalg.norm(sol.residual), alpha / (1.0 + alpha), rtol=1e-8)
        assert_allclose(sol.constraint_residual, [0.0, 0.0], atol=1e-16)
        assert_allclose(sol.indicator, alpha * sol.costate, atol=0)
    sol = solve_regularized(1.0, problem)
    assert_allclose(sol.costate, [1.0, 0.5], atol=0)


def test_unsolvable_closed_form():
    """Rank-one operator, rhs outside its range: the indicator freezes at e2."""
    problem = build_scenario("diagonal_unsolvable").problem
    for alpha in (1.0, 0.01, 1e-6):
        sol = solve_regularized(alpha, problem)
        assert_allclose(sol.indicator, [0.0, 1.0], atol=1e-14)
        assert_allclose(sol.residual, [0.0, -1.0], atol=1e-14)


def test_nilpotent_constraint_closed_form():
    """Raw nilpotent constraint: solvable, but the constraint component persists.

    With L = I and P = [[0, 1], [0, 0]] the costate solves
    (alpha(I - P) + I) z = e2, giving z = (alpha/(1+alpha)^2, 1/(1+alpha)).
    The constraint component of the residual has norm alpha/(1+alpha), which
    is 1/11 at alpha = 0.1 even though the indicator itself vanishes.
    """
    problem = build_scenario("nilpotent_pi").problem
    alpha = 0.1
    sol = solve_regularized(alpha, problem)
    expected_z = np.array([alpha / (1.0 + alpha) ** 2, 1.0 / (1.0 + alpha)])
    assert_allclose(sol.costate, expected_z, rtol=1e-14)
    assert_allclose(np.linalg.norm(sol.constraint_residual), 1.0 / 11.0, rtol=1e-13)
    ids = identity_residuals(sol, problem)
    assert_allclose(ids.constraint_defect, 1.0 / 11.0, rtol=1e-13)
    # the error-form identity holds for any constraint map, projector or not
    assert ids.error_form_defect <= 1e-14


def test_zero_rhs_gives_zero_solution():
    """A zero right-hand side yields zero costate, image, and defects."""
    base = build_scenario("diagonal_solvable").problem
    problem = make_problem(
        operator=base.operator, constraint=base.constraint, rhs=np.zeros(2)
    )
    sol = solve_regularized(1.0, problem)
    assert isinstance(sol, RegularizedSolution)
    assert_allclose(sol.costate, [0.0, 0.0], atol=0)
    assert_allclose(sol.residual, [0.0, 0.0], atol=0)
    ids = identity_residuals(sol, problem)
    assert ids.basic_identity_defect == 0.0
    assert ids.error_form_defect == 0.0
    assert ids.constraint_defect == 0.0


def test_exact_constraint_random_instances():
    """pi(image - h) vanishes to rounding for projector constraints."""
    rng = np.random.default_rng(20260401)
    for _ in range(60):
        problem = random_projector_problem(rng)
        h_norm = np.linalg.norm(problem.rhs)
        for alpha in (1.0, 1e-3, 1e-7):
            sol = solve_regularized(alpha, problem)
            assert isinstance(sol, RegularizedSolution)
            assert np.linalg.norm(sol.constraint_residual) <= 1e-11 * h_norm


def test_identity_residuals_random_instances():
    rng = np.random.default_rng(20260402)
    for _ in range(40):
        problem = random_projector_problem(rng)
        h_norm = np.linalg.norm(problem.rhs)
        for alpha in (0.5, 1e-4):
            sol = solve_regularized(alpha, problem)
            ids = identity_residuals(sol, problem)
            assert ids.basic_identity_defect <= 1e-10 * h_norm
            assert ids.error_form_defect <= 1e-10 * h_norm
            assert ids.constraint_defect <= 1e-10 * h_norm


def test_image_matches_operator_route():
    """Gram route and operator route agree: G z equals L (L^T z)."""
    rng = np.random.default_rng(20260403)
    for _ in range(20):
        problem = random_projector_problem(rng)
        sol = solve_regularized(0.01, problem)
        assert_allclose(sol.image, problem.operator @ sol.control, atol=1e-12)


def test_residual_never_exceeds_indicator_for_projectors():
    """The residual is the complement component of the indicator."""
    rng = np.random.default_rng(20260404)
    for _ in range(30):
        problem = random_projector_problem(rng, full_rank=False)
        sol = solve_regularized(1e-2, problem)
        if isinstance(sol, SingularSystem):
            continue
        assert np.linalg.norm(sol.residual) <= np.linalg.norm(sol.indicator) * (1.0 + 1e-12)


def test_singular_system_truncated_shift():
    problem = build_scenario("truncated_shift").problem
    sol = solve_regularized(0.1, problem)
    assert isinstance(sol, SingularSystem)
    expected_kernel = np.zeros(6)
    expected_kernel[1] = 1.0
    assert_allclose(sol.kernel_vector, expected_kernel, atol=1e-12)
    assert abs(sol.smallest_eigenvalue) <= 1e-12
    # the kernel vector really annihilates the regularized matrix
    t = regularized_operator(0.1, problem)
    assert np.linalg.norm(t @ sol.kernel_vector) <= 1e-12


def test_singular_kernel_without_rhs_component():
    """When the rhs has no kernel component, a unit kernel vector is still reported.

    Operator range e1, constraint range e2: T = diag(1 + alpha, 0) is
    singular with kernel e2, while the rhs e1 has no kernel part at all.
    """
    proj = make_projector([np.eye(2)[:, 1]])
    problem = make_problem(
        operator=np.array([[1.0], [0.0]]), constraint=proj, rhs=np.array([1.0, 0.0])
    )
    sol = solve_regularized(0.5, problem)
    assert isinstance(sol, SingularSystem)
    assert_allclose(np.linalg.norm(sol.kernel_vector), 1.0, rtol=1e-12)
    assert_allclose(abs(sol.kernel_vector[1]), 1.0, rtol=1e-12)
    assert abs(sol.smallest_eigenvalue) <= 1e-14


def test_costate_refinement_tightens_solve():
    """The solve residual stays near rounding even at the smallest alpha."""
    rng = np.random.default_rng(20260405)
    for _ in range(20):
        problem = random_projector_problem(rng)
        t = regularized_operator(1e-7, problem)
        sol = solve_regularized(1e-7, problem)
        defect = np.linalg.norm(t @ sol.costate - problem.rhs)
        assert defect <= 1e-11 * np.linalg.norm(problem.rhs)
