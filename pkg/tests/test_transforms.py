import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exp_sum_closed_form, resource_closed_form, unit_circle_ellipse_points
from privometer.adversary import Fact, KnowledgeSet, Message
from privometer.privacy import PrivacyIndex, privacy_index
from privometer.transforms import (
    ChangeOfVariables, DisclosedProblem, LocalizationCaseError, Problem, ScalarTransform, TransformError,
    build_relation_localization, build_relation_resource, change_variables,
    circle_ellipse_intersection, exp_sum_problem, kkt_residual, localization_problem,
    pull_back, solve_disclosed, transform_objective,
)
from privometer.uncertainty_sets import INF, Ball, FinitePoints, Segment


def _angles(*deg):
    t = np.deg2rad(deg)
    return np.column_stack([np.cos(t), np.sin(t)])


def _loc_knowledge(msg, N, D, *extra):
    return KnowledgeSet(msg, (Fact.dimension("N", N), Fact.bound("area_diameter", D)) + extra)


# -- objective transforms -----------------------------------------------------

def test_symmetric_beacons_message():
    dp = transform_objective(localization_problem(_angles(0, 120, 240)), ScalarTransform.square())
    np.testing.assert_allclose(dp.message["Abar"], 1.5 * np.eye(2), atol=1e-14)
    np.testing.assert_allclose(dp.message["ybar"], [0, 0], atol=1e-14)


def test_message_is_sum_of_outer_products():
    rng = np.random.default_rng(4)
    P = rng.normal(size=(6, 2)) * 3
    y = np.linalg.norm(P, axis=1)
    a = P / y[:, None]
    dp = transform_objective(localization_problem(P), ScalarTransform.square())
    np.testing.assert_allclose(dp.message["Abar"], sum(np.outer(v, v) for v in a), atol=1e-13)
    np.testing.assert_allclose(dp.message["ybar"], (y[:, None] * a).sum(0), atol=1e-13)


def test_scale_keeps_argmin():
    dp = transform_objective(Problem.quadratic([[1.0]], [-3.0], 9.0), ScalarTransform.scale(2.0))
    assert dp.message["Q"][0, 0] == 2.0
    assert solve_disclosed(dp)[0] == pytest.approx(3.0)


def test_square_of_distance_keeps_argmin():
    p = np.array([1.5, -2.0, 0.25])
    dp = transform_objective(Problem.norm_residual(np.eye(3), p), ScalarTransform.square())
    np.testing.assert_allclose(solve_disclosed(dp), p, atol=1e-12)


def test_affine_positive_keeps_argmin():
    Q = np.array([[2.0, 0.3], [0.3, 1.0]])
    q = np.array([1.0, -1.0])
    dp = transform_objective(Problem.quadratic(Q, q, 10.0), ScalarTransform.affine_positive(3.0, 7.0))
    np.testing.assert_allclose(solve_disclosed(dp), np.linalg.solve(Q, -q), atol=1e-12)


def test_generic_path_matches_least_squares():
    rng = np.random.default_rng(8)
    A, y = rng.normal(size=(6, 2)), rng.normal(size=6)
    dp = transform_objective(Problem.norm_residual(A, y), ScalarTransform.scale(4.0))
    assert dp.solve_hint == "generic" and len(dp.message) == 0
    np.testing.assert_allclose(solve_disclosed(dp), np.linalg.lstsq(A, y, rcond=None)[0], atol=1e-5)


def test_square_rejected_on_signed_objective():
    # x^2 - 10 takes negative values, where squaring is not increasing
    with pytest.raises(TransformError, match="not increasing"):
        transform_objective(Problem.quadratic([[1.0]], [0.0], -10.0), ScalarTransform.square())


def test_constraint_map_must_preserve_sign():
    P = Problem.resource_allocation([1, 1], [1, 1], 2)
    with pytest.raises(TransformError, match="sign"):
        transform_objective(P, ScalarTransform.scale(2.0), [ScalarTransform.affine_positive(1.0, 1.0)])


def test_transform_parameters_validated():
    with pytest.raises(TransformError):
        ScalarTransform.scale(0.0)
    with pytest.raises(TransformError):
        ScalarTransform.matrix_zero_preserving(np.zeros((2, 2)))
    assert ScalarTransform.matrix_zero_preserving(np.eye(2)).preserves_sign()
    assert ScalarTransform.scale(1.0).check_monotone(-5, 5)
    assert not ScalarTransform.square().check_monotone(-1, 1)


# -- change of variables ------------------------------------------------------

def test_s_formula_examples():
    dp = change_variables(Problem.resource_allocation([2.0], [1.0], 8.0),
                          ChangeOfVariables.exp_scaled([2.0]))
    np.testing.assert_allclose(dp.message["s"], [1.0])
    dp = change_variables(Problem.resource_allocation([1.0, 1.0], [2.0, 3.0], 6.0),
                          ChangeOfVariables.exp_scaled([1.0, 1.0]))
    np.testing.assert_allclose(dp.message["s"], [1 / 3, 1 / 2])
    assert dp.message.names() == ["s"]


def test_s_formula_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 20))
        a, b, g = rng.uniform(0.1, 5, n), rng.uniform(0.1, 5, n), rng.uniform(0.5, 20)
        dp = change_variables(Problem.resource_allocation(a, b, g), ChangeOfVariables.exp_scaled(a))
        np.testing.assert_allclose(dp.message["s"], b * a ** 3 / g, rtol=1e-15)


def test_symmetric_pull_back():
    P = Problem.resource_allocation([1.0, 1.0], [1.0, 1.0], 2.0)
    dp = change_variables(P, ChangeOfVariables.exp_scaled([1.0, 1.0]))
    z = solve_disclosed(dp)
    np.testing.assert_allclose(z, [0, 0], atol=1e-12)
    x = pull_back(z, dp.transform)
    np.testing.assert_allclose(x, [1, 1], atol=1e-12)
    assert float(np.sum(x ** 3)) == pytest.approx(2.0, abs=1e-12)
    # grid search over the symmetric diagonal agrees
    grid = np.linspace(-0.5, 0.5, 10001)
    feasible = 2 * 0.5 * np.exp(3 * grid) <= 1 + 1e-15
    assert grid[feasible][np.argmin(2 * np.exp(-grid[feasible]))] == pytest.approx(0.0, abs=1e-4)


def test_exp_sum_solver_matches_closed_form():
    rng = np.random.default_rng(5)
    for _ in range(50):
        s = rng.uniform(0.01, 10, size=int(rng.integers(1, 21)))
        dp = DisclosedProblem(Message({"s": s}), "exp-sum-constrained", exp_sum_problem(s))
        z = solve_disclosed(dp)
        np.testing.assert_allclose(z, exp_sum_closed_form(s), atol=1e-10)
        assert kkt_residual(dp.problem, z) <= 1e-9


def test_pull_back_solves_original_problem():
    rng = np.random.default_rng(6)
    a, b, g = rng.uniform(0.5, 2, 8), rng.uniform(0.5, 2, 8), rng.uniform(1, 10)
    P = Problem.resource_allocation(a, b, g)
    dp = change_variables(P, ChangeOfVariables.exp_scaled(a))
    x = pull_back(solve_disclosed(dp), dp.transform)
    np.testing.assert_allclose(x, resource_closed_form(a, b, g), rtol=1e-10)
    assert kkt_residual(P, x) <= 1e-7


def test_pull_back_examples():
    np.testing.assert_allclose(pull_back([0.0], ChangeOfVariables.exp_scaled([2.0])), [2.0])
    z = np.array([0.3, -1.2])
    np.testing.assert_allclose(pull_back(z, ChangeOfVariables.affine(np.eye(2))), z)
    with pytest.raises(TransformError):
        pull_back([0.0, 1.0, 2.0], ChangeOfVariables.exp_scaled([1.0, 1.0]))


def test_affine_substitution_keeps_argmin():
    Q = np.array([[3.0, 1.0], [1.0, 2.0]])
    q = np.array([-1.0, 4.0])
    phi = ChangeOfVariables.affine([[2.0, 1.0], [0.0, 1.0]], [1.0, -1.0])
    dp = change_variables(Problem.quadratic(Q, q), phi)
    np.testing.assert_allclose(pull_back(solve_disclosed(dp), phi), np.linalg.solve(Q, -q),
                               atol=1e-12)


def test_range_condition_rejects_exp_on_signed_domain():
    with pytest.raises(TransformError, match="range"):
        change_variables(Problem.quadratic(np.eye(2), np.zeros(2)),
                         ChangeOfVariables.exp_scaled([1.0, 1.0]))


def test_raw_field_leak_rejected():
    # unit scaling would put alpha itself into the message
    P = Problem.resource_allocation([1.0, 2.0], [1.0, 1.0], 3.0)
    with pytest.raises(TransformError, match="discloses"):
        change_variables(P, ChangeOfVariables.exp_scaled([1.0, 1.0]))


def test_singular_affine_map_rejected():
    with pytest.raises(TransformError):
        ChangeOfVariables.affine([[1.0, 2.0], [2.0, 4.0]])


# -- circle / ellipse intersection --------------------------------------------

def _match(points, ref):
    return max(min(np.linalg.norm(p - r) for r in ref) for p in points)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.05, 1.95), st.floats(0, 2 * np.pi), st.floats(0.0, 1.0))
def test_intersection_matches_eigen_oracle(mu1, theta, shift):
    mu2 = 0.05 + shift * (0.9)  # always below one
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    A = R @ np.diag([mu1, mu2]) @ R.T
    pts, transversal = circle_ellipse_intersection(A)
    assert transversal and len(pts) == 4
    assert _match(pts, unit_circle_ellipse_points(A)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0.2, 1.4))
def test_intersection_rotation_equivariant(t1, rot, gap):
    a = _angles(np.rad2deg(t1), np.rad2deg(t1 + gap))
    A = a.T @ a
    R = np.array([[np.cos(rot), -np.sin(rot)], [np.sin(rot), np.cos(rot)]])
    p1, _ = circle_ellipse_intersection(A)
    p2, _ = circle_ellipse_intersection(R @ A @ R.T)
    assert _match(p1 @ R.T, p2) <= 1e-9


def test_orthogonal_beacons_are_not_transversal():
    pts, transversal = circle_ellipse_intersection(np.eye(2))
    assert not transversal and len(pts) == 0
    msg = Message({"Abar": np.eye(2), "ybar": [1.0, 1.0]})
    with pytest.raises(LocalizationCaseError):
        build_relation_localization(msg, _loc_knowledge(msg, 2, 10.0))


# -- localization relation ----------------------------------------------------

def _disclose(P):
    return transform_objective(localization_problem(P), ScalarTransform.square()).message


def test_collinear_beacons_give_segment():
    P = np.array([[1.0, 1.0], [-2.0, -2.0], [3.0, 3.0]])
    msg = _disclose(P)
    U = build_relation_localization(msg, _loc_knowledge(msg, 3, 10.0))
    assert isinstance(U, Segment)
    assert privacy_index(U) == PrivacyIndex(10.0, 1.0, 1)
    assert U.contains(P[0])


def test_two_beacons_give_both_positions():
    P = np.array([[2.0, 1.0], [0.5, 3.0]])
    msg = _disclose(P)
    U = build_relation_localization(msg, _loc_knowledge(msg, 2, 10.0))
    assert isinstance(U, FinitePoints) and len(U.points) == 2
    assert _match(U.points, P) <= 1e-9 and _match(P, U.points) <= 1e-9
    rho = privacy_index(U)
    assert rho.d == pytest.approx(np.linalg.norm(P[0] - P[1]), rel=1e-9)
    assert (rho.nu, rho.a) == (0.5, 1)


def test_generic_beacons_give_disk():
    P = 4 * _angles(10, 100, 200, 250, 330)
    msg = _disclose(P)
    U = build_relation_localization(msg, _loc_knowledge(msg, 5, 10.0))
    assert isinstance(U, Ball)
    assert privacy_index(U) == PrivacyIndex(10.0, 1.0, 2)
    assert U.contains(P[0])


def test_single_beacon_is_exposed():
    msg = _disclose(np.array([[3.0, -1.0]]))
    U = build_relation_localization(msg, _loc_knowledge(msg, 1, 10.0))
    np.testing.assert_allclose(U.points, [[3.0, -1.0]], atol=1e-14)
    assert privacy_index(U).is_zero


def test_refinements_shrink_localization_set():
    P = 4 * _angles(10, 100, 200, 250, 330)
    msg = _disclose(P)
    a1, y1 = P[0] / 4, 4.0
    U = build_relation_localization(msg, _loc_knowledge(msg, 5, 10.0, Fact.exact("a1", a1)))
    assert isinstance(U, Segment) and U.contains(P[0])
    U = build_relation_localization(msg, _loc_knowledge(msg, 5, 10.0, Fact.exact("a1", a1),
                                                        Fact.exact("y1", y1)))
    np.testing.assert_allclose(U.points, [P[0]], atol=1e-12)


def test_invalid_localization_messages():
    bad = Message({"Abar": [[1.0, 0.0], [0.0, -1.0]], "ybar": [0.0, 0.0]})
    with pytest.raises(LocalizationCaseError):
        build_relation_localization(bad, _loc_knowledge(bad, 3, 1.0))
    msg = _disclose(np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]))
    with pytest.raises(LocalizationCaseError):
        build_relation_localization(msg, _loc_knowledge(msg, 3, -1.0))


# -- resource relation --------------------------------------------------------

def _res_knowledge(s, *facts):
    return KnowledgeSet(Message({"s": s}), facts)


def test_resource_tuple_fully_private():
    U = build_relation_resource(Message({"s": [1.0]}), _res_knowledge([1.0]), 0)
    assert privacy_index(U) == PrivacyIndex(INF, 1.0, 2)
    for s in np.random.default_rng(1).uniform(0.01, 10, 5):
        assert privacy_index(build_relation_resource(Message({"s": [s]}),
                                                     _res_knowledge([s]), 0)).a == 2


def test_resource_refinements():
    s = [0.5]
    msg = Message({"s": s})
    K = _res_knowledge(s, Fact.exact("alpha[0]", 2.0))
    U = build_relation_resource(msg, K, 0)
    assert privacy_index(U) == PrivacyIndex(INF, 1.0, 1)
    assert U.contains(np.array([2.0, 0.5 * 7 / 8]))
    K = _res_knowledge(s, Fact.exact("gamma", 8.0), Fact.exact("alpha[0]", 2.0))
    U = build_relation_resource(msg, K, 0)
    np.testing.assert_allclose(U.points, [[2.0, 0.5]])
    assert privacy_index(U).is_zero


def test_resource_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        build_relation_resource(Message({"s": [0.0]}), _res_knowledge([0.0]), 0)


def test_identity_transforms_leak_verbatim_fields():
    Q, q = np.array([[2.0]]), np.array([1.0])
    with pytest.raises(TransformError, match="discloses"):
        transform_objective(Problem.quadratic(Q, q), ScalarTransform.scale(1.0))
    with pytest.raises(TransformError, match="discloses"):
        change_variables(Problem.quadratic(Q, q), ChangeOfVariables.affine(np.eye(1)))


def test_coincidental_values_are_not_leaks():
    # s = beta numerically here, but s is built from three private fields
    dp = change_variables(Problem.resource_allocation([2.0], [1.0], 8.0),
                          ChangeOfVariables.exp_scaled([2.0]))
    assert dp.message["s"][0] == 1.0
