import itertools

import numpy as np
import pytest

from polyot.diagnostics import TAYLOR_STEPS, TIGHT_SINKHORN, loglog_slope, taylor_remainders
from polyot.exceptions import ShapeMismatchException, ValidationException
from polyot.manifold import make_manifold, make_product_manifold
from polyot.objectives import (
    CootData,
    CootSquare,
    GromovFrobenius,
    LinearCost,
    QuadraticPenalty,
    RobustMaxCost,
    SeparableObjective,
    SquaredDistance,
    gw_reference_cost,
    linear_ot,
    robust_max,
)
from polyot.utils import sample_simplex

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def fd_gradient(objective, points, h=1e-6):
    """Central differences of ``objective.cost`` entry by entry."""
    points = tuple(np.array(p, dtype=float) for p in points)
    grads = []
    for a, P in enumerate(points):
        G = np.zeros_like(P)
        for idx in np.ndindex(P.shape):
            plus = [p.copy() for p in points]
            minus = [p.copy() for p in points]
            plus[a][idx] += h
            minus[a][idx] -= h
            G[idx] = (objective.cost(tuple(plus)) - objective.cost(tuple(minus))) / (2 * h)
        grads.append(G)
    return grads


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def random_coot(rng, m, n, d1, d2, mu1=None, mu2=None) -> CootData:
    return CootData(
        X=rng.uniform(size=(m, d1)),
        Z=rng.uniform(size=(n, d2)),
        mu1=sample_simplex(rng, m) if mu1 is None else mu1,
        mu2=sample_simplex(rng, n) if mu2 is None else mu2,
        nu1=sample_simplex(rng, d1),
        nu2=sample_simplex(rng, d2),
    )


# -- linear -----------------------------------------------------------------


def test_linear_cost_examples():
    objective = linear_ot(SWAP)
    assert objective.cost(np.full((2, 2), 0.25)) == pytest.approx(0.5)
    assert objective.cost(np.array([[0.5, 1e-9], [1e-9, 0.5]])) <= 1e-8
    assert LinearCost(np.zeros((2, 2))).cost(np.full((2, 2), 0.25)) == 0.0
    np.testing.assert_array_equal(objective.egrad(np.full((2, 2), 0.25))[0], SWAP)
    np.testing.assert_array_equal(objective.ehess(np.eye(2), SWAP)[0], np.zeros((2, 2)))
    assert objective.is_quadratic


def test_linear_cost_validation():
    with pytest.raises(ShapeMismatchException):
        LinearCost(SWAP).cost(np.full((2, 3), 1 / 6))
    with pytest.raises(ValidationException):
        LinearCost([[0.0, np.inf], [1.0, 0.0]])
    with pytest.raises(ValidationException):
        LinearCost([1.0, 2.0])
    with pytest.raises(ShapeMismatchException):
        LinearCost(SWAP).cost((np.eye(2), np.eye(2)))


def test_linear_rgrad_ignores_constant_shift(manifold_4x5, rng):
    M = manifold_4x5
    gamma = M.random_point(rng)
    C = rng.uniform(size=M.shape)
    for c in rng.uniform(-5.0, 5.0, size=3):
        shifted = M.egrad_to_rgrad(gamma, LinearCost(C + c).egrad(gamma)[0])
        base = M.egrad_to_rgrad(gamma, LinearCost(C).egrad(gamma)[0])
        assert np.abs(shifted - base).max() <= 1e-12


# -- gromov-wasserstein --------------------------------------------------------


def test_gw_identity_similarities():
    objective = GromovFrobenius(np.eye(2), np.eye(2))
    gamma = np.full((2, 2), 0.25)
    assert objective.cost(gamma) == pytest.approx(-0.25)
    np.testing.assert_allclose(objective.egrad(gamma)[0], np.full((2, 2), -0.5))


@pytest.mark.parametrize("symmetric", [True, False])
def test_gw_gradient_matches_finite_differences(rng, symmetric):
    S1, S2 = rng.uniform(size=(3, 3)), rng.uniform(size=(4, 4))
    if symmetric:
        S1, S2 = S1 + S1.T, S2 + S2.T
    objective = GromovFrobenius(S1, S2)
    gamma = rng.uniform(size=(3, 4))
    assert rel_err(objective.egrad(gamma)[0], fd_gradient(objective, (gamma,))[0]) <= 1e-7


def test_gw_symmetric_formulas_reduce(rng):
    S1, S2 = rng.uniform(size=(3, 3)), rng.uniform(size=(4, 4))
    S1, S2 = S1 + S1.T, S2 + S2.T
    objective = GromovFrobenius(S1, S2)
    gamma, xi = rng.uniform(size=(3, 4)), rng.standard_normal((3, 4))
    np.testing.assert_allclose(objective.egrad(gamma)[0], -2 * S1 @ gamma @ S2, rtol=1e-12)
    np.testing.assert_allclose(objective.ehess(gamma, xi)[0], -2 * S1 @ xi @ S2, rtol=1e-12)


def test_gw_hessian_is_linear(rng):
    objective = GromovFrobenius(rng.uniform(size=(3, 3)), rng.uniform(size=(4, 4)))
    gamma = rng.uniform(size=(3, 4))
    xi, eta = rng.standard_normal((3, 4)), rng.standard_normal((3, 4))
    combined = objective.ehess(gamma, 0.5 * xi + 2.0 * eta)[0]
    split = 0.5 * objective.ehess(gamma, xi)[0] + 2.0 * objective.ehess(gamma, eta)[0]
    assert np.abs(combined - split).max() <= 1e-10


def test_gw_reference_trivial_cases(rng):
    S = rng.uniform(size=(3, 3))
    assert gw_reference_cost(np.eye(3) / 3, S, S) == pytest.approx(0.0, abs=1e-15)
    gamma = rng.uniform(size=(3, 4))
    zero = gw_reference_cost(gamma, S, rng.uniform(size=(4, 4)), loss=lambda a, b: 0.0)
    assert zero == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_gw_matrix_form_matches_reference(seed):
    rng = np.random.default_rng(seed)
    m, n = (int(k) for k in rng.integers(2, 5, size=2))
    mu1, mu2 = sample_simplex(rng, m), sample_simplex(rng, n)
    gamma = make_manifold(mu1, mu2, TIGHT_SINKHORN).random_point(rng)
    S1, S2 = rng.uniform(size=(m, m)), rng.uniform(size=(n, n))
    objective = GromovFrobenius(S1, S2)
    expected = gw_reference_cost(gamma, S1, S2)
    assert abs(objective.discrepancy(gamma, mu1, mu2) - expected) <= 1e-10
    assert abs(objective.constant(mu1, mu2) + 2 * objective.cost(gamma) - expected) <= 1e-10


def test_gw_validation(rng):
    with pytest.raises(ShapeMismatchException):
        GromovFrobenius(rng.uniform(size=(2, 3)), np.eye(2))
    with pytest.raises(ShapeMismatchException):
        gw_reference_cost(np.full((2, 3), 1 / 6), np.eye(3), np.eye(3))
    big = np.eye(33)
    with pytest.raises(ValidationException):
        gw_reference_cost(np.full((33, 33), 1 / 33**2), big, big)


# -- co-optimal transport ------------------------------------------------------


def test_coot_matched_domains_cost_nothing(rng):
    X = rng.uniform(size=(4, 3))
    objective = CootSquare(CootData.uniform(X, X))
    G1, G2 = np.eye(4) / 4, np.eye(3) / 3
    assert objective.reference_cost(G1, G2) == pytest.approx(0.0, abs=1e-15)
    assert objective.cost((G1, G2)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_coot_fast_form_matches_reference(seed):
    rng = np.random.default_rng(seed)
    data = random_coot(rng, *(int(k) for k in rng.integers(1, 5, size=4)))
    objective = CootSquare(data)
    G1 = make_manifold(data.mu1, data.mu2, TIGHT_SINKHORN).random_point(rng)
    G2 = make_manifold(data.nu1, data.nu2, TIGHT_SINKHORN).random_point(rng)
    assert abs(objective.cost((G1, G2)) - objective.reference_cost(G1, G2)) <= 1e-10
    assert np.abs(data.sample_cost(G2) - objective.reference_sample_cost(G2)).max() <= 1e-10


def test_coot_gradients_match_finite_differences(rng):
    data = random_coot(rng, 3, 4, 2, 3)
    objective = CootSquare(data)
    G1, G2 = rng.uniform(size=(3, 4)), rng.uniform(size=(2, 3))
    fd = fd_gradient(objective, (G1, G2))
    grads = objective.egrad((G1, G2))
    assert rel_err(grads[0], fd[0]) <= 1e-7
    assert rel_err(grads[1], fd[1]) <= 1e-7
    np.testing.assert_allclose(grads[0], -2 * data.X @ G2 @ data.Z.T)
    np.testing.assert_allclose(grads[1], -2 * data.X.T @ G1 @ data.Z)


def test_coot_hessian_is_the_cross_map(rng):
    data = random_coot(rng, 3, 4, 2, 3)
    objective = CootSquare(data)
    points = (rng.uniform(size=(3, 4)), rng.uniform(size=(2, 3)))
    xi = (rng.standard_normal((3, 4)), rng.standard_normal((2, 3)))
    hess = objective.ehess(points, xi)
    np.testing.assert_allclose(hess[0], objective.egrad((points[0], xi[1]))[0])
    np.testing.assert_allclose(hess[1], objective.egrad((xi[0], points[1]))[1])


def test_coot_data_validation(rng):
    with pytest.raises(ShapeMismatchException):
        CootData(
            X=rng.uniform(size=(3, 2)),
            Z=rng.uniform(size=(4, 2)),
            mu1=np.full(3, 1 / 3),
            mu2=sample_simplex(rng, 4),
            nu1=sample_simplex(rng, 3),
            nu2=sample_simplex(rng, 2),
        )
    with pytest.raises(ShapeMismatchException):
        CootSquare(random_coot(rng, 2, 2, 2, 2)).cost(np.full((2, 2), 0.25))


# -- robust --------------------------------------------------------------------


def test_robust_needs_costs():
    with pytest.raises(ValidationException):
        RobustMaxCost([])
    with pytest.raises(ValidationException):
        RobustMaxCost([SWAP], temperature=-1.0)
    with pytest.raises(ShapeMismatchException):
        RobustMaxCost([SWAP, np.ones((2, 3))])


def test_robust_singleton_is_linear(rng):
    C = rng.uniform(size=(3, 4))
    robust, linear = robust_max([C]), LinearCost(C)
    for _ in range(5):
        gamma = rng.uniform(size=(3, 4))
        assert robust.cost(gamma) == pytest.approx(linear.cost(gamma), rel=1e-14)
        np.testing.assert_array_equal(robust.egrad(gamma)[0], C)


def test_robust_dominating_cost_is_selected(manifold_4x5, rng):
    C = rng.uniform(size=(4, 5))
    objective = RobustMaxCost([C, C + 1.0])
    gamma = manifold_4x5.random_point(rng)
    assert objective.cost(gamma) == pytest.approx(LinearCost(C).cost(gamma) + 1.0, abs=1e-10)
    np.testing.assert_array_equal(objective.egrad(gamma)[0], C + 1.0)


def test_robust_tie_break_and_permutation_invariance(rng):
    C = rng.uniform(size=(3, 3))
    tied = RobustMaxCost([C, C.copy()])
    gamma = rng.uniform(size=(3, 3))
    np.testing.assert_array_equal(tied.weights(gamma), [1.0, 0.0])
    costs = [rng.uniform(size=(3, 3)) for _ in range(4)]
    reference = RobustMaxCost(costs).cost(gamma)
    for order in itertools.permutations(range(4)):
        permuted = RobustMaxCost([costs[k] for k in order]).cost(gamma)
        assert permuted == pytest.approx(reference, abs=1e-15)


@pytest.mark.parametrize("tau", [1e-1, 1e-2, 1e-3])
def test_robust_smoothing_bound(rng, tau):
    costs = [rng.uniform(size=(3, 4)) for _ in range(3)]
    gamma = make_manifold(sample_simplex(rng, 3), sample_simplex(rng, 4)).random_point(rng)
    hard = RobustMaxCost(costs).cost(gamma)
    smooth = RobustMaxCost(costs, temperature=tau).cost(gamma)
    assert hard - 1e-15 <= smooth <= hard + tau * np.log(3) + 1e-15


def test_robust_smooth_derivatives(rng):
    costs = [rng.uniform(size=(3, 4)) for _ in range(3)]
    objective = RobustMaxCost(costs, temperature=0.05)
    assert objective.has_hessian
    gamma = rng.uniform(size=(3, 4)) / 6
    assert rel_err(objective.egrad(gamma)[0], fd_gradient(objective, (gamma,))[0]) <= 1e-6
    xi, h = rng.standard_normal((3, 4)), 1e-6
    fd_hess = (objective.egrad(gamma + h * xi)[0] - objective.egrad(gamma - h * xi)[0]) / (2 * h)
    assert rel_err(objective.ehess(gamma, xi)[0], fd_hess) <= 1e-6


def test_robust_hard_mode_has_no_hessian(rng):
    objective = RobustMaxCost([SWAP])
    assert not objective.has_hessian
    with pytest.raises(ValidationException):
        objective.ehess(np.eye(2), SWAP)


# -- composition and the taylor check --------------------------------------------


def test_sum_and_scaled_objectives(rng):
    C, T = rng.uniform(size=(3, 3)), rng.uniform(size=(3, 3))
    objective = LinearCost(C) + 2.0 * SquaredDistance(T)
    gamma = rng.uniform(size=(3, 3))
    assert objective.cost(gamma) == pytest.approx(np.sum(C * gamma) + 2 * np.sum((gamma - T) ** 2))
    np.testing.assert_allclose(objective.egrad(gamma)[0], C + 4 * (gamma - T))
    np.testing.assert_allclose(objective.ehess(gamma, T)[0], 4 * T)
    assert objective.is_quadratic
    penalty = QuadraticPenalty(0.5)
    assert penalty.cost(gamma) == pytest.approx(0.25 * np.sum(gamma**2))


def test_sum_rejects_mixed_arity(rng):
    coot = CootSquare(random_coot(rng, 2, 2, 2, 2))
    with pytest.raises(ValidationException):
        LinearCost(SWAP) + coot


def test_separable_objective_splits_points(rng):
    A, B = rng.uniform(size=(2, 2)), rng.uniform(size=(2, 3))
    objective = SeparableObjective([LinearCost(A), SquaredDistance(B)])
    assert objective.arity == 2
    assert objective.shapes == ((2, 2), (2, 3))
    points = (rng.uniform(size=(2, 2)), rng.uniform(size=(2, 3)))
    assert objective.cost(points) == pytest.approx(
        np.sum(A * points[0]) + np.sum((points[1] - B) ** 2)
    )
    grads = objective.egrad(points)
    np.testing.assert_array_equal(grads[0], A)
    np.testing.assert_allclose(grads[1], 2 * (points[1] - B))


@pytest.mark.parametrize("kind", ["linear", "gw", "coot", "robust"])
def test_taylor_slope_for_every_objective(rng, kind):
    M = make_manifold(sample_simplex(rng, 4), sample_simplex(rng, 5), TIGHT_SINKHORN)
    if kind == "linear":
        manifold, objective = M, LinearCost(rng.uniform(size=(4, 5)))
    elif kind == "gw":
        manifold, objective = M, GromovFrobenius(rng.uniform(size=(4, 4)), rng.uniform(size=(5, 5)))
    elif kind == "robust":
        manifold, objective = M, RobustMaxCost(rng.uniform(size=(3, 4, 5)), temperature=0.1)
    else:
        data = random_coot(rng, 4, 5, 2, 3, mu1=M.mu1, mu2=M.mu2)
        features = make_manifold(data.nu1, data.nu2, TIGHT_SINKHORN)
        manifold, objective = make_product_manifold([M, features]), CootSquare(data)
    for _ in range(5):
        point = manifold.random_point(rng)
        xi = manifold.random_tangent(point, rng)
        xi = manifold.lincomb(1.0 / manifold.norm(point, xi), xi)
        slope = loglog_slope(TAYLOR_STEPS, taylor_remainders(manifold, objective, point, xi))
        assert slope >= 1.9
