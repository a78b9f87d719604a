import numpy as np
import pytest

from polyot.diagnostics import TIGHT_SINKHORN
from polyot.exceptions import (
    ShapeMismatchException,
    SupportRankException,
    SupportStructureException,
    TotalSupportException,
    ValidationException,
)
from polyot.manifold import (
    ProductManifold,
    SupportMask,
    make_manifold,
    make_masked_manifold,
    make_product_manifold,
    support_components,
    total_support_check,
)
from polyot.objectives import LinearCost
from polyot.solvers import SolverConfig, solve_rgd
from polyot.utils import sample_simplex

BLOCKS = np.kron(np.eye(2, dtype=bool), np.ones((2, 2), dtype=bool))


def block_mask(sizes: list[int]) -> np.ndarray:
    n = sum(sizes)
    allowed = np.zeros((n, n), dtype=bool)
    start = 0
    for s in sizes:
        allowed[start : start + s, start : start + s] = True
        start += s
    return allowed


def test_total_support_of_full_and_block_masks():
    assert total_support_check(np.ones((3, 3), dtype=bool))
    assert total_support_check(np.ones((2, 5), dtype=bool))
    assert total_support_check(BLOCKS)
    assert total_support_check(block_mask([3, 1, 2]))


def test_total_support_names_the_violating_entry():
    verdict = total_support_check(np.array([[1, 1], [0, 1]], dtype=bool))
    assert not verdict
    assert verdict.entry == (0, 1)


def test_total_support_on_rectangular_patterns():
    assert total_support_check(np.array([[1, 1, 0], [0, 1, 1]], dtype=bool))
    # half the row mass cannot fit through a third of the columns
    assert not total_support_check(np.array([[1, 0, 0], [1, 1, 1]], dtype=bool))


def test_sinkhorn_probe_path():
    assert total_support_check(np.ones((3, 3), dtype=bool), exact_max_side=1)
    assert total_support_check(BLOCKS, exact_max_side=1)
    assert not total_support_check(np.array([[1, 1], [0, 1]], dtype=bool), exact_max_side=1)


def test_mask_rejects_empty_row():
    with pytest.raises(SupportStructureException) as info:
        SupportMask(allowed=[[1, 1], [0, 0]])
    assert info.value.context["rows"] == [1]


def test_mask_rejects_missing_total_support():
    with pytest.raises(TotalSupportException) as info:
        SupportMask(allowed=[[1, 1], [0, 1]])
    assert info.value.context["entry"] == [0, 1]


def test_mask_rejects_isolated_feasible_point():
    with pytest.raises(SupportRankException):
        SupportMask(allowed=np.eye(2))


def test_mask_text_round_trip():
    mask = SupportMask.from_text("1100\n1100\n0011\n0011\n")
    np.testing.assert_array_equal(mask.allowed, BLOCKS)
    assert mask.components == 2
    assert SupportMask.from_text(mask.to_text()).allowed.tolist() == BLOCKS.tolist()


@pytest.mark.parametrize("text", ["", "10\n1\n", "1x\n11\n"])
def test_mask_text_rejects_malformed_grids(text):
    with pytest.raises(SupportStructureException):
        SupportMask.from_text(text)


def test_support_components():
    assert support_components(np.ones((3, 4), dtype=bool)) == 1
    assert support_components(block_mask([2, 3, 1])) == 3


def test_full_mask_is_the_plain_manifold(rng):
    mu1, mu2 = sample_simplex(rng, 3), sample_simplex(rng, 4)
    plain = make_manifold(mu1, mu2)
    masked = make_masked_manifold(mu1, mu2, np.ones((3, 4), dtype=bool))
    assert masked.support is None
    gamma = plain.random_point(np.random.default_rng(1))
    np.testing.assert_array_equal(masked.random_point(np.random.default_rng(1)), gamma)
    Z = rng.standard_normal((3, 4))
    xi = plain.project(gamma, Z)
    np.testing.assert_array_equal(masked.project(gamma, Z), xi)
    np.testing.assert_array_equal(masked.retract(gamma, 0.1 * xi), plain.retract(gamma, 0.1 * xi))
    np.testing.assert_array_equal(masked.egrad_to_rgrad(gamma, Z), plain.egrad_to_rgrad(gamma, Z))
    assert masked.metric(gamma, xi, xi) == plain.metric(gamma, xi, xi)


def test_mask_shape_must_match_marginals():
    with pytest.raises(ShapeMismatchException):
        make_masked_manifold([0.5, 0.5], [0.5, 0.5], BLOCKS)


def test_masked_operations_stay_off_support(rng):
    mu = np.full(4, 0.25)
    M = make_masked_manifold(mu, mu, BLOCKS, TIGHT_SINKHORN)
    assert M.dim == 2
    off = ~BLOCKS
    gamma = M.random_point(rng)
    assert np.all(gamma[off] == 0.0) and np.all(gamma[BLOCKS] > 0)
    assert M.point_residual(gamma) <= 1e-12
    Z = rng.standard_normal((4, 4))
    xi = M.project(gamma, Z)
    assert np.all(xi[off] == 0.0)
    assert M.tangent_residual(xi) <= 1e-10
    new = M.retract(gamma, 0.2 * xi)
    assert np.all(new[off] == 0.0)
    assert M.point_residual(new) <= 1e-12
    grad = M.egrad_to_rgrad(gamma, Z)
    assert np.all(grad[off] == 0.0)
    hess = M.ehess_to_rhess(gamma, Z, np.zeros((4, 4)), xi)
    assert np.all(hess[off] == 0.0)
    assert np.all(M.product_coupling()[off] == 0.0)


@pytest.mark.parametrize("seed", range(3))
def test_block_diagonal_mask_decomposes_into_blocks(seed):
    rng = np.random.default_rng(seed)
    mu = np.full(4, 0.25)
    M = make_masked_manifold(mu, mu, BLOCKS, TIGHT_SINKHORN)
    block = make_manifold([0.5, 0.5], [0.5, 0.5], TIGHT_SINKHORN)
    gamma = M.random_point(rng)
    Z = rng.standard_normal((4, 4))
    xi = M.project(gamma, Z)
    stepped = M.retract(gamma, 0.3 * xi)
    for s in (slice(0, 2), slice(2, 4)):
        # each block carries half the mass
        g = 2.0 * gamma[s, s]
        np.testing.assert_allclose(xi[s, s], block.project(g, Z[s, s]), atol=1e-10, rtol=0)
        expected = 0.5 * block.retract(g, 2.0 * 0.3 * xi[s, s])
        np.testing.assert_allclose(stepped[s, s], expected, atol=1e-10, rtol=0)


def test_block_diagonal_random_sizes(rng):
    sizes = [3, 2, 3]
    n = sum(sizes)
    mu = np.full(n, 1.0 / n)
    M = make_masked_manifold(mu, mu, block_mask(sizes), TIGHT_SINKHORN)
    gamma = M.random_point(rng)
    xi = M.random_tangent(gamma, rng)
    start = 0
    for s in sizes:
        sl = slice(start, start + s)
        w = np.full(s, 1.0 / s)
        block = make_manifold(w, w, TIGHT_SINKHORN)
        scale = n / s
        g = scale * gamma[sl, sl]
        np.testing.assert_allclose(
            M.retract(gamma, 0.1 * xi)[sl, sl],
            block.retract(g, scale * 0.1 * xi[sl, sl]) / scale,
            atol=1e-10,
            rtol=0,
        )
        start += s


def test_masked_solve_keeps_pattern(rng):
    mu = np.full(4, 0.25)
    M = make_masked_manifold(mu, mu, BLOCKS)
    objective = LinearCost(rng.uniform(size=(4, 4)))
    result = solve_rgd(M, objective, cfg=SolverConfig(max_iter=20), seed=0)
    assert np.all(result.plan[~BLOCKS] == 0.0)
    assert M.point_residual(result.plan) <= 1e-8


def test_product_with_one_copy_is_bitwise_identical(manifold_4x5, rng):
    M = manifold_4x5
    P = make_product_manifold([M])
    gamma = M.random_point(rng)
    Z, E = rng.standard_normal(M.shape), rng.standard_normal(M.shape)
    xi = M.project(gamma, Z)
    np.testing.assert_array_equal(P.project((gamma,), (Z,))[0], xi)
    assert P.metric((gamma,), (xi,), (xi,)) == M.metric(gamma, xi, xi)
    np.testing.assert_array_equal(P.retract((gamma,), (0.1 * xi,))[0], M.retract(gamma, 0.1 * xi))
    np.testing.assert_array_equal(P.egrad_to_rgrad((gamma,), (E,))[0], M.egrad_to_rgrad(gamma, E))
    np.testing.assert_array_equal(
        P.ehess_to_rhess((gamma,), (E,), (Z,), (xi,))[0], M.ehess_to_rhess(gamma, E, Z, xi)
    )
    assert P.dim == M.dim
    assert not P.homogeneous


def test_product_metric_is_additive(uniform_2x2, quarter, checker):
    P = make_product_manifold(uniform_2x2, copies=3)
    assert P.homogeneous
    point = (quarter,) * 3
    zero = np.zeros((2, 2))
    assert P.metric(point, (checker, zero, zero), (checker, zero, zero)) == pytest.approx(16.0)
    assert P.metric(point, (checker,) * 3, (checker,) * 3) == pytest.approx(48.0)


def test_batched_retraction_matches_individual(rng):
    M = make_manifold(sample_simplex(rng, 3), sample_simplex(rng, 4))
    P = make_product_manifold(M, copies=2)
    point = P.random_point(rng)
    xi = P.random_tangent(point, rng)
    batched = P.retract(point, P.lincomb(0.5, xi))
    for g, x, b in zip(point, xi, batched):
        assert np.abs(M.retract(g, 0.5 * x) - b).max() <= 1e-12


def test_product_components_commute(rng):
    A = make_manifold(sample_simplex(rng, 2), sample_simplex(rng, 3))
    B = make_manifold(sample_simplex(rng, 4), sample_simplex(rng, 2))
    P = make_product_manifold([A, B])
    assert not P.homogeneous
    assert P.shapes == ((2, 3), (4, 2))
    point = P.random_point(rng)
    Z = (rng.standard_normal((2, 3)), rng.standard_normal((4, 2)))
    projected = P.project(point, Z)
    for c, g, z, p in zip(P, point, Z, projected):
        np.testing.assert_array_equal(c.project(g, z), p)
    stepped = P.retract(point, P.lincomb(0.2, projected))
    for c, g, p, s in zip(P, point, projected, stepped):
        np.testing.assert_array_equal(c.retract(g, 0.2 * p), s)


def test_product_arity_errors(uniform_2x2, quarter):
    P = make_product_manifold(uniform_2x2, copies=2)
    with pytest.raises(ShapeMismatchException):
        P.metric((quarter,), (quarter,), (quarter,))
    with pytest.raises(ShapeMismatchException):
        P.project(quarter, quarter)
    assert P.point_residual((quarter,)) == np.inf
    with pytest.raises(ValidationException):
        make_product_manifold(uniform_2x2, copies=0)
    with pytest.raises(ValidationException):
        ProductManifold([])
