import numpy as np
import pydantic
import pytest

from polyot.baselines import (
    FwConfig,
    coot_am,
    coot_am_half_sweeps,
    coot_surrogate,
    entropy_term,
    exact_step,
    frank_wolfe,
    fw_fixed_step,
)
from polyot.diagnostics import TIGHT_SINKHORN
from polyot.exceptions import ConfigException, ValidationException
from polyot.objectives import (
    CootData,
    CootSquare,
    GromovFrobenius,
    LinearCost,
    QuadraticPenalty,
    RobustMaxCost,
)
from polyot.sinkhorn import entropic_lmo
from polyot.solvers import SolveStatus
from polyot.utils import sample_simplex


def random_data(rng, m, n, d1, d2) -> CootData:
    return CootData(
        X=rng.uniform(size=(m, d1)),
        Z=rng.uniform(size=(n, d2)),
        mu1=sample_simplex(rng, m),
        mu2=sample_simplex(rng, n),
        nu1=sample_simplex(rng, d1),
        nu2=sample_simplex(rng, d2),
    )


def symmetric(rng, k):
    A = rng.uniform(size=(k, k))
    return (A + A.T) / 2


def test_config_validation():
    with pytest.raises(ConfigException):
        FwConfig(epsilon=0.0)
    with pytest.raises(ConfigException):
        FwConfig(max_iter=-1)
    with pytest.raises(pydantic.ValidationError):
        FwConfig(steps="armijo")


def test_linear_open_loop_lands_on_the_oracle(rng):
    mu1, mu2 = sample_simplex(rng, 3), sample_simplex(rng, 4)
    C = rng.uniform(size=(3, 4))
    cfg = FwConfig(epsilon=0.1, sinkhorn=TIGHT_SINKHORN)
    result = frank_wolfe(LinearCost(C), mu1, mu2, cfg=cfg)
    assert result.status == SolveStatus.CONVERGED
    assert result.n_iter == 2
    assert result.trace[1].step_size == 1.0
    expected = entropic_lmo(C, mu1, mu2, 0.1, TIGHT_SINKHORN)
    np.testing.assert_allclose(result.plan, expected, rtol=0, atol=1e-15)


def test_zero_gradient_keeps_the_product_coupling(rng):
    mu1, mu2 = sample_simplex(rng, 3), sample_simplex(rng, 5)
    result = frank_wolfe(QuadraticPenalty(0.0), mu1, mu2)
    assert result.status == SolveStatus.CONVERGED
    np.testing.assert_allclose(result.plan, np.outer(mu1, mu2), atol=1e-12)


def test_exact_step_never_increases_a_quadratic(rng):
    mu1, mu2 = sample_simplex(rng, 4), sample_simplex(rng, 5)
    objective = GromovFrobenius(symmetric(rng, 4), symmetric(rng, 5))
    cfg = FwConfig(epsilon=0.05, steps="exact", max_iter=50)
    result = frank_wolfe(objective, mu1, mu2, cfg=cfg)
    costs = [r.cost for r in result.trace]
    assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))
    assert all(0.0 <= r.step_size <= 1.0 for r in result.trace[1:])


def test_exact_step_closed_form():
    objective = QuadraticPenalty(2.0)
    gamma = np.full((2, 2), 0.25)
    direction = np.array([[0.25, -0.25], [-0.25, 0.25]])
    # f(gamma + s d) = sum (gamma + s d)^2 has its minimum at s = 0 here
    assert exact_step(objective, gamma, objective.egrad(gamma)[0], direction) == 0.0
    concave = -1.0 * objective
    assert exact_step(concave, gamma, concave.egrad(gamma)[0], direction) == 1.0


def test_exact_step_falls_back_to_open_loop(rng):
    mu1, mu2 = sample_simplex(rng, 3), sample_simplex(rng, 3)
    objective = RobustMaxCost(rng.uniform(size=(2, 3, 3)), temperature=0.1)
    result = frank_wolfe(objective, mu1, mu2, cfg=FwConfig(steps="exact", max_iter=10))
    for record in result.trace[1:]:
        assert record.step_size == pytest.approx(2.0 / (record.iter + 1))


def test_unit_steps_on_a_linear_cost(rng):
    mu1, mu2 = sample_simplex(rng, 3), sample_simplex(rng, 4)
    result = fw_fixed_step(LinearCost(rng.uniform(size=(3, 4))), mu1, mu2)
    assert result.solver == "fw1"
    assert result.status == SolveStatus.CONVERGED
    assert result.n_iter <= 2
    assert all(r.grad_norm is None and r.step_size is None for r in result.trace)


def test_unit_steps_reach_a_fixed_point_on_gw(rng):
    mu1, mu2 = sample_simplex(rng, 4), sample_simplex(rng, 4)
    objective = GromovFrobenius(0.1 * symmetric(rng, 4), 0.1 * symmetric(rng, 4))
    cfg = FwConfig(epsilon=1.0, sinkhorn=TIGHT_SINKHORN)
    result = fw_fixed_step(objective, mu1, mu2, cfg=cfg)
    assert result.status == SolveStatus.CONVERGED
    mapped = entropic_lmo(objective.egrad(result.plan)[0], mu1, mu2, 1.0, TIGHT_SINKHORN)
    assert np.abs(mapped - result.plan).max() <= 1e-9


def test_frank_wolfe_needs_one_coupling(rng):
    data = random_data(rng, 2, 2, 2, 2)
    with pytest.raises(ValidationException):
        frank_wolfe(CootSquare(data), data.mu1, data.mu2)


def test_entropy_term():
    assert entropy_term(np.full((2, 2), 0.25)) == pytest.approx(np.log(0.25))
    assert entropy_term(np.array([[0.5, 0.0], [0.0, 0.5]])) == pytest.approx(np.log(0.5))


def test_single_feature_reduces_to_entropic_transport(rng):
    data = random_data(rng, 3, 4, 1, 1)
    cfg = FwConfig(sinkhorn=TIGHT_SINKHORN)
    result = coot_am(data, epsilon=0.2, cfg=cfg)
    assert result.status == SolveStatus.CONVERGED
    C = (data.X - data.Z.T) ** 2
    expected = entropic_lmo(C, data.mu1, data.mu2, 0.2, TIGHT_SINKHORN)
    np.testing.assert_allclose(result.point[0], expected, atol=1e-12)
    np.testing.assert_allclose(result.point[1], [[1.0]])
    assert result.cost == pytest.approx(LinearCost(C).cost(expected), rel=1e-10)


def test_half_sweeps_decrease_the_surrogate(rng):
    data = random_data(rng, 4, 5, 3, 2)
    epsilon = 0.05
    sweeps = coot_am_half_sweeps(data, epsilon, cfg=FwConfig(epsilon=epsilon))
    values = [
        coot_surrogate(
            data,
            np.outer(data.mu1.weights, data.mu2.weights),
            np.outer(data.nu1.weights, data.nu2.weights),
            epsilon,
        )
    ]
    for _ in range(20):
        G1, G2 = next(sweeps)
        values.append(coot_surrogate(data, G1, G2, epsilon))
    assert all(b <= a + 1e-7 for a, b in zip(values, values[1:]))


def test_matched_domains_give_a_zero_diagonal(rng):
    X = rng.uniform(size=(4, 3))
    data = CootData.uniform(X, X)
    M1 = data.sample_cost(np.eye(3) / 3)
    np.testing.assert_allclose(np.diag(M1), 0.0, atol=1e-14)
    off = M1[~np.eye(4, dtype=bool)]
    assert off.min() > 0


def test_am_trace_reports_cost_only(rng):
    data = random_data(rng, 3, 3, 2, 2)
    result = coot_am(data, epsilon=0.1, cfg=FwConfig(max_iter=5))
    assert result.solver == "am"
    assert len(result.point) == 2
    assert all(r.grad_norm is None and r.step_size is None for r in result.trace)
    for record in result.trace:
        assert record.cost >= -1e-12
