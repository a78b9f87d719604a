"""Numerical self-checks of the coupling geometry and the objectives.

Every check returns a :class:`CheckResult` carrying the measured value and
its threshold; :func:`run_checks` runs the whole battery on one random
instance.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from loguru import logger

from .manifold import (
    CouplingManifold,
    ProductManifold,
    as_product,
    make_manifold,
    make_product_manifold,
)
from .objectives import (
    CootData,
    CootSquare,
    GromovFrobenius,
    LinearCost,
    Objective,
    RobustMaxCost,
    SquaredDistance,
    gw_reference_cost,
)
from .sinkhorn import SinkhornConfig
from .solvers import SolverConfig, SolveStatus, solve_rcg
from .utils import as_generator, sample_simplex

TAYLOR_STEPS = np.logspace(-5, -1, 9)
TIGHT_SINKHORN = SinkhornConfig(tol=1e-13, max_iter=200000)


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    skipped: bool = False
    higher_is_better: bool = False

    @property
    def verdict(self) -> str:
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"


def _upper(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name, float(value), threshold, bool(value <= threshold))


def _lower(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name, float(value), threshold, bool(value >= threshold), higher_is_better=True)


def _as_tuple(x) -> tuple:
    return x if isinstance(x, tuple) else (x,)


def _unit(manifold, point, xi):
    return manifold.lincomb(1.0 / manifold.norm(point, xi), xi)


def taylor_remainders(
    manifold: CouplingManifold | ProductManifold,
    objective: Objective,
    point,
    xi,
    steps: np.ndarray = TAYLOR_STEPS,
) -> np.ndarray:
    """``|f(R(t xi)) - f(x) - t g(grad, xi)|`` for each ``t`` in ``steps``."""
    manifold = as_product(manifold)
    point, xi = _as_tuple(point), _as_tuple(xi)
    f0 = objective.cost(point)
    grad = manifold.egrad_to_rgrad(point, objective.egrad(point))
    slope = manifold.metric(point, grad, xi)
    return np.array(
        [
            abs(objective.cost(manifold.retract(point, manifold.lincomb(t, xi))) - f0 - t * slope)
            for t in steps
        ]
    )


def loglog_slope(steps: np.ndarray, values: np.ndarray) -> float:
    values = np.maximum(values, np.finfo(float).tiny)
    return float(np.polyfit(np.log10(steps), np.log10(values), 1)[0])


def hessian_fd_error(
    manifold: CouplingManifold | ProductManifold,
    objective: Objective,
    point,
    xi,
    t: float = 1e-5,
    fault: float = 0.0,
) -> float:
    """Relative gap between the Riemannian Hessian and its finite-difference estimate.

    The estimate is ``Proj(dG - grad * xi / (2 gamma))`` where ``dG`` is the
    central difference of the Riemannian gradient along ``t -> R(t xi)``.
    ``fault`` scales the analytic Hessian by ``1 + fault``.
    """
    M = as_product(manifold)
    point, xi = _as_tuple(point), _as_tuple(xi)
    egrad = objective.egrad(point)
    grad = M.egrad_to_rgrad(point, egrad)
    hess = M.lincomb(1.0 + fault, M.ehess_to_rhess(point, egrad, objective.ehess(point, xi), xi))

    def rgrad_at(s):
        x = M.retract(point, M.lincomb(s, xi))
        return M.egrad_to_rgrad(x, objective.egrad(x))

    dG = M.lincomb(0.5 / t, rgrad_at(t), -0.5 / t, rgrad_at(-t))
    correction = tuple(d - 0.5 * g * x / p for d, g, x, p in zip(dG, grad, xi, point))
    estimate = M.project(point, correction)
    diff = M.lincomb(1.0, hess, -1.0, estimate)
    return M.norm(point, diff) / max(M.norm(point, estimate), np.finfo(float).tiny)


def dgrad_fd_error(
    manifold: CouplingManifold, objective: Objective, gamma, xi, t: float = 1e-6
) -> float:
    """Full directional derivative of the Riemannian gradient against a straight-line difference."""

    def rgrad_at(s):
        x = gamma + s * xi
        return manifold.egrad_to_rgrad(x, objective.egrad(x)[0])

    fd = (rgrad_at(t) - rgrad_at(-t)) / (2 * t)
    exact = manifold.dgrad(gamma, objective.egrad(gamma)[0], objective.ehess(gamma, xi)[0], xi)
    return float(np.linalg.norm(exact - fd) / max(np.linalg.norm(fd), np.finfo(float).tiny))


def hessian_asymmetry(manifold, objective: Objective, point, xi, eta) -> float:
    M = as_product(manifold)
    point, xi, eta = _as_tuple(point), _as_tuple(xi), _as_tuple(eta)
    egrad = objective.egrad(point)
    h_xi = M.ehess_to_rhess(point, egrad, objective.ehess(point, xi), xi)
    h_eta = M.ehess_to_rhess(point, egrad, objective.ehess(point, eta), eta)
    a, b = M.metric(point, h_xi, eta), M.metric(point, xi, h_eta)
    return abs(a - b) / max(abs(a), abs(b), np.finfo(float).tiny)


@dataclass
class CheckInstance:
    manifold: CouplingManifold
    rng: np.random.Generator
    objectives: dict[str, tuple[CouplingManifold | ProductManifold, Objective]]


def build_instance(m: int, n: int, seed: int) -> CheckInstance:
    rng = as_generator(seed)
    mu1, mu2 = sample_simplex(rng, m), sample_simplex(rng, n)
    manifold = make_manifold(mu1, mu2, TIGHT_SINKHORN)
    S1, S2 = rng.uniform(size=(m, m)), rng.uniform(size=(n, n))
    d1, d2 = min(m, 3), min(n, 3)
    data = CootData(
        X=rng.uniform(size=(m, d1)),
        Z=rng.uniform(size=(n, d2)),
        mu1=mu1,
        mu2=mu2,
        nu1=sample_simplex(rng, d1),
        nu2=sample_simplex(rng, d2),
    )
    features = make_manifold(data.nu1, data.nu2, TIGHT_SINKHORN)
    objectives = {
        "linear": (manifold, LinearCost(rng.uniform(size=(m, n)))),
        "gw": (manifold, GromovFrobenius((S1 + S1.T) / 2, (S2 + S2.T) / 2)),
        "coot": (make_product_manifold([manifold, features]), CootSquare(data)),
        "robust": (manifold, RobustMaxCost(rng.uniform(size=(3, m, n)), temperature=0.1)),
    }
    return CheckInstance(manifold, rng, objectives)


def _geometry_checks(inst: CheckInstance) -> list[CheckResult]:
    M, rng = inst.manifold, inst.rng
    gamma = M.random_point(rng)
    Z = rng.standard_normal(M.shape)
    P = M.project(gamma, Z)
    a, b = rng.standard_normal(M.shape[0]), rng.standard_normal(M.shape[1])
    N = (a[:, None] + b[None, :]) * gamma
    orthogonality = abs(M.metric(gamma, P, N)) / (M.norm(gamma, P) * M.norm(gamma, N))
    E, xi = rng.standard_normal(M.shape), M.random_tangent(gamma, rng)
    lhs = M.metric(gamma, M.egrad_to_rgrad(gamma, E), xi)
    rhs = float(np.sum(E * xi))
    zero_step = M.retract(gamma, M.zero_vector(gamma))
    return [
        _upper("projection_idempotence", np.abs(M.project(gamma, P) - P).max(), 1e-10),
        _upper("tangency", M.tangent_residual(P), 1e-10),
        _upper("normal_orthogonality", orthogonality, 1e-10),
        _upper(
            "gauge_invariance",
            np.abs(M.project(gamma, Z, gauge="beta") - M.project(gamma, Z, gauge="alpha")).max(),
            1e-12,
        ),
        _upper("retraction_zero_step", np.abs(zero_step - gamma).max(), 1e-8),
        _upper(
            "gradient_identity",
            abs(lhs - rhs) / (np.linalg.norm(E) * np.linalg.norm(xi)),
            1e-10,
        ),
    ]


def _objective_checks(inst: CheckInstance, fault: float) -> list[CheckResult]:
    rng = inst.rng
    results = []
    for name, (manifold, objective) in inst.objectives.items():
        P = as_product(manifold)
        point = P.random_point(rng)
        xi = _unit(P, point, P.random_tangent(point, rng))
        slope = loglog_slope(TAYLOR_STEPS, taylor_remainders(P, objective, point, xi))
        results.append(_lower(f"taylor_slope[{name}]", slope, 1.9))
    for name in ("linear", "gw"):
        manifold, objective = inst.objectives[name]
        P = as_product(manifold)
        point = P.random_point(rng)
        xi = _unit(P, point, P.random_tangent(point, rng))
        eta = _unit(P, point, P.random_tangent(point, rng))
        results.append(
            _upper(f"hessian_fd[{name}]", hessian_fd_error(P, objective, point, xi, fault=fault), 1e-4)
        )
        results.append(
            _upper(f"hessian_symmetry[{name}]", hessian_asymmetry(P, objective, point, xi, eta), 1e-8)
        )
        results.append(
            _upper(
                f"dgrad_fd[{name}]", dgrad_fd_error(manifold, objective, point[0], xi[0]), 1e-5
            )
        )
    return results


def _oracle_checks(seed: int) -> list[CheckResult]:
    rng = as_generator(seed)
    m, n, d1, d2 = (int(k) for k in rng.integers(2, 5, size=4))
    mu1, mu2 = sample_simplex(rng, m), sample_simplex(rng, n)
    M = make_manifold(mu1, mu2, TIGHT_SINKHORN)
    gamma = M.random_point(rng)
    S1, S2 = rng.uniform(size=(m, m)), rng.uniform(size=(n, n))
    gw = GromovFrobenius(S1, S2)
    gw_gap = abs(gw.discrepancy(gamma, mu1, mu2) - gw_reference_cost(gamma, S1, S2))
    data = CootData(
        X=rng.uniform(size=(m, d1)),
        Z=rng.uniform(size=(n, d2)),
        mu1=mu1,
        mu2=mu2,
        nu1=sample_simplex(rng, d1),
        nu2=sample_simplex(rng, d2),
    )
    coot = CootSquare(data)
    G2 = make_manifold(data.nu1, data.nu2, TIGHT_SINKHORN).random_point(rng)
    coot_gap = abs(coot.cost((gamma, G2)) - coot.reference_cost(gamma, G2))
    return [
        _upper("gw_reference", gw_gap, 1e-10),
        _upper("coot_reference", coot_gap, 1e-10),
    ]


def _cg_variant_check(inst: CheckInstance) -> CheckResult:
    M = inst.manifold
    if M.dim <= 1:
        return CheckResult("cg_variants", np.nan, 0.0, True, skipped=True)
    objective = SquaredDistance(M.product_coupling())
    x0 = M.random_point(inst.rng)
    statuses = [
        solve_rcg(M, objective, x0, SolverConfig(cg_variant=variant, max_iter=2000)).status
        for variant in ("HS", "FR")
    ]
    failures = sum(s != SolveStatus.CONVERGED for s in statuses)
    return _upper("cg_variants", failures, 0)


def run_checks(
    m: int = 4, n: int = 5, seed: int = 0, hessian_fault: float = 0.0
) -> list[CheckResult]:
    """Run the full battery at dimensions ``m x n``."""
    inst = build_instance(m, n, seed)
    results = _geometry_checks(inst)
    results += _objective_checks(inst, hessian_fault)
    results += _oracle_checks(seed)
    results.append(_cg_variant_check(inst))
    for r in results:
        log: Callable = logger.debug if r.passed else logger.warning
        log(f"check {r.name}: {r.value:.3e} ({r.verdict})")
    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'value':>12}  {'threshold':>10}  result"]
    for r in results:
        op = ">=" if r.higher_is_better else "<="
        lines.append(
            f"{r.name:<{width}}  {r.value:>12.3e}  {op}{r.threshold:>8.1e}  {r.verdict}"
        )
    return "\n".join(lines)
