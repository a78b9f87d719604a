from typing import Iterator

import numpy as np

from ..manifold import make_manifold
from ..objectives import CootData, CootSquare
from ..sinkhorn import entropic_lmo
from ..solvers import SolveResult, SolverListener, SolveStatus
from ._base import BaselineRun, FwConfig, max_move


def entropy_term(plan: np.ndarray) -> float:
    """``sum P log P`` over the positive entries."""
    positive = plan[plan > 0]
    return float(np.sum(positive * np.log(positive)))


def coot_surrogate(data: CootData, G1: np.ndarray, G2: np.ndarray, epsilon: float) -> float:
    """COOT cost plus ``epsilon`` times the negative entropies of both couplings.

    Each half-sweep of :func:`coot_am` exactly minimizes this in one block.
    """
    return CootSquare(data).cost((G1, G2)) + epsilon * (entropy_term(G1) + entropy_term(G2))


def coot_am_half_sweeps(
    data: CootData,
    epsilon: float,
    x0: tuple[np.ndarray, np.ndarray] | None = None,
    cfg: FwConfig | None = None,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(G1, G2)`` after every block update, sample block first."""
    cfg = cfg or FwConfig(epsilon=epsilon)
    if x0 is None:
        G1 = np.outer(data.mu1.weights, data.mu2.weights)
        G2 = np.outer(data.nu1.weights, data.nu2.weights)
    else:
        G1, G2 = (np.asarray(x, dtype=float) for x in x0)
    while True:
        G1 = entropic_lmo(data.sample_cost(G2), data.mu1, data.mu2, epsilon, cfg.sinkhorn)
        yield G1, G2
        G2 = entropic_lmo(data.feature_cost(G1), data.nu1, data.nu2, epsilon, cfg.sinkhorn)
        yield G1, G2


def coot_am(
    data: CootData,
    epsilon: float | None = None,
    cfg: FwConfig | None = None,
    x0: tuple[np.ndarray, np.ndarray] | None = None,
    listeners: SolverListener | list | None = None,
) -> SolveResult:
    """Alternate minimization for COOT.

    With the feature coupling fixed, the sample coupling is the entropic
    oracle of ``M1 = sum_kl (X_ik - Z_jl)^2 G2_kl``; then symmetrically for
    the feature coupling. Stops when a full sweep moves both couplings by at
    most ``move_tol``. The trace reports the unregularized COOT cost.
    """
    cfg = cfg or FwConfig()
    if epsilon is not None:
        cfg = cfg.model_copy(update={"epsilon": epsilon})
    objective = CootSquare(data)
    samples = make_manifold(data.mu1, data.mu2, cfg.sinkhorn)
    features = make_manifold(data.nu1, data.nu2, cfg.sinkhorn)
    run = BaselineRun("am", cfg, listeners)

    sweeps = coot_am_half_sweeps(data, cfg.epsilon, x0, cfg)
    point = (
        (samples.product_coupling(), features.product_coupling())
        if x0 is None
        else tuple(np.asarray(x, dtype=float) for x in x0)
    )
    run.check_point(samples, point[0])
    run.check_point(features, point[1])
    run.start(point, objective.cost(point))
    while True:
        status = run.out_of_budget()
        if status is not None:
            break
        next(sweeps)
        new = next(sweeps)
        run.check_point(samples, new[0])
        run.check_point(features, new[1])
        moved = max_move(point, new)
        point = new
        run.record(point, objective.cost(point))
        if moved <= cfg.move_tol:
            status = SolveStatus.CONVERGED
            break
    return run.finish(point, status)
