from typing import Sequence

import numpy as np

from ..exceptions import ValidationException
from ..marginal import MASS_TOL, MarginalLike, as_marginal, as_weights
from ..sinkhorn import SinkhornConfig
from ._base import ProjectionConfig
from .coupling import CouplingManifold
from .product import ProductManifold
from .support import SupportMask


def _check_mass(mu1: MarginalLike, mu2: MarginalLike):
    s1 = float(np.sum(as_weights(mu1)))
    s2 = float(np.sum(as_weights(mu2)))
    if abs(s1 - s2) > MASS_TOL:
        raise ValidationException(
            f"marginals carry different mass: sum(mu1)={s1!r}, sum(mu2)={s2!r}",
            {"sum_mu1": s1, "sum_mu2": s2},
        )


def make_manifold(
    mu1: MarginalLike,
    mu2: MarginalLike,
    sinkhorn: SinkhornConfig | None = None,
    projection: ProjectionConfig | None = None,
) -> CouplingManifold:
    _check_mass(mu1, mu2)
    return CouplingManifold(as_marginal(mu1), as_marginal(mu2), None, sinkhorn, projection)


def make_masked_manifold(
    mu1: MarginalLike,
    mu2: MarginalLike,
    mask: SupportMask | np.ndarray,
    sinkhorn: SinkhornConfig | None = None,
    projection: ProjectionConfig | None = None,
) -> CouplingManifold:
    """Coupling manifold restricted to the allowed entries of ``mask``.

    A mask without zeros gives back the plain manifold.
    """
    _check_mass(mu1, mu2)
    if not isinstance(mask, SupportMask):
        mask = SupportMask(allowed=mask)
    return CouplingManifold(as_marginal(mu1), as_marginal(mu2), mask, sinkhorn, projection)


def make_product_manifold(
    components: Sequence[CouplingManifold] | CouplingManifold, copies: int | None = None
) -> ProductManifold:
    """``make_product_manifold([M1, M2])`` or ``make_product_manifold(M, copies=k)``."""
    if isinstance(components, CouplingManifold):
        copies = 1 if copies is None else copies
        if copies < 1:
            raise ValidationException("copies must be >= 1", {"copies": copies})
        components = [components] * copies
    elif copies is not None and copies != len(components):
        raise ValidationException(
            "copies does not match the number of components",
            {"copies": copies, "components": len(components)},
        )
    return ProductManifold(components)


def as_product(manifold: CouplingManifold | ProductManifold) -> ProductManifold:
    if isinstance(manifold, ProductManifold):
        return manifold
    return ProductManifold([manifold])
