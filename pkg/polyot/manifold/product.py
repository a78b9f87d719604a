from typing import Sequence

import numpy as np

from ..exceptions import ShapeMismatchException, ValidationException
from ..sinkhorn import SinkhornConfig, sinkhorn_scale_log_batched
from ._base import BaseManifold
from .coupling import CouplingManifold


class ProductManifold(BaseManifold):
    """Cartesian product of coupling manifolds with the summed Fisher metric.

    Points and tangent vectors are tuples with one array per component. When all
    components are unmasked and share marginals the retraction is batched across
    copies on a ``(k, m, n)`` stack; every other operation runs componentwise.
    """

    def __init__(self, components: Sequence[CouplingManifold]):
        components = tuple(components)
        if not components:
            raise ValidationException("a product manifold needs at least one component")
        self.components = components
        self.copies = len(components)
        first = components[0]
        self.homogeneous = self.copies > 1 and all(
            c.support is None
            and c.mu1 == first.mu1
            and c.mu2 == first.mu2
            and c.sinkhorn == first.sinkhorn
            for c in components
        )

    def __repr__(self) -> str:
        return f"ProductManifold({', '.join(map(repr, self.components))})"

    def __getitem__(self, i: int) -> CouplingManifold:
        return self.components[i]

    def __len__(self) -> int:
        return self.copies

    @property
    def dim(self) -> int:
        return sum(c.dim for c in self.components)

    @property
    def shapes(self) -> tuple[tuple[int, int], ...]:
        return tuple(c.shape for c in self.components)

    def _check_arity(self, *tuples):
        for t in tuples:
            if not isinstance(t, (tuple, list)) or len(t) != self.copies:
                got = len(t) if isinstance(t, (tuple, list)) else type(t).__name__
                raise ShapeMismatchException(
                    f"expected a {self.copies}-tuple of matrices, got {got}",
                    {"expected": self.copies, "got": str(got)},
                )

    def _map(self, method: str, *tuples, **kwargs) -> tuple:
        self._check_arity(*tuples)
        return tuple(
            getattr(c, method)(*args, **kwargs) for c, *args in zip(self.components, *tuples)
        )

    def metric(self, point, eta, xi) -> float:
        self._check_arity(point, eta, xi)
        if self.copies == 1:
            return self.components[0].metric(point[0], eta[0], xi[0])
        return float(sum(c.metric(*args) for c, *args in zip(self.components, point, eta, xi)))

    inner = metric

    def project(self, point, ambient) -> tuple:
        return self._map("project", point, ambient)

    project_tangent = project

    def retract(self, point, xi, cfg: SinkhornConfig | None = None) -> tuple:
        self._check_arity(point, xi)
        cfg = cfg or self.components[0].sinkhorn
        if not self.homogeneous or not cfg.log_domain:
            return tuple(c.retract(g, x, cfg) for c, g, x in zip(self.components, point, xi))
        # the overflow guard and kernel construction run per slice; scaling is batched
        base = self.components[0]
        log_kernels = np.stack(
            [c.retraction_log_kernel(g, x, cfg) for c, g, x in zip(self.components, point, xi)]
        )
        plans = sinkhorn_scale_log_batched(log_kernels, base.mu1, base.mu2, cfg)
        return tuple(c.check_interior(p) for c, p in zip(self.components, plans))

    def egrad_to_rgrad(self, point, egrad) -> tuple:
        return self._map("egrad_to_rgrad", point, egrad)

    def ehess_to_rhess(self, point, egrad, ehess_xi, xi) -> tuple:
        return self._map("ehess_to_rhess", point, egrad, ehess_xi, xi)

    def dgrad(self, point, egrad, ehess_xi, xi, normal_part: bool = True) -> tuple:
        return self._map("dgrad", point, egrad, ehess_xi, xi, normal_part=normal_part)

    def transport(self, point, new_point, xi) -> tuple:
        return self._map("transport", point, new_point, xi)

    def product_coupling(self) -> tuple:
        return tuple(c.product_coupling() for c in self.components)

    def random_point(self, rng: np.random.Generator, scale: float = 0.1) -> tuple:
        return tuple(c.random_point(rng, scale) for c in self.components)

    def random_tangent(self, point, rng: np.random.Generator) -> tuple:
        self._check_arity(point)
        return tuple(c.random_tangent(g, rng) for c, g in zip(self.components, point))

    def zero_vector(self, point) -> tuple:
        return self._map("zero_vector", point)

    def lincomb(self, a: float, xi, b: float = 0.0, eta=None) -> tuple:
        if eta is None:
            self._check_arity(xi)
            return tuple(c.lincomb(a, x) for c, x in zip(self.components, xi))
        self._check_arity(xi, eta)
        return tuple(c.lincomb(a, x, b, e) for c, x, e in zip(self.components, xi, eta))

    def point_residual(self, point) -> float:
        if not isinstance(point, (tuple, list)) or len(point) != self.copies:
            return np.inf
        return max(c.point_residual(g) for c, g in zip(self.components, point))

    def tangent_residual(self, xi) -> float:
        self._check_arity(xi)
        return max(c.tangent_residual(x) for c, x in zip(self.components, xi))
