from ._base import BaseManifold, ProjectionConfig
from .coupling import CouplingManifold
from .factory import as_product, make_manifold, make_masked_manifold, make_product_manifold
from .product import ProductManifold
from .support import SupportMask, SupportVerdict, support_components, total_support_check

__all__ = [
    "BaseManifold",
    "ProjectionConfig",
    "CouplingManifold",
    "ProductManifold",
    "SupportMask",
    "SupportVerdict",
    "support_components",
    "total_support_check",
    "make_manifold",
    "make_masked_manifold",
    "make_product_manifold",
    "as_product",
]
