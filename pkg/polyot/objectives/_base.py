from typing import Sequence

import numpy as np

from ..exceptions import ShapeMismatchException, ValidationException

Points = tuple[np.ndarray, ...]


def as_points(points, arity: int) -> Points:
    """Normalize a bare matrix (arity 1) or a sequence of matrices to a tuple."""
    if isinstance(points, np.ndarray):
        points = (points,)
    points = tuple(points)
    if len(points) != arity:
        raise ShapeMismatchException(
            f"objective takes {arity} coupling(s), got {len(points)}",
            {"expected": arity, "got": len(points)},
        )
    return points


class Objective:
    """Smooth function of one or more couplings.

    Subclasses implement ``_cost``, ``_egrad`` and, when ``has_hessian``,
    ``_ehess`` on tuples of arrays. ``is_quadratic`` marks objectives whose
    restriction to a line is exactly quadratic, which enables closed-form line
    searches.
    """

    arity: int = 1
    has_hessian: bool = True
    is_quadratic: bool = False

    @property
    def name(self) -> str:
        return self.__class__.__name__

    @property
    def shapes(self) -> tuple[tuple[int, int], ...] | None:
        """Coupling shapes this objective is tied to, or ``None`` if shape-agnostic."""
        return None

    def check_shapes(self, shapes: Sequence[tuple[int, int]]):
        shapes = tuple(tuple(s) for s in shapes)
        if len(shapes) != self.arity:
            raise ShapeMismatchException(
                f"{self.name} takes {self.arity} coupling(s), the manifold has {len(shapes)}",
                {"expected": self.arity, "got": len(shapes)},
            )
        own = self.shapes
        if own is not None and own != shapes:
            raise ShapeMismatchException(
                f"{self.name} expects couplings of shape {own}, got {shapes}",
                {"expected": [list(s) for s in own], "got": [list(s) for s in shapes]},
            )

    def _validate(self, points) -> Points:
        points = as_points(points, self.arity)
        own = self.shapes
        if own is not None:
            for expected, p in zip(own, points):
                if p.shape != expected:
                    raise ShapeMismatchException(
                        f"{self.name} expects a {expected} coupling, got {p.shape}",
                        {"expected": list(expected), "got": list(p.shape)},
                    )
        return points

    def cost(self, points) -> float:
        return float(self._cost(self._validate(points)))

    def egrad(self, points) -> Points:
        return tuple(self._egrad(self._validate(points)))

    def ehess(self, points, xi) -> Points:
        if not self.has_hessian:
            raise ValidationException(f"{self.name} provides no Hessian-vector product")
        return tuple(self._ehess(self._validate(points), as_points(xi, self.arity)))

    __call__ = cost

    def _cost(self, points: Points) -> float:
        raise NotImplementedError

    def _egrad(self, points: Points) -> Points:
        raise NotImplementedError

    def _ehess(self, points: Points, xi: Points) -> Points:
        raise NotImplementedError

    def __add__(self, other: "Objective") -> "Objective":
        if not isinstance(other, Objective):
            return NotImplemented
        return SumObjective([self, other])

    def __mul__(self, weight: float) -> "Objective":
        if not isinstance(weight, (int, float)):
            return NotImplemented
        return ScaledObjective(self, float(weight))

    __rmul__ = __mul__


class SumObjective(Objective):
    def __init__(self, terms: Sequence[Objective]):
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, SumObjective) else [t])
        arities = {t.arity for t in flat}
        if len(arities) != 1:
            raise ValidationException(
                "summed objectives must take the same number of couplings",
                {"arities": sorted(arities)},
            )
        self.terms = flat
        self.arity = arities.pop()
        self.has_hessian = all(t.has_hessian for t in flat)
        self.is_quadratic = all(t.is_quadratic for t in flat)

    @property
    def name(self) -> str:
        return " + ".join(t.name for t in self.terms)

    @property
    def shapes(self):
        known = {t.shapes for t in self.terms if t.shapes is not None}
        if len(known) > 1:
            raise ShapeMismatchException(
                "summed objectives disagree on coupling shapes", {"shapes": [str(s) for s in known]}
            )
        return known.pop() if known else None

    def _cost(self, points):
        return sum(t.cost(points) for t in self.terms)

    def _egrad(self, points):
        grads = [t.egrad(points) for t in self.terms]
        return tuple(sum(parts) for parts in zip(*grads))

    def _ehess(self, points, xi):
        hess = [t.ehess(points, xi) for t in self.terms]
        return tuple(sum(parts) for parts in zip(*hess))


class ScaledObjective(Objective):
    def __init__(self, base: Objective, weight: float):
        self.base = base
        self.weight = weight
        self.arity = base.arity
        self.has_hessian = base.has_hessian
        self.is_quadratic = base.is_quadratic

    @property
    def name(self) -> str:
        return f"{self.weight:g}*{self.base.name}"

    @property
    def shapes(self):
        return self.base.shapes

    def _cost(self, points):
        return self.weight * self.base.cost(points)

    def _egrad(self, points):
        return tuple(self.weight * g for g in self.base.egrad(points))

    def _ehess(self, points, xi):
        return tuple(self.weight * h for h in self.base.ehess(points, xi))


class SeparableObjective(Objective):
    """``f(G_1, ..., G_k) = sum_i f_i(G_i)``: independent problems solved jointly on a product."""

    def __init__(self, parts: Sequence[Objective]):
        if not parts:
            raise ValidationException("a separable objective needs at least one part")
        self.parts = list(parts)
        self.arity = sum(p.arity for p in self.parts)
        self.has_hessian = all(p.has_hessian for p in self.parts)
        self.is_quadratic = all(p.is_quadratic for p in self.parts)

    @property
    def name(self) -> str:
        return f"Separable[{', '.join(p.name for p in self.parts)}]"

    @property
    def shapes(self):
        if any(p.shapes is None for p in self.parts):
            return None
        return tuple(s for p in self.parts for s in p.shapes)

    def _split(self, items: Points) -> list[Points]:
        out, start = [], 0
        for p in self.parts:
            out.append(items[start : start + p.arity])
            start += p.arity
        return out

    def _cost(self, points):
        return sum(p.cost(x) for p, x in zip(self.parts, self._split(points)))

    def _egrad(self, points):
        return tuple(g for p, x in zip(self.parts, self._split(points)) for g in p.egrad(x))

    def _ehess(self, points, xi):
        return tuple(
            h
            for p, x, v in zip(self.parts, self._split(points), self._split(xi))
            for h in p.ehess(x, v)
        )
