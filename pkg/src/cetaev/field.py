"""Evaluatable potentials: polynomial-backed or given by vectorized callables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .poly import JetDecomposition, Polynomial, homogeneous_parts

ArrayFn = Callable[[np.ndarray], np.ndarray]


class PotentialFieldError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PotentialField:
    """A potential with gradient; rows of the input arrays are points.

    Polynomial-backed fields evaluate their exact polynomial in float mode and
    carry a jet decomposition of order ``jet_order``.  The origin must be a
    critical point with zero value.
    """

    dimension: int
    value_fn: ArrayFn
    gradient_fn: ArrayFn
    polynomial: Polynomial | None = None
    jet_order: int | None = None
    name: str = ""
    radial_fn: ArrayFn | None = field(default=None, repr=False)

    def __post_init__(self):
        origin = np.zeros((1, self.dimension))
        if self.polynomial is not None:
            p = self.polynomial
            if p.is_zero():
                raise PotentialFieldError("potential is identically zero")
            if p.coefficient((0,) * self.dimension) != 0:
                raise PotentialFieldError("potential must vanish at the origin")
            if not p.homogeneous_part(1).is_zero():
                raise PotentialFieldError(
                    "origin is not a critical point: linear part "
                    f"{p.homogeneous_part(1)} is nonzero"
                )
        else:
            v = float(self.value_fn(origin)[0])
            g = np.asarray(self.gradient_fn(origin), dtype=float)[0]
            if abs(v) > 1e-14:
                raise PotentialFieldError(f"potential must vanish at the origin, got {v}")
            if np.max(np.abs(g)) > 1e-14:
                raise PotentialFieldError(f"origin is not a critical point, gradient {g}")

    @classmethod
    def from_polynomial(cls, p: Polynomial, jet_order: int | None = None, name: str = "") -> PotentialField:
        grad = p.gradient()
        radial = p.radial_derivative()

        def value(points):
            return p.evaluate_many(points)

        def gradient(points):
            pts = np.asarray(points, dtype=float)
            return np.stack([g.evaluate_many(pts) for g in grad], axis=1)

        def radial_fn(points):
            return radial.evaluate_many(points)

        order = p.degree if jet_order is None else jet_order
        return cls(p.dimension, value, gradient, p, order, name, radial_fn)

    @classmethod
    def from_callables(cls, dimension: int, value: ArrayFn, gradient: ArrayFn, name: str = "") -> PotentialField:
        return cls(dimension, value, gradient, None, None, name)

    @property
    def jets(self) -> JetDecomposition | None:
        if self.polynomial is None or self.jet_order is None:
            return None
        return homogeneous_parts(self.polynomial, self.jet_order)

    def values(self, points) -> np.ndarray:
        return np.asarray(self.value_fn(np.atleast_2d(points)), dtype=float)

    def gradients(self, points) -> np.ndarray:
        return np.asarray(self.gradient_fn(np.atleast_2d(points)), dtype=float)

    def radial(self, points) -> np.ndarray:
        """``<grad(q), q>`` at each row."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.radial_fn is not None:
            return np.asarray(self.radial_fn(pts), dtype=float)
        return np.einsum("ij,ij->i", self.gradients(pts), pts)

    def value(self, q) -> float:
        return float(self.values(np.asarray(q, dtype=float)[None, :])[0])

    def gradient(self, q) -> np.ndarray:
        return self.gradients(np.asarray(q, dtype=float)[None, :])[0]
