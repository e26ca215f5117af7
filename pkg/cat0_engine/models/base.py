"""Gemeenschappelijke basis voor de modelruimtes.

Elke modelfamilie (Euclidisch, boom, product) levert een subklasse van
``ModelSpace``; de functies in ``spaces``, ``geometry`` en ``boundary``
dispatchen naar deze methodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence

import numpy as np

Point = Any
BoundaryPoint = Any

# standaardtolerantie voor metrische identiteiten
METRIC_TOL = 1e-9


def clamp_unit(value: float) -> float:
    """Klem een cosinus/sinus-argument op [-1, 1]."""
    return max(-1.0, min(1.0, float(value)))


def fibonacci_sphere(count: int) -> np.ndarray:
    """Fibonacci-rooster van ``count`` richtingen op S²."""
    i = np.arange(count, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


class ModelSpace:
    """Eigen, geodetische CAT(0)-ruimte met expliciete representaties."""

    kind = "abstract"

    # --- punten -------------------------------------------------------
    def check_point(self, p: Point) -> Point:
        raise NotImplementedError()

    def distance(self, p: Point, q: Point) -> float:
        raise NotImplementedError()

    def geodesic_point(self, p: Point, q: Point, t: float) -> Point:
        raise NotImplementedError()

    def origin(self) -> Point:
        raise NotImplementedError()

    def anchor_points(self) -> List[Point]:
        """Canonieke ijkpunten (oorsprong, hoekpunten) voor steekproeven."""
        return [self.origin()]

    def random_point(self, rng: np.random.Generator, scale: float = 5.0) -> Point:
        raise NotImplementedError()

    def ball_sample(self, center: Point, radius: float, rng: Optional[np.random.Generator] = None) -> List[Point]:
        raise NotImplementedError()

    def is_bounded(self) -> bool:
        return not self.has_boundary()

    def format_point(self, p: Point) -> str:
        return str(p)

    # --- rand op oneindig ---------------------------------------------
    def has_boundary(self) -> bool:
        raise NotImplementedError()

    def check_boundary(self, xi: BoundaryPoint) -> BoundaryPoint:
        raise NotImplementedError()

    def ray_point(self, x: Point, xi: BoundaryPoint, t: float) -> Point:
        raise NotImplementedError()

    def busemann(self, x0: Point, xi: BoundaryPoint, x: Point) -> float:
        raise NotImplementedError()

    def tits_angle(self, xi: BoundaryPoint, eta: BoundaryPoint) -> float:
        raise NotImplementedError()

    def boundary_grid(self, count: int = 64) -> List[BoundaryPoint]:
        raise NotImplementedError()

    def antipodes(self, xi: BoundaryPoint) -> List[BoundaryPoint]:
        raise NotImplementedError()

    def direction_of(self, x0: Point, p: Point) -> Optional[BoundaryPoint]:
        """Richting op oneindig waarin ``p`` ligt, gezien vanuit ``x0`` (None als begrensd)."""
        raise NotImplementedError()

    def format_boundary(self, xi: BoundaryPoint) -> str:
        return str(xi)

    # --- convexe verzamelingen -----------------------------------------
    def contains(self, C: Any, x: Point, tol: float = METRIC_TOL) -> bool:
        raise NotImplementedError()

    def project(self, C: Any, x: Point) -> Point:
        raise NotImplementedError()

    def intersect(self, C: Any, D: Any) -> Any:
        raise NotImplementedError()

    def identity(self) -> Any:
        raise NotImplementedError()


# =============================
# Universele convexe verzamelingen
# =============================
@dataclass(frozen=True)
class FullSet:
    """De hele ruimte."""

    def describe(self) -> str:
        return "all"


@dataclass(frozen=True)
class EmptySet:
    """De lege verzameling."""

    def describe(self) -> str:
        return "empty"


@dataclass(frozen=True, eq=False)
class SingletonSet:
    """Eén punt, in elke modelruimte bruikbaar."""

    point: Point

    def describe(self) -> str:
        return f"{{{self.point}}}"


def generic_contains(space: ModelSpace, C: Any, x: Point, tol: float) -> Optional[bool]:
    """Lidmaatschap voor de universele soorten; None als ``C`` modelspecifiek is."""
    if isinstance(C, FullSet):
        return True
    if isinstance(C, EmptySet):
        return False
    if isinstance(C, SingletonSet):
        return space.distance(C.point, x) <= tol
    return None


def generic_intersect(space: ModelSpace, C: Any, D: Any) -> Optional[Any]:
    """Doorsnede voor de universele soorten; None als beide modelspecifiek zijn."""
    if isinstance(C, FullSet):
        return D
    if isinstance(D, FullSet):
        return C
    if isinstance(C, EmptySet) or isinstance(D, EmptySet):
        return EmptySet()
    if isinstance(C, SingletonSet):
        return C if space.contains(D, C.point, 1e-9) else EmptySet()
    if isinstance(D, SingletonSet):
        return D if space.contains(C, D.point, 1e-9) else EmptySet()
    return None


def format_vector(v: Sequence[float]) -> str:
    return "[" + " ".join(f"{float(x):.12g}" for x in v) + "]"
