"""Binaire producten X = L × R met de ℓ²-productmetriek.

De rand is de sferische join ∂L * ∂R, gerepresenteerd als ``JoinPoint``:
θ = 0 is zuiver links, θ = π/2 zuiver rechts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Any, List, Optional, Tuple

import numpy as np

from ..errors import CompositionError, DomainError, EmptySetError
from .base import (
    EmptySet,
    FullSet,
    ModelSpace,
    SingletonSet,
    clamp_unit,
    generic_contains,
    generic_intersect,
)

HALF_PI = math.pi / 2
THETA_SNAP = 1e-12


@dataclass(frozen=True, eq=False)
class JoinPoint:
    theta: float
    left: Any = None
    right: Any = None

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, JoinPoint):
            return NotImplemented
        same = lambda a, b: (a is None and b is None) or (
            a is not None and b is not None and np.array_equal(np.asarray(a, dtype=object), np.asarray(b, dtype=object))
        )
        return self.theta == other.theta and same(self.left, other.left) and same(self.right, other.right)

    __hash__ = None


@dataclass(frozen=True)
class Product(ModelSpace):
    left: ModelSpace
    right: ModelSpace

    kind = "product"

    # --- punten -------------------------------------------------------
    def check_point(self, p: Any) -> Tuple[Any, Any]:
        if not isinstance(p, (tuple, list)) or len(p) != 2:
            raise DomainError(f"productpunt moet een paar zijn, kreeg {p!r}")
        return (self.left.check_point(p[0]), self.right.check_point(p[1]))

    def distance(self, p, q) -> float:
        return math.hypot(self.left.distance(p[0], q[0]), self.right.distance(p[1], q[1]))

    def geodesic_point(self, p, q, t: float):
        if t == 0:
            return p
        if t == 1:
            return q
        return (self.left.geodesic_point(p[0], q[0], t), self.right.geodesic_point(p[1], q[1], t))

    def origin(self):
        return (self.left.origin(), self.right.origin())

    def anchor_points(self) -> List[Any]:
        return list(cartesian(self.left.anchor_points(), self.right.anchor_points()))

    def random_point(self, rng: np.random.Generator, scale: float = 5.0):
        return (self.left.random_point(rng, scale), self.right.random_point(rng, scale))

    def ball_sample(self, center, radius: float, rng: Optional[np.random.Generator] = None) -> List[Any]:
        cl, cr = center
        pts = [(x, cr) for x in self.left.ball_sample(cl, radius)]
        pts += [(cl, y) for y in self.right.ball_sample(cr, radius)[1:]]
        diag = radius / math.sqrt(2.0)
        lefts = self.left.ball_sample(cl, diag)[1:5]
        rights = self.right.ball_sample(cr, diag)[1:5]
        pts += list(cartesian(lefts, rights))
        if rng is not None:
            for _ in range(6):
                p = self.random_point(rng, scale=radius)
                if self.distance(center, p) <= radius:
                    pts.append(p)
        return pts

    def format_point(self, p) -> str:
        return f"({self.left.format_point(p[0])}, {self.right.format_point(p[1])})"

    # --- rand ------------------------------------------------------------
    def has_boundary(self) -> bool:
        return self.left.has_boundary() or self.right.has_boundary()

    def join(self, theta: float, left: Any = None, right: Any = None) -> JoinPoint:
        """Welgevormd joinpunt; θ binnen 1e-12 van 0 of π/2 wordt vastgezet."""
        theta = float(theta)
        if not (-THETA_SNAP <= theta <= HALF_PI + THETA_SNAP):
            raise DomainError(f"join-hoek {theta} buiten [0, π/2]")
        if theta <= THETA_SNAP:
            theta = 0.0
        elif theta >= HALF_PI - THETA_SNAP:
            theta = HALF_PI
        if theta < HALF_PI:
            if left is None or not self.left.has_boundary():
                raise DomainError("θ weegt de linkerfactor, maar die heeft geen randpunt")
            left = self.left.check_boundary(left)
        else:
            left = None
        if theta > 0:
            if right is None or not self.right.has_boundary():
                raise DomainError("θ weegt de rechterfactor, maar die heeft geen randpunt")
            right = self.right.check_boundary(right)
        else:
            right = None
        return JoinPoint(theta, left, right)

    def check_boundary(self, xi: Any) -> JoinPoint:
        if not isinstance(xi, JoinPoint):
            raise DomainError(f"geen joinpunt: {xi!r}")
        return self.join(xi.theta, xi.left, xi.right)

    def ray_point(self, x, xi: JoinPoint, t: float):
        c, s = math.cos(xi.theta), math.sin(xi.theta)
        left = self.left.ray_point(x[0], xi.left, t * c) if xi.left is not None else x[0]
        right = self.right.ray_point(x[1], xi.right, t * s) if xi.right is not None else x[1]
        return (left, right)

    def busemann(self, x0, xi: JoinPoint, x) -> float:
        value = 0.0
        if xi.left is not None:
            value += math.cos(xi.theta) * self.left.busemann(x0[0], xi.left, x[0])
        if xi.right is not None:
            value += math.sin(xi.theta) * self.right.busemann(x0[1], xi.right, x[1])
        return value

    def tits_angle(self, xi: JoinPoint, eta: JoinPoint) -> float:
        total = 0.0
        if xi.left is not None and eta.left is not None:
            angle = min(self.left.tits_angle(xi.left, eta.left), math.pi)
            total += math.cos(xi.theta) * math.cos(eta.theta) * math.cos(angle)
        if xi.right is not None and eta.right is not None:
            angle = min(self.right.tits_angle(xi.right, eta.right), math.pi)
            total += math.sin(xi.theta) * math.sin(eta.theta) * math.cos(angle)
        return math.acos(clamp_unit(total))

    def boundary_grid(self, count: int = 64) -> List[JoinPoint]:
        grid: List[JoinPoint] = []
        lefts = self.left.boundary_grid(count) if self.left.has_boundary() else []
        rights = self.right.boundary_grid(count) if self.right.has_boundary() else []
        grid += [JoinPoint(0.0, xi, None) for xi in lefts]
        grid += [JoinPoint(HALF_PI, None, eta) for eta in rights]
        if lefts and rights:
            coarse = self.left.boundary_grid(max(4, count // 8))
            grid += [JoinPoint(math.pi / 4, xi, eta) for xi in coarse for eta in rights]
        return grid

    def antipodes(self, xi: JoinPoint) -> List[JoinPoint]:
        lefts = self.left.antipodes(xi.left) if xi.left is not None else [None]
        rights = self.right.antipodes(xi.right) if xi.right is not None else [None]
        return [JoinPoint(xi.theta, a, b) for a in lefts for b in rights]

    def direction_of(self, x0, p) -> Optional[JoinPoint]:
        xl = self.left.direction_of(x0[0], p[0])
        xr = self.right.direction_of(x0[1], p[1])
        dl = self.left.distance(x0[0], p[0]) if xl is not None else 0.0
        dr = self.right.distance(x0[1], p[1]) if xr is not None else 0.0
        if dl == 0.0 and dr == 0.0:
            return None
        theta = math.atan2(dr, dl)
        return self.join(theta, xl if theta < HALF_PI else None, xr if theta > 0 else None)

    def format_boundary(self, xi: JoinPoint) -> str:
        left = self.left.format_boundary(xi.left) if xi.left is not None else "_"
        right = self.right.format_boundary(xi.right) if xi.right is not None else "_"
        return f"join({xi.theta:.12g}; {left}; {right})"

    # --- convexe verzamelingen ---------------------------------------
    def split_convex(self, C: Any) -> Tuple[Any, Any]:
        """Factoren (links, rechts) van een productverzameling."""
        if isinstance(C, FullSet):
            return FullSet(), FullSet()
        if isinstance(C, SingletonSet):
            return SingletonSet(C.point[0]), SingletonSet(C.point[1])
        return C.left, C.right

    def contains(self, C: Any, x, tol: float = 1e-9) -> bool:
        found = generic_contains(self, C, x, tol)
        if found is not None:
            return found
        return self.left.contains(C.left, x[0], tol) and self.right.contains(C.right, x[1], tol)

    def project(self, C: Any, x):
        if isinstance(C, FullSet):
            return x
        if isinstance(C, EmptySet):
            raise EmptySetError("projectie op de lege verzameling")
        if isinstance(C, SingletonSet):
            return C.point
        return (self.left.project(C.left, x[0]), self.right.project(C.right, x[1]))

    def intersect(self, C: Any, D: Any) -> Any:
        found = generic_intersect(self, C, D)
        if found is not None:
            return found
        cl, cr = self.split_convex(C)
        dl, dr = self.split_convex(D)
        left = self.left.intersect(cl, dl)
        right = self.right.intersect(cr, dr)
        if isinstance(left, EmptySet) or isinstance(right, EmptySet):
            return EmptySet()
        return ProductConvex(left, right)

    def identity(self) -> "ProductIsometry":
        return ProductIsometry(self.left.identity(), self.right.identity())


@dataclass(frozen=True, eq=False)
class ProductConvex:
    left: Any
    right: Any

    def describe(self) -> str:
        return f"{self.left.describe()} x {self.right.describe()}"


@dataclass(frozen=True, eq=False)
class ProductIsometry:
    """Factorsgewijze isometrie (g_L, g_R)."""

    left: Any
    right: Any

    @property
    def source(self) -> Product:
        return Product(self.left.source, self.right.source)

    @property
    def target(self) -> Product:
        return Product(self.left.target, self.right.target)

    def apply(self, p):
        return (self.left.apply(p[0]), self.right.apply(p[1]))

    def apply_boundary(self, xi: JoinPoint) -> JoinPoint:
        return JoinPoint(
            xi.theta,
            self.left.apply_boundary(xi.left) if xi.left is not None else None,
            self.right.apply_boundary(xi.right) if xi.right is not None else None,
        )

    def apply_convex(self, C: Any) -> Any:
        if isinstance(C, (FullSet, EmptySet)):
            return C
        if isinstance(C, SingletonSet):
            return SingletonSet(self.apply(C.point))
        return ProductConvex(self.left.apply_convex(C.left), self.right.apply_convex(C.right))

    def compose(self, other: Any) -> "ProductIsometry":
        if not isinstance(other, ProductIsometry):
            raise CompositionError("productisometrie kan alleen met een productisometrie samengesteld worden")
        return ProductIsometry(self.left.compose(other.left), self.right.compose(other.right))

    def inverse(self) -> "ProductIsometry":
        return ProductIsometry(self.left.inverse(), self.right.inverse())

    def describe(self) -> str:
        return f"({self.left.describe()}) x ({self.right.describe()})"
