"""Modelruimtes: afstand, geodeten en isometrieën.

Dunne laag boven ``cat0_engine.models`` die invoer valideert en de
modelspecifieke implementaties aanroept.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterable, List, Optional

import numpy as np

from .errors import ArgumentError, DomainError
from .models.base import (
    EmptySet,
    FullSet,
    ModelSpace,
    SingletonSet,
)
from .models.euclidean import (
    Euclidean,
    EuclideanConvex,
    EuclideanIsometry,
    affine_subspace,
    ball,
    halfspace,
    rotation_2d,
    rotation_3d,
    translation,
)
from .models.product import JoinPoint, Product, ProductConvex, ProductIsometry
from .models.tree import (
    Tree,
    TreeAutomorphism,
    TreeConvex,
    TreeEnd,
    TreeLineMap,
    TreePoint,
    line_tree,
    point_space,
    tree_from_lists,
    tripod,
)

logger = logging.getLogger(__name__)

__all__ = [
    "ModelSpace", "Euclidean", "Tree", "Product",
    "TreePoint", "TreeEnd", "JoinPoint",
    "EuclideanConvex", "TreeConvex", "ProductConvex", "FullSet", "EmptySet", "SingletonSet",
    "EuclideanIsometry", "TreeAutomorphism", "TreeLineMap", "ProductIsometry",
    "tripod", "line_tree", "point_space", "tree_from_lists",
    "halfspace", "ball", "affine_subspace", "translation", "rotation_2d", "rotation_3d",
    "distance", "geodesic_point", "GeodesicSegment", "apply_isometry", "compose", "invert",
    "isometry_distortion", "is_point_space", "sample_points",
]


# =============================
# Metriek en geodeten
# =============================
def distance(space: ModelSpace, p: Any, q: Any) -> float:
    return space.distance(space.check_point(p), space.check_point(q))


def geodesic_point(space: ModelSpace, p: Any, q: Any, t: float) -> Any:
    """Punt op parameter ``t`` van de geodeet [p, q] met constante snelheid."""
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"t moet in [0, 1] liggen, kreeg {t}")
    return space.geodesic_point(space.check_point(p), space.check_point(q), float(t))


@dataclass(frozen=True)
class GeodesicSegment:
    space: ModelSpace
    p: Any
    q: Any

    @property
    def length(self) -> float:
        return self.space.distance(self.p, self.q)

    def __call__(self, t: float) -> Any:
        return geodesic_point(self.space, self.p, self.q, t)


# =============================
# Isometrieën
# =============================
def apply_isometry(g: Any, p: Any) -> Any:
    return g.apply(g.source.check_point(p))


def compose(g: Any, h: Any) -> Any:
    """g ∘ h: eerst ``h``, dan ``g``."""
    return g.compose(h)


def invert(g: Any) -> Any:
    return g.inverse()


def sample_points(space: ModelSpace, rng: np.random.Generator, count: int, scale: float = 5.0) -> List[Any]:
    pts = list(space.anchor_points())
    while len(pts) < count:
        pts.append(space.random_point(rng, scale))
    return pts[:count]


def isometry_distortion(g: Any, points: Iterable[Any]) -> float:
    """Grootste |d(g·p, g·q) − d(p, q)| over alle paren uit ``points``."""
    pts = list(points)
    images = [g.apply(p) for p in pts]
    worst = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            before = g.source.distance(pts[i], pts[j])
            after = g.target.distance(images[i], images[j])
            worst = max(worst, abs(after - before))
    return worst


def is_point_space(space: ModelSpace) -> bool:
    return isinstance(space, Tree) and not space.edges and not space.rays


def require_unbounded(space: ModelSpace, what: str = "operatie") -> None:
    if not space.has_boundary():
        raise DomainError(f"{what} vraagt een onbegrensde ruimte")


def format_point(space: ModelSpace, p: Optional[Any]) -> str:
    return "" if p is None else space.format_point(p)
