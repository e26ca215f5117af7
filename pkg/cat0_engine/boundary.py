"""Rand op oneindig: stralen, Busemann-functies, Tits-hoeken en hoekcircumcentra."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ArgumentError, DomainError, UnsupportedError
from .geometry import angle_from_sides
from .models.base import EmptySet, FullSet, ModelSpace
from .models.euclidean import Euclidean, EuclideanConvex
from .models.product import HALF_PI, JoinPoint, Product, ProductConvex
from .models.tree import Tree, TreeConvex

logger = logging.getLogger(__name__)

CENTER_GATE = HALF_PI - 1e-6


def _require_boundary(space: ModelSpace) -> None:
    if not space.has_boundary():
        raise DomainError("ruimte is begrensd en heeft geen rand op oneindig")


# =============================
# Stralen en Busemann-functies
# =============================
def ray_point(space: ModelSpace, x: Any, xi: Any, t: float) -> Any:
    """Punt op afstand ``t`` langs de straal van ``x`` naar ``xi``."""
    if t < 0:
        raise ArgumentError(f"t moet niet-negatief zijn, kreeg {t}")
    _require_boundary(space)
    return space.ray_point(space.check_point(x), space.check_boundary(xi), float(t))


def busemann(space: ModelSpace, x0: Any, xi: Any, x: Any) -> float:
    _require_boundary(space)
    return space.busemann(space.check_point(x0), space.check_boundary(xi), space.check_point(x))


@dataclass(frozen=True, eq=False)
class BusemannSum:
    """f(x) = shift + Σ w·b_{base,ξ}(x); convex zolang alle gewichten positief zijn."""

    space: ModelSpace
    base: Any
    atoms: Tuple[Tuple[float, Any], ...]
    shift: float = 0.0

    def __call__(self, x: Any) -> float:
        return self.shift + sum(w * self.space.busemann(self.base, xi, x) for w, xi in self.atoms)

    def shifted(self, amount: float) -> "BusemannSum":
        return BusemannSum(self.space, self.base, self.atoms, self.shift + amount)

    def sublevel(self, level: float) -> Any:
        """Exacte verzameling {f ≤ level}."""
        return _sublevel(self.space, self.base, self.atoms, level - self.shift)


def _sublevel(space: ModelSpace, base: Any, atoms: Sequence[Tuple[float, Any]], level: float) -> Any:
    if isinstance(space, Euclidean):
        v = np.zeros(space.dim)
        for w, xi in atoms:
            v += w * np.asarray(xi)
        # f(x) = −⟨x − base, v⟩
        if np.linalg.norm(v) < 1e-12:
            return FullSet() if level >= 0 else EmptySet()
        return EuclideanConvex(halfspaces=((-v, level - float(np.dot(base, v))),))
    if isinstance(space, Tree):
        f = lambda p: sum(w * space.busemann(base, xi, p) for w, xi in atoms)
        intervals = []
        for element, el in space.elements.items():
            top = el.length if math.isfinite(el.length) else 1.0
            alpha = f(space.canonical(element, 0.0))
            beta = (f(space.canonical(element, top)) - alpha) / top if top > 0 else 0.0
            if abs(beta) < 1e-15:
                lo, hi = (0.0, el.length) if alpha <= level else (1.0, 0.0)
            elif beta > 0:
                lo, hi = 0.0, min(el.length, (level - alpha) / beta)
            else:
                lo, hi = max(0.0, (level - alpha) / beta), el.length
            if lo <= hi:
                intervals.append((element, lo, hi))
        return TreeConvex(tuple(intervals)) if intervals else EmptySet()
    if isinstance(space, Product):
        thetas = {xi.theta for _, xi in atoms}
        if thetas == {0.0}:
            left = _sublevel(space.left, base[0], [(w, xi.left) for w, xi in atoms], level)
            return EmptySet() if isinstance(left, EmptySet) else ProductConvex(left, FullSet())
        if thetas == {HALF_PI}:
            right = _sublevel(space.right, base[1], [(w, xi.right) for w, xi in atoms], level)
            return EmptySet() if isinstance(right, EmptySet) else ProductConvex(FullSet(), right)
        raise UnsupportedError("deelniveauverzameling van een gemengde Busemann-som in een product")
    raise UnsupportedError(f"deelniveauverzameling in {type(space).__name__}")


# =============================
# Hoeken op oneindig
# =============================
def tits_angle(space: ModelSpace, xi: Any, eta: Any) -> float:
    _require_boundary(space)
    return space.tits_angle(space.check_boundary(xi), space.check_boundary(eta))


def tits_angle_limit(space: ModelSpace, xi: Any, eta: Any, t_max: float, base: Any = None) -> float:
    """2·arcsin(d(c_ξ(t), c_η(t)) / 2t) bij t = t_max, vanuit ``base`` (standaard de oorsprong)."""
    if t_max < 1:
        raise ArgumentError(f"t_max moet minstens 1 zijn, kreeg {t_max}")
    _require_boundary(space)
    xi, eta = space.check_boundary(xi), space.check_boundary(eta)
    x = space.origin() if base is None else space.check_point(base)
    chord = space.distance(space.ray_point(x, xi, t_max), space.ray_point(x, eta, t_max))
    return 2 * math.asin(min(1.0, chord / (2 * t_max)))


def angle_n(space: ModelSpace, x0: Any, xi: Any, eta: Any, n: int) -> float:
    """∠ⁿ(ξ,η): supremum over t ∈ [1, n] van de vergelijkingshoek in x0."""
    if n < 1:
        raise ArgumentError(f"n moet minstens 1 zijn, kreeg {n}")
    _require_boundary(space)
    x0 = space.check_point(x0)
    xi, eta = space.check_boundary(xi), space.check_boundary(eta)

    def angle_at(t: float) -> float:
        chord = space.distance(space.ray_point(x0, xi, t), space.ray_point(x0, eta, t))
        return angle_from_sides(t, t, chord)

    if n == 1:
        return angle_at(1.0)
    if n <= 20:
        ts = np.append(np.arange(1.0, float(n), 1e-2), float(n))
    else:
        ts = np.linspace(1.0, float(n), 2001)
    values = [angle_at(float(t)) for t in ts]
    i = int(np.argmax(values))
    best = values[i]
    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, len(ts) - 1)])
    if hi > lo:
        res = minimize_scalar(lambda t: -angle_at(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = max(best, -float(res.fun))
    return best


# =============================
# Hoekcircumcentra
# =============================
@dataclass(frozen=True)
class AngularCenter:
    center: Any
    radius: float


@dataclass(frozen=True)
class NoUniqueCenter:
    radius: float


AngularResult = Union[AngularCenter, NoUniqueCenter]


def _max_angle(space: ModelSpace, c: Any, A: Sequence[Any]) -> float:
    return max(space.tits_angle(c, a) for a in A)


def _min_norm_hull(A: np.ndarray) -> np.ndarray:
    """Punt van minimale norm in het convexe omhulsel van de rijen van ``A``."""
    n, dim = A.shape
    best, best_norm = None, math.inf
    for k in range(1, min(n, dim + 1) + 1):
        for support in combinations(range(n), k):
            S = A[list(support)]
            if k == 1:
                p, coeffs = S[0], np.ones(1)
            else:
                # min |Σλ_i S_i| met Σλ_i = 1
                G = S @ S.T
                K = np.block([[2 * G, np.ones((k, 1))], [np.ones((1, k)), np.zeros((1, 1))]])
                rhs = np.append(np.zeros(k), 1.0)
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
                coeffs = sol[:k]
                if np.max(np.abs(K @ sol - rhs)) > 1e-9 or np.any(coeffs < -1e-12):
                    continue
                p = coeffs @ S
            norm = float(np.linalg.norm(p))
            if norm < best_norm - 1e-15:
                best, best_norm = p, norm
    return best


def _euclidean_angular_center(space: Euclidean, A: List[np.ndarray]) -> AngularResult:
    p = _min_norm_hull(np.array(A))
    norm = float(np.linalg.norm(p))
    if norm > 1e-12:
        center = p / norm
        radius = _max_angle(space, center, A)
        if radius < CENTER_GATE:
            return AngularCenter(center, radius)
    grid = space.boundary_grid(256) + list(A)
    return NoUniqueCenter(min(_max_angle(space, c, A) for c in grid))


def _product_angular_center(space: Product, A: List[JoinPoint], count: int) -> AngularResult:
    def factor_candidates(factor: ModelSpace, comps: List[Any]) -> List[Any]:
        if not factor.has_boundary():
            return []
        out = list(comps) + factor.boundary_grid(max(4, count // 4))
        if comps:
            inner = angular_circumcenter(factor, comps)
            if isinstance(inner, AngularCenter):
                out.insert(0, inner.center)
        return out

    lefts = factor_candidates(space.left, [a.left for a in A if a.left is not None]) or [None]
    rights = factor_candidates(space.right, [a.right for a in A if a.right is not None]) or [None]
    best, best_val, best_pair = None, math.inf, (None, None)
    for left in lefts:
        for right in rights:
            for theta in np.linspace(0.0, HALF_PI, 33):
                if (theta < HALF_PI and left is None) or (theta > 0 and right is None):
                    continue
                c = space.join(float(theta), left, right)
                val = _max_angle(space, c, A)
                if val < best_val - 1e-15:
                    best, best_val, best_pair = c, val, (left, right)
    left, right = best_pair
    if left is not None and right is not None:
        # θ verfijnen voor het beste factorpaar
        objective = lambda th: _max_angle(space, space.join(th, left, right), A)
        res = minimize_scalar(objective, bounds=(0.0, HALF_PI), method="bounded", options={"xatol": 1e-10})
        if float(res.fun) < best_val - 1e-15:
            best, best_val = space.join(float(res.x), left, right), float(res.fun)
    if best_val < CENTER_GATE:
        return AngularCenter(best, best_val)
    return NoUniqueCenter(best_val)


def angular_circumcenter(space: ModelSpace, A: Sequence[Any], count: int = 64) -> AngularResult:
    """Centrum dat de grootste Tits-hoek naar ``A`` minimaliseert, als die straal < π/2 is."""
    _require_boundary(space)
    A = [space.check_boundary(a) for a in A]
    if not A:
        raise ArgumentError("hoekcircumcentrum van een lege verzameling")
    if len(A) == 1:
        return AngularCenter(A[0], 0.0)
    if isinstance(space, Euclidean):
        result = _euclidean_angular_center(space, A)
    elif isinstance(space, Tree):
        radii = [(_max_angle(space, c, A), c) for c in space.boundary_grid()]
        radius, center = min(radii, key=lambda rc: rc[0])
        result = AngularCenter(center, radius) if radius < CENTER_GATE else NoUniqueCenter(radius)
    elif isinstance(space, Product):
        result = _product_angular_center(space, A, count)
    else:
        raise UnsupportedError(f"hoekcircumcentrum in {type(space).__name__}")
    logger.debug("hoekcircumcentrum van %d randpunten: straal %.6g", len(A), result.radius)
    return result
