"""Euclidische ruimte ℝⁿ: punten, isometrieën, randrichtingen en veelvlakprojectie."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from ..errors import CompositionError, DomainError, EmptySetError
from .base import (
    EmptySet,
    FullSet,
    ModelSpace,
    SingletonSet,
    clamp_unit,
    fibonacci_sphere,
    format_vector,
    generic_contains,
    generic_intersect,
)

Vector = np.ndarray


def _as_vector(values: Any, dim: int, what: str = "punt") -> Vector:
    try:
        arr = np.asarray(values, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise DomainError(f"{what} is geen coördinatenvector: {values!r}") from e
    if arr.shape != (dim,):
        raise DomainError(f"{what} heeft {arr.size} coördinaten, verwacht {dim}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} bevat niet-eindige coördinaten")
    return arr


@dataclass(frozen=True)
class Euclidean(ModelSpace):
    dim: int

    kind = "euclidean"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DomainError(f"dimensie moet positief zijn, kreeg {self.dim}")

    # --- punten -------------------------------------------------------
    def point(self, coords: Sequence[float]) -> Vector:
        return _as_vector(coords, self.dim)

    def check_point(self, p: Any) -> Vector:
        return _as_vector(p, self.dim)

    def distance(self, p: Vector, q: Vector) -> float:
        return float(np.linalg.norm(np.asarray(p) - np.asarray(q)))

    def geodesic_point(self, p: Vector, q: Vector, t: float) -> Vector:
        if t == 0:
            return np.array(p, dtype=float)
        if t == 1:
            return np.array(q, dtype=float)
        return np.asarray(p) + t * (np.asarray(q) - np.asarray(p))

    def origin(self) -> Vector:
        return np.zeros(self.dim)

    def random_point(self, rng: np.random.Generator, scale: float = 5.0) -> Vector:
        return rng.uniform(-scale, scale, size=self.dim)

    def ball_sample(self, center: Vector, radius: float, rng: Optional[np.random.Generator] = None) -> List[Vector]:
        center = np.asarray(center, dtype=float)
        pts = [center.copy()]
        eye = np.eye(self.dim)
        for i in range(self.dim):
            for s in (radius, -radius, radius / 2, -radius / 2):
                pts.append(center + s * eye[i])
        for i, j in combinations(range(self.dim), 2):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    pts.append(center + radius * (si * eye[i] + sj * eye[j]) / math.sqrt(2.0))
        if rng is not None:
            for _ in range(6):
                v = rng.normal(size=self.dim)
                v /= np.linalg.norm(v) or 1.0
                pts.append(center + radius * rng.uniform(0.2, 1.0) * v)
        return pts

    def format_point(self, p: Vector) -> str:
        return format_vector(p)

    # --- rand ------------------------------------------------------------
    def has_boundary(self) -> bool:
        return True

    def direction(self, v: Sequence[float]) -> Vector:
        arr = _as_vector(v, self.dim, "richting")
        n = np.linalg.norm(arr)
        if n == 0:
            raise DomainError("nulvector is geen richting")
        return arr / n

    def check_boundary(self, xi: Any) -> Vector:
        arr = _as_vector(xi, self.dim, "randpunt")
        n = float(np.linalg.norm(arr))
        if abs(n - 1.0) > 1e-9:
            raise DomainError(f"randpunt heeft norm {n:.6g}, verwacht 1")
        return arr / n

    def ray_point(self, x: Vector, xi: Vector, t: float) -> Vector:
        return np.asarray(x) + t * np.asarray(xi)

    def busemann(self, x0: Vector, xi: Vector, x: Vector) -> float:
        return -float(np.dot(np.asarray(x) - np.asarray(x0), xi))

    def tits_angle(self, xi: Vector, eta: Vector) -> float:
        return math.acos(clamp_unit(np.dot(xi, eta)))

    def boundary_grid(self, count: int = 64) -> List[Vector]:
        if self.dim == 1:
            return [np.array([1.0]), np.array([-1.0])]
        if self.dim == 2:
            angles = 2 * math.pi * np.arange(count) / count
            return [np.array([math.cos(a), math.sin(a)]) for a in angles]
        if self.dim == 3:
            return [v / np.linalg.norm(v) for v in fibonacci_sphere(count)]
        rng = np.random.default_rng(0)
        out = []
        for _ in range(count):
            v = rng.normal(size=self.dim)
            out.append(v / np.linalg.norm(v))
        return out

    def antipodes(self, xi: Vector) -> List[Vector]:
        return [-np.asarray(xi)]

    def direction_of(self, x0: Vector, p: Vector) -> Optional[Vector]:
        v = np.asarray(p) - np.asarray(x0)
        n = float(np.linalg.norm(v))
        if n == 0:
            return None
        return v / n

    def format_boundary(self, xi: Vector) -> str:
        return format_vector(xi)

    # --- convexe verzamelingen ---------------------------------------
    def contains(self, C: Any, x: Vector, tol: float = 1e-9) -> bool:
        found = generic_contains(self, C, x, tol)
        if found is not None:
            return found
        return C.contains(x, tol)

    def project(self, C: Any, x: Vector) -> Vector:
        x = np.asarray(x, dtype=float)
        if isinstance(C, FullSet):
            return x.copy()
        if isinstance(C, EmptySet):
            raise EmptySetError("projectie op de lege verzameling")
        if isinstance(C, SingletonSet):
            return np.array(C.point, dtype=float)
        if C.contains(x, 1e-12):
            return x.copy()
        if not C.balls:
            return _project_polyhedral(x, C.equalities, C.halfspaces)
        if len(C.balls) == 1 and not C.halfspaces and not C.equalities:
            center, radius = C.balls[0]
            v = x - center
            n = float(np.linalg.norm(v))
            return center + radius * v / n if n > radius else x.copy()
        return _project_dykstra(x, C)

    def intersect(self, C: Any, D: Any) -> Any:
        found = generic_intersect(self, C, D)
        if found is not None:
            return found
        return EuclideanConvex(
            halfspaces=C.halfspaces + D.halfspaces,
            equalities=C.equalities + D.equalities,
            balls=C.balls + D.balls,
        )

    def identity(self) -> "EuclideanIsometry":
        return EuclideanIsometry(self, self, np.eye(self.dim), np.zeros(self.dim))


# =============================
# Convexe verzamelingen
# =============================
Row = Tuple[Vector, float]


def _normalized(rows: Sequence[Row]) -> Tuple[Row, ...]:
    out = []
    for u, c in rows:
        u = np.asarray(u, dtype=float)
        n = float(np.linalg.norm(u))
        if n == 0:
            raise DomainError("normaalvector mag niet nul zijn")
        out.append((u / n, float(c) / n))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class EuclideanConvex:
    """Doorsnede van halfruimtes ⟨u,x⟩ ≤ c, hypervlakken ⟨u,x⟩ = c en gesloten ballen."""

    halfspaces: Tuple[Row, ...] = ()
    equalities: Tuple[Row, ...] = ()
    balls: Tuple[Tuple[Vector, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", _normalized(self.halfspaces))
        object.__setattr__(self, "equalities", _normalized(self.equalities))
        balls = tuple((np.asarray(c, dtype=float), float(r)) for c, r in self.balls)
        if any(r < 0 for _, r in balls):
            raise DomainError("balstraal moet niet-negatief zijn")
        object.__setattr__(self, "balls", balls)

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        for u, c in self.halfspaces:
            if float(np.dot(u, x)) > c + tol * max(1.0, abs(c)):
                return False
        for u, c in self.equalities:
            if abs(float(np.dot(u, x)) - c) > tol * max(1.0, abs(c)):
                return False
        for center, r in self.balls:
            if float(np.linalg.norm(x - center)) > r + tol:
                return False
        return True

    def is_affine(self) -> bool:
        return not self.halfspaces and not self.balls

    def describe(self) -> str:
        parts = [f"<{format_vector(u)},x> <= {c:.12g}" for u, c in self.halfspaces]
        parts += [f"<{format_vector(u)},x> = {c:.12g}" for u, c in self.equalities]
        parts += [f"|x-{format_vector(c)}| <= {r:.12g}" for c, r in self.balls]
        return " & ".join(parts) or "all"


def halfspace(normal: Sequence[float], offset: float) -> EuclideanConvex:
    """{x : ⟨normal, x⟩ ≤ offset}"""
    return EuclideanConvex(halfspaces=((np.asarray(normal, dtype=float), offset),))


def ball(center: Sequence[float], radius: float) -> EuclideanConvex:
    return EuclideanConvex(balls=((np.asarray(center, dtype=float), radius),))


def affine_subspace(origin: Sequence[float], frame: np.ndarray) -> Any:
    """Affiene deelruimte origin + span(frame-kolommen); de hele ruimte als het frame vol is."""
    origin = np.asarray(origin, dtype=float)
    frame = np.asarray(frame, dtype=float).reshape(origin.size, -1)
    if frame.shape[1] == 0:
        return SingletonSet(origin)
    normals = null_space(frame.T).T if frame.size else np.eye(origin.size)
    if normals.shape[0] == 0:
        return FullSet()
    return EuclideanConvex(equalities=tuple((u, float(np.dot(u, origin))) for u in normals))


def affine_frame(space: Euclidean, C: Any) -> Optional[Tuple[Vector, np.ndarray]]:
    """(oorsprong, orthonormaal frame) als ``C`` een affiene deelruimte is, anders None."""
    if isinstance(C, FullSet):
        return np.zeros(space.dim), np.eye(space.dim)
    if isinstance(C, SingletonSet):
        return np.asarray(C.point, dtype=float), np.zeros((space.dim, 0))
    if isinstance(C, EuclideanConvex) and C.is_affine():
        origin = space.project(C, np.zeros(space.dim))
        if not C.equalities:
            return origin, np.eye(space.dim)
        M = np.array([u for u, _ in C.equalities])
        return origin, null_space(M)
    return None


def _feasible(y: Vector, halfspaces: Sequence[Row], tol: float = 1e-10) -> bool:
    return all(float(np.dot(u, y)) <= c + tol * max(1.0, abs(c)) for u, c in halfspaces)


def _project_polyhedral(x: Vector, equalities: Sequence[Row], halfspaces: Sequence[Row]) -> Vector:
    """Exacte projectie door opsomming van actieve verzamelingen."""
    dim = x.size
    best, best_dist = None, math.inf
    for k in range(0, min(len(halfspaces), dim) + 1):
        for active in combinations(range(len(halfspaces)), k):
            rows = list(equalities) + [halfspaces[i] for i in active]
            if rows:
                M = np.array([u for u, _ in rows])
                c = np.array([c for _, c in rows])
                lam = np.linalg.lstsq(M @ M.T, M @ x - c, rcond=None)[0]
                y = x - M.T @ lam
                if np.max(np.abs(M @ y - c)) > 1e-9 * max(1.0, float(np.max(np.abs(c)))):
                    continue
            else:
                y = x.copy()
            if not _feasible(y, halfspaces):
                continue
            dist = float(np.linalg.norm(x - y))
            if dist < best_dist - 1e-15:
                best, best_dist = y, dist
    if best is None:
        raise EmptySetError("veelvlak is leeg")
    return best


def _project_dykstra(x: Vector, C: EuclideanConvex, max_iter: int = 100000) -> Vector:
    pieces = []
    if C.equalities:
        pieces.append(lambda y: _project_polyhedral(y, C.equalities, ()))
    for u, c in C.halfspaces:
        pieces.append(lambda y, u=u, c=c: y - max(0.0, float(np.dot(u, y)) - c) * u)
    for center, r in C.balls:
        def _ball(y, center=center, r=r):
            v = y - center
            n = float(np.linalg.norm(v))
            return center + r * v / n if n > r else y
        pieces.append(_ball)
    y = x.copy()
    increments = [np.zeros_like(x) for _ in pieces]
    for _ in range(max_iter):
        previous = y
        for i, proj in enumerate(pieces):
            z = proj(y + increments[i])
            increments[i] = y + increments[i] - z
            y = z
        if float(np.linalg.norm(y - previous)) < 1e-15:
            break
    if not C.contains(y, 1e-7):
        raise EmptySetError("doorsnede van halfruimtes en ballen is leeg")
    return y


# =============================
# Isometrieën
# =============================
@dataclass(frozen=True, eq=False)
class EuclideanIsometry:
    """x ↦ A·x + b tussen twee Euclidische ruimtes van gelijke dimensie."""

    source: Euclidean
    target: Euclidean
    matrix: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float).reshape(self.target.dim, self.source.dim)
        b = np.asarray(self.translation, dtype=float).reshape(self.target.dim)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "translation", b)

    def apply(self, p: Vector) -> Vector:
        return self.matrix @ np.asarray(p, dtype=float) + self.translation

    def apply_boundary(self, xi: Vector) -> Vector:
        v = self.matrix @ np.asarray(xi, dtype=float)
        return v / np.linalg.norm(v)

    def apply_convex(self, C: Any) -> Any:
        if isinstance(C, (FullSet, EmptySet)):
            return C
        if isinstance(C, SingletonSet):
            return SingletonSet(self.apply(C.point))
        Ainv_t = np.linalg.inv(self.matrix).T

        def _row(u, c):
            w = Ainv_t @ u
            return w, c + float(np.dot(w, self.translation))

        return EuclideanConvex(
            halfspaces=tuple(_row(u, c) for u, c in C.halfspaces),
            equalities=tuple(_row(u, c) for u, c in C.equalities),
            balls=tuple((self.apply(center), r) for center, r in C.balls),
        )

    def compose(self, other: Any) -> "EuclideanIsometry":
        """self ∘ other"""
        if not isinstance(other, EuclideanIsometry) or other.target != self.source:
            raise CompositionError("isometrieën sluiten niet op elkaar aan")
        return EuclideanIsometry(
            other.source,
            self.target,
            self.matrix @ other.matrix,
            self.matrix @ other.translation + self.translation,
        )

    def inverse(self) -> "EuclideanIsometry":
        inv = np.linalg.inv(self.matrix)
        return EuclideanIsometry(self.target, self.source, inv, -inv @ self.translation)

    def describe(self) -> str:
        rows = ";".join(format_vector(r) for r in self.matrix)
        return f"A=[{rows}] b={format_vector(self.translation)}"


def translation(space: Euclidean, vector: Sequence[float]) -> EuclideanIsometry:
    return EuclideanIsometry(space, space, np.eye(space.dim), _as_vector(vector, space.dim))


def rotation_2d(space: Euclidean, angle: float, center: Sequence[float] = (0.0, 0.0)) -> EuclideanIsometry:
    if space.dim != 2:
        raise DomainError("vlakke rotatie vraagt Euclidean(2)")
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s], [s, c]])
    center = _as_vector(center, 2)
    return EuclideanIsometry(space, space, R, center - R @ center)


def rotation_3d(
    space: Euclidean,
    axis: Sequence[float],
    angle: float,
    shift: Sequence[float] = (0.0, 0.0, 0.0),
    center: Sequence[float] = (0.0, 0.0, 0.0),
) -> EuclideanIsometry:
    """Rotatie om de as door ``center`` (Rodrigues), gevolgd door verschuiving ``shift``."""
    if space.dim != 3:
        raise DomainError("rotatie om een as vraagt Euclidean(3)")
    k = _as_vector(axis, 3, "as")
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
    center = _as_vector(center, 3)
    return EuclideanIsometry(space, space, R, center - R @ center + _as_vector(shift, 3))
