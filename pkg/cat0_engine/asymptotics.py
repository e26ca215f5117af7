"""Limietverzamelingen op oneindig, vlakke randpunten en de Euclidische factor."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import minimize_scalar

from .boundary import AngularCenter, BusemannSum, angular_circumcenter
from .errors import EmptySetError, InvariantFailure, PreconditionError, UnsupportedError
from .models.base import EmptySet, FullSet, ModelSpace, SingletonSet
from .models.euclidean import Euclidean, EuclideanConvex, affine_frame
from .models.product import HALF_PI, JoinPoint, Product, ProductConvex
from .models.tree import Tree, TreeConvex, TreeEnd, point_space, tree_from_lists
from .spaces import is_point_space

logger = logging.getLogger(__name__)

LADDER_TOP = 60
TAIL_POINTS = 4


# =============================
# Geneste families
# =============================
@dataclass(frozen=True, eq=False)
class NestedConvexFamily:
    """Dalende rij convexe verzamelingen: een lijst, of een callback op de ladder 1, 2, 4, …"""

    members: Optional[Tuple[Any, ...]] = None
    callback: Optional[Callable[[float], Any]] = None
    real_indexed: bool = False
    label: str = "family"

    def levels(self) -> Iterator[Tuple[float, Any]]:
        if self.members is not None:
            for i, C in enumerate(self.members, start=1):
                yield float(i), C
            return
        for k in range(LADDER_TOP + 1):
            beta = float(2 ** k)
            yield beta, self.callback(beta)


@dataclass(frozen=True)
class OrbitPoint:
    index: float
    point: Any
    distance: float


def projection_orbit(space: ModelSpace, family: NestedConvexFamily, x0: Any, horizon: float = 1e4) -> List[OrbitPoint]:
    """Projecties van x0 op de familie tot voorbij de horizon; controleert monotonie."""
    x0 = space.check_point(x0)
    orbit: List[OrbitPoint] = []
    previous = None
    beyond = 0
    for index, C in family.levels():
        try:
            p = space.project(C, x0)
        except EmptySetError as e:
            raise PreconditionError(f"{family.label}: lege verzameling op index {index:g}") from e
        if previous is not None and not space.contains(previous, p, 1e-7):
            raise PreconditionError(f"{family.label}: familie is niet dalend bij index {index:g}")
        previous = C
        dist = space.distance(x0, p)
        orbit.append(OrbitPoint(index, p, dist))
        if dist > horizon:
            beyond += 1
            if beyond >= TAIL_POINTS:
                break
    if beyond == 0:
        raise PreconditionError(f"{family.label}: doorsnede niet leeg binnen de horizon {horizon:g}")
    return orbit


def limit_set(
    space: ModelSpace,
    family: NestedConvexFamily,
    x0: Any,
    horizon: float = 1e4,
    resolution: float = 1e-3,
) -> List[Any]:
    """Ophopingsrichtingen van de projectiebaan, geclusterd op hoekresolutie ``resolution``."""
    x0 = space.check_point(x0)
    orbit = projection_orbit(space, family, x0, horizon)
    tail = [o for o in orbit if o.distance > horizon]
    dirs = [(o.distance, space.direction_of(x0, o.point)) for o in tail]
    dirs = [(d, xi) for d, xi in dirs if xi is not None]
    if not dirs:
        raise PreconditionError(f"{family.label}: projectiebaan blijft begrensd")
    G = nx.Graph()
    G.add_nodes_from(range(len(dirs)))
    for i in range(len(dirs)):
        for j in range(i + 1, len(dirs)):
            if space.tits_angle(dirs[i][1], dirs[j][1]) <= resolution:
                G.add_edge(i, j)
    clusters = sorted((sorted(c) for c in nx.connected_components(G)), key=lambda c: c[0])
    out = []
    for cluster in clusters:
        far = max(cluster, key=lambda i: dirs[i][0])
        out.append(dirs[far][1])
    logger.debug("%s: %d ophopingsrichting(en)", family.label, len(out))
    return out


def limit_set_diameter_check(space: ModelSpace, L: Sequence[Any]) -> float:
    """Grootste onderlinge Tits-hoek in ``L``."""
    worst = 0.0
    for i in range(len(L)):
        for j in range(i + 1, len(L)):
            worst = max(worst, space.tits_angle(L[i], L[j]))
    return worst


def limit_circumcenter(space: ModelSpace, family: NestedConvexFamily, x0: Any, horizon: float = 1e4) -> AngularCenter:
    L = limit_set(space, family, x0, horizon)
    result = angular_circumcenter(space, L)
    if not isinstance(result, AngularCenter):
        raise InvariantFailure(f"{family.label}: hoekstraal {result.radius:.6g} van de limietverzameling is niet < π/2")
    return result


# =============================
# Affiniteitsdefect en vlakke punten
# =============================
def _sparse(points: List[Any], limit: int = 64) -> List[Any]:
    if len(points) <= limit:
        return points
    idx = np.linspace(0, len(points) - 1, limit).round().astype(int)
    return [points[i] for i in sorted(set(idx.tolist()))]


def affinity_defect(
    space: ModelSpace,
    f: Callable[[Any], float],
    x0: Any,
    R: float,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Δᴿ(f) = sup |f(γ(t)) − (1−t)f(z) − t·f(z′)| over z, z′ in B(x0, R)."""
    pts = _sparse(space.ball_sample(space.check_point(x0), R, rng))
    vals = [f(p) for p in pts]
    best, witness = 0.0, None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            for t in (0.25, 0.5, 0.75):
                gap = abs(f(space.geodesic_point(pts[i], pts[j], t)) - (1 - t) * vals[i] - t * vals[j])
                if gap > best:
                    best, witness = gap, (i, j)
    if witness is not None:
        i, j = witness
        gap = lambda t: -abs(f(space.geodesic_point(pts[i], pts[j], t)) - (1 - t) * vals[i] - t * vals[j])
        res = minimize_scalar(gap, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-9})
        best = max(best, -float(res.fun))
    return best


@dataclass(frozen=True)
class DefectRow:
    candidate: int
    label: str
    radius: float
    defect: float


@dataclass
class FlatSplit:
    F: List[Any] = field(default_factory=list)
    A: List[Any] = field(default_factory=list)
    P: List[Any] = field(default_factory=list)
    defects: List[DefectRow] = field(default_factory=list)


def _radii(r_max: float) -> Tuple[float, float, float]:
    return (r_max / 4, r_max / 2, r_max)


def flat_split(
    space: ModelSpace,
    grid: Sequence[Any],
    r_max: float = 8.0,
    defect_tol: float = 1e-6,
    x0: Any = None,
    angular_tol: float = 1e-6,
) -> FlatSplit:
    """Verdeel de kandidaten in vlakke punten F, antipodale A en loodrechte P."""
    x0 = space.origin() if x0 is None else space.check_point(x0)
    split = FlatSplit()
    cache = {}

    def is_flat(xi: Any, idx: Optional[int] = None) -> bool:
        key = space.format_boundary(xi)
        if key in cache:
            return cache[key]
        f = BusemannSum(space, x0, ((1.0, xi),))
        flat = True
        for R in _radii(r_max):
            d = affinity_defect(space, f, x0, R)
            if idx is not None:
                split.defects.append(DefectRow(idx, key, R, d))
            if d >= defect_tol:
                flat = False
                break
        cache[key] = flat
        return flat

    for idx, xi in enumerate(grid):
        if is_flat(xi, idx):
            split.F.append(xi)
    for xi in split.F:
        if any(is_flat(eta) for eta in space.antipodes(xi)):
            split.A.append(xi)
    for xi in split.F:
        to_a = min((space.tits_angle(xi, a) for a in split.A), default=math.pi / 2)
        if abs(to_a - math.pi / 2) <= angular_tol:
            split.P.append(xi)
    logger.info("flat split: |F|=%d |A|=%d |P|=%d", len(split.F), len(split.A), len(split.P))
    return split


# =============================
# Euclidische factor
# =============================
@dataclass(frozen=True, eq=False)
class Decomposition:
    """X ≅ ℝⁿ × Y met expliciete splits- en samenvoegafbeelding.

    ``rest_boundary`` zet ∂Y in ∂X, ``pull_rest`` gaat terug (None buiten ∂Y) en
    ``rest_convex`` maakt van D ⊂ Y de verzameling ℝⁿ × D ⊂ X.
    """

    space: ModelSpace
    e_dim: int
    rest: ModelSpace
    split: Callable[[Any], Tuple[np.ndarray, Any]]
    join: Callable[[np.ndarray, Any], Any]
    rest_boundary: Callable[[Any], Any]
    pull_rest: Callable[[Any], Optional[Any]]
    rest_convex: Callable[[Any], Any]


def _no_rest_boundary(xi: Any) -> Any:
    raise PreconditionError("de niet-Euclidische factor is een punt en heeft geen rand")


def _flat_rest_convex(D: Any) -> Any:
    return D if isinstance(D, EmptySet) else FullSet()


def _same(v: Any) -> Any:
    return v


def _cylinder(left: Any, right: Any) -> Any:
    if isinstance(left, EmptySet) or isinstance(right, EmptySet):
        return EmptySet()
    if isinstance(left, FullSet) and isinstance(right, FullSet):
        return FullSet()
    return ProductConvex(left, right)


def decompose(space: ModelSpace) -> Decomposition:
    if isinstance(space, Euclidean):
        star = point_space()
        return Decomposition(space, space.dim, star, lambda p: (np.asarray(p, dtype=float), star.origin()),
                             lambda v, y: np.asarray(v, dtype=float),
                             _no_rest_boundary, lambda xi: None, _flat_rest_convex)
    if isinstance(space, Tree):
        if space.is_line():
            star = point_space()
            return Decomposition(space, 1, star, lambda p: (np.array([space.line_coordinate(p)]), star.origin()),
                                 lambda v, y: space.line_point(float(v[0])),
                                 _no_rest_boundary, lambda xi: None, _flat_rest_convex)
        return Decomposition(space, 0, space, lambda p: (np.zeros(0), p), lambda v, y: y, _same, _same, _same)
    if isinstance(space, Product):
        left, right = decompose(space.left), decompose(space.right)
        n = left.e_dim
        if is_point_space(left.rest):
            rest = right.rest
            pack = lambda yl, yr: yr
            unpack = lambda y: (left.rest.origin(), y)
            rest_boundary = lambda eta: space.join(HALF_PI, None, right.rest_boundary(eta))
            pull_rest = lambda xi: right.pull_rest(xi.right) if xi.left is None and xi.right is not None else None

            def rest_convex(D):
                return _cylinder(FullSet(), right.rest_convex(D))
        elif is_point_space(right.rest):
            rest = left.rest
            pack = lambda yl, yr: yl
            unpack = lambda y: (y, right.rest.origin())
            rest_boundary = lambda eta: space.join(0.0, left.rest_boundary(eta), None)
            pull_rest = lambda xi: left.pull_rest(xi.left) if xi.right is None and xi.left is not None else None

            def rest_convex(D):
                return _cylinder(left.rest_convex(D), FullSet())
        else:
            rest = Product(left.rest, right.rest)
            pack = lambda yl, yr: (yl, yr)
            unpack = lambda y: y

            def rest_boundary(eta):
                return JoinPoint(
                    eta.theta,
                    left.rest_boundary(eta.left) if eta.left is not None else None,
                    right.rest_boundary(eta.right) if eta.right is not None else None,
                )

            def pull_rest(xi):
                lp = left.pull_rest(xi.left) if xi.left is not None else None
                rp = right.pull_rest(xi.right) if xi.right is not None else None
                if (xi.left is not None and lp is None) or (xi.right is not None and rp is None):
                    return None
                return JoinPoint(xi.theta, lp, rp)

            def rest_convex(D):
                if isinstance(D, (FullSet, EmptySet)):
                    return D
                if isinstance(D, SingletonSet):
                    DL, DR = SingletonSet(D.point[0]), SingletonSet(D.point[1])
                else:
                    DL, DR = D.left, D.right
                return _cylinder(left.rest_convex(DL), right.rest_convex(DR))

        def split(p):
            vl, yl = left.split(p[0])
            vr, yr = right.split(p[1])
            return np.concatenate([vl, vr]), pack(yl, yr)

        def join(v, y):
            yl, yr = unpack(y)
            return (left.join(v[:n], yl), right.join(v[n:], yr))

        return Decomposition(space, left.e_dim + right.e_dim, rest, split, join, rest_boundary, pull_rest, rest_convex)
    raise PreconditionError(f"geen gepresenteerde ruimte: {type(space).__name__}")


def euclidean_decomposition(space: ModelSpace) -> Tuple[int, ModelSpace]:
    d = decompose(space)
    return d.e_dim, d.rest


# =============================
# Convexe deelverzameling als ruimte
# =============================
@dataclass(frozen=True, eq=False)
class Presentation:
    """Een gesloten convexe C ⊂ X, opnieuw gepresenteerd als modelruimte Y ≅ C.

    ``embed`` en ``embed_boundary`` gaan van Y naar X, ``pull_boundary`` terug
    (None als het randpunt niet in ∂C ligt), ``embed_convex`` zet een convexe
    verzameling van Y om in die van X.
    """

    ambient: ModelSpace
    space: ModelSpace
    whole: Any
    embed: Callable[[Any], Any]
    embed_boundary: Callable[[Any], Any]
    pull_boundary: Callable[[Any], Optional[Any]]
    embed_convex: Callable[[Any], Any]


def _identity_presentation(space: ModelSpace, C: Any) -> Presentation:
    same = lambda v: v
    return Presentation(space, space, C, same, same, same, lambda D: D)


def _point_presentation(space: ModelSpace, p: Any) -> Presentation:
    def no_boundary(xi):
        raise PreconditionError("een punt heeft geen rand")

    star = point_space()
    return Presentation(
        space, star, SingletonSet(p), lambda y: p, no_boundary, lambda xi: None,
        lambda D: EmptySet() if isinstance(D, EmptySet) else SingletonSet(p),
    )


def _euclidean_presentation(space: Euclidean, C: Any) -> Presentation:
    frame = affine_frame(space, C)
    if frame is None:
        raise UnsupportedError(f"alleen affiene deelruimtes zijn presenteerbaar, kreeg {C.describe()}")
    o, F = frame
    k = F.shape[1]
    if k == 0:
        return _point_presentation(space, o)
    if k == space.dim:
        return _identity_presentation(space, C)

    def pull(xi):
        v = F.T @ np.asarray(xi, dtype=float)
        n = float(np.linalg.norm(v))
        return v / n if n > 1 - 1e-9 else None

    def embed_convex(D):
        if isinstance(D, FullSet):
            return C
        if isinstance(D, EmptySet):
            return D
        if isinstance(D, SingletonSet):
            return SingletonSet(o + F @ D.point)
        row = lambda u, c: (F @ u, c + float(np.dot(F @ u, o)))
        return EuclideanConvex(
            halfspaces=tuple(row(u, c) for u, c in D.halfspaces),
            equalities=tuple(row(u, c) for u, c in D.equalities) + C.equalities,
            balls=tuple((o + F @ c, r) for c, r in D.balls),
        )

    return Presentation(
        space, Euclidean(k), C,
        lambda y: o + F @ np.asarray(y, dtype=float),
        lambda eta: F @ np.asarray(eta, dtype=float),
        pull, embed_convex,
    )


def _tree_presentation(space: Tree, C: Any) -> Presentation:
    if isinstance(C, FullSet):
        return _identity_presentation(space, C)
    pieces = [(e, lo, hi) for e, lo, hi in C.intervals if hi > lo]
    if not pieces:
        e, lo, _ = C.intervals[0]
        return _point_presentation(space, space.canonical(e, lo))
    if len({e for e, _, _ in pieces}) != len(pieces):
        raise UnsupportedError("deelboom met meerdere stukken op één element")
    whole = {e: (0.0, el.length) for e, el in space.elements.items()}
    if {e: (lo, hi) for e, lo, hi in pieces} == whole:
        return _identity_presentation(space, C)

    def name(element, s):
        p = space.canonical(element, s)
        v = space.vertex_at(p)
        return v if v is not None else f"{p.element}@{p.offset:.12g}"

    vertices, edges, rays, start = [], [], [], {}
    for e, lo, hi in pieces:
        start[e] = lo
        tail = name(e, lo)
        vertices.append(tail)
        if math.isinf(hi):
            rays.append((e, tail))
        else:
            head = name(e, hi)
            vertices.append(head)
            edges.append((e, tail, head, hi - lo))
    sub = tree_from_lists(list(dict.fromkeys(vertices)), edges, rays, name=f"{space.name}|C")
    ray_ids = {r for r, _ in rays}

    def embed_convex(D):
        if isinstance(D, FullSet):
            return C
        if isinstance(D, EmptySet):
            return D
        if isinstance(D, SingletonSet):
            return SingletonSet(embed(D.point))
        return TreeConvex(tuple((e, start[e] + a, start[e] + b) for e, a, b in D.intervals))

    embed = lambda y: space.canonical(y.element, start[y.element] + y.offset)
    return Presentation(
        space, sub, C, embed,
        lambda eta: TreeEnd(eta.ray),
        lambda xi: TreeEnd(xi.ray) if xi.ray in ray_ids else None,
        embed_convex,
    )


def _product_presentation(space: Product, C: Any) -> Presentation:
    CL, CR = space.split_convex(C)
    pl, pr = present_convex(space.left, CL), present_convex(space.right, CR)
    left_point, right_point = is_point_space(pl.space), is_point_space(pr.space)
    if left_point and right_point:
        return _point_presentation(space, (pl.embed(pl.space.origin()), pr.embed(pr.space.origin())))

    def factor_convex(D):
        if isinstance(D, FullSet):
            return C
        if isinstance(D, EmptySet):
            return D
        if isinstance(D, SingletonSet):
            return SingletonSet(embed(D.point))
        if left_point:
            return ProductConvex(pl.whole, pr.embed_convex(D))
        if right_point:
            return ProductConvex(pl.embed_convex(D), pr.whole)
        return ProductConvex(pl.embed_convex(D.left), pr.embed_convex(D.right))

    if left_point:
        fixed = pl.embed(pl.space.origin())
        embed = lambda y: (fixed, pr.embed(y))
        embed_b = lambda eta: space.join(HALF_PI, None, pr.embed_boundary(eta))
        pull = lambda xi: pr.pull_boundary(xi.right) if xi.theta == HALF_PI else None
        return Presentation(space, pr.space, C, embed, embed_b, pull, factor_convex)
    if right_point:
        fixed = pr.embed(pr.space.origin())
        embed = lambda y: (pl.embed(y), fixed)
        embed_b = lambda eta: space.join(0.0, pl.embed_boundary(eta), None)
        pull = lambda xi: pl.pull_boundary(xi.left) if xi.theta == 0.0 else None
        return Presentation(space, pl.space, C, embed, embed_b, pull, factor_convex)

    def embed(y):
        return (pl.embed(y[0]), pr.embed(y[1]))

    def embed_b(eta):
        return JoinPoint(
            eta.theta,
            pl.embed_boundary(eta.left) if eta.left is not None else None,
            pr.embed_boundary(eta.right) if eta.right is not None else None,
        )

    def pull(xi):
        left = pl.pull_boundary(xi.left) if xi.left is not None else None
        right = pr.pull_boundary(xi.right) if xi.right is not None else None
        if (xi.left is not None and left is None) or (xi.right is not None and right is None):
            return None
        return JoinPoint(xi.theta, left, right)

    return Presentation(space, Product(pl.space, pr.space), C, embed, embed_b, pull, factor_convex)


def present_convex(space: ModelSpace, C: Any) -> Presentation:
    """Presenteer een punt, affiene deelruimte, deelboom of product daarvan als ruimte."""
    if isinstance(C, EmptySet):
        raise EmptySetError("de lege verzameling is geen ruimte")
    if isinstance(C, SingletonSet):
        return _point_presentation(space, space.check_point(C.point))
    if isinstance(space, Euclidean):
        return _euclidean_presentation(space, C)
    if isinstance(space, Tree):
        return _tree_presentation(space, C)
    if isinstance(space, Product):
        return _product_presentation(space, C)
    raise UnsupportedError(f"presentatie in {type(space).__name__}")


def flat_rank(space: ModelSpace, C: Any) -> int:
    """Dimensie van de Euclidische factor van C."""
    return decompose(present_convex(space, C).space).e_dim
