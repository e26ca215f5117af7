"""Vergelijkingsdriehoeken, CAT(0)-audit, projecties, circumcentra en hoeken."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from itertools import product as cartesian
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, DegenerateVertexError, NumericError
from .models.base import ModelSpace, clamp_unit
from .models.euclidean import Euclidean
from .models.product import Product
from .models.tree import Tree

logger = logging.getLogger(__name__)

TRIANGLE_TOL = 1e-9


# =============================
# Vergelijkingsdriehoeken
# =============================
@dataclass(frozen=True)
class ComparisonTriangle:
    """Euclidische driehoek met zijden d(x,y), d(x,z), d(y,z)."""

    dxy: float
    dxz: float
    dyz: float
    x_bar: np.ndarray
    y_bar: np.ndarray
    z_bar: np.ndarray

    def point_on_xy(self, t: float) -> np.ndarray:
        return (1 - t) * self.x_bar + t * self.y_bar


def comparison_triangle(dxy: float, dxz: float, dyz: float) -> ComparisonTriangle:
    scale = max(1.0, dxy, dxz, dyz)
    if dxy > dxz + dyz + TRIANGLE_TOL * scale or dxz > dxy + dyz + TRIANGLE_TOL * scale or dyz > dxy + dxz + TRIANGLE_TOL * scale:
        raise ArgumentError(f"zijden ({dxy}, {dxz}, {dyz}) schenden de driehoeksongelijkheid")
    x_bar = np.zeros(2)
    y_bar = np.array([dxy, 0.0])
    if dxy == 0:
        z_bar = np.array([dxz, 0.0])
    else:
        u = (dxy * dxy + dxz * dxz - dyz * dyz) / (2 * dxy)
        z_bar = np.array([u, math.sqrt(max(0.0, dxz * dxz - u * u))])
    return ComparisonTriangle(dxy, dxz, dyz, x_bar, y_bar, z_bar)


def angle_from_sides(a: float, b: float, opposite: float) -> float:
    """Hoek tussen zijden a en b tegenover ``opposite`` (cosinusregel, geklemd)."""
    return math.acos(clamp_unit((a * a + b * b - opposite * opposite) / (2 * a * b)))


def comparison_angle(space: ModelSpace, p: Any, x: Any, y: Any) -> float:
    p, x, y = space.check_point(p), space.check_point(x), space.check_point(y)
    dpx, dpy = space.distance(p, x), space.distance(p, y)
    if dpx == 0 or dpy == 0:
        raise DegenerateVertexError("hoekpunt valt samen met een been")
    return angle_from_sides(dpx, dpy, space.distance(x, y))


def alexandrov_angle(space: ModelSpace, p: Any, x: Any, y: Any, ladder: int = 48, tol: float = 1e-7) -> float:
    """Limiet van 2·arcsin(d(c_x(s), c_y(s)) / 2s) voor s ↓ 0, langs een halveringsladder."""
    p, x, y = space.check_point(p), space.check_point(x), space.check_point(y)
    dpx, dpy = space.distance(p, x), space.distance(p, y)
    if dpx == 0 or dpy == 0:
        raise DegenerateVertexError("hoekpunt valt samen met een been")
    s = min(dpx, dpy)
    previous: Optional[float] = None
    for _ in range(ladder):
        cx = space.geodesic_point(p, x, s / dpx)
        cy = space.geodesic_point(p, y, s / dpy)
        value = 2 * math.asin(clamp_unit(space.distance(cx, cy) / (2 * s)))
        if previous is not None and abs(value - previous) < tol:
            return value
        previous = value
        s /= 2
    raise NumericError("Alexandrov-hoek convergeert niet", (previous, value))


# =============================
# CAT(0)-audit
# =============================
@dataclass(frozen=True)
class AuditRow:
    triple: int
    kind: str
    violation: float


@dataclass
class AuditReport:
    rows: List[AuditRow] = field(default_factory=list)

    @property
    def worst(self) -> Optional[AuditRow]:
        best = None
        for row in self.rows:
            if best is None or row.violation > best.violation:
                best = row
        return best

    @property
    def max_violation(self) -> float:
        return self.worst.violation if self.rows else 0.0

    def flagged(self, tol: float = 1e-9) -> List[AuditRow]:
        return [row for row in self.rows if row.violation > tol]


def cn_violation(dxy: float, dxz: float, dyz: float, dxm: float) -> float:
    """CN-ongelijkheid d(x,m)² ≤ (d(x,y)² + d(x,z)²)/2 − d(y,z)²/4 voor m midden van [y,z]."""
    return dxm * dxm - ((dxy * dxy + dxz * dxz) / 2 - dyz * dyz / 4)


def audit_cat0(space: ModelSpace, sample: Sequence[Tuple[Any, Any, Any]], grid: int = 21) -> AuditReport:
    """Toets d(z, q) ≤ d(z̄, q̄) voor q op [x,y] en de CN-ongelijkheid, per drietal."""
    report = AuditReport()
    ts = np.linspace(0.0, 1.0, grid)
    for idx, (x, y, z) in enumerate(sample):
        x, y, z = space.check_point(x), space.check_point(y), space.check_point(z)
        dxy, dxz, dyz = space.distance(x, y), space.distance(x, z), space.distance(y, z)
        tri = comparison_triangle(dxy, dxz, dyz)
        worst = -math.inf
        for t in ts:
            q = space.geodesic_point(x, y, float(t))
            bar = float(np.linalg.norm(tri.z_bar - tri.point_on_xy(float(t))))
            worst = max(worst, space.distance(z, q) - bar)
        report.rows.append(AuditRow(idx, "comparison", max(worst, 0.0)))
        m = space.geodesic_point(x, y, 0.5)
        cn = cn_violation(dxz, dyz, dxy, space.distance(z, m))
        report.rows.append(AuditRow(idx, "cn", max(cn, 0.0)))
    logger.debug("audit over %d drietallen, max schending %.3g", len(sample), report.max_violation)
    return report


def audit_quadruples(quadruples: Sequence[Tuple[float, float, float, float]]) -> AuditReport:
    """CN-toets op ruwe afstandsviertallen (d_xy, d_xz, d_yz, d_xm)."""
    report = AuditReport()
    for idx, (dxy, dxz, dyz, dxm) in enumerate(quadruples):
        report.rows.append(AuditRow(idx, "cn-raw", max(cn_violation(dxy, dxz, dyz, dxm), 0.0)))
    return report


def sample_triples(space: ModelSpace, rng: np.random.Generator, count: int, scale: float = 5.0) -> List[Tuple[Any, Any, Any]]:
    out = []
    while len(out) < count:
        x, y, z = (space.random_point(rng, scale) for _ in range(3))
        if space.distance(x, y) > 0 and space.distance(x, z) > 0 and space.distance(y, z) > 0:
            out.append((x, y, z))
    return out


# =============================
# Projectie
# =============================
def project_convex(space: ModelSpace, C: Any, x: Any) -> Any:
    return space.project(C, space.check_point(x))


# =============================
# Circumcentra
# =============================
def weighted_minimax(P: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, float]:
    """Minimaliseer max_i |c − P_i|² + w_i exact, door opsomming van steunverzamelingen."""
    n, m = P.shape
    best_c, best_val = None, math.inf
    for k in range(1, min(n, m + 1) + 1):
        for support in combinations(range(n), k):
            P0 = P[support[0]]
            if k == 1:
                c = P0.copy()
            else:
                rest = list(support[1:])
                D = P[rest] - P0
                rhs = (D * D).sum(axis=1) + w[rest] - w[support[0]]
                G = 2.0 * D @ D.T
                lam = np.linalg.lstsq(G, rhs, rcond=None)[0]
                if np.max(np.abs(G @ lam - rhs)) > 1e-9 * max(1.0, float(np.max(np.abs(rhs)))):
                    continue
                c = P0 + D.T @ lam
            val = float(np.max(((P - c) ** 2).sum(axis=1) + w))
            if val < best_val - 1e-15:
                best_c, best_val = c, val
    return best_c, best_val


def _leaves(space: ModelSpace) -> List[ModelSpace]:
    if isinstance(space, Product):
        return _leaves(space.left) + _leaves(space.right)
    return [space]


def _split(space: ModelSpace, p: Any) -> List[Any]:
    if isinstance(space, Product):
        return _split(space.left, p[0]) + _split(space.right, p[1])
    return [p]


def _join(space: ModelSpace, parts: List[Any]) -> Any:
    if isinstance(space, Product):
        left = _join(space.left, parts)
        right = _join(space.right, parts)
        return (left, right)
    return parts.pop(0)


def _circumcenter_pieces(space: ModelSpace, B: List[Any]) -> Tuple[Any, float]:
    """Exact circumcentrum in een product van Euclidische ruimtes en bomen.

    Op een boomelement e geldt d(e@s, y) = |s − z_y| voor alle s, dus per keuze
    van elementen is het probleem een gewogen omsluitende bal met een doos op
    de boomcoördinaten. Elke boomcoördinaat is vrij of zit op een rand.
    """
    leaves = _leaves(space)
    split = [_split(space, b) for b in B]
    n = len(B)
    choices = []
    for leaf in leaves:
        if isinstance(leaf, Euclidean):
            choices.append([None])
        elif isinstance(leaf, Tree):
            choices.append(list(leaf.elements))
        else:
            raise ArgumentError(f"onbekende bladruimte {type(leaf).__name__}")
    best, best_val = None, math.inf
    for elements in cartesian(*choices):
        columns: List[np.ndarray] = []
        euclid_layout = {}
        tree_data = []
        for li, (leaf, element) in enumerate(zip(leaves, elements)):
            if element is None:
                euclid_layout[li] = (sum(c.shape[1] for c in columns), leaf.dim)
                columns.append(np.array([split[i][li] for i in range(n)], dtype=float).reshape(n, leaf.dim))
            else:
                z = np.array([leaf.element_coordinate(element, split[i][li]) for i in range(n)])
                tree_data.append((li, z, leaf.elements[element].length))
        width = sum(c.shape[1] for c in columns)
        faces_per = [[None, 0.0] + ([length] if math.isfinite(length) else []) for _, _, length in tree_data]
        for faces in cartesian(*faces_per):
            cols = list(columns)
            w = np.zeros(n)
            tree_layout = {}
            for (li, z, length), face in zip(tree_data, faces):
                if face is None:
                    tree_layout[li] = ("free", width + len(cols) - len(columns), length)
                    cols.append(z.reshape(n, 1))
                else:
                    tree_layout[li] = ("fixed", face, length)
                    w += (face - z) ** 2
            P = np.hstack(cols) if cols else np.zeros((n, 0))
            c, val = weighted_minimax(P, w)
            if c is None or val >= best_val - 1e-15:
                continue
            if any(kind == "free" and not -1e-12 <= c[pos] <= length + 1e-12 for kind, pos, length in tree_layout.values()):
                continue
            best_val = val
            best = (elements, c, euclid_layout, tree_layout)
    elements, c, euclid_layout, tree_layout = best
    parts: List[Any] = []
    for li, (leaf, element) in enumerate(zip(leaves, elements)):
        if element is None:
            start, dim = euclid_layout[li]
            parts.append(np.array(c[start:start + dim], dtype=float))
        else:
            kind, pos, length = tree_layout[li]
            s = float(c[pos]) if kind == "free" else float(pos)
            parts.append(leaf.canonical(element, min(max(s, 0.0), length)))
    return _join(space, parts), best_val


def circumcenter(space: ModelSpace, B: Sequence[Any]) -> Tuple[Any, float]:
    """Uniek punt c dat max_{y∈B} d(c, y) minimaliseert, met die straal."""
    B = [space.check_point(b) for b in B]
    if not B:
        raise ArgumentError("circumcentrum van een lege verzameling")
    if len(B) == 1:
        return B[0], 0.0
    center, _ = _circumcenter_pieces(space, B)
    radius = max(space.distance(center, b) for b in B)
    return center, radius
