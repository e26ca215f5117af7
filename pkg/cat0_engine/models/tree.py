"""Metrische bomen: eindige gewogen graaf zonder cycli, met oneindige stralen.

Een punt is ``TreePoint(element, offset)``: element is een kant of straal,
offset de lengte vanaf de staart (bij stralen: vanaf het aanhechtpunt).
Hoekpunten krijgen één canonieke representatie zodat gelijkheid beslisbaar is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..errors import CompositionError, DomainError, EmptySetError
from .base import (
    EmptySet,
    FullSet,
    ModelSpace,
    SingletonSet,
    generic_contains,
    generic_intersect,
)

SNAP = 1e-12


@dataclass(frozen=True)
class TreeEdge:
    id: str
    tail: str
    head: str
    length: float


@dataclass(frozen=True)
class TreeRay:
    id: str
    vertex: str


@dataclass(frozen=True)
class TreePoint:
    element: str
    offset: float

    def __str__(self) -> str:
        return f"{self.element}@{self.offset:.12g}"


@dataclass(frozen=True)
class TreeEnd:
    ray: str

    def __str__(self) -> str:
        return f"end:{self.ray}"


@dataclass(frozen=True)
class _Element:
    tail: str
    head: Optional[str]  # None bij stralen
    length: float

    @property
    def is_ray(self) -> bool:
        return self.head is None


@dataclass(frozen=True)
class Tree(ModelSpace):
    vertices: Tuple[str, ...]
    edges: Tuple[TreeEdge, ...] = ()
    rays: Tuple[TreeRay, ...] = ()
    name: str = "tree"

    kind = "tree"

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "rays", tuple(self.rays))
        if not self.vertices:
            raise DomainError("boom heeft minstens één hoekpunt nodig")
        ids = list(self.vertices) + [e.id for e in self.edges] + [r.id for r in self.rays]
        if len(set(ids)) != len(ids):
            raise DomainError("hoekpunt-, kant- en straal-ids moeten uniek zijn")
        known = set(self.vertices)
        for e in self.edges:
            if e.tail not in known or e.head not in known:
                raise DomainError(f"kant {e.id} verwijst naar onbekend hoekpunt")
            if e.tail == e.head:
                raise DomainError(f"kant {e.id} is een lus")
            if not (math.isfinite(e.length) and e.length > 0):
                raise DomainError(f"kant {e.id} heeft ongeldige lengte {e.length}")
        for r in self.rays:
            if r.vertex not in known:
                raise DomainError(f"straal {r.id} hangt aan onbekend hoekpunt {r.vertex}")
        if not nx.is_tree(self.graph):
            raise DomainError("graaf moet samenhangend en acyclisch zijn")

    # =============================
    # Combinatoriek
    # =============================
    @cached_property
    def graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.vertices)
        for e in self.edges:
            G.add_edge(e.tail, e.head, length=float(e.length), id=e.id)
        return G

    @cached_property
    def _vdist(self) -> Dict[str, Dict[str, float]]:
        return dict(nx.all_pairs_dijkstra_path_length(self.graph, weight="length"))

    @cached_property
    def elements(self) -> Dict[str, _Element]:
        out: Dict[str, _Element] = {}
        for e in self.edges:
            out[e.id] = _Element(e.tail, e.head, float(e.length))
        for r in self.rays:
            out[r.id] = _Element(r.vertex, None, math.inf)
        if not out:
            # één los hoekpunt: pseudo-element met lengte 0
            v = self.vertices[0]
            out[v] = _Element(v, v, 0.0)
        return out

    @cached_property
    def _vertex_home(self) -> Dict[str, TreePoint]:
        home: Dict[str, TreePoint] = {}
        for e in self.edges:
            home.setdefault(e.tail, TreePoint(e.id, 0.0))
        for r in self.rays:
            home.setdefault(r.vertex, TreePoint(r.id, 0.0))
        for e in self.edges:
            home.setdefault(e.head, TreePoint(e.id, float(e.length)))
        for v in self.vertices:
            home.setdefault(v, TreePoint(v, 0.0))
        return home

    @cached_property
    def _incident(self) -> Dict[str, List[TreePoint]]:
        """Alle representaties van elk hoekpunt."""
        reps: Dict[str, List[TreePoint]] = {v: [] for v in self.vertices}
        for eid, el in self.elements.items():
            reps[el.tail].append(TreePoint(eid, 0.0))
            if el.head is not None and el.head != el.tail:
                reps[el.head].append(TreePoint(eid, el.length))
        return reps

    def vertex_distance(self, u: str, v: str) -> float:
        return self._vdist[u][v]

    def vertex_point(self, v: str) -> TreePoint:
        if v not in self._vertex_home:
            raise DomainError(f"onbekend hoekpunt {v!r}")
        return self._vertex_home[v]

    def vertex_at(self, p: TreePoint) -> Optional[str]:
        el = self.elements[p.element]
        if p.offset == 0.0:
            return el.tail
        if el.head is not None and p.offset == el.length:
            return el.head
        return None

    def ray_of(self, end: TreeEnd) -> TreeRay:
        for r in self.rays:
            if r.id == end.ray:
                return r
        raise DomainError(f"boom heeft geen einde {end.ray!r}")

    # =============================
    # Punten
    # =============================
    def canonical(self, element: str, offset: float) -> TreePoint:
        el = self.elements[element]
        if offset <= SNAP:
            return self._vertex_home[el.tail]
        if el.head is not None and offset >= el.length - SNAP * max(1.0, el.length):
            return self._vertex_home[el.head]
        return TreePoint(element, float(offset))

    def point(self, literal: Any) -> TreePoint:
        """``"a@1.5"``, een hoekpunt-id of een ``TreePoint``."""
        if isinstance(literal, TreePoint):
            return self.check_point(literal)
        if isinstance(literal, str):
            if "@" in literal:
                element, _, offset = literal.partition("@")
                try:
                    value = float(offset)
                except ValueError as e:
                    raise DomainError(f"ongeldige offset in {literal!r}") from e
                return self.check_point(TreePoint(element.strip(), value))
            return self.vertex_point(literal.strip())
        raise DomainError(f"geen boompunt: {literal!r}")

    def check_point(self, p: Any) -> TreePoint:
        if not isinstance(p, TreePoint):
            raise DomainError(f"geen boompunt: {p!r}")
        if p.element not in self.elements:
            raise DomainError(f"onbekend element {p.element!r}")
        el = self.elements[p.element]
        s = float(p.offset)
        if not math.isfinite(s) or s < -SNAP or s > el.length + SNAP * max(1.0, el.length):
            raise DomainError(f"offset {p.offset} buiten [0, {el.length}] op {p.element}")
        return self.canonical(p.element, min(max(s, 0.0), el.length))

    def _exits(self, p: TreePoint) -> List[Tuple[str, float]]:
        el = self.elements[p.element]
        if el.head is None or el.head == el.tail:
            return [(el.tail, p.offset)]
        return [(el.tail, p.offset), (el.head, el.length - p.offset)]

    def _best_exits(self, p: TreePoint, q: TreePoint) -> Tuple[float, str, str]:
        best = (math.inf, "", "")
        for a, da in self._exits(p):
            for b, db in self._exits(q):
                total = da + self._vdist[a][b] + db
                if total < best[0]:
                    best = (total, a, b)
        return best

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        if p.element == q.element:
            return abs(p.offset - q.offset)
        return self._best_exits(p, q)[0]

    def element_coordinate(self, element: str, y: TreePoint) -> float:
        """Positie z met d(element@s, y) = |s − z| voor alle s op het element."""
        if y.element == element:
            return y.offset
        el = self.elements[element]
        to_tail = self.distance(y, self._vertex_home[el.tail])
        if el.head is None or el.head == el.tail:
            return -to_tail
        to_head = self.distance(y, self._vertex_home[el.head])
        return -to_tail if to_tail <= to_head else el.length + to_head

    def _path_pieces(self, p: TreePoint, q: TreePoint) -> List[Tuple[str, float, float]]:
        if p.element == q.element:
            return [(p.element, p.offset, q.offset)]
        _, a, b = self._best_exits(p, q)
        pieces = [(p.element, p.offset, 0.0 if a == self.elements[p.element].tail else self.elements[p.element].length)]
        route = nx.shortest_path(self.graph, a, b, weight="length")
        for v, w in zip(route, route[1:]):
            data = self.graph.edges[v, w]
            eid, length = data["id"], data["length"]
            if self.elements[eid].tail == v:
                pieces.append((eid, 0.0, length))
            else:
                pieces.append((eid, length, 0.0))
        q_el = self.elements[q.element]
        pieces.append((q.element, 0.0 if b == q_el.tail else q_el.length, q.offset))
        return pieces

    def geodesic_point(self, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
        if t == 0:
            return p
        if t == 1:
            return q
        remaining = t * self.distance(p, q)
        for element, start, end in self._path_pieces(p, q):
            length = abs(end - start)
            if remaining <= length:
                step = remaining if end >= start else -remaining
                return self.canonical(element, start + step)
            remaining -= length
        return q

    def origin(self) -> TreePoint:
        return self._vertex_home[self.vertices[0]]

    def anchor_points(self) -> List[TreePoint]:
        return [self._vertex_home[v] for v in self.vertices]

    def random_point(self, rng: np.random.Generator, scale: float = 5.0) -> TreePoint:
        names = list(self.elements)
        element = names[int(rng.integers(len(names)))]
        el = self.elements[element]
        top = el.length if math.isfinite(el.length) else scale
        return self.canonical(element, float(rng.uniform(0.0, top)))

    def ball_sample(self, center: TreePoint, radius: float, rng: Optional[np.random.Generator] = None) -> List[TreePoint]:
        pts: List[TreePoint] = [center]
        seen = {center}
        step = radius / 4.0
        for element, el in self.elements.items():
            z = self.element_coordinate(element, center)
            # d(element@s, center) = |s - z|, dus de bal snijdt het element in [lo, hi]
            lo, hi = max(0.0, z - radius), min(el.length, z + radius)
            if lo > hi:
                continue
            offsets = {lo, hi} | {z + k * step for k in range(-4, 5) if lo <= z + k * step <= hi}
            for s in sorted(offsets):
                p = self.canonical(element, min(s, el.length))
                if p not in seen and self.distance(center, p) <= radius + 1e-12:
                    seen.add(p)
                    pts.append(p)
        if rng is not None:
            for _ in range(6):
                p = self.random_point(rng, scale=radius)
                if p not in seen and self.distance(center, p) <= radius:
                    seen.add(p)
                    pts.append(p)
        return pts

    def format_point(self, p: TreePoint) -> str:
        v = self.vertex_at(p)
        return v if v is not None else str(p)

    # =============================
    # Rand op oneindig
    # =============================
    def has_boundary(self) -> bool:
        return bool(self.rays)

    def end(self, ray: str) -> TreeEnd:
        return self.check_boundary(TreeEnd(ray))

    def check_boundary(self, xi: Any) -> TreeEnd:
        if not isinstance(xi, TreeEnd):
            raise DomainError(f"geen boomeinde: {xi!r}")
        self.ray_of(xi)
        return xi

    def height(self, xi: TreeEnd, x: TreePoint) -> float:
        """Busemann-functie naar ``xi``, genormeerd op het aanhechtpunt van de straal."""
        ray = self.ray_of(xi)
        if x.element == ray.id:
            return -x.offset
        return self.distance(x, self._vertex_home[ray.vertex])

    def busemann(self, x0: TreePoint, xi: TreeEnd, x: TreePoint) -> float:
        return self.height(xi, x) - self.height(xi, x0)

    def ray_point(self, x: TreePoint, xi: TreeEnd, t: float) -> TreePoint:
        ray = self.ray_of(xi)
        if x.element == ray.id:
            return self.canonical(ray.id, x.offset + t)
        foot = self._vertex_home[ray.vertex]
        d = self.distance(x, foot)
        if t <= d:
            return self.geodesic_point(x, foot, t / d) if d > 0 else foot
        return self.canonical(ray.id, t - d)

    def tits_angle(self, xi: TreeEnd, eta: TreeEnd) -> float:
        return 0.0 if xi.ray == eta.ray else math.pi

    def boundary_grid(self, count: int = 64) -> List[TreeEnd]:
        return [TreeEnd(r.id) for r in self.rays]

    def antipodes(self, xi: TreeEnd) -> List[TreeEnd]:
        # elk ander einde is via een lijn met xi verbonden
        return [TreeEnd(r.id) for r in self.rays if r.id != xi.ray]

    def direction_of(self, x0: TreePoint, p: TreePoint) -> Optional[TreeEnd]:
        el = self.elements[p.element]
        if el.is_ray and p.offset > 0:
            return TreeEnd(p.element)
        return None

    def format_boundary(self, xi: TreeEnd) -> str:
        return str(xi)

    # =============================
    # Lijnbomen
    # =============================
    @cached_property
    def _line_path(self) -> Optional[List[str]]:
        if len(self.rays) != 2:
            return None
        route = nx.shortest_path(self.graph, self.rays[0].vertex, self.rays[1].vertex, weight="length")
        return route if len(route) == len(self.vertices) else None

    def is_line(self) -> bool:
        """Precies twee einden en geen verdere vertakking; de eerste straal is het negatieve einde."""
        return self._line_path is not None

    def _require_line(self) -> None:
        if not self.is_line():
            raise DomainError(f"{self.name} is geen lijnboom")

    def line_coordinate(self, p: TreePoint) -> float:
        self._require_line()
        if p.element == self.rays[0].id:
            return -p.offset
        return self.distance(p, self._vertex_home[self.rays[0].vertex])

    def line_point(self, c: float) -> TreePoint:
        self._require_line()
        neg, pos = self.rays
        if c <= 0:
            return self.canonical(neg.id, -c)
        span = self._vdist[neg.vertex][pos.vertex]
        if c >= span:
            return self.canonical(pos.id, c - span)
        return self.geodesic_point(self._vertex_home[neg.vertex], self._vertex_home[pos.vertex], c / span)

    def line_interval(self, lo: float, hi: float) -> "TreeConvex":
        """Deelboom met lijncoördinaat in [lo, hi]."""
        self._require_line()
        intervals = []
        for element, el in self.elements.items():
            if el.is_ray:
                base = self.line_coordinate(self._vertex_home[el.tail])
                if element == self.rays[0].id:
                    a, b = max((base - hi), 0.0), (base - lo)
                else:
                    a, b = max(lo - base, 0.0), hi - base
            else:
                t0 = self.line_coordinate(self._vertex_home[el.tail])
                t1 = self.line_coordinate(self._vertex_home[el.head])
                if t0 <= t1:
                    a, b = max(lo - t0, 0.0), min(hi - t0, el.length)
                else:
                    a, b = max(t0 - hi, 0.0), min(t0 - lo, el.length)
            if a <= b:
                intervals.append((element, a, b))
        if not intervals:
            return EmptySet()
        return TreeConvex(tuple(intervals))

    # =============================
    # Convexe verzamelingen
    # =============================
    def _reps(self, x: TreePoint) -> List[TreePoint]:
        v = self.vertex_at(x)
        return self._incident[v] if v is not None else [x]

    def contains(self, C: Any, x: TreePoint, tol: float = 1e-9) -> bool:
        found = generic_contains(self, C, x, tol)
        if found is not None:
            return found
        for rep in self._reps(x):
            for element, lo, hi in C.intervals:
                if rep.element == element and lo - tol <= rep.offset <= hi + tol:
                    return True
        return False

    def project(self, C: Any, x: TreePoint) -> TreePoint:
        if isinstance(C, FullSet):
            return x
        if isinstance(C, EmptySet):
            raise EmptySetError("projectie op de lege verzameling")
        if isinstance(C, SingletonSet):
            return C.point
        best, best_dist = None, math.inf
        for element, lo, hi in C.intervals:
            candidates = [lo] + ([hi] if math.isfinite(hi) else [])
            for rep in self._reps(x):
                if rep.element == element:
                    candidates.append(min(max(rep.offset, lo), hi))
            for s in candidates:
                p = self.canonical(element, s)
                d = self.distance(x, p)
                if d < best_dist - 1e-15:
                    best, best_dist = p, d
        if best is None:
            raise EmptySetError("deelboom is leeg")
        return best

    def intersect(self, C: Any, D: Any) -> Any:
        found = generic_intersect(self, C, D)
        if found is not None:
            return found
        intervals = []
        for e1, lo1, hi1 in C.intervals:
            for e2, lo2, hi2 in D.intervals:
                if e1 == e2 and max(lo1, lo2) <= min(hi1, hi2):
                    intervals.append((e1, max(lo1, lo2), min(hi1, hi2)))
        for v in self.vertices:
            home = self._vertex_home[v]
            if self.contains(C, home, 0.0) and self.contains(D, home, 0.0):
                intervals.append((home.element, home.offset, home.offset))
        if not intervals:
            return EmptySet()
        return TreeConvex(tuple(intervals))

    def whole(self) -> "TreeConvex":
        return TreeConvex(tuple((e, 0.0, el.length) for e, el in self.elements.items()))

    def segment(self, p: TreePoint, q: TreePoint) -> "TreeConvex":
        intervals = [(e, min(a, b), max(a, b)) for e, a, b in self._path_pieces(p, q)]
        return TreeConvex(tuple(intervals))

    def beyond(self, p: TreePoint) -> "TreeConvex":
        """Gesloten deelboom voorbij ``p``, weg van de staart van zijn element."""
        el = self.elements[p.element]
        if el.is_ray or el.head == el.tail:
            return TreeConvex(((p.element, p.offset, el.length),))
        G = self.graph.copy()
        G.remove_edge(el.tail, el.head)
        side = nx.node_connected_component(G, el.head)
        intervals = [(p.element, p.offset, el.length)]
        for eid, other in self.elements.items():
            if eid != p.element and other.tail in side:
                intervals.append((eid, 0.0, other.length))
        return TreeConvex(tuple(intervals))

    def identity(self) -> "TreeAutomorphism":
        return TreeAutomorphism(self, self, {v: v for v in self.vertices}, {r.id: r.id for r in self.rays})


@dataclass(frozen=True, eq=False)
class TreeConvex:
    """Gesloten samenhangende deelboom als vereniging van intervallen (element, lo, hi)."""

    intervals: Tuple[Tuple[str, float, float], ...]

    def describe(self) -> str:
        return " ".join(f"{e}:[{lo:.12g},{hi:.12g}]" for e, lo, hi in self.intervals)


# =============================
# Isometrieën
# =============================
def _line_form(g: Any) -> "TreeLineMap":
    if isinstance(g, TreeLineMap):
        return g
    return g.as_line_map()


@dataclass(frozen=True, eq=False)
class TreeAutomorphism:
    """Lengtebewarend graafisomorfisme, uitgebreid over kanten en stralen."""

    source: Tree
    target: Tree
    vertex_map: Dict[str, str]
    ray_map: Dict[str, str]

    def __post_init__(self):
        src, tgt = self.source, self.target
        vm, rm = dict(self.vertex_map), dict(self.ray_map)
        if sorted(vm) != sorted(src.vertices) or sorted(vm.values()) != sorted(tgt.vertices):
            raise DomainError("hoekpuntafbeelding is geen bijectie")
        if sorted(rm) != sorted(r.id for r in src.rays) or sorted(rm.values()) != sorted(r.id for r in tgt.rays):
            raise DomainError("straalafbeelding is geen bijectie")
        edge_map: Dict[str, Tuple[str, bool]] = {}
        for e in src.edges:
            u, w = vm[e.tail], vm[e.head]
            if not tgt.graph.has_edge(u, w):
                raise DomainError(f"kant {e.id} heeft geen beeld")
            data = tgt.graph.edges[u, w]
            if abs(data["length"] - e.length) > 1e-12 * max(1.0, e.length):
                raise DomainError(f"kant {e.id} verandert van lengte")
            edge_map[e.id] = (data["id"], tgt.elements[data["id"]].tail != u)
        for r in src.rays:
            if tgt.ray_of(TreeEnd(rm[r.id])).vertex != vm[r.vertex]:
                raise DomainError(f"straal {r.id} hangt niet aan het beeld van {r.vertex}")
        object.__setattr__(self, "vertex_map", vm)
        object.__setattr__(self, "ray_map", rm)
        object.__setattr__(self, "_edge_map", edge_map)

    def _image(self, element: str, offset: float) -> Tuple[str, float]:
        if element in self._edge_map:
            target, flipped = self._edge_map[element]
            length = self.target.elements[target].length
            return target, (length - offset if flipped else offset)
        if element in self.ray_map:
            return self.ray_map[element], offset
        return self.vertex_map[element], 0.0

    def apply(self, p: TreePoint) -> TreePoint:
        element, offset = self._image(p.element, p.offset)
        return self.target.canonical(element, offset)

    def apply_boundary(self, xi: TreeEnd) -> TreeEnd:
        return TreeEnd(self.ray_map[xi.ray])

    def apply_convex(self, C: Any) -> Any:
        if isinstance(C, (FullSet, EmptySet)):
            return C
        if isinstance(C, SingletonSet):
            return SingletonSet(self.apply(C.point))
        out = []
        for element, lo, hi in C.intervals:
            target, a = self._image(element, lo)
            _, b = self._image(element, hi)
            out.append((target, min(a, b), max(a, b)))
        return TreeConvex(tuple(out))

    def fixed_set(self) -> Any:
        """Vaste punten van een automorfisme van een boom op zichzelf."""
        if self.source != self.target:
            raise CompositionError("vaste punten vragen een automorfisme van één boom")
        tree = self.source
        intervals = []
        for element, el in tree.elements.items():
            if element in self._edge_map:
                target, flipped = self._edge_map[element]
                if target == element:
                    # een omgeklapte kant houdt alleen zijn midden vast
                    intervals.append((element, el.length / 2, el.length / 2) if flipped else (element, 0.0, el.length))
            elif self.ray_map.get(element) == element:
                intervals.append((element, 0.0, math.inf))
        for v in tree.vertices:
            if self.vertex_map[v] == v:
                home = tree.vertex_point(v)
                intervals.append((home.element, home.offset, home.offset))
        return TreeConvex(tuple(intervals)) if intervals else EmptySet()

    def as_line_map(self) -> "TreeLineMap":
        c0 = self.target.line_coordinate(self.apply(self.source.line_point(0.0)))
        c1 = self.target.line_coordinate(self.apply(self.source.line_point(1.0)))
        return TreeLineMap(self.source, self.target, 1 if c1 > c0 else -1, c0)

    def compose(self, other: Any) -> Any:
        """self ∘ other"""
        if other.target != self.source:
            raise CompositionError("isometrieën sluiten niet op elkaar aan")
        if isinstance(other, TreeAutomorphism):
            return TreeAutomorphism(
                other.source,
                self.target,
                {v: self.vertex_map[w] for v, w in other.vertex_map.items()},
                {r: self.ray_map[s] for r, s in other.ray_map.items()},
            )
        if isinstance(other, TreeLineMap):
            return _line_form(self).compose(other)
        raise CompositionError(f"kan boomisometrie niet samenstellen met {type(other).__name__}")

    def inverse(self) -> "TreeAutomorphism":
        return TreeAutomorphism(
            self.target,
            self.source,
            {w: v for v, w in self.vertex_map.items()},
            {s: r for r, s in self.ray_map.items()},
        )

    def describe(self) -> str:
        moved = [f"{v}->{w}" for v, w in self.vertex_map.items() if v != w]
        moved += [f"{r}->{s}" for r, s in self.ray_map.items() if r != s]
        return "automorphism " + (" ".join(moved) or "identity")


@dataclass(frozen=True, eq=False)
class TreeLineMap:
    """x ↦ sign·x + shift in lijncoördinaten van twee lijnbomen."""

    source: Tree
    target: Tree
    sign: int
    shift: float

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError("teken van een lijnafbeelding is ±1")
        if not (self.source.is_line() and self.target.is_line()):
            raise DomainError("verschuiving of spiegeling vraagt lijnbomen")

    def apply(self, p: TreePoint) -> TreePoint:
        return self.target.line_point(self.sign * self.source.line_coordinate(p) + self.shift)

    def apply_boundary(self, xi: TreeEnd) -> TreeEnd:
        positive = xi.ray == self.source.rays[1].id
        if self.sign < 0:
            positive = not positive
        return TreeEnd(self.target.rays[1 if positive else 0].id)

    def apply_convex(self, C: Any) -> Any:
        if isinstance(C, (FullSet, EmptySet)):
            return C
        if isinstance(C, SingletonSet):
            return SingletonSet(self.apply(C.point))
        lo, hi = math.inf, -math.inf
        for element, a, b in C.intervals:
            for s in (a, b):
                if math.isinf(s):
                    # straalinterval naar oneindig
                    end = -math.inf if element == self.source.rays[0].id else math.inf
                    lo, hi = min(lo, end), max(hi, end)
                else:
                    c = self.source.line_coordinate(self.source.canonical(element, s))
                    lo, hi = min(lo, c), max(hi, c)
        a, b = sorted((self.sign * lo + self.shift, self.sign * hi + self.shift))
        return self.target.line_interval(a, b)

    def compose(self, other: Any) -> "TreeLineMap":
        if other.target != self.source:
            raise CompositionError("isometrieën sluiten niet op elkaar aan")
        if not isinstance(other, (TreeLineMap, TreeAutomorphism)):
            raise CompositionError(f"kan lijnafbeelding niet samenstellen met {type(other).__name__}")
        inner = _line_form(other)
        return TreeLineMap(inner.source, self.target, self.sign * inner.sign, self.sign * inner.shift + self.shift)

    def inverse(self) -> "TreeLineMap":
        return TreeLineMap(self.target, self.source, self.sign, -self.sign * self.shift)

    def describe(self) -> str:
        return f"line x -> {self.sign:+d}x {self.shift:+.12g}"


# =============================
# Standaardbomen
# =============================
def tripod() -> Tree:
    """Centrum o met drie oneindige stralen a, b, c."""
    return Tree(vertices=("o",), rays=(TreeRay("a", "o"), TreeRay("b", "o"), TreeRay("c", "o")), name="tripod")


def line_tree() -> Tree:
    """De reële lijn als boom: straal neg naar −∞, straal pos naar +∞."""
    return Tree(vertices=("o",), rays=(TreeRay("neg", "o"), TreeRay("pos", "o")), name="line")


def point_space(vertex: str = "*") -> Tree:
    """Eénpuntsruimte."""
    return Tree(vertices=(vertex,), name="point")


def tree_from_lists(
    vertices: Sequence[str],
    edges: Sequence[Tuple[str, str, str, float]] = (),
    rays: Sequence[Tuple[str, str]] = (),
    name: str = "tree",
) -> Tree:
    return Tree(
        vertices=tuple(vertices),
        edges=tuple(TreeEdge(i, t, h, float(l)) for i, t, h, l in edges),
        rays=tuple(TreeRay(i, v) for i, v in rays),
        name=name,
    )
