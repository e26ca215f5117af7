"""Velden van CAT(0)-ruimtes boven een eindige basis Ω.

Een ``FieldScenario`` kent aan elke ω een ruimte toe en bevat generatoren
(ω → ω′, isometrie). De equivalentieklassen, holonomie langs lussen,
invariante secties, quasi-invariante Busemann-velden en de dichotomie
(invariante randsectie of invariant plat) worden hier berekend.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize, minimize_scalar

from .asymptotics import (
    Decomposition,
    NestedConvexFamily,
    Presentation,
    decompose,
    flat_split,
    limit_circumcenter,
    present_convex,
)
from .boundary import AngularCenter, BusemannSum, angular_circumcenter
from .errors import (
    ArgumentError,
    Cat0Error,
    EmptySetError,
    InvariantFailure,
    PreconditionError,
    ScenarioError,
    UnsupportedError,
)
from .geometry import circumcenter
from .models.base import EmptySet, FullSet, ModelSpace, SingletonSet, format_vector
from .models.euclidean import Euclidean, affine_frame, affine_subspace, ball
from .models.product import Product, ProductConvex, ProductIsometry
from .models.tree import Tree, TreeAutomorphism, TreeLineMap
from .scenario import (
    Probes,
    Tolerances,
    check_document_keys,
    parse_isometry,
    parse_measure,
    parse_probes,
    parse_space,
)
from .spaces import isometry_distortion, sample_points

logger = logging.getLogger(__name__)

Atoms = Tuple[Tuple[float, Any], ...]

ISOMETRY_SAMPLES = 12
EQUATION_SAMPLES = 100
STABLE_CHANGE = 1e-6
FLAT_CERTIFICATE = 1e-6
BOUNDARY_CERTIFICATE = 1e-5
WEIGHT_TOL = 1e-12
ESCAPE_REACH = 64.0
ACTIVE_GAP = 1e-7


# =============================
# Klassen via union-find
# =============================
class UnionFind:
    def __init__(self, items: Sequence[str]):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in items}

    def find(self, x: str) -> str:
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x: str, y: str) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x

    def classes(self, order: Sequence[str]) -> List[Tuple[str, ...]]:
        """Klassen in de volgorde van ``order``; de eerste van elke klasse is de wortel."""
        groups: Dict[str, List[str]] = {}
        for x in order:
            groups.setdefault(self.find(x), []).append(x)
        return [tuple(members) for members in sorted(groups.values(), key=lambda m: order.index(m[0]))]


# =============================
# Scenario
# =============================
@dataclass(frozen=True, eq=False)
class Edge:
    generator: str
    source: str
    target: str
    iso: Any

    @property
    def label(self) -> str:
        return f"{self.generator}:{self.source}->{self.target}"


@dataclass(frozen=True, eq=False)
class FieldScenario:
    omega: Tuple[str, ...]
    spaces: Dict[str, ModelSpace]
    edges: Tuple[Edge, ...]
    classes: Tuple[Tuple[str, ...], ...]
    measures: Dict[str, Atoms] = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    probes: Probes = field(default_factory=Probes)

    def class_of(self, w: str) -> Tuple[str, ...]:
        for members in self.classes:
            if w in members:
                return members
        raise ArgumentError(f"onbekende ω {w!r}")

    def root_of(self, w: str) -> str:
        return self.class_of(w)[0]

    @cached_property
    def _spanning(self) -> Dict[str, Tuple[Dict[str, Any], List[Tuple[Edge, Any]]]]:
        """Per wortel: transport T_ω: X_wortel → X_ω en de lusisometrieën op de wortel."""
        adjacency: Dict[str, List[Tuple[str, Any, int]]] = {w: [] for w in self.omega}
        for i, e in enumerate(self.edges):
            adjacency[e.source].append((e.target, e.iso, i))
            adjacency[e.target].append((e.source, e.iso.inverse(), i))
        out = {}
        for members in self.classes:
            root = members[0]
            T = {root: self.spaces[root].identity()}
            used = set()
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v, g, i in adjacency[u]:
                    if v not in T:
                        T[v] = g.compose(T[u])
                        used.add(i)
                        queue.append(v)
            loops = []
            for i, e in enumerate(self.edges):
                if e.source in T and i not in used:
                    loops.append((e, T[e.target].inverse().compose(e.iso).compose(T[e.source])))
            out[root] = (T, loops)
        return out

    def transport(self, u: str, v: str) -> Any:
        """Isometrie X_u → X_v langs de opspannende boom (zelfde klasse)."""
        root = self.root_of(u)
        if self.root_of(v) != root:
            raise ArgumentError(f"{u} en {v} liggen in verschillende klassen")
        T, _ = self._spanning[root]
        return T[v].compose(T[u].inverse())

    def loops(self, root: str) -> List[Tuple[Edge, Any]]:
        return self._spanning[root][1]

    def class_edges(self, members: Sequence[str]) -> List[Edge]:
        return [e for e in self.edges if e.source in members]


def _check_isometry(g: Any, rng: np.random.Generator, tol: float, context: str) -> None:
    pts = sample_points(g.source, rng, ISOMETRY_SAMPLES)
    spread = max(g.source.distance(pts[0], p) for p in pts)
    if isometry_distortion(g, pts) > tol * max(1.0, spread):
        raise ScenarioError("generator is geen isometrie: afstanden wijken af bij steekproef", context)
    back = g.inverse().compose(g)
    if max(g.source.distance(back.apply(p), p) for p in pts) > tol * max(1.0, spread):
        raise ScenarioError("inverse van de generator sluit niet", context)


def load_scenario(document: Mapping[str, Any], default_seed: int = 0) -> FieldScenario:
    """Bouw een ``FieldScenario`` uit een ingelezen document."""
    check_document_keys(document)
    omega_raw = document["omega"]
    if not isinstance(omega_raw, list) or not omega_raw:
        raise ScenarioError("omega moet een niet-lege lijst zijn", "omega")
    omega = tuple(str(w) for w in omega_raw)
    if len(set(omega)) != len(omega):
        raise ScenarioError("omega bevat dubbele ids", "omega")

    block = document.get("tolerances") or {}
    if not isinstance(block, dict):
        raise ScenarioError("tolerances moet een object zijn", "tolerances")
    tolerances = Tolerances().with_overrides(block)
    seed = int(document.get("seed", default_seed))
    rng = np.random.default_rng(seed)

    spaces_raw = document["spaces"]
    if not isinstance(spaces_raw, dict):
        raise ScenarioError("spaces moet een object zijn", "spaces")
    for key in spaces_raw:
        if key != "*" and key not in omega:
            raise ScenarioError(f"ruimte voor onbekende ω {key!r}", "spaces")
    spaces: Dict[str, ModelSpace] = {}
    for w in omega:
        literal = spaces_raw.get(w, spaces_raw.get("*"))
        if literal is None:
            raise ScenarioError(f"geen ruimte voor ω {w!r}", "spaces")
        spaces[w] = parse_space(literal, f"spaces.{w}")

    edges: List[Edge] = []
    generators = document["generators"]
    if not isinstance(generators, list):
        raise ScenarioError("generators moet een lijst zijn", "generators")
    for k, gen in enumerate(generators):
        if not isinstance(gen, dict):
            raise ScenarioError("generator moet een object zijn", f"generators[{k}]")
        unknown = sorted(set(gen) - {"name", "pairs", "isometry", "isometries"})
        if unknown:
            raise ScenarioError(f"onbekende sleutel(s) {', '.join(unknown)}", f"generators[{k}]")
        name = str(gen.get("name", f"g{k}"))
        pairs = gen.get("pairs") or []
        sources = [str(a) for a, _ in pairs]
        targets = [str(b) for _, b in pairs]
        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            raise ScenarioError("paren vormen geen partiële bijectie", name)
        per_source = {str(a): lit for a, lit in (gen.get("isometries") or {}).items()}
        for a, b in zip(sources, targets):
            context = f"{name}:{a}->{b}"
            if a not in spaces or b not in spaces:
                raise ScenarioError("rand verwijst naar onbekende ω", context)
            g = parse_isometry(spaces[a], spaces[b], per_source.get(a, gen.get("isometry")), context)
            _check_isometry(g, rng, tolerances.metric, context)
            edges.append(Edge(name, a, b, g))

    uf = UnionFind(omega)
    for e in edges:
        uf.union(e.source, e.target)
    classes = tuple(uf.classes(omega))

    measures: Dict[str, Atoms] = {}
    measures_raw = document.get("measures") or {}
    if not isinstance(measures_raw, dict):
        raise ScenarioError("measures moet een object zijn", "measures")
    for key in measures_raw:
        if key != "*" and key not in omega:
            raise ScenarioError(f"maat voor onbekende ω {key!r}", "measures")
    for w in omega:
        literal = measures_raw.get(w, measures_raw.get("*"))
        if literal is not None:
            measures[w] = parse_measure(spaces[w], literal, f"measures.{w}")

    probes = parse_probes(document.get("probes"), spaces[omega[0]])
    logger.info("scenario: %d ω, %d randen, %d klasse(n)", len(omega), len(edges), len(classes))
    return FieldScenario(omega, spaces, tuple(edges), classes, measures, tolerances, seed, probes)


def holonomy(scenario: FieldScenario, w: str) -> List[Any]:
    """Lusgeneratoren op ω: één per onafhankelijke cykel, anders alleen de identiteit."""
    root = scenario.root_of(w)
    loops = scenario.loops(root)
    if not loops:
        return [scenario.spaces[w].identity()]
    to_w = scenario.transport(root, w)
    back = to_w.inverse()
    return [to_w.compose(h).compose(back) for _, h in loops]


# =============================
# Secties
# =============================
@dataclass(frozen=True, eq=False)
class Section:
    """ω ↦ punt, randpunt of convexe verzameling; ``kind`` is point, boundary of convex."""

    values: Dict[str, Any]
    kind: str = "point"


@dataclass(frozen=True)
class ObstructionItem:
    root: str
    loop: str
    displacement: float


@dataclass(frozen=True)
class Obstruction:
    items: Tuple[ObstructionItem, ...]

    @property
    def displacement(self) -> float:
        return max(item.displacement for item in self.items)


def _sample_set(space: ModelSpace, seed: int) -> List[Any]:
    return sample_points(space, np.random.default_rng(seed), len(space.anchor_points()) + 6)


def _edge_residual(scenario: FieldScenario, e: Edge, s: Section) -> float:
    target = scenario.spaces[e.target]
    image_of = s.values[e.source]
    there = s.values[e.target]
    if s.kind == "point":
        return target.distance(e.iso.apply(image_of), there)
    if s.kind == "boundary":
        return target.tits_angle(e.iso.apply_boundary(image_of), there)
    moved = e.iso.apply_convex(image_of)
    return max(
        target.distance(target.project(moved, x), target.project(there, x))
        for x in _sample_set(target, scenario.seed)
    )


def check_invariant_section(scenario: FieldScenario, s: Section) -> float:
    """Grootste residu over de generatorranden binnen het domein van ``s``."""
    if not s.values:
        raise ArgumentError("lege sectie")
    for w in s.values:
        if w not in scenario.spaces:
            raise ArgumentError(f"sectie noemt onbekende ω {w!r}")
    worst = 0.0
    for e in scenario.edges:
        if e.source in s.values and e.target in s.values:
            worst = max(worst, _edge_residual(scenario, e, s))
    return worst


def transport_section(
    scenario: FieldScenario, seeds: Mapping[str, Any], kind: str = "point"
) -> Union[Section, Obstruction]:
    """Transporteer één zaad per klasse langs de opspannende boom en toets de lussen."""
    values: Dict[str, Any] = {}
    items: List[ObstructionItem] = []
    tol = scenario.tolerances.residual
    for members in scenario.classes:
        root = members[0]
        given = [w for w in members if w in seeds]
        if not given:
            raise ArgumentError(f"geen zaad voor de klasse van {root}")
        w = given[0]
        space = scenario.spaces[root]
        back = scenario.transport(w, root)
        seed = back.apply_boundary(seeds[w]) if kind == "boundary" else back.apply(seeds[w])
        for e, h in scenario.loops(root):
            if kind == "boundary":
                moved = space.tits_angle(h.apply_boundary(seed), seed)
            else:
                moved = space.distance(h.apply(seed), seed)
            if moved > tol:
                items.append(ObstructionItem(root, e.label, moved))
        for v in members:
            T = scenario.transport(root, v)
            values[v] = T.apply_boundary(seed) if kind == "boundary" else T.apply(seed)
    if items:
        return Obstruction(tuple(items))
    return Section(values, kind)


# =============================
# Randmaten
# =============================
@dataclass(frozen=True)
class OrbitFailure:
    omega: str
    size: int
    max_orbit: int


def _orbit_closure(
    space: ModelSpace, start: Any, maps: Sequence[Callable[[Any], Any]], tol: float, max_orbit: int
) -> Optional[List[Any]]:
    orbit = [start]
    queue = deque([start])
    while queue:
        xi = queue.popleft()
        for act in maps:
            eta = act(xi)
            if all(space.tits_angle(eta, zeta) > tol for zeta in orbit):
                orbit.append(eta)
                if len(orbit) > max_orbit:
                    return None
                queue.append(eta)
    return orbit


def _measure_mismatch(space: ModelSpace, pushed: Atoms, atoms: Atoms) -> Tuple[float, float]:
    """(grootste hoekafwijking, grootste gewichtsafwijking) tussen twee eindige maten."""
    mass = [0.0] * len(atoms)
    angle = 0.0
    for w, xi in pushed:
        gaps = [space.tits_angle(xi, eta) for _, eta in atoms]
        j = int(np.argmin(gaps))
        angle = max(angle, gaps[j])
        mass[j] += w
    weight = max(abs(m - w) for m, (w, _) in zip(mass, atoms))
    return angle, weight


def orbit_average_measure(
    scenario: FieldScenario, w: str, xi: Any, max_orbit: Optional[int] = None
) -> Union[Dict[str, Atoms], OrbitFailure]:
    """Uniforme maat op de holonomiebaan van ``xi``, equivariant uitgebreid over de klasse."""
    max_orbit = scenario.tolerances.max_orbit if max_orbit is None else max_orbit
    space = scenario.spaces[w]
    xi = space.check_boundary(xi)
    maps = []
    for h in holonomy(scenario, w):
        inv = h.inverse()
        maps += [h.apply_boundary, inv.apply_boundary]
    orbit = _orbit_closure(space, xi, maps, scenario.tolerances.angular, max_orbit)
    if orbit is None:
        logger.info("baan van %s op %s groter dan %d", space.format_boundary(xi), w, max_orbit)
        return OrbitFailure(w, max_orbit + 1, max_orbit)
    weight = 1.0 / len(orbit)
    out = {}
    for v in scenario.class_of(w):
        T = scenario.transport(w, v)
        out[v] = tuple((weight, T.apply_boundary(eta)) for eta in orbit)
    return out


def measure_residual(scenario: FieldScenario, measure: Mapping[str, Atoms]) -> Tuple[float, float, str]:
    """Per rand: duw π_ω vooruit en vergelijk met π_ω′; geeft (hoek, gewicht, slechtste rand)."""
    angle, weight, worst = 0.0, 0.0, ""
    for e in scenario.edges:
        if e.source in measure and e.target in measure:
            pushed = tuple((w, e.iso.apply_boundary(xi)) for w, xi in measure[e.source])
            a, m = _measure_mismatch(scenario.spaces[e.target], pushed, measure[e.target])
            if a > angle or m > weight:
                worst = e.label
            angle, weight = max(angle, a), max(weight, m)
    return angle, weight, worst


# =============================
# Quasi-invariante Busemann-velden
# =============================
@dataclass(frozen=True, eq=False)
class QuasiInvariantField:
    """f_ω ∘ α(ω′,ω) = f_ω′ + c(ω,ω′) op elke rand ω → ω′."""

    f: Dict[str, BusemannSum]
    c: Dict[str, float]
    equation_residual: float
    additivity_residual: float


def check_cocycle(scenario: FieldScenario, qfield: QuasiInvariantField, x0: Section) -> float:
    """c(ω,ω″) = c(ω,ω′) + c(ω′,ω″) langs elk paar opvolgende randen; InvariantFailure boven het residu."""
    edges = [e for e in scenario.edges if e.label in qfield.c]
    additivity = 0.0
    for first in edges:
        for second in edges:
            if first.target == second.source:
                through = second.iso.compose(first.iso)
                direct = -qfield.f[second.target](through.apply(x0.values[first.source]))
                additivity = max(additivity, abs(direct - qfield.c[first.label] - qfield.c[second.label]))
    if additivity > scenario.tolerances.residual:
        raise InvariantFailure(f"constanten zijn niet additief: residu {additivity:.3g}")
    return additivity


def quasi_invariant_busemann_field(
    scenario: FieldScenario, measure: Mapping[str, Atoms], x0: Section
) -> QuasiInvariantField:
    tol = scenario.tolerances
    covered = [w for w in scenario.omega if w in measure and w in x0.values]
    if not covered:
        raise ArgumentError("maat en basispunten hebben geen gemeenschappelijke ω")
    angle, weight, worst = measure_residual(scenario, {w: measure[w] for w in covered})
    if angle > tol.angular or weight > WEIGHT_TOL:
        raise PreconditionError(f"maat is niet invariant (hoek {angle:.3g}, gewicht {weight:.3g}) op rand {worst}")

    f = {w: BusemannSum(scenario.spaces[w], x0.values[w], tuple(measure[w])) for w in covered}
    edges = [e for e in scenario.edges if e.source in f and e.target in f]
    c = {e.label: -f[e.target](e.iso.apply(x0.values[e.source])) for e in edges}

    rng = np.random.default_rng(scenario.seed)
    equation = 0.0
    for e in edges:
        inv = e.iso.inverse()
        for y in sample_points(scenario.spaces[e.target], rng, EQUATION_SAMPLES):
            equation = max(equation, abs(f[e.source](inv.apply(y)) - f[e.target](y) - c[e.label]))
    for w, fw in f.items():
        space = fw.space
        pts = sample_points(space, rng, 12)
        for p, q in zip(pts, pts[1:]):
            mid = space.geodesic_point(p, q, 0.5)
            if fw(mid) > (fw(p) + fw(q)) / 2 + 1e-9 * max(1.0, space.distance(p, q)):
                raise InvariantFailure(f"Busemann-som op {w} is niet convex")
    if equation > tol.residual:
        raise InvariantFailure(f"quasi-invariantie faalt: residu {equation:.3g}")
    qfield = QuasiInvariantField(f, c, equation, 0.0)
    additivity = check_cocycle(scenario, qfield, x0)
    logger.debug("quasi-invariant veld: residu %.3g, additiviteit %.3g", equation, additivity)
    return replace(qfield, additivity_residual=additivity)


# =============================
# Infimumklassen
# =============================
OMEGA_MIN = "min"
OMEGA_NEG_INF = "inf=-inf"
OMEGA_FINITE = "inf>-inf"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True, eq=False)
class InfRecord:
    tag: str
    value: float
    argmin: Any = None
    evidence: Tuple[Tuple[float, float], ...] = ()


def _euclidean_ball_minimum(space: Euclidean, f: Callable, center: np.ndarray, r: float) -> Tuple[float, Any]:
    if isinstance(f, BusemannSum):
        v = sum(w * np.asarray(xi) for w, xi in f.atoms)
        n = float(np.linalg.norm(v))
        p = center + r * v / n if n > 1e-15 else np.array(center, dtype=float)
        return f(p), p
    pts = space.ball_sample(center, r)
    start = min(pts, key=f)

    def clamp(y):
        d = y - center
        n = float(np.linalg.norm(d))
        return center + d * (r / n) if n > r else y

    simplex = np.vstack([start] + [start + (r / 2) * e for e in np.eye(space.dim)])
    res = minimize(lambda y: f(clamp(y)), start, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
    p = clamp(res.x)
    return (f(p), p) if f(p) <= f(start) else (f(start), start)


def _tree_ball_minimum(space: Tree, f: Callable, center: Any, r: float) -> Tuple[float, Any]:
    best, best_p = math.inf, center
    for element, el in space.elements.items():
        z = space.element_coordinate(element, center)
        lo, hi = max(0.0, z - r), min(el.length, z + r)
        if lo > hi:
            continue
        if isinstance(f, BusemannSum):
            candidates = [lo, hi]
        else:
            res = minimize_scalar(lambda s: f(space.canonical(element, s)), bounds=(lo, hi), method="bounded")
            candidates = [lo, hi, float(res.x)]
        for s in candidates:
            p = space.canonical(element, s)
            value = f(p)
            if value < best:
                best, best_p = value, p
    return best, best_p


def _factor_sum(space: ModelSpace, base: Any, atoms: List[Tuple[float, Any]]) -> Optional[BusemannSum]:
    atoms = [(w, xi) for w, xi in atoms if w > 1e-15]
    return BusemannSum(space, base, tuple(atoms)) if atoms else None


def _factor_minimum(space: ModelSpace, f: Optional[BusemannSum], center: Any, r: float) -> Tuple[float, Any]:
    if f is None:
        return 0.0, center
    return ball_minimum(space, f, center, r)


def ball_minimum(space: ModelSpace, f: Callable, center: Any, r: float) -> Tuple[float, Any]:
    """Minimum van ``f`` over de gesloten bal B(center, r), met een minimaliserend punt."""
    if isinstance(space, Euclidean):
        return _euclidean_ball_minimum(space, f, np.asarray(center, dtype=float), r)
    if isinstance(space, Tree):
        return _tree_ball_minimum(space, f, center, r)
    if isinstance(space, Product) and isinstance(f, BusemannSum):
        # een Busemann-som op een product splitst in een linker- en rechterdeel
        fl = _factor_sum(space.left, f.base[0], [(w * math.cos(xi.theta), xi.left) for w, xi in f.atoms if xi.left is not None])
        fr = _factor_sum(space.right, f.base[1], [(w * math.sin(xi.theta), xi.right) for w, xi in f.atoms if xi.right is not None])

        def split(phi: float) -> Tuple[float, Any]:
            vl, pl = _factor_minimum(space.left, fl, center[0], r * math.cos(phi))
            vr, pr = _factor_minimum(space.right, fr, center[1], r * math.sin(phi))
            return f.shift + vl + vr, (pl, pr)

        phis = np.linspace(0.0, math.pi / 2, 33)
        values = [split(float(phi))[0] for phi in phis]
        i = int(np.argmin(values))
        lo, hi = float(phis[max(i - 1, 0)]), float(phis[min(i + 1, len(phis) - 1)])
        res = minimize_scalar(lambda phi: split(phi)[0], bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        phi = float(res.x) if float(res.fun) < values[i] else float(phis[i])
        return split(phi)
    pts = space.ball_sample(center, r)
    best = min(pts, key=f)
    return f(best), best


def classify_function(space: ModelSpace, f: Callable, center: Any, search_radius: float = 4096.0) -> InfRecord:
    """Classificeer inf f via minima over ballen met verdubbelende straal."""
    radii = []
    r = 1.0
    while r <= search_radius:
        radii.append(r)
        r *= 2
    minima: List[float] = []
    points = []
    evidence = []
    for radius in radii:
        value, p = ball_minimum(space, f, center, radius)
        if minima and value > minima[-1]:
            value, p = minima[-1], points[-1]
        minima.append(value)
        points.append(p)
        evidence.append((radius, value))
        drops = [a - b for a, b in zip(minima, minima[1:])]
        if len(drops) >= 2 and drops[-1] < 1e-8 and drops[-2] < 1e-8:
            level = value + 1e-12 * max(1.0, abs(value))
            argmin = f.sublevel(level) if hasattr(f, "sublevel") else SingletonSet(p)
            return InfRecord(OMEGA_MIN, value, argmin, tuple(evidence))
    drops = [a - b for a, b in zip(minima, minima[1:])]
    rates = [d / (b - a) for d, a, b in zip(drops, radii, radii[1:])]
    if len(rates) < 2:
        return InfRecord(INDETERMINATE, minima[-1], None, tuple(evidence))
    last, previous = rates[-1], rates[-2]
    if last >= 1e-6 and last >= 0.5 * previous:
        return InfRecord(OMEGA_NEG_INF, -math.inf, None, tuple(evidence))
    if 0 < last < 0.5 * previous and all(d >= 0 for d in drops):
        return InfRecord(OMEGA_FINITE, minima[-1], None, tuple(evidence))
    return InfRecord(INDETERMINATE, minima[-1], None, tuple(evidence))


def classify_inf(
    qfield: QuasiInvariantField, search_radius: float = 4096.0, budget: Optional[int] = None
) -> Dict[str, InfRecord]:
    """Ω_min, Ω_{inf=−∞}, Ω_{inf>−∞} of indeterminate per ω.

    ``budget`` begrenst het aantal verdubbelingen van de straal.
    """
    if budget is not None:
        search_radius = min(search_radius, float(2 ** max(budget - 1, 0)))
    out = {}
    for w, f in qfield.f.items():
        out[w] = classify_function(f.space, f, f.base, search_radius)
        logger.debug("inf-klasse %s: %s", w, out[w].tag)
    return out


# =============================
# Minimale invariante deelvelden
# =============================
@dataclass(frozen=True, eq=False)
class ClassMinimum:
    root: str
    status: str
    set: Any
    displacement: float
    family: Optional[NestedConvexFamily] = None
    base: Any = None


@dataclass(frozen=True, eq=False)
class MinimalSubfield:
    classes: Dict[str, ClassMinimum]
    sets: Dict[str, Any]
    trace: Tuple[str, ...]


def _minimax_displacement(blocks: Sequence[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """argmin_y max_g |B_g y + r_g|² in epigraafvorm (SLSQP), gestart in het kleinste-kwadratenpunt."""
    M = np.vstack([B for B, _ in blocks])
    r = np.concatenate([rg for _, rg in blocks])
    y0 = np.linalg.lstsq(M, -r, rcond=None)[0]
    if len(blocks) == 1:
        return y0

    def values(y):
        return np.array([float(np.sum((B @ y + rg) ** 2)) for B, rg in blocks])

    constraints = [
        {
            "type": "ineq",
            "fun": lambda z, B=B, rg=rg: z[-1] - float(np.sum((B @ z[:-1] + rg) ** 2)),
            "jac": lambda z, B=B, rg=rg: np.append(-2.0 * B.T @ (B @ z[:-1] + rg), 1.0),
        }
        for B, rg in blocks
    ]
    s0 = float(values(y0).max())
    unit = np.zeros(y0.size + 1)
    unit[-1] = 1.0
    res = minimize(
        lambda z: z[-1], np.append(y0, s0), jac=lambda z: unit, constraints=constraints,
        method="SLSQP", options={"ftol": 1e-15, "maxiter": 500},
    )
    y = np.asarray(res.x[:-1], dtype=float)
    return y if values(y).max() <= s0 else y0


def _euclidean_minimum(space: Euclidean, gens: Sequence[Any], C: Any) -> Any:
    frame = affine_frame(space, C)
    if frame is None:
        raise UnsupportedError(f"verplaatsing minimaliseren op {C.describe()}")
    o, F = frame
    if F.shape[1] == 0:
        return SingletonSet(o)
    eye = np.eye(space.dim)
    blocks = [((g.matrix - eye) @ F, (g.matrix - eye) @ o + g.translation) for g in gens]
    if not any(np.any(np.abs(B) > 1e-12) for B, _ in blocks):
        # alleen translaties: de verplaatsing is overal gelijk
        return C
    y = _minimax_displacement(blocks)
    values = np.array([float(np.sum((B @ y + rg) ** 2)) for B, rg in blocks])
    top = float(values.max())
    active = [i for i, v in enumerate(values) if v >= top - ACTIVE_GAP * max(1.0, top)]
    if len(active) == 1:
        B, rg = blocks[active[0]]
        polished = y + np.linalg.lstsq(B, -(B @ y + rg), rcond=None)[0]
        if max(float(np.sum((Bg @ polished + r) ** 2)) for Bg, r in blocks) <= top:
            y = polished
    flat = null_space(np.vstack([blocks[i][0] for i in active]))
    for i, (B, _) in enumerate(blocks):
        if i not in active and flat.size and np.max(np.abs(B @ flat)) > 1e-9:
            raise UnsupportedError("minimum van de grootste verplaatsing is geen affiene deelruimte")
    return affine_subspace(o + F @ y, F @ flat)


def _tree_minimum(space: Tree, gens: Sequence[Any], C: Any) -> Any:
    if space.is_line():
        # x ↦ ±x + s: een spiegeling verplaatst 2|x − s/2|, een translatie overal |s|
        forms = [g if isinstance(g, TreeLineMap) else g.as_line_map() for g in gens]
        centers = [g.shift / 2.0 for g in forms if g.sign < 0]
        if not centers:
            return C
        lo, hi = min(centers), max(centers)
        step = max((abs(g.shift) for g in forms if g.sign > 0), default=0.0)
        if step <= hi - lo:
            found = space.intersect(C, SingletonSet(space.line_point((lo + hi) / 2.0)))
        else:
            found = space.intersect(C, space.line_interval(hi - step / 2.0, lo + step / 2.0))
    else:
        found = C
        for g in gens:
            if not isinstance(g, TreeAutomorphism):
                raise UnsupportedError("lijnafbeelding op een boom die geen lijn is")
            found = space.intersect(found, g.fixed_set())
    if isinstance(found, EmptySet):
        raise UnsupportedError("holonomie heeft geen vast punt in de verzameling")
    return found


def displacement_minimum(space: ModelSpace, gens: Sequence[Any], C: Any) -> Any:
    """Minimumverzameling van x ↦ max_g d(x, g·x) binnen C.

    Bomen met automorfismen hebben een gemeenschappelijk vast punt, dus daar is
    het de doorsnede van de vaste verzamelingen. Op producten wordt per factor
    geminimaliseerd; het product van die verzamelingen is weer invariant.
    """
    if isinstance(C, SingletonSet):
        return C
    if isinstance(space, Euclidean):
        return _euclidean_minimum(space, gens, C)
    if isinstance(space, Tree):
        return _tree_minimum(space, gens, C)
    if isinstance(space, Product):
        if not all(isinstance(g, ProductIsometry) for g in gens):
            raise UnsupportedError("productruimte met een isometrie die niet factorsgewijs werkt")
        CL, CR = space.split_convex(C)
        left = displacement_minimum(space.left, [g.left for g in gens], CL)
        right = displacement_minimum(space.right, [g.right for g in gens], CR)
        if isinstance(left, SingletonSet) and isinstance(right, SingletonSet):
            return SingletonSet((left.point, right.point))
        return ProductConvex(left, right)
    raise UnsupportedError(f"verplaatsing in {type(space).__name__}")


def _power(g: Any, squarings: int) -> Any:
    for _ in range(squarings):
        g = g.compose(g)
    return g


def _acts_trivially(X: ModelSpace, gens: Sequence[Any], points: Sequence[Any], tol: Tolerances, spread: float) -> bool:
    """Holonomie is de identiteit op de steekproef en, als die er is, op het randrooster."""
    for g in gens:
        if any(X.distance(p, g.apply(p)) > tol.metric * spread for p in points):
            return False
        if X.has_boundary() and any(X.tits_angle(xi, g.apply_boundary(xi)) > tol.angular for xi in X.boundary_grid()):
            return False
    return True


def _orbit_ball_family(
    X: ModelSpace, M: Any, gens: Sequence[Any], anchor: Any, tol: Tolerances, trace: List[str]
) -> Optional[NestedConvexFamily]:
    """Ballen rond het circumcentrum van een ver baanstuk; None als de baan niet ver genoeg reikt."""
    moving = [g for g in gens if X.distance(anchor, g.apply(anchor)) > tol.metric]
    step = min(X.distance(anchor, g.apply(anchor)) for g in moving)
    squarings = max(1, math.ceil(math.log2(ESCAPE_REACH * tol.horizon / step)))
    if squarings > 40:
        trace.append(f"verplaatsing {step:.3g} te klein om te ontsnappen")
        return None
    orbit = [_power(g, squarings).apply(anchor) for g in moving]
    center = circumcenter(X, orbit)[0]
    reach = X.distance(anchor, center)
    if reach <= ESCAPE_REACH / 2 * tol.horizon:
        trace.append(f"baancentrum op afstand {reach:.3g} blijft binnen bereik")
        return None
    if isinstance(X, Euclidean):
        member = lambda beta: X.intersect(M, ball(center, max(reach - beta, 0.0)))
    else:
        xi = X.direction_of(anchor, center)
        if xi is None:
            return None
        horoball = BusemannSum(X, anchor, ((1.0, xi),))
        member = lambda beta: X.intersect(M, horoball.sublevel(-beta))
    far = member(2.0 * tol.horizon)
    if X.distance(anchor, X.project(far, anchor)) <= tol.horizon:
        trace.append("baanballen verlaten de horizon niet")
        return None
    return NestedConvexFamily(callback=member, real_indexed=True, label="orbit-ball")


def _minimize_class(scenario: FieldScenario, root: str, C: Any, trace: List[str]) -> ClassMinimum:
    tol = scenario.tolerances
    X = scenario.spaces[root]
    gens = holonomy(scenario, root)
    samples = _sample_set(X, scenario.seed)
    spread = max(1.0, max(X.distance(samples[0], p) for p in samples))
    base = circumcenter(X, X.anchor_points())[0]
    current = C
    for round_no in range(1, tol.max_rounds + 1):
        M = displacement_minimum(X, gens, current)
        anchor = X.project(M, base)
        moves = [X.distance(anchor, g.apply(anchor)) for g in gens]
        displacement = max(moves, default=0.0)
        if displacement <= tol.metric * spread:
            if not isinstance(M, SingletonSet) and _acts_trivially(X, gens, samples, tol, spread):
                # elk punt van M is vast: kies het centrum van de geprojecteerde steekproef
                anchor = circumcenter(X, [X.project(M, p) for p in samples])[0]
            new = SingletonSet(anchor)
        elif decompose(present_convex(X, M).space).e_dim >= 2:
            family = _orbit_ball_family(X, M, gens, anchor, tol, trace)
            if family is None:
                return ClassMinimum(root, INDETERMINATE, M, displacement)
            trace.append(f"ronde {round_no}: ontsnapping langs baanballen, verplaatsing {displacement:.6g}")
            logger.debug(trace[-1])
            return ClassMinimum(root, "escape", M, displacement, family, anchor)
        else:
            new = M
        change = max(X.distance(X.project(current, p), X.project(new, p)) for p in samples)
        trace.append(f"ronde {round_no}: verplaatsing {displacement:.6g}, verandering {change:.3g}, C = {new.describe()}")
        logger.debug(trace[-1])
        if change < STABLE_CHANGE:
            return ClassMinimum(root, "stabilized", new, displacement)
        current = new
    trace.append(f"geen stabilisatie na {tol.max_rounds} rondes")
    return ClassMinimum(root, INDETERMINATE, current, math.nan)


def minimal_invariant_subfield(
    scenario: FieldScenario, C0: Optional[Mapping[str, Any]] = None, rounds: Optional[int] = None
) -> MinimalSubfield:
    """Krimp invariante convexe deelvelden tot stabilisatie of ontsnapping naar oneindig."""
    if rounds is not None:
        scenario = replace(scenario, tolerances=replace(scenario.tolerances, max_rounds=int(rounds)))
    C0 = dict(C0 or {})
    start = Section({w: C0.get(w, FullSet()) for w in scenario.omega}, "convex")
    residual = check_invariant_section(scenario, start)
    if residual > FLAT_CERTIFICATE:
        raise PreconditionError(f"C₀ is niet invariant (residu {residual:.3g})")
    trace: List[str] = []
    classes: Dict[str, ClassMinimum] = {}
    sets: Dict[str, Any] = {}
    for members in scenario.classes:
        root = members[0]
        try:
            found = _minimize_class(scenario, root, start.values[root], trace)
        except (UnsupportedError, EmptySetError) as e:
            trace.append(f"{root}: {e}")
            found = ClassMinimum(root, INDETERMINATE, start.values[root], math.nan)
        classes[root] = found
        for w in members:
            sets[w] = scenario.transport(root, w).apply_convex(found.set)
    return MinimalSubfield(classes, sets, tuple(trace))


# =============================
# Dichotomie
# =============================
@dataclass(frozen=True, eq=False)
class BoundarySection:
    section: Section
    residual: float
    branch: str
    trace: Tuple[str, ...]

    tag = "BoundarySection"


@dataclass(frozen=True, eq=False)
class InvariantFlat:
    section: Section
    dim: int
    frames: Dict[str, str]
    residual: float
    trace: Tuple[str, ...]

    tag = "InvariantFlat"


@dataclass(frozen=True, eq=False)
class AnalysisIncomplete:
    root: str
    reason: str
    trace: Tuple[str, ...]

    tag = "AnalysisIncomplete"


DichotomyOutcome = Union[BoundarySection, InvariantFlat, AnalysisIncomplete]


def describe_flat(space: ModelSpace, C: Any) -> str:
    if isinstance(space, Euclidean):
        frame = affine_frame(space, C)
        if frame is not None:
            o, F = frame
            cols = ";".join(format_vector(col) for col in F.T)
            return f"base={format_vector(o)} frame=[{cols}]"
    if isinstance(C, SingletonSet):
        return f"point {space.format_point(C.point)}"
    return C.describe()


def _flat_in(space: ModelSpace) -> Any:
    """E × {c_Y}: het Euclidische deel heel, het begrensde rest-deel in zijn circumcentrum."""
    if isinstance(space, Euclidean) or (isinstance(space, Tree) and space.is_line()):
        return FullSet()
    if isinstance(space, Tree):
        return SingletonSet(circumcenter(space, space.anchor_points())[0])
    left, right = _flat_in(space.left), _flat_in(space.right)
    if isinstance(left, FullSet) and isinstance(right, FullSet):
        return FullSet()
    if isinstance(left, SingletonSet) and isinstance(right, SingletonSet):
        return SingletonSet((left.point, right.point))
    return ProductConvex(left, right)


def _incomplete(root: str, reason: str, trace: List[str]) -> AnalysisIncomplete:
    trace.append(f"onvolledig: {reason}")
    logger.info("%s: analyse onvolledig: %s", root, reason)
    return AnalysisIncomplete(root, reason, tuple(trace))


def _boundary_outcome(scenario: FieldScenario, root: str, xi: Any, branch: str, trace: List[str]) -> DichotomyOutcome:
    X = scenario.spaces[root]
    values = {w: scenario.transport(root, w).apply_boundary(xi) for w in scenario.class_of(root)}
    section = Section(values, "boundary")
    residual = check_invariant_section(scenario, section)
    trace.append(f"randsectie {X.format_boundary(xi)} via {branch}, residu {residual:.3g}")
    logger.info("%s: %s", root, trace[-1])
    if residual >= BOUNDARY_CERTIFICATE:
        return _incomplete(root, f"certificaat van de randsectie faalt ({residual:.3g})", trace)
    return BoundarySection(section, residual, branch, tuple(trace))


def _flat_outcome(scenario: FieldScenario, root: str, flat: Any, dim: int, trace: List[str]) -> DichotomyOutcome:
    values = {w: scenario.transport(root, w).apply_convex(flat) for w in scenario.class_of(root)}
    section = Section(values, "convex")
    residual = check_invariant_section(scenario, section)
    frames = {w: describe_flat(scenario.spaces[w], C) for w, C in values.items()}
    trace.append(f"invariant plat van dimensie {dim}, residu {residual:.3g}")
    logger.info("%s: %s", root, trace[-1])
    if residual >= FLAT_CERTIFICATE:
        return _incomplete(root, f"certificaat van het platte deelveld faalt ({residual:.3g})", trace)
    return InvariantFlat(section, dim, frames, residual, tuple(trace))


def _invariant_measure(
    scenario: FieldScenario, root: str, pres: Presentation, dec: Decomposition, trace: List[str]
) -> Optional[Atoms]:
    """Holonomie-invariante maat op de rand van de niet-Euclidische factor Z van Y = ℝⁿ × Z."""
    Z = dec.rest
    tol = scenario.tolerances

    def lift(eta):
        return pres.embed_boundary(dec.rest_boundary(eta))

    def lower(xi):
        image = pres.pull_boundary(xi)
        return None if image is None else dec.pull_rest(image)

    maps = []
    for h in holonomy(scenario, root):
        for g in (h, h.inverse()):
            def act(eta, g=g):
                image = lower(g.apply_boundary(lift(eta)))
                if image is None:
                    raise PreconditionError("holonomie bewaart de rand van de niet-Euclidische factor niet")
                return image
            maps.append(act)
    supplied = scenario.measures.get(root)
    if supplied:
        pulled = tuple((w, lower(xi)) for w, xi in supplied)
        if all(eta is not None for _, eta in pulled):
            worst = max(
                (_measure_mismatch(Z, tuple((w, act(eta)) for w, eta in pulled), pulled) for act in maps),
                default=(0.0, 0.0),
            )
            if worst[0] <= tol.angular and worst[1] <= WEIGHT_TOL:
                trace.append("aangeleverde maat gebruikt")
                return pulled
        trace.append("aangeleverde maat ligt niet invariant op de rand van de rest-factor")
    start = Z.boundary_grid()[0]
    orbit = _orbit_closure(Z, start, maps, tol.angular, tol.max_orbit)
    if orbit is None:
        return None
    trace.append(f"baangemiddelde maat op {len(orbit)} randpunt(en)")
    return tuple((1.0 / len(orbit), eta) for eta in orbit)


def _busemann_branch(
    scenario: FieldScenario, root: str, pres: Presentation, dec: Decomposition, trace: List[str]
) -> Tuple[Optional[DichotomyOutcome], Any]:
    """Busemann-integratie op de rest-factor Z; geeft een uitkomst of de nieuwe (kleinere) C."""
    tol = scenario.tolerances
    X, Z = scenario.spaces[root], dec.rest
    atoms = _invariant_measure(scenario, root, pres, dec, trace)
    if atoms is None:
        return _incomplete(root, "geen invariante randmaat te vinden", trace), None
    z0 = Z.anchor_points()[0]
    x0 = pres.embed(dec.join(np.zeros(dec.e_dim), z0))
    members = scenario.class_of(root)
    measure = {}
    bases = {}
    for w in members:
        T = scenario.transport(root, w)
        measure[w] = tuple((wt, T.apply_boundary(pres.embed_boundary(dec.rest_boundary(eta)))) for wt, eta in atoms)
        bases[w] = T.apply(x0)
    qfield = quasi_invariant_busemann_field(scenario, measure, Section(bases))
    trace.append(f"quasi-invariant veld, residu {qfield.equation_residual:.3g}")
    f = BusemannSum(Z, z0, atoms)
    record = classify_function(Z, f, z0, tol.search_radius)
    trace.append(f"infimum: {record.tag}")
    logger.info("%s: infimumklasse %s", root, record.tag)
    if record.tag == OMEGA_MIN:
        return None, pres.embed_convex(dec.rest_convex(record.argmin))
    if record.tag == OMEGA_NEG_INF:
        level = lambda beta: -beta
    elif record.tag == OMEGA_FINITE:
        level = lambda beta: record.value + 1.0 / beta
    else:
        return _incomplete(root, "infimum niet te classificeren", trace), None
    family = NestedConvexFamily(
        callback=lambda beta: pres.embed_convex(dec.rest_convex(f.sublevel(level(beta)))),
        real_indexed=True, label="sublevel",
    )
    center = limit_circumcenter(X, family, x0, tol.horizon)
    return _boundary_outcome(scenario, root, center.center, "busemann", trace), None


def _analyze_class(scenario: FieldScenario, root: str) -> DichotomyOutcome:
    tol = scenario.tolerances
    X = scenario.spaces[root]
    trace: List[str] = [f"klasse {', '.join(scenario.class_of(root))}, {len(scenario.loops(root))} lus(sen)"]
    C: Any = FullSet()
    for depth in range(1, tol.max_depth + 1):
        trace.append(f"diepte {depth}")
        try:
            found = _minimize_class(scenario, root, C, trace)
            if found.status == INDETERMINATE:
                return _incomplete(root, "krimpen stabiliseert niet", trace)
            if found.status == "escape":
                center = limit_circumcenter(X, found.family, found.base, tol.horizon)
                return _boundary_outcome(scenario, root, center.center, "escape", trace)
            pres = present_convex(X, found.set)
            Y = pres.space
            if Y.has_boundary():
                split = flat_split(Y, Y.boundary_grid(), tol.r_max, tol.defect, angular_tol=tol.angular)
                trace.append(f"vlakke splitsing |F|={len(split.F)} |A|={len(split.A)} |P|={len(split.P)}")
                if split.P:
                    result = angular_circumcenter(Y, split.P)
                    if not isinstance(result, AngularCenter):
                        return _incomplete(root, f"P heeft hoekstraal {result.radius:.6g}", trace)
                    return _boundary_outcome(scenario, root, pres.embed_boundary(result.center), "perpendicular", trace)
            dec = decompose(Y)
            if not dec.rest.has_boundary():
                return _flat_outcome(scenario, root, pres.embed_convex(_flat_in(Y)), dec.e_dim, trace)
            outcome, C = _busemann_branch(scenario, root, pres, dec, trace)
            if outcome is not None:
                return outcome
        except Cat0Error as e:
            return _incomplete(root, str(e), trace)
    return _incomplete(root, f"recursiediepte {tol.max_depth} bereikt", trace)


def dichotomy(scenario: FieldScenario) -> Tuple[DichotomyOutcome, ...]:
    """Eén uitkomst per klasse: invariante randsectie, invariant plat, of onvolledig."""
    return tuple(_analyze_class(scenario, members[0]) for members in scenario.classes)
