"""Grammatica van scenariodocumenten (JSON, versie 1).

Dit module zet letterlijke waarden uit een document om in ruimtes, punten,
randpunten, convexe verzamelingen, isometrieën en geneste families. Het
samenstellen tot een ``FieldScenario`` gebeurt in ``fields.load_scenario``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, fields as dc_fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type

import numpy as np

from .asymptotics import NestedConvexFamily
from .boundary import BusemannSum
from .errors import Cat0Error, ScenarioError
from .models.base import EmptySet, FullSet, ModelSpace, SingletonSet
from .models.euclidean import (
    Euclidean,
    EuclideanConvex,
    EuclideanIsometry,
    rotation_2d,
    rotation_3d,
    translation,
)
from .models.product import Product, ProductConvex, ProductIsometry
from .models.tree import (
    Tree,
    TreeAutomorphism,
    TreeConvex,
    TreeLineMap,
    line_tree,
    point_space,
    tree_from_lists,
    tripod,
)

logger = logging.getLogger(__name__)

DOCUMENT_KEYS = ("version", "omega", "spaces", "generators", "measures", "tolerances", "seed", "probes")
TREE_PRESETS = {"tripod": tripod, "line": line_tree, "point": point_space}


# =============================
# Toleranties
# =============================
@dataclass(frozen=True)
class Tolerances:
    metric: float = 1e-9
    angular: float = 1e-6
    residual: float = 1e-7
    defect: float = 1e-6
    r_max: float = 8.0
    horizon: float = 1e4
    max_rounds: int = 12
    max_depth: int = 8
    max_orbit: int = 64
    search_radius: float = 4096.0
    audit_samples: int = 1000

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in dc_fields(cls)]

    def with_overrides(self, overrides: Mapping[str, Any], error: Type[Cat0Error] = ScenarioError) -> "Tolerances":
        """Nieuwe toleranties; onbekende sleutels of ongeldige waarden geven ``error``."""
        changes = {}
        for key, value in overrides.items():
            if key not in self.keys():
                raise error(f"onbekende tolerantie {key!r}")
            kind = type(getattr(self, key))
            try:
                number = float(value)
            except (TypeError, ValueError) as e:
                raise error(f"tolerantie {key} moet een getal zijn, kreeg {value!r}") from e
            if not math.isfinite(number) or number <= 0:
                raise error(f"tolerantie {key} moet positief zijn, kreeg {value!r}")
            changes[key] = int(number) if kind is int else number
        return replace(self, **changes)


# =============================
# Documenten lezen
# =============================
def read_document(path: Any) -> Dict[str, Any]:
    """JSON inlezen; syntaxfouten krijgen regel en kolom mee."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"kan scenario niet lezen: {e.strerror or e}", str(path)) from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"ongeldige JSON: {e.msg}", f"{path.name}:{e.lineno}:{e.colno}") from e
    if not isinstance(document, dict):
        raise ScenarioError("scenario moet een JSON-object zijn", path.name)
    return document


def check_document_keys(document: Mapping[str, Any]) -> None:
    unknown = [k for k in document if k not in DOCUMENT_KEYS]
    if unknown:
        raise ScenarioError(f"onbekende sleutel(s) {', '.join(sorted(unknown))}", "document")
    if document.get("version") != 1:
        raise ScenarioError(f"versie moet 1 zijn, kreeg {document.get('version')!r}", "version")
    for key in ("omega", "spaces", "generators"):
        if key not in document:
            raise ScenarioError(f"verplichte sleutel {key!r} ontbreekt", "document")


def _require(mapping: Any, key: str, context: str) -> Any:
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioError(f"sleutel {key!r} ontbreekt", context)
    return mapping[key]


# =============================
# Ruimtes
# =============================
def parse_space(literal: Any, context: str = "space") -> ModelSpace:
    if not isinstance(literal, dict):
        raise ScenarioError(f"ruimte moet een object zijn, kreeg {literal!r}", context)
    kind = literal.get("kind")
    try:
        if kind == "euclidean":
            return Euclidean(int(_require(literal, "dim", context)))
        if kind == "tree":
            if "preset" in literal:
                preset = TREE_PRESETS.get(literal["preset"])
                if preset is None:
                    raise ScenarioError(f"onbekende boom {literal['preset']!r}", context)
                return preset()
            return tree_from_lists(
                [str(v) for v in _require(literal, "vertices", context)],
                [(str(i), str(t), str(h), float(l)) for i, t, h, l in literal.get("edges", [])],
                [(str(i), str(v)) for i, v in literal.get("rays", [])],
                name=str(literal.get("name", "tree")),
            )
        if kind == "product":
            return Product(
                parse_space(_require(literal, "left", context), f"{context}.left"),
                parse_space(_require(literal, "right", context), f"{context}.right"),
            )
    except ScenarioError:
        raise
    except (Cat0Error, TypeError, ValueError) as e:
        raise ScenarioError(f"ongeldige ruimte: {e}", context) from e
    raise ScenarioError(f"onbekende ruimtesoort {kind!r}", context)


def same_shape(a: ModelSpace, b: ModelSpace) -> bool:
    """Zelfde soort ruimte (en dimensie, en productstructuur)."""
    if isinstance(a, Euclidean) and isinstance(b, Euclidean):
        return a.dim == b.dim
    if isinstance(a, Tree) and isinstance(b, Tree):
        return True
    if isinstance(a, Product) and isinstance(b, Product):
        return same_shape(a.left, b.left) and same_shape(a.right, b.right)
    return False


def shape_name(space: ModelSpace) -> str:
    if isinstance(space, Euclidean):
        return f"euclidean({space.dim})"
    if isinstance(space, Product):
        return f"product({shape_name(space.left)}, {shape_name(space.right)})"
    return space.kind


# =============================
# Punten en randpunten
# =============================
def parse_point(space: ModelSpace, literal: Any, context: str = "point") -> Any:
    try:
        if isinstance(space, Tree):
            return space.point(literal)
        if isinstance(space, Product):
            if not isinstance(literal, (list, tuple)) or len(literal) != 2:
                raise ScenarioError(f"productpunt moet een paar zijn, kreeg {literal!r}", context)
            return (parse_point(space.left, literal[0], context), parse_point(space.right, literal[1], context))
        return space.check_point(literal)
    except ScenarioError:
        raise
    except Cat0Error as e:
        raise ScenarioError(str(e), context) from e


def parse_boundary(space: ModelSpace, literal: Any, context: str = "boundary") -> Any:
    try:
        if isinstance(space, Euclidean):
            return space.direction(literal)
        if isinstance(space, Tree):
            ray = str(literal)
            return space.end(ray[4:] if ray.startswith("end:") else ray)
        if isinstance(space, Product):
            if not isinstance(literal, dict):
                raise ScenarioError(f"joinpunt moet een object zijn, kreeg {literal!r}", context)
            theta = float(_require(literal, "theta", context))
            left = parse_boundary(space.left, literal["left"], context) if literal.get("left") is not None else None
            right = parse_boundary(space.right, literal["right"], context) if literal.get("right") is not None else None
            return space.join(theta, left, right)
    except ScenarioError:
        raise
    except (Cat0Error, TypeError, ValueError) as e:
        raise ScenarioError(str(e), context) from e
    raise ScenarioError(f"geen rand in {space.kind}", context)


def parse_measure(space: ModelSpace, literal: Any, context: str = "measure") -> Tuple[Tuple[float, Any], ...]:
    """Lijst van [gewicht, randpunt]; gewichten worden genormeerd op totaal 1."""
    if not isinstance(literal, list) or not literal:
        raise ScenarioError("maat moet een niet-lege lijst [gewicht, randpunt] zijn", context)
    atoms = []
    for i, item in enumerate(literal):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ScenarioError(f"atoom {i} moet [gewicht, randpunt] zijn", context)
        weight = float(item[0])
        if not weight > 0:
            raise ScenarioError(f"gewicht van atoom {i} moet positief zijn", context)
        atoms.append((weight, parse_boundary(space, item[1], f"{context}[{i}]")))
    total = sum(w for w, _ in atoms)
    return tuple((w / total, xi) for w, xi in atoms)


# =============================
# Convexe verzamelingen
# =============================
def _bound(value: Any) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


def parse_convex(space: ModelSpace, literal: Any, context: str = "set") -> Any:
    if literal == "all":
        return FullSet()
    if literal == "empty":
        return EmptySet()
    if not isinstance(literal, dict):
        raise ScenarioError(f"convexe verzameling niet herkend: {literal!r}", context)
    if "point" in literal:
        return SingletonSet(parse_point(space, literal["point"], context))
    try:
        if isinstance(space, Euclidean):
            return EuclideanConvex(
                halfspaces=tuple((np.asarray(u, dtype=float), float(c)) for u, c in literal.get("halfspaces", [])),
                equalities=tuple((np.asarray(u, dtype=float), float(c)) for u, c in literal.get("equalities", [])),
                balls=tuple((np.asarray(c, dtype=float), float(r)) for c, r in literal.get("balls", [])),
            )
        if isinstance(space, Tree):
            if "segment" in literal:
                p, q = literal["segment"]
                return space.segment(parse_point(space, p, context), parse_point(space, q, context))
            if "beyond" in literal:
                return space.beyond(parse_point(space, literal["beyond"], context))
            intervals = []
            for element, lo, hi in _require(literal, "intervals", context):
                if element not in space.elements:
                    raise ScenarioError(f"onbekend element {element!r}", context)
                lo, hi = _bound(lo), _bound(hi)
                if not 0 <= lo <= hi <= space.elements[element].length:
                    raise ScenarioError(f"interval [{lo}, {hi}] past niet op {element}", context)
                intervals.append((str(element), lo, hi))
            return TreeConvex(tuple(intervals))
        if isinstance(space, Product):
            return ProductConvex(
                parse_convex(space.left, literal.get("left", "all"), f"{context}.left"),
                parse_convex(space.right, literal.get("right", "all"), f"{context}.right"),
            )
    except ScenarioError:
        raise
    except (Cat0Error, TypeError, ValueError) as e:
        raise ScenarioError(f"ongeldige convexe verzameling: {e}", context) from e
    raise ScenarioError("convexe verzameling niet herkend", context)


# =============================
# Isometrieën
# =============================
def parse_isometry(source: ModelSpace, target: ModelSpace, literal: Any, context: str = "isometry") -> Any:
    if not same_shape(source, target):
        raise ScenarioError(f"isometrie beeldt {shape_name(source)} af op {shape_name(target)}", context)
    literal = {} if literal in (None, "identity") else literal
    if not isinstance(literal, dict):
        raise ScenarioError(f"isometrie niet herkend: {literal!r}", context)
    try:
        if isinstance(source, Euclidean):
            return _euclidean_isometry(source, target, literal)
        if isinstance(source, Tree):
            if "shift" in literal or "reflect" in literal:
                sign = -1 if literal.get("reflect") else 1
                return TreeLineMap(source, target, sign, float(literal.get("shift", 0.0)))
            vm = {v: v for v in source.vertices}
            vm.update({str(k): str(v) for k, v in literal.get("vertices", {}).items()})
            rm = {r.id: r.id for r in source.rays}
            rm.update({str(k): str(v) for k, v in literal.get("rays", {}).items()})
            return TreeAutomorphism(source, target, vm, rm)
        if isinstance(source, Product):
            return ProductIsometry(
                parse_isometry(source.left, target.left, literal.get("left"), f"{context}.left"),
                parse_isometry(source.right, target.right, literal.get("right"), f"{context}.right"),
            )
    except ScenarioError:
        raise
    except (Cat0Error, TypeError, ValueError, KeyError) as e:
        raise ScenarioError(f"ongeldige isometrie: {e}", context) from e
    raise ScenarioError("isometrie niet herkend", context)


def _euclidean_isometry(source: Euclidean, target: Euclidean, literal: Mapping[str, Any]) -> EuclideanIsometry:
    shift = literal.get("translation", [0.0] * source.dim)
    if "matrix" in literal:
        return EuclideanIsometry(source, target, np.asarray(literal["matrix"], dtype=float), np.asarray(shift, dtype=float))
    if "axis" in literal:
        g = rotation_3d(
            source,
            literal["axis"],
            float(literal.get("angle", 0.0)),
            literal.get("shift", [0.0] * 3),
            literal.get("center", [0.0] * 3),
        )
        return EuclideanIsometry(source, target, g.matrix, g.translation)
    if "rotation" in literal:
        g = rotation_2d(source, float(literal["rotation"]), literal.get("center", [0.0, 0.0]))
        return EuclideanIsometry(source, target, g.matrix, g.translation + np.asarray(shift, dtype=float))
    g = translation(source, shift)
    return EuclideanIsometry(source, target, g.matrix, g.translation)


# =============================
# Geneste families
# =============================
def parse_family(space: ModelSpace, literal: Any, context: str = "family") -> NestedConvexFamily:
    """Soorten: halfspace-march, corner, subtree, busemann, sequence."""
    if not isinstance(literal, dict):
        raise ScenarioError("familie moet een object zijn", context)
    kind = literal.get("kind")
    if kind == "sequence":
        members = tuple(parse_convex(space, C, f"{context}.sets[{i}]") for i, C in enumerate(_require(literal, "sets", context)))
        return NestedConvexFamily(members=members, label=str(literal.get("label", kind)))
    if kind in ("halfspace-march", "corner"):
        if not isinstance(space, Euclidean):
            raise ScenarioError(f"{kind} vraagt een Euclidische ruimte", context)
        normals = [literal["normal"]] if kind == "halfspace-march" else _require(literal, "normals", context)
        rows = [space.direction(n) for n in normals]
        # C^β = {⟨n, x⟩ ≥ β voor elke n}
        callback = lambda beta: EuclideanConvex(halfspaces=tuple((-n, -beta) for n in rows))
        return NestedConvexFamily(callback=callback, real_indexed=True, label=kind)
    if kind == "subtree":
        if not isinstance(space, Tree):
            raise ScenarioError("subtree vraagt een boom", context)
        end = parse_boundary(space, _require(literal, "ray", context), context)
        return NestedConvexFamily(
            callback=lambda beta: space.beyond(space.canonical(end.ray, beta)), real_indexed=True, label=kind
        )
    if kind == "busemann":
        base = parse_point(space, literal["base"], context) if "base" in literal else space.origin()
        f = BusemannSum(space, base, parse_measure(space, _require(literal, "atoms", context), context))
        return NestedConvexFamily(callback=lambda beta: f.sublevel(-beta), real_indexed=True, label=kind)
    raise ScenarioError(f"onbekende familiesoort {kind!r}", context)


# =============================
# Probes
# =============================
@dataclass(frozen=True, eq=False)
class Probes:
    """Invoer voor de losse commando's; alles optioneel."""

    space: Optional[ModelSpace] = None
    points: Tuple[Any, ...] = ()
    convex: Any = None
    project_points: Tuple[Any, ...] = ()
    boundary: Tuple[Any, ...] = ()
    tits_pairs: Tuple[Tuple[Any, Any], ...] = ()
    tits_base: Any = None
    tits_n: Tuple[int, ...] = (1, 2, 4, 8, 16, 100, 1000, 10000)
    family: Optional[NestedConvexFamily] = None
    family_base: Any = None
    flat_grid: int = 64
    quadruples: Tuple[Tuple[float, float, float, float], ...] = ()


def parse_probes(literal: Any, default_space: ModelSpace, context: str = "probes") -> Probes:
    if literal is None:
        return Probes(space=default_space)
    if not isinstance(literal, dict):
        raise ScenarioError("probes moet een object zijn", context)
    known = {"space", "points", "project", "boundary", "tits", "family", "flat_grid", "quadruples"}
    unknown = sorted(set(literal) - known)
    if unknown:
        raise ScenarioError(f"onbekende sleutel(s) in het steekproefblok {', '.join(unknown)}", context)
    space = parse_space(literal["space"], f"{context}.space") if "space" in literal else default_space
    out: Dict[str, Any] = {"space": space}
    out["points"] = tuple(parse_point(space, p, f"{context}.points[{i}]") for i, p in enumerate(literal.get("points", [])))
    if "project" in literal:
        block = literal["project"]
        out["convex"] = parse_convex(space, _require(block, "set", f"{context}.project"), f"{context}.project.set")
        out["project_points"] = tuple(
            parse_point(space, p, f"{context}.project.points[{i}]") for i, p in enumerate(block.get("points", []))
        )
    out["boundary"] = tuple(
        parse_boundary(space, b, f"{context}.boundary[{i}]") for i, b in enumerate(literal.get("boundary", []))
    )
    if "tits" in literal:
        block = literal["tits"]
        out["tits_pairs"] = tuple(
            (parse_boundary(space, a, f"{context}.tits"), parse_boundary(space, b, f"{context}.tits"))
            for a, b in _require(block, "pairs", f"{context}.tits")
        )
        if "base" in block:
            out["tits_base"] = parse_point(space, block["base"], f"{context}.tits.base")
        if "n" in block:
            out["tits_n"] = tuple(int(n) for n in block["n"])
    if "family" in literal:
        out["family"] = parse_family(space, literal["family"], f"{context}.family")
        base = literal["family"].get("x0")
        out["family_base"] = parse_point(space, base, f"{context}.family.x0") if base is not None else space.origin()
    if "flat_grid" in literal:
        out["flat_grid"] = int(literal["flat_grid"])
    quads = []
    for i, q in enumerate(literal.get("quadruples", [])):
        if not isinstance(q, (list, tuple)) or len(q) != 4:
            raise ScenarioError(f"viertal {i} moet vier afstanden hebben", f"{context}.quadruples")
        quads.append(tuple(float(v) for v in q))
    out["quadruples"] = tuple(quads)
    return Probes(**out)
