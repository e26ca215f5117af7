import math

import numpy as np
import pytest

from cat0_engine.asymptotics import (
    NestedConvexFamily,
    affinity_defect,
    decompose,
    euclidean_decomposition,
    flat_rank,
    flat_split,
    limit_circumcenter,
    limit_set,
    limit_set_diameter_check,
    present_convex,
    projection_orbit,
)
from cat0_engine.boundary import BusemannSum
from cat0_engine.errors import EmptySetError, PreconditionError
from cat0_engine.models.base import EmptySet, FullSet, SingletonSet
from cat0_engine.models.euclidean import Euclidean, EuclideanConvex, affine_subspace, ball
from cat0_engine.models.product import ProductConvex
from cat0_engine.models.tree import TreeConvex, point_space
from cat0_engine.scenario import parse_family


def _march(normal):
    n = np.asarray(normal, dtype=float) / np.linalg.norm(normal)
    return NestedConvexFamily(callback=lambda beta: EuclideanConvex(halfspaces=((-n, -beta),)), real_indexed=True)


def test_halfspace_march_limit_direction(plane):
    L = limit_set(plane, _march([1.0, 0.0]), np.array([0.0, 3.0]))
    assert len(L) == 1
    assert plane.tits_angle(L[0], np.array([1.0, 0.0])) <= 1e-3


def test_corner_family_points_along_the_diagonal(plane):
    family = parse_family(plane, {"kind": "corner", "normals": [[1, 0], [0, 1]]})
    center = limit_circumcenter(plane, family, np.zeros(2))
    assert plane.tits_angle(center.center, np.array([1.0, 1.0]) / math.sqrt(2.0)) <= 1e-3


def test_subtree_family_on_tripod(tri):
    family = parse_family(tri, {"kind": "subtree", "ray": "b"})
    L = limit_set(tri, family, tri.point("a@2"))
    assert [xi.ray for xi in L] == ["b"]


def test_busemann_sublevel_family(plane):
    family = parse_family(plane, {"kind": "busemann", "atoms": [[1, [0, 1]]]})
    center = limit_circumcenter(plane, family, np.array([5.0, 0.0]))
    assert plane.tits_angle(center.center, np.array([0.0, 1.0])) <= 1e-3


def test_limit_set_is_independent_of_the_base_point(plane):
    family = parse_family(plane, {"kind": "corner", "normals": [[1, 0], [1, 1]]})
    a = limit_circumcenter(plane, family, np.zeros(2)).center
    b = limit_circumcenter(plane, family, np.array([-7.0, 4.0])).center
    assert plane.tits_angle(a, b) <= 1e-3


def test_random_corner_families_have_small_limit_sets(plane, rng):
    for _ in range(10):
        base_angle = rng.uniform(0, 2 * math.pi)
        normals = [[math.cos(base_angle + s), math.sin(base_angle + s)] for s in rng.uniform(-0.7, 0.7, 2)]
        family = parse_family(plane, {"kind": "corner", "normals": normals})
        L = limit_set(plane, family, rng.uniform(-3, 3, 2))
        assert limit_set_diameter_check(plane, L) <= math.pi / 2 + 1e-6
        assert limit_circumcenter(plane, family, np.zeros(2)).radius < math.pi / 2 - 1e-6


def test_bounded_family_is_rejected(plane):
    family = NestedConvexFamily(members=(ball([0, 0], 3.0), ball([0, 0], 2.0), ball([0, 0], 1.0)))
    with pytest.raises(PreconditionError):
        projection_orbit(plane, family, np.array([5.0, 0.0]))


def test_growing_family_is_rejected(plane):
    family = NestedConvexFamily(callback=lambda beta: ball([0, 0], beta))
    with pytest.raises(PreconditionError):
        projection_orbit(plane, family, np.array([1e6, 0.0]))


def test_affinity_defect_of_tripod_end(tri):
    f = BusemannSum(tri, tri.point("o"), ((1.0, tri.end("a")),))
    assert affinity_defect(tri, f, tri.point("o"), 2.0) >= 1.0


def test_affinity_defect_of_plane_direction(plane):
    f = BusemannSum(plane, np.zeros(2), ((1.0, np.array([0.6, 0.8])),))
    assert affinity_defect(plane, f, np.zeros(2), 8.0) <= 1e-9


def test_flat_split_in_the_plane(plane):
    split = flat_split(plane, plane.boundary_grid(16))
    assert len(split.F) == 16
    assert len(split.A) == 16
    assert split.P == []


def test_flat_split_on_tripod_has_no_flat_points(tri):
    split = flat_split(tri, tri.boundary_grid())
    assert split.F == [] and split.A == [] and split.P == []
    assert any(row.radius == 2.0 and row.defect >= 1.0 for row in split.defects)


def test_flat_split_on_line_tree(line):
    split = flat_split(line, line.boundary_grid())
    assert sorted(xi.ray for xi in split.F) == ["neg", "pos"]
    assert sorted(xi.ray for xi in split.A) == ["neg", "pos"]
    assert split.P == []


def test_flat_split_on_product_keeps_the_line_ends(line_tripod):
    split = flat_split(line_tripod, line_tripod.boundary_grid(16))
    assert split.F and all(xi.theta == 0.0 for xi in split.F)
    assert len(split.A) == len(split.F)
    assert split.P == []


def test_decompose_product(plane_tripod):
    d = decompose(plane_tripod)
    assert d.e_dim == 2
    assert d.rest.name == "tripod"
    p = (np.array([1.0, -2.0]), plane_tripod.right.point("b@3"))
    v, y = d.split(p)
    assert np.allclose(v, [1.0, -2.0])
    back = d.join(v, y)
    assert plane_tripod.distance(back, p) == pytest.approx(0.0)


def test_decompose_line_tripod(line_tripod):
    assert euclidean_decomposition(line_tripod)[0] == 1


def test_present_axis_as_a_line(space3):
    axis = affine_subspace([0.0, 0.0, 2.0], np.array([[0.0], [0.0], [1.0]]))
    pres = present_convex(space3, axis)
    assert pres.space == Euclidean(1)
    assert space3.contains(axis, pres.embed(np.array([4.0])))
    assert flat_rank(space3, axis) == 1


def test_present_singleton_and_empty(space3):
    pres = present_convex(space3, SingletonSet(np.array([1.0, 2.0, 3.0])))
    assert pres.space == point_space()
    assert flat_rank(space3, FullSet()) == 3
    with pytest.raises(EmptySetError):
        present_convex(space3, EmptySet())


def test_present_subtree_keeps_its_end(tri):
    C = tri.beyond(tri.point("a@1"))
    pres = present_convex(tri, C)
    assert pres.space.has_boundary()
    assert pres.pull_boundary(tri.end("a")) is not None
    assert pres.pull_boundary(tri.end("b")) is None
    assert isinstance(pres.embed_convex(FullSet()), TreeConvex)


def test_present_product_drops_point_factors(line_tripod):
    C = ProductConvex(FullSet(), SingletonSet(line_tripod.right.point("o")))
    pres = present_convex(line_tripod, C)
    assert pres.space.is_line()
    assert flat_rank(line_tripod, C) == 1
