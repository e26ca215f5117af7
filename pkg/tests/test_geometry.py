import math

import numpy as np
import pytest

from cat0_engine.errors import ArgumentError, DegenerateVertexError
from cat0_engine.geometry import (
    alexandrov_angle,
    audit_cat0,
    audit_quadruples,
    circumcenter,
    cn_violation,
    comparison_angle,
    comparison_triangle,
    project_convex,
    sample_triples,
    weighted_minimax,
)
from cat0_engine.models.base import SingletonSet
from cat0_engine.models.euclidean import EuclideanConvex, ball, halfspace
from cat0_engine.models.tree import TreeConvex


def test_comparison_triangle_sides():
    tri = comparison_triangle(3.0, 4.0, 5.0)
    assert np.linalg.norm(tri.y_bar - tri.x_bar) == pytest.approx(3.0)
    assert np.linalg.norm(tri.z_bar - tri.x_bar) == pytest.approx(4.0)
    assert np.linalg.norm(tri.z_bar - tri.y_bar) == pytest.approx(5.0)


def test_comparison_triangle_rejects_impossible_sides():
    with pytest.raises(ArgumentError):
        comparison_triangle(1.0, 1.0, 3.0)


def test_l1_quadruple_violation_is_four():
    assert cn_violation(1.0, 1.0, 2.0, 2.0) == pytest.approx(4.0, abs=1e-12)
    report = audit_quadruples([(1.0, 1.0, 2.0, 2.0)])
    assert report.max_violation == pytest.approx(4.0, abs=1e-9)
    assert len(report.flagged()) == 1


@pytest.mark.parametrize("fixture", ["plane", "space3", "tri", "line", "plane_tripod"])
def test_model_spaces_pass_the_audit(request, fixture, rng):
    space = request.getfixturevalue(fixture)
    report = audit_cat0(space, sample_triples(space, rng, 1000))
    assert report.max_violation <= 1e-9
    assert report.flagged() == []


def test_comparison_angle_right_angle(plane):
    assert comparison_angle(plane, [0, 0], [1, 0], [0, 2]) == pytest.approx(math.pi / 2)


def test_alexandrov_angle_between_tripod_rays(tri):
    assert alexandrov_angle(tri, tri.point("o"), tri.point("a@1"), tri.point("b@2")) == pytest.approx(math.pi)


def test_alexandrov_angle_degenerate_vertex(plane):
    with pytest.raises(DegenerateVertexError):
        alexandrov_angle(plane, [0, 0], [0, 0], [1, 0])


def test_projection_onto_halfspace(plane):
    C = halfspace([1.0, 0.0], 1.0)
    assert np.allclose(project_convex(plane, C, [3.0, 2.0]), [1.0, 2.0])
    assert np.allclose(project_convex(plane, C, [-1.0, 2.0]), [-1.0, 2.0])


def test_projection_onto_ball(plane):
    C = ball([0.0, 0.0], 1.0)
    assert np.allclose(project_convex(plane, C, [3.0, 4.0]), [0.6, 0.8])


def test_projection_is_nonexpansive_and_obtuse(plane, rng):
    C = EuclideanConvex(halfspaces=((np.array([1.0, 0.0]), 1.0), (np.array([0.0, 1.0]), 2.0)))
    for _ in range(200):
        x, y = rng.uniform(-5, 5, 2), rng.uniform(-5, 5, 2)
        px, py = project_convex(plane, C, x), project_convex(plane, C, y)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-9
        # variationele ongelijkheid: ⟨x − π(x), c − π(x)⟩ ≤ 0
        c = project_convex(plane, C, rng.uniform(-5, 5, 2))
        assert np.dot(x - px, c - px) <= 1e-9


def test_projection_onto_subtree(tri):
    C = tri.beyond(tri.point("a@1"))
    p = project_convex(tri, C, tri.point("b@2"))
    assert tri.distance(p, tri.point("a@1")) == pytest.approx(0.0)
    assert isinstance(C, TreeConvex)


def test_projection_onto_singleton(tri):
    target = tri.point("c@2")
    assert project_convex(tri, SingletonSet(target), tri.point("a@5")) == target


def test_weighted_minimax_two_points():
    c, val = weighted_minimax(np.array([[0.0, 0.0], [2.0, 0.0]]), np.zeros(2))
    assert np.allclose(c, [1.0, 0.0])
    assert val == pytest.approx(1.0)


def test_euclidean_circumcenter_of_right_triangle(plane):
    center, radius = circumcenter(plane, [np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([0.0, 2.0])])
    assert np.allclose(center, [1.0, 1.0])
    assert radius == pytest.approx(math.sqrt(2.0))


def test_euclidean_circumcenter_of_obtuse_triangle(plane):
    center, radius = circumcenter(plane, [np.array([0.0, 0.0]), np.array([4.0, 0.0]), np.array([2.0, 0.5])])
    assert np.allclose(center, [2.0, 0.0])
    assert radius == pytest.approx(2.0)


def test_tree_circumcenter_on_the_long_side(tri):
    center, radius = circumcenter(tri, [tri.point("a@3"), tri.point("b@1"), tri.point("c@1")])
    assert tri.distance(center, tri.point("a@1")) == pytest.approx(0.0, abs=1e-9)
    assert radius == pytest.approx(2.0)


def test_product_circumcenter(plane_tripod):
    X = plane_tripod
    T = X.right
    B = [(np.array([0.0, 0.0]), T.point("a@2")), (np.array([2.0, 0.0]), T.point("b@2"))]
    center, radius = circumcenter(X, B)
    assert np.allclose(center[0], [1.0, 0.0])
    assert T.distance(center[1], T.point("o")) == pytest.approx(0.0, abs=1e-9)
    assert radius == pytest.approx(math.sqrt(5.0))


def test_circumcenter_of_empty_set(plane):
    with pytest.raises(ArgumentError):
        circumcenter(plane, [])
