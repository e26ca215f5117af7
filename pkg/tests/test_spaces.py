import math

import numpy as np
import pytest

from cat0_engine.errors import ArgumentError, CompositionError, DomainError
from cat0_engine.spaces import (
    Euclidean,
    GeodesicSegment,
    Product,
    TreePoint,
    compose,
    distance,
    geodesic_point,
    invert,
    isometry_distortion,
    rotation_2d,
    sample_points,
    translation,
    tree_from_lists,
)


def test_euclidean_distance_and_midpoint(plane):
    assert distance(plane, [0, 0], [3, 4]) == pytest.approx(5.0)
    mid = geodesic_point(plane, [0, 0], [2, 2], 0.5)
    assert np.allclose(mid, [1, 1])


def test_geodesic_parameter_out_of_range(plane):
    with pytest.raises(ArgumentError):
        geodesic_point(plane, [0, 0], [1, 0], 1.5)


def test_wrong_dimension_is_domain_error(plane):
    with pytest.raises(DomainError):
        distance(plane, [0, 0, 0], [1, 0])


def test_tripod_distance_passes_through_center(tri):
    a2, b3 = tri.point("a@2"), tri.point("b@3")
    assert distance(tri, a2, b3) == pytest.approx(5.0)
    mid = geodesic_point(tri, a2, b3, 0.5)
    assert tri.format_point(mid) == tri.format_point(tri.point("b@0.5"))


def test_tripod_same_ray_distance(tri):
    assert distance(tri, tri.point("a@1"), tri.point("a@4")) == pytest.approx(3.0)


def test_tree_from_lists_path_metric():
    T = tree_from_lists(["u", "v", "w"], [("e1", "u", "v", 2.0), ("e2", "v", "w", 1.5)], [("r", "w")])
    assert T.distance(T.point("u"), T.point("r@2")) == pytest.approx(5.5)
    assert T.distance(T.point("e1@0.5"), T.point("e2@1")) == pytest.approx(2.5)


def test_tree_with_cycle_is_rejected():
    with pytest.raises(DomainError):
        tree_from_lists(["u", "v", "w"], [("e1", "u", "v", 1), ("e2", "v", "w", 1), ("e3", "w", "u", 1)])


def test_product_distance_is_l2(plane_tripod):
    p = (np.array([0.0, 0.0]), plane_tripod.right.point("o"))
    q = (np.array([3.0, 0.0]), plane_tripod.right.point("b@4"))
    assert distance(plane_tripod, p, q) == pytest.approx(5.0)


def test_geodesic_segment_length(tri):
    seg = GeodesicSegment(tri, tri.point("a@1"), tri.point("c@2"))
    assert seg.length == pytest.approx(3.0)
    assert isinstance(seg(0.25), TreePoint)


def test_compose_and_invert_translations(plane):
    g = translation(plane, [1, 2])
    h = rotation_2d(plane, math.pi / 2)
    gh = compose(g, h)
    assert np.allclose(gh.apply(np.array([1.0, 0.0])), [1.0, 3.0])
    back = compose(invert(gh), gh)
    assert np.allclose(back.apply(np.array([0.3, -0.7])), [0.3, -0.7])


def test_compose_across_spaces_fails(plane):
    g = translation(plane, [1, 0])
    h = translation(Euclidean(3), [1, 0, 0])
    with pytest.raises(CompositionError):
        compose(g, h)


def test_isometry_distortion_zero_for_rotation(plane, rng):
    g = rotation_2d(plane, 0.3, center=(1.0, -2.0))
    assert isometry_distortion(g, sample_points(plane, rng, 20)) < 1e-12


def test_sample_points_start_with_anchors(tri, rng):
    pts = sample_points(tri, rng, 5)
    assert len(pts) == 5
    assert tri.format_point(pts[0]) == tri.format_point(tri.point("o"))


def test_product_requires_pairs():
    X = Product(Euclidean(1), Euclidean(1))
    with pytest.raises(DomainError):
        X.check_point([1.0])
