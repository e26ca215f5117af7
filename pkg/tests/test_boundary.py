import math

import numpy as np
import pytest

from cat0_engine.boundary import (
    AngularCenter,
    BusemannSum,
    NoUniqueCenter,
    angle_n,
    angular_circumcenter,
    busemann,
    ray_point,
    tits_angle,
    tits_angle_limit,
)
from cat0_engine.errors import ArgumentError, DomainError, UnsupportedError
from cat0_engine.models.base import EmptySet, FullSet
from cat0_engine.models.tree import TreeEnd, point_space


def test_tripod_end_value_is_exact(tri):
    assert busemann(tri, tri.point("o"), tri.end("a"), tri.point("b@1")) == 1.0
    assert busemann(tri, tri.point("o"), tri.end("a"), tri.point("a@3")) == -3.0


def test_busemann_cocycle_on_random_quadruples(plane, rng):
    xi = plane.direction([1.0, 2.0])
    for _ in range(200):
        x, y, z = (rng.uniform(-5, 5, 2) for _ in range(3))
        lhs = busemann(plane, x, xi, z)
        rhs = busemann(plane, x, xi, y) + busemann(plane, y, xi, z)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_tree_busemann_is_one_lipschitz(tri, rng):
    xi = tri.end("c")
    x0 = tri.point("o")
    for _ in range(200):
        p, q = tri.random_point(rng), tri.random_point(rng)
        diff = abs(busemann(tri, x0, xi, p) - busemann(tri, x0, xi, q))
        assert diff <= tri.distance(p, q) + 1e-9


def test_busemann_on_bounded_space_fails():
    star = point_space()
    with pytest.raises(DomainError):
        busemann(star, star.origin(), TreeEnd("x"), star.origin())


def test_ray_point_through_the_center(tri):
    p = ray_point(tri, tri.point("a@1"), tri.end("b"), 3.0)
    assert tri.distance(p, tri.point("b@2")) == pytest.approx(0.0)


def test_ray_point_negative_time(plane):
    with pytest.raises(ArgumentError):
        ray_point(plane, [0, 0], [1, 0], -1.0)


def test_tits_angle_closed_forms(plane, tri, line_tripod):
    assert tits_angle(plane, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.pi / 2)
    assert tits_angle(tri, tri.end("a"), tri.end("b")) == math.pi
    X = line_tripod
    xi = X.join(0.0, X.left.end("pos"), None)
    eta = X.join(math.pi / 2, None, X.right.end("a"))
    assert tits_angle(X, xi, eta) == pytest.approx(math.pi / 2)


def test_tits_angle_matches_chord_limit(plane, rng):
    for _ in range(50):
        xi, eta = plane.direction(rng.normal(size=2)), plane.direction(rng.normal(size=2))
        assert tits_angle_limit(plane, xi, eta, 1e6) == pytest.approx(tits_angle(plane, xi, eta), abs=1e-6)


def test_tits_angle_limit_on_tripod(tri):
    assert tits_angle_limit(tri, tri.end("a"), tri.end("b"), 1e6) == pytest.approx(math.pi, abs=1e-6)


@pytest.mark.parametrize("n", [1, 2, 4, 16, 100, 1000, 10000])
def test_angle_n_trace_on_tripod(tri, n):
    value = angle_n(tri, tri.point("c@1"), tri.end("a"), tri.end("b"), n)
    expected = (2 * n * n - 4 * (n - 1) ** 2) / (2 * n * n)
    assert math.cos(value) == pytest.approx(expected, abs=1e-9)


def test_angle_n_is_monotone_and_converges(tri):
    values = [angle_n(tri, tri.point("c@1"), tri.end("a"), tri.end("b"), n) for n in (1, 10, 100, 10000)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(math.pi, abs=5e-2)
    assert values[-1] == pytest.approx(tits_angle(tri, tri.end("a"), tri.end("b")), abs=5e-2)


def test_angle_n_requires_positive_n(tri):
    with pytest.raises(ArgumentError):
        angle_n(tri, tri.point("o"), tri.end("a"), tri.end("b"), 0)


def test_angular_circumcenter_in_the_plane(plane):
    result = angular_circumcenter(plane, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert isinstance(result, AngularCenter)
    assert np.allclose(result.center, np.array([1.0, 1.0]) / math.sqrt(2.0))
    assert result.radius == pytest.approx(math.pi / 4)


def test_two_tripod_ends_have_no_unique_center(tri):
    result = angular_circumcenter(tri, [tri.end("a"), tri.end("b")])
    assert isinstance(result, NoUniqueCenter)
    assert result.radius == pytest.approx(math.pi)


def test_opposite_directions_have_no_unique_center(plane):
    result = angular_circumcenter(plane, [np.array([1.0, 0.0]), np.array([-1.0, 0.0])])
    assert isinstance(result, NoUniqueCenter)


def test_busemann_sum_sublevel_is_a_halfspace(plane):
    f = BusemannSum(plane, np.zeros(2), ((1.0, np.array([1.0, 0.0])),))
    C = f.sublevel(-2.0)
    assert plane.contains(C, np.array([2.0, 5.0]))
    assert not plane.contains(C, np.array([1.9, 0.0]))


def test_balanced_busemann_sum_vanishes(plane, rng):
    f = BusemannSum(plane, np.zeros(2), ((0.5, np.array([1.0, 0.0])), (0.5, np.array([-1.0, 0.0]))))
    for _ in range(20):
        assert abs(f(rng.uniform(-9, 9, 2))) <= 1e-9
    assert isinstance(f.sublevel(0.0), FullSet)
    assert isinstance(f.sublevel(-1.0), EmptySet)


def test_busemann_sum_sublevel_on_tripod(tri):
    f = BusemannSum(tri, tri.point("o"), ((1.0, tri.end("a")),))
    C = f.sublevel(-2.0)
    assert tri.contains(C, tri.point("a@2"))
    assert tri.contains(C, tri.point("a@7"))
    assert not tri.contains(C, tri.point("b@1"))


def test_mixed_product_sublevel_is_unsupported(line_tripod):
    X = line_tripod
    xi = X.join(math.pi / 4, X.left.end("pos"), X.right.end("a"))
    f = BusemannSum(X, X.origin(), ((1.0, xi),))
    with pytest.raises(UnsupportedError):
        f.sublevel(-1.0)
