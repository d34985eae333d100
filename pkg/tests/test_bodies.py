from __future__ import annotations

import json
import math

import numpy as np
import pytest

from finsler import (Ellipsoid, HalfSpace, LSEPolytope, Polytope, ad,
                     body_from_spec, box, regular_polygon)
from finsler.errors import BadSpec, NonSmoothPoint, PointOutsideBody


def test_contains_examples(unit_disk):
    assert unit_disk.contains([0.0, 0.0])
    assert not unit_disk.contains([1.0, 0.0])
    assert not HalfSpace(np.array([1.0, 0.0]), 1.0).contains([2.0, 0.0])


def test_ray_hit_examples(unit_disk):
    assert unit_disk.ray_hit([0.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0, abs=1e-15)
    assert unit_disk.ray_hit([0.5, 0.0], [1.0, 0.0]) == pytest.approx(0.5, abs=1e-15)
    assert unit_disk.ray_hit([0.5, 0.0], [-1.0, 0.0]) == pytest.approx(1.5, abs=1e-15)
    assert HalfSpace(np.array([1.0, 0.0]), 1.0).ray_hit([0.0, 0.0], [0.0, 1.0]) == math.inf


def test_ray_hit_brackets_boundary(rng, ellipse, lse2, square):
    for body in (ellipse, lse2, square, regular_polygon(7)):
        for x in body.sample_interior(rng, 20):
            xi = rng.normal(size=2)
            t = body.ray_hit(x, xi)
            assert body.contains(x + 0.999 * t * xi)
            assert not body.contains(x + 1.001 * t * xi)


def test_polytope_ray_hit_agrees_with_bisection(rng):
    P = regular_polygon(5)
    for x in P.sample_interior(rng, 30):
        xi = rng.normal(size=2)
        assert P.ray_hit(x, xi) == pytest.approx(P.ray_hit_bisect(x, xi), rel=1e-12)


def test_polytope_gauge_is_nonsmooth_at_vertex_directions(square):
    with pytest.raises(NonSmoothPoint):
        square.gauge_taylor(ad.seed([0.0, 0.0], 1), np.array([1.0, 1.0]))


def test_gauge_taylor_axis_derivative(unit_disk):
    x, xi = ad.variables(np.zeros(2), np.array([1.0, 0.0]), 1)
    t = unit_disk.gauge_taylor(x, xi)
    assert t.value == pytest.approx(1.0)
    assert t.gradient()[0] == pytest.approx(-1.0)


@pytest.mark.parametrize("name", ["ellipse", "lse2", "smooth_square"])
def test_gauge_taylor_value_and_derivatives(name, request, rng):
    body = request.getfixturevalue(name)
    for x in body.sample_interior(rng, 10):
        xi = rng.normal(size=2)
        X, Xi = ad.variables(x, xi, 1)
        t = body.gauge_taylor(X, Xi)
        assert t.value == pytest.approx(body.ray_hit(x, xi), rel=1e-13)
        fd = ad.fd_gradient(lambda z: body.ray_hit(z[:2], z[2:]), np.concatenate([x, xi]))
        np.testing.assert_allclose(t.gradient(), fd, rtol=1e-7, atol=1e-7 * abs(t.value))


def test_affine_equivariance(rng, ellipse, lse2):
    M = np.array([[1.3, 0.4], [-0.2, 0.8]])
    b = np.array([0.5, -1.0])
    for body in (ellipse, lse2, regular_polygon(6)):
        image = body.affine_image(M, b)
        for x in body.sample_interior(rng, 10):
            xi = rng.normal(size=2)
            assert image.ray_hit(M @ x + b, M @ xi) == pytest.approx(body.ray_hit(x, xi), rel=1e-9)


def test_lse_polytope_inside_its_polytope(lse2, rng):
    P = Polytope(lse2.normals, lse2.offsets)
    for x in lse2.sample_interior(rng, 20, shrink=1.0):
        assert P.contains(x)
    assert lse2.check_convexity(rng, 100)


def test_inverse_hit_refuses_outside_points(unit_disk):
    with pytest.raises(PointOutsideBody):
        unit_disk.inverse_hit(np.array([2.0, 0.0]), np.array([1.0, 0.0]))


def test_body_from_spec_variants(tmp_path):
    spec = {"type": "ellipsoid", "center": [0, 0], "shape": [[4, 0], [0, 1]]}
    e = body_from_spec(spec)
    assert e.ray_hit([0, 0], [1, 0]) == pytest.approx(0.5)
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"type": "polytope", "halfspaces": [
        {"normal": [1, 0], "offset": 1}, {"normal": [-1, 0], "offset": 1},
        {"normal": [0, 1], "offset": 1}, {"normal": [0, -1], "offset": 1}]}))
    p = body_from_spec(str(path))
    assert p.ray_hit([0, 0], [0, 2]) == pytest.approx(0.5)
    lse = body_from_spec(json.dumps({"type": "lse_polytope", "beta": 30, "halfspaces": [
        {"normal": [1, 0], "offset": 1}, {"normal": [-1, 0], "offset": 1},
        {"normal": [0, 1], "offset": 1}, {"normal": [0, -1], "offset": 1}]}))
    assert lse.contains([0.5, 0.5])
    h = body_from_spec({"type": "halfspace", "normal": [0, 1], "offset": 2})
    assert h.ray_hit([0, 0], [0, 1]) == pytest.approx(2.0)


def test_malformed_spec_carries_position():
    with pytest.raises(BadSpec) as info:
        body_from_spec('{"type": "ball",\n "center": [0, 0],,}')
    assert info.value.line == 2
    assert info.value.column is not None
    with pytest.raises(BadSpec):
        body_from_spec({"type": "torus"})
    with pytest.raises(BadSpec):
        body_from_spec({"type": "polytope", "halfspaces": [{"normal": [1, 0]}]})


def test_box_and_ball_bounding_boxes():
    lo, hi = box([-1, -2], [3, 4]).bounding_box()
    np.testing.assert_allclose(lo, [-1, -2], atol=1e-9)
    np.testing.assert_allclose(hi, [3, 4], atol=1e-9)
    lo, hi = Ellipsoid.ball([1, 1], 2.0).bounding_box()
    np.testing.assert_allclose(hi - lo, [4, 4])
