import math
import random

import pytest

from geomedia.geometry import (
    BEHIND,
    DEFAULT_GEOMETRY,
    FRONT_OF,
    LEFT_OF,
    NEAR,
    RIGHT_OF,
    GeometryConfig,
    cone_of_bearing,
    eval_spatial,
    haversine_m,
    initial_bearing_deg,
)

from . import oracle


def test_one_degree_of_latitude():
    # analytic: 1 degree of a 6371 km meridian = R * pi / 180
    expected = 6_371_000.0 * math.pi / 180.0
    assert haversine_m(49.0, 7.0, 50.0, 7.0) == pytest.approx(expected, rel=1e-9)


def test_zero_distance():
    assert haversine_m(49.2556, 7.0452, 49.2556, 7.0452) == 0.0


def test_distance_matches_vector_oracle():
    rng = random.Random(20)
    for _ in range(300):
        lat1 = rng.uniform(-80.0, 80.0)
        lon1 = rng.uniform(-179.0, 179.0)
        lat2 = lat1 + rng.uniform(-0.5, 0.5)
        lon2 = lon1 + rng.uniform(-0.5, 0.5)
        ours = haversine_m(lat1, lon1, lat2, lon2)
        ref = oracle.distance_m(lat1, lon1, lat2, lon2)
        assert ours == pytest.approx(ref, rel=1e-9, abs=1e-6)


def test_bearing_cardinal_directions():
    lat, lon = 49.2556, 7.0452
    north = oracle.offset(lat, lon, 200.0, 0.0)
    east = oracle.offset(lat, lon, 200.0, 90.0)
    assert initial_bearing_deg(lat, lon, *north) == pytest.approx(0.0, abs=1e-6)
    assert initial_bearing_deg(lat, lon, *east) == pytest.approx(90.0, abs=1e-6)


def test_bearing_matches_tangent_oracle():
    rng = random.Random(21)
    for _ in range(300):
        lat1 = rng.uniform(-80.0, 80.0)
        lon1 = rng.uniform(-179.0, 179.0)
        bearing = rng.uniform(0.0, 360.0)
        lat2, lon2 = oracle.offset(lat1, lon1, rng.uniform(1.0, 5000.0), bearing)
        ours = initial_bearing_deg(lat1, lon1, lat2, lon2)
        ref = oracle.bearing_deg(lat1, lon1, lat2, lon2)
        diff = abs(ours - ref) % 360.0
        assert min(diff, 360.0 - diff) < 1e-6


def test_cone_boundaries_belong_to_north_south():
    assert cone_of_bearing(45.0) == FRONT_OF
    assert cone_of_bearing(315.0) == FRONT_OF
    assert cone_of_bearing(135.0) == BEHIND
    assert cone_of_bearing(225.0) == BEHIND
    assert cone_of_bearing(45.0001) == RIGHT_OF
    assert cone_of_bearing(134.9999) == RIGHT_OF
    assert cone_of_bearing(225.0001) == LEFT_OF
    assert cone_of_bearing(314.9999) == LEFT_OF
    assert cone_of_bearing(360.0) == FRONT_OF
    assert cone_of_bearing(-45.0) == FRONT_OF


def test_front_of_due_north():
    # ~111 m due north: inside the cone and the 500 m range
    assert eval_spatial(FRONT_OF, (49.256, 7.043), (49.257, 7.043)) is True


def test_coincident_points_satisfy_nothing():
    p = (49.256, 7.043)
    for relation in (FRONT_OF, BEHIND, LEFT_OF, RIGHT_OF, NEAR):
        assert eval_spatial(relation, p, p) is False


def test_beyond_max_radius():
    anchor = (49.256, 7.043)
    candidate = oracle.offset(*anchor, 600.0, 0.0)
    assert eval_spatial(FRONT_OF, anchor, candidate) is False


def test_near_ignores_direction_but_not_distance():
    anchor = (49.256, 7.043)
    for bearing in (0.0, 77.0, 191.0, 289.0):
        inside = oracle.offset(*anchor, 99.0, bearing)
        outside = oracle.offset(*anchor, 101.0, bearing)
        assert eval_spatial(NEAR, anchor, inside) is True
        assert eval_spatial(NEAR, anchor, outside) is False


def test_unknown_relation_rejected():
    with pytest.raises(ValueError):
        eval_spatial("above", (0.0, 0.0), (0.1, 0.1))


def test_custom_geometry_radii():
    tight = GeometryConfig(max_radius_m=50.0, near_radius_m=10.0)
    anchor = (49.256, 7.043)
    candidate = oracle.offset(*anchor, 30.0, 0.0)
    assert eval_spatial(FRONT_OF, anchor, candidate, tight) is True
    assert eval_spatial(NEAR, anchor, candidate, tight) is False
    assert eval_spatial(FRONT_OF, anchor, candidate) is True  # default untouched


def test_eval_spatial_matches_oracle_everywhere():
    rng = random.Random(22)
    anchor = (49.2556, 7.0452)
    for _ in range(500):
        relation = rng.choice((FRONT_OF, BEHIND, LEFT_OF, RIGHT_OF, NEAR))
        candidate = oracle.offset(*anchor, rng.uniform(0.0, 700.0), rng.uniform(0.0, 360.0))
        assert eval_spatial(relation, anchor, candidate) == oracle.spatial_holds(
            relation, anchor, candidate
        )
    assert DEFAULT_GEOMETRY.max_radius_m == 500.0
    assert DEFAULT_GEOMETRY.near_radius_m == 100.0
