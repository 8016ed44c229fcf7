import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scadda import geodesy
from scadda.geodesy import (
    EarthModel,
    GeoPoint,
    euclidean_distance,
    haversine_distance,
    pairwise_distances,
    vincenty_distance,
)

R = 6371.0088
lats = st.floats(-90, 90, allow_nan=False)
lons = st.floats(-180, 180, allow_nan=False)
points = st.tuples(lats, lons)


def test_coincident_points():
    p = (55.95, -3.19)
    assert vincenty_distance(p, p) == 0.0
    assert haversine_distance(p, p) == 0.0
    assert euclidean_distance(p, p) == 0.0


def test_antipodal_is_half_circumference():
    assert vincenty_distance((0, 0), (0, 180)) == pytest.approx(math.pi * R, abs=1e-6)
    assert vincenty_distance((0, 0), (0, 180)) == pytest.approx(20015.1144, abs=1e-4)


def test_one_degree_of_equator():
    expected = math.pi / 180 * R
    assert vincenty_distance((0, 0), (0, 1)) == pytest.approx(expected, abs=1e-6)
    assert haversine_distance((0, 0), (0, 1)) == pytest.approx(expected, abs=1e-6)
    assert expected == pytest.approx(111.1951, abs=1e-4)


@pytest.mark.parametrize("a, b, expected", [
    ((0, 0), (0, 0), 0.0),
    ((0, 0), (3, 4), 5.0),
    ((4, 4), (8, 8), math.sqrt(32)),
])
def test_euclidean_examples(a, b, expected):
    assert euclidean_distance(a, b) == pytest.approx(expected, abs=1e-12)


def test_geopoint_validation():
    GeoPoint(90, -180)
    with pytest.raises(ValueError):
        GeoPoint(95, 0)
    with pytest.raises(ValueError):
        GeoPoint(0, 181)
    with pytest.raises(ValueError):
        GeoPoint(float("nan"), 0)
    with pytest.raises(ValueError):
        vincenty_distance((91, 0), (0, 0))
    with pytest.raises(ValueError):
        EarthModel(0.0)


def test_geopoint_is_accepted_anywhere_a_pair_is():
    assert vincenty_distance(GeoPoint(0, 0), GeoPoint(0, 1)) == vincenty_distance((0, 0), (0, 1))


@given(points, points)
def test_symmetry_is_exact(a, b):
    assert vincenty_distance(a, b) == vincenty_distance(b, a)
    assert haversine_distance(a, b) == haversine_distance(b, a)
    assert euclidean_distance(a, b) == euclidean_distance(b, a)


@given(points, points)
def test_vincenty_range(a, b):
    d = vincenty_distance(a, b)
    assert 0.0 <= d <= math.pi * R
    assert not math.isnan(d)


@given(points, points)
def test_linear_in_radius(a, b):
    one, two = EarthModel(R), EarthModel(2 * R)
    assert vincenty_distance(a, b, two) == pytest.approx(2 * vincenty_distance(a, b, one), rel=1e-15)
    assert haversine_distance(a, b, two) == pytest.approx(2 * haversine_distance(a, b, one), rel=1e-15)


def test_near_antipodal_stays_in_range():
    d = vincenty_distance((10.0, 20.0), (-10.0, -160.0 + 1e-9))
    assert d == pytest.approx(math.pi * R, rel=1e-9)
    assert d <= math.pi * R


def test_pairwise_matrix_matches_scalar(rng):
    pts = np.column_stack([rng.uniform(-80, 80, 25), rng.uniform(-170, 170, 25)])
    orth = pairwise_distances(pts, "orthodromic")
    eucl = pairwise_distances(pts, "euclidean")
    for i in range(25):
        for j in range(25):
            assert orth[i, j] == pytest.approx(vincenty_distance(pts[i], pts[j]), rel=1e-12, abs=1e-9)
            assert eucl[i, j] == pytest.approx(euclidean_distance(pts[i], pts[j]), rel=1e-12, abs=1e-12)
    for m in (orth, eucl):
        assert np.array_equal(m, m.T)
        assert np.all(np.diag(m) == 0)


@pytest.mark.parametrize("workers", [1, 3])
def test_pairwise_independent_of_workers(rng, workers):
    pts = np.column_stack([rng.uniform(-80, 80, 60), rng.uniform(-170, 170, 60)])
    assert np.array_equal(pairwise_distances(pts, workers=workers), pairwise_distances(pts))


def test_unknown_metric():
    with pytest.raises(ValueError, match="unknown metric"):
        pairwise_distances([(0, 0), (1, 1)], "manhattan")


def test_rejects_bad_coordinates():
    with pytest.raises(ValueError):
        geodesy.as_coordinates([(0, 0), (0, float("inf"))])
    with pytest.raises(ValueError):
        geodesy.as_coordinates([(0, 0), (100, 0)])
