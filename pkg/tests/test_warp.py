import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_dtw, recursive_dtw
from scadda.warp import (
    UNCONSTRAINED,
    WarpWindow,
    dtw_distance,
    temporal_distance_matrix,
    z_normalize,
)

V1, V2, V3 = (0, 1, 1, 2), (0, 1, 2), (0, 2, 2)
values = st.floats(-10, 10, allow_nan=False)
series = st.lists(values, min_size=1, max_size=6)


@pytest.mark.parametrize("x, expected", [
    ((5, 5, 5), (0, 0, 0)),
    ((0, 2), (-1, 1)),
    ((1, 2, 3), (-math.sqrt(1.5), 0, math.sqrt(1.5))),
])
def test_z_normalize_examples(x, expected):
    np.testing.assert_allclose(z_normalize(x), expected, atol=1e-12)


def test_z_normalize_nearly_constant_float_series():
    assert np.all(z_normalize([0.1, 0.1, 0.1, 0.1]) == 0)


def test_z_normalize_robust():
    x = np.array([1.0, 2.0, 3.0, 4.0, 100.0])
    z = z_normalize(x, robust=True)
    mad = np.median(np.abs(x - 3.0)) * 1.4826
    np.testing.assert_allclose(z, (x - 3.0) / mad)
    # zero MAD falls back to the plain z-score
    np.testing.assert_allclose(z_normalize([0, 0, 0, 5], robust=True), z_normalize([0, 0, 0, 5]))


def test_z_normalize_empty():
    with pytest.raises(ValueError):
        z_normalize([])


def test_triangle_violation_triple():
    a = dtw_distance(V1, V2)
    b = dtw_distance(V2, V3)
    c = dtw_distance(V1, V3)
    assert (a, b) == (0.0, 1.0)
    assert c == pytest.approx(math.sqrt(2), abs=1e-12)
    assert c > a + b
    for x, y, d in ((V1, V2, a), (V2, V3, b), (V1, V3, c)):
        assert brute_dtw(x, y) == pytest.approx(d, abs=1e-12)


@pytest.mark.parametrize("a, b", [(3.0, 7.5), (-1.0, 1.0), (2.0, 2.0)])
def test_single_element_series(a, b):
    assert dtw_distance([a], [b]) == abs(a - b)


def test_rejects_empty():
    with pytest.raises(ValueError):
        dtw_distance([], [1.0])
    with pytest.raises(ValueError):
        dtw_distance([1.0, float("nan")], [1.0])


@settings(max_examples=150)
@given(series, series)
def test_matches_path_enumeration(x, y):
    assert dtw_distance(x, y) == pytest.approx(brute_dtw(x, y), rel=1e-12, abs=1e-12)


@settings(max_examples=150)
@given(series, series, st.integers(0, 6))
def test_banded_matches_banded_enumeration(x, y, w):
    eff = max(w, abs(len(x) - len(y)))
    got = dtw_distance(x, y, WarpWindow(w))
    assert got == pytest.approx(brute_dtw(x, y, band=eff), rel=1e-12, abs=1e-12)


@given(series, series)
def test_symmetric_and_bounded_below(x, y):
    for w in (UNCONSTRAINED, WarpWindow(1), WarpWindow(0.5)):
        d = dtw_distance(x, y, w)
        assert d == dtw_distance(y, x, w)
        assert d >= abs(x[0] - y[0]) - 1e-12
        assert d >= abs(x[-1] - y[-1]) - 1e-12


def test_band_symmetric_for_unequal_lengths():
    x, y = [0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0, 0.0]
    for w in (WarpWindow(1), WarpWindow(2), WarpWindow(0.5)):
        assert dtw_distance(x, y, w, return_cells=True) == dtw_distance(y, x, w, return_cells=True)


@given(series)
def test_self_distance_zero(x):
    for w in (UNCONSTRAINED, WarpWindow(0), WarpWindow(2)):
        assert dtw_distance(x, x, w) == 0.0


@settings(max_examples=60)
@given(st.lists(values, min_size=2, max_size=25), st.lists(values, min_size=2, max_size=25))
def test_band_monotone(x, y):
    previous = math.inf
    for w in range(0, max(len(x), len(y)) + 2):
        d = dtw_distance(x, y, WarpWindow(w))
        assert d <= previous + 1e-12
        previous = d
    assert previous == dtw_distance(x, y)


def test_recursive_oracle_on_longer_series(rng):
    for _ in range(20):
        x, y = rng.normal(size=rng.integers(5, 30)), rng.normal(size=rng.integers(5, 30))
        assert dtw_distance(x, y) == pytest.approx(recursive_dtw(x, y), rel=1e-12)


def test_cell_count_shrinks_with_band(rng):
    x, y = rng.normal(size=50), rng.normal(size=50)
    _, full = dtw_distance(x, y, return_cells=True)
    _, banded = dtw_distance(x, y, WarpWindow(3), return_cells=True)
    assert full == 2500
    assert banded == sum(min(50, i + 3) - max(1, i - 3) + 1 for i in range(1, 51))


@pytest.mark.parametrize("size, m, n, expected", [
    (None, 10, 10, -1),
    (0.1, 10, 10, 1),
    (0.1, 35, 40, 5),
    (0.25, 7, 7, 2),
    (3, 5, 12, 7),
    (2.5, 8, 8, 3),
])
def test_effective_window(size, m, n, expected):
    assert WarpWindow(size).effective(m, n) == expected


@pytest.mark.parametrize("text, size", [("none", None), ("0.2", 0.2), ("4", 4.0), (3, 3.0)])
def test_window_parse(text, size):
    assert WarpWindow.parse(text).size == size


def test_window_rejects_negative():
    with pytest.raises(ValueError):
        WarpWindow.parse("-1")


def test_temporal_matrix_triple():
    m = temporal_distance_matrix([V1, V2, V3], UNCONSTRAINED)
    expected = np.array([[0, 0, math.sqrt(2)], [0, 0, 1], [math.sqrt(2), 1, 0]])
    np.testing.assert_allclose(m, expected, atol=1e-12)


def test_temporal_matrix_identical_and_dummy():
    same = [np.arange(6.0)] * 4
    assert np.all(temporal_distance_matrix(same) == 0)
    assert np.all(temporal_distance_matrix(np.zeros((5, 12))) == 0)


def test_temporal_matrix_z_score(rng):
    base = rng.normal(size=20)
    rows = [base, 3 * base + 10, -base]
    m = temporal_distance_matrix(rows, z_score=True)
    assert m[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert m[0, 2] > 0


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_temporal_matrix_workers(rng, workers):
    rows = rng.normal(size=(40, 24))
    ref = temporal_distance_matrix(rows, WarpWindow(3))
    got = temporal_distance_matrix(rows, WarpWindow(3), workers=workers)
    assert np.array_equal(ref, got)
    assert np.array_equal(got, got.T)


def test_temporal_matrix_needs_two():
    with pytest.raises(ValueError):
        temporal_distance_matrix([[1.0, 2.0]])
