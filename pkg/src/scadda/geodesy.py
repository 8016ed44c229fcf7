"""Distances between latitude/longitude coordinates.

The orthodromic (great-circle) distance uses the special case of Vincenty's
formula on a sphere, written with ``atan2`` so coincident and antipodal points
are both well conditioned.  The haversine formula is kept as an independent
cross-check; it is never used for clustering.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from ._parallel import fill_upper, mirror_upper

#: IUGG mean Earth radius in kilometres.
MEAN_EARTH_RADIUS_KM = 6371.0088

ORTHODROMIC = "orthodromic"
EUCLIDEAN = "euclidean"
METRICS = (ORTHODROMIC, EUCLIDEAN)


@dataclass(frozen=True)
class GeoPoint:
    """A latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        check_coordinates(self.lat, self.lon)

    def __iter__(self):
        yield self.lat
        yield self.lon


@dataclass(frozen=True)
class EarthModel:
    mean_radius: float = MEAN_EARTH_RADIUS_KM

    def __post_init__(self):
        if not (math.isfinite(self.mean_radius) and self.mean_radius > 0):
            raise ValueError(f"mean_radius must be positive, got {self.mean_radius!r}")


EARTH = EarthModel()


def check_coordinates(lat, lon):
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise ValueError(f"non-finite coordinate ({lat!r}, {lon!r})")
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"latitude {lat!r} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise ValueError(f"longitude {lon!r} outside [-180, 180]")


def _pair(a, b):
    lat1, lon1 = (float(v) for v in a)
    lat2, lon2 = (float(v) for v in b)
    check_coordinates(lat1, lon1)
    check_coordinates(lat2, lon2)
    # fixed argument order makes every metric exactly symmetric
    if (lat2, lon2) < (lat1, lon1):
        return lat2, lon2, lat1, lon1
    return lat1, lon1, lat2, lon2


def _central_angle(phi1, phi2, dlon):
    # dlon is |lon2 - lon1| in radians
    c1, s1 = math.cos(phi1), math.sin(phi1)
    c2, s2 = math.cos(phi2), math.sin(phi2)
    cd, sd = math.cos(dlon), math.sin(dlon)
    a = c2 * sd
    b = c1 * s2 - s1 * c2 * cd
    num = math.sqrt(a * a + b * b)
    den = s1 * s2 + c1 * c2 * cd
    return math.atan2(num, den)


def vincenty_distance(a, b, earth=EARTH):
    """Great-circle distance in kilometres between two (lat, lon) points."""
    lat1, lon1, lat2, lon2 = _pair(a, b)
    angle = _central_angle(
        math.radians(lat1), math.radians(lat2), math.radians(abs(lon2 - lon1))
    )
    return angle * earth.mean_radius


def haversine_distance(a, b, earth=EARTH):
    lat1, lon1, lat2, lon2 = _pair(a, b)
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    h = math.sin((phi2 - phi1) / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(
        math.radians(lon2 - lon1) / 2.0
    ) ** 2
    return 2.0 * earth.mean_radius * math.asin(math.sqrt(min(1.0, h)))


def euclidean_distance(a, b):
    """Planar distance in raw coordinate units (degrees)."""
    lat1, lon1, lat2, lon2 = _pair(a, b)
    return math.sqrt((lat2 - lat1) ** 2 + (lon2 - lon1) ** 2)


# -- pairwise kernels ------------------------------------------------------
# ``coords`` is an (n, 2) float64 array of (lat, lon) in degrees; the kernels
# fill ``out[i, j]`` for i0 <= i < i1 and j > i.


@njit
def _euclidean_rows_jit(coords, i0, i1, out):
    n = coords.shape[0]
    for i in range(i0, i1):
        for j in range(i + 1, n):
            dlat = coords[j, 0] - coords[i, 0]
            dlon = coords[j, 1] - coords[i, 1]
            out[i, j] = math.sqrt(dlat * dlat + dlon * dlon)


def _euclidean_rows_np(coords, i0, i1, out):
    for i in range(i0, i1):
        d = coords[i + 1:] - coords[i]
        out[i, i + 1:] = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])


@njit
def _orthodromic_rows_jit(coords, radius, i0, i1, out):
    n = coords.shape[0]
    deg = math.pi / 180.0
    for i in range(i0, i1):
        p1 = coords[i, 0] * deg
        c1, s1 = math.cos(p1), math.sin(p1)
        for j in range(i + 1, n):
            p2 = coords[j, 0] * deg
            c2, s2 = math.cos(p2), math.sin(p2)
            dl = abs(coords[j, 1] - coords[i, 1]) * deg
            cd, sd = math.cos(dl), math.sin(dl)
            a = c2 * sd
            b = c1 * s2 - s1 * c2 * cd
            num = math.sqrt(a * a + b * b)
            den = s1 * s2 + c1 * c2 * cd
            out[i, j] = math.atan2(num, den) * radius


def _orthodromic_rows_np(coords, radius, i0, i1, out):
    rad = np.radians(coords)
    cos_lat, sin_lat = np.cos(rad[:, 0]), np.sin(rad[:, 0])
    for i in range(i0, i1):
        c1, s1 = cos_lat[i], sin_lat[i]
        c2, s2 = cos_lat[i + 1:], sin_lat[i + 1:]
        dl = np.abs(coords[i + 1:, 1] - coords[i, 1]) * (math.pi / 180.0)
        cd, sd = np.cos(dl), np.sin(dl)
        a = c2 * sd
        b = c1 * s2 - s1 * c2 * cd
        num = np.sqrt(a * a + b * b)
        den = s1 * s2 + c1 * c2 * cd
        out[i, i + 1:] = np.arctan2(num, den) * radius


_euclidean_rows = pick(_euclidean_rows_jit, _euclidean_rows_np)
_orthodromic_rows = pick(_orthodromic_rows_jit, _orthodromic_rows_np)


def as_coordinates(points):
    """Validate ``points`` and return them as an (n, 2) float64 array."""
    if not isinstance(points, np.ndarray):
        points = [tuple(p) for p in points]
    coords = np.array(points, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"expected (n, 2) coordinates, got shape {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise ValueError("non-finite coordinates")
    if np.any(np.abs(coords[:, 0]) > 90.0) or np.any(np.abs(coords[:, 1]) > 180.0):
        raise ValueError("coordinates outside [-90, 90] x [-180, 180]")
    return np.ascontiguousarray(coords)


def pairwise_distances(points, metric=ORTHODROMIC, earth=EARTH, workers=1):
    """Unscaled symmetric distance matrix with a zero diagonal.

    Orthodromic distances are in kilometres, euclidean ones in degrees.
    """
    coords = as_coordinates(points)
    n = coords.shape[0]
    out = np.zeros((n, n))
    if metric == ORTHODROMIC:
        radius = float(earth.mean_radius)
        fill_upper(lambda a, b: _orthodromic_rows(coords, radius, a, b, out), n, workers)
    elif metric == EUCLIDEAN:
        fill_upper(lambda a, b: _euclidean_rows(coords, a, b, out), n, workers)
    else:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return mirror_upper(out)
