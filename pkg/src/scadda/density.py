"""Kernel density estimates and the density-driven rescaling of spatial distances.

Each point receives a Gaussian KDE value ``g_i``.  A logistic curve centred on
the dataset's mean density maps ``g_i`` to a weight in ``(0, 2)``: sparse points
get weights below one and compress their distances, dense points get weights
above one and stretch them.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from .geodesy import EARTH, ORTHODROMIC, as_coordinates, pairwise_distances

SCOTT = "scott"
SILVERMAN = "silverman"
FIXED = "fixed"

SCADDA = "scadda"
STDBSCAN = "stdbscan"
ALGORITHMS = (SCADDA, STDBSCAN)

MEAN_OF_WEIGHTS = "mean_of_weights"
WEIGHT_OF_MEAN_DENSITY = "weight_of_mean_density"
RESCALE_FORMS = (MEAN_OF_WEIGHTS, WEIGHT_OF_MEAN_DENSITY)

# beyond this |k (g - g_mean)| the logistic is returned at its limit
_EXP_LIMIT = 700.0


def scott_bandwidth(n, d=2):
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return float(n) ** (-1.0 / (d + 4))


def silverman_bandwidth(n, d=2):
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return (n * (d + 2) / 4.0) ** (-1.0 / (d + 4))


@dataclass(frozen=True)
class BandwidthSpec:
    """Either a rule of thumb (``scott``/``silverman``) or a fixed positive value."""

    variant: str = SCOTT
    value: float = None

    def __post_init__(self):
        if self.variant not in (SCOTT, SILVERMAN, FIXED):
            raise ValueError(f"unknown bandwidth variant {self.variant!r}")
        if self.variant == FIXED and not (
            self.value is not None and math.isfinite(self.value) and self.value > 0
        ):
            raise ValueError(f"fixed bandwidth must be a positive number, got {self.value!r}")

    @classmethod
    def parse(cls, text):
        """``'scott'``, ``'silverman'`` or a positive number."""
        if isinstance(text, BandwidthSpec):
            return text
        if isinstance(text, (int, float)):
            return cls(FIXED, float(text))
        key = str(text).strip().lower()
        if key in (SCOTT, SILVERMAN):
            return cls(key)
        try:
            value = float(key)
        except ValueError:
            raise ValueError(
                f"bandwidth must be 'scott', 'silverman' or a positive number, got {text!r}"
            ) from None
        return cls(FIXED, value)

    def resolve(self, n, d=2):
        if self.variant == SCOTT:
            return scott_bandwidth(n, d)
        if self.variant == SILVERMAN:
            return silverman_bandwidth(n, d)
        return float(self.value)

    def __str__(self):
        return repr(self.value) if self.variant == FIXED else self.variant


def gaussian_kernel(u, beta):
    """Normal density with standard deviation ``beta`` evaluated at offset ``u``."""
    u = np.asarray(u, dtype=np.float64)
    return np.exp(-(u * u) / (2.0 * beta * beta)) / math.sqrt(2.0 * math.pi * beta * beta)


@njit
def _kde_jit(query, data, beta, out):
    n = data.shape[0]
    two_b2 = 2.0 * beta * beta
    norm = 1.0 / math.sqrt(math.pi * two_b2)
    for q in range(query.shape[0]):
        acc = 0.0
        for i in range(n):
            d0 = query[q, 0] - data[i, 0]
            d1 = query[q, 1] - data[i, 1]
            acc += math.exp(-(d0 * d0 + d1 * d1) / two_b2)
        out[q] = acc * norm / n


def _kde_np(query, data, beta, out):
    two_b2 = 2.0 * beta * beta
    norm = 1.0 / math.sqrt(math.pi * two_b2)
    for q in range(query.shape[0]):
        d = data - query[q]
        out[q] = np.exp(-(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]) / two_b2).sum() * norm / data.shape[0]


_kde = pick(_kde_jit, _kde_np)


def kde_values(data, query, beta):
    """Isotropic Gaussian KDE of ``data`` evaluated at every row of ``query``.

    Distances are planar on the raw (lat, lon) tuples; ``beta`` is the kernel's
    standard deviation in the same units.
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    query = np.ascontiguousarray(np.atleast_2d(query), dtype=np.float64)
    out = np.empty(query.shape[0])
    _kde(query, data, float(beta), out)
    return out


@dataclass
class DensityModel:
    points: np.ndarray
    bandwidth: float
    densities: np.ndarray
    mean_density: float

    @classmethod
    def fit(cls, points, bandwidth=BandwidthSpec()):
        """Estimate the density at every point of ``points`` once."""
        coords = as_coordinates(points)
        if coords.shape[0] == 0:
            raise ValueError("cannot fit a density model to zero points")
        beta = BandwidthSpec.parse(bandwidth).resolve(coords.shape[0], coords.shape[1])
        densities = kde_values(coords, coords, beta)
        return cls(coords, beta, densities, float(densities.mean()))


def kde_evaluate(model, x):
    return float(kde_values(model.points, np.asarray(tuple(x), dtype=np.float64), model.bandwidth)[0])


def logistic_weight(g, g_mean, k):
    """Rescaling weight ``2 / (1 + exp(-k (g - g_mean)))``; exactly 1 at the centre."""
    w = logistic_weights(np.asarray(g, dtype=np.float64), g_mean, k)
    return float(w) if np.ndim(w) == 0 else w


def logistic_weights(g, g_mean, k):
    g = np.asarray(g, dtype=np.float64)
    if k == 0:
        return np.ones_like(g)
    with np.errstate(invalid="ignore", over="ignore"):
        z = k * (g - g_mean)
    out = np.empty_like(z)
    hi = z > _EXP_LIMIT
    lo = z < -_EXP_LIMIT
    mid = ~(hi | lo)
    out[hi] = 2.0
    out[lo] = 0.0
    out[mid] = 2.0 / (1.0 + np.exp(-z[mid]))
    return out


def pair_weights(densities, mean_density, k, form=MEAN_OF_WEIGHTS):
    """Symmetric matrix of multiplicative weights applied to every pair distance."""
    g = np.asarray(densities, dtype=np.float64)
    if form == MEAN_OF_WEIGHTS:
        f = logistic_weights(g, mean_density, k)
        return (f[:, None] + f[None, :]) / 2.0
    if form == WEIGHT_OF_MEAN_DENSITY:
        return logistic_weights((g[:, None] + g[None, :]) / 2.0, mean_density, k)
    raise ValueError(f"unknown rescale form {form!r}; expected one of {RESCALE_FORMS}")


def spatial_distance_matrix(
    points,
    k,
    metric=ORTHODROMIC,
    bandwidth=BandwidthSpec(),
    algorithm=SCADDA,
    rescale_form=MEAN_OF_WEIGHTS,
    earth=EARTH,
    workers=1,
    density=None,
):
    """Pairwise spatial distances, density-rescaled when ``algorithm`` is scadda.

    Parameters
    ----------
    points : sequence of (lat, lon) or (n, 2) array
    k : float
        Logistic steepness. ``k = 0`` reproduces the unscaled matrix exactly.
    density : DensityModel, optional
        Reuse a model fitted earlier instead of re-estimating densities.
    """
    coords = as_coordinates(points)
    if coords.shape[0] < 2:
        raise ValueError(f"need at least 2 points, got {coords.shape[0]}")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    dist = pairwise_distances(coords, metric, earth, workers)
    if algorithm == STDBSCAN:
        return dist
    if density is None:
        density = DensityModel.fit(coords, bandwidth)
    weights = pair_weights(density.densities, density.mean_density, k, rescale_form)
    out = dist * weights
    np.fill_diagonal(out, 0.0)
    return out
