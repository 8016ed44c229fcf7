"""Spatio-temporal DBSCAN over precomputed spatial and temporal matrices.

Two points are neighbours when their spatial distance is below ``s_limit``
*and* their temporal distance is below ``t_limit`` (both strict).  A point with
at least ``minimum_neighbors`` neighbours (itself excluded) is a core point;
clusters grow from core points through chains of core points, and non-core
points reached on the way become border members.  Final labels are 0 for
outliers and 1..c for clusters.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._accel import njit, pick
from .density import (
    ALGORITHMS,
    MEAN_OF_WEIGHTS,
    RESCALE_FORMS,
    SCADDA,
    BandwidthSpec,
    DensityModel,
    spatial_distance_matrix,
)
from .geodesy import EARTH, METRICS, ORTHODROMIC, as_coordinates
from .warp import WarpWindow, temporal_distance_matrix

log = logging.getLogger(__name__)

UNASSIGNED = -2
NOISE = -1
MAX_REASSIGN_PASSES = 64
# substituted for a zero temporal heuristic (all series identical), where any
# positive limit admits every pair
FLAT_T_LIMIT = 1.0


@dataclass(frozen=True)
class ClusterParams:
    """Tuning values; names follow the parameter column of the method's table.

    ``s_limit`` / ``t_limit`` left as ``None`` are filled from the heuristics
    at clustering time.
    """

    s_limit: float = None
    t_limit: float = None
    minimum_neighbors: int = 5
    steepness: float = 1.0
    window_param: WarpWindow = field(default_factory=WarpWindow)
    distance_measure: str = ORTHODROMIC
    outlier_perc: float = 100.0
    z_score: bool = False
    algorithm: str = SCADDA
    bandwidth: BandwidthSpec = field(default_factory=BandwidthSpec)
    rescale_form: str = MEAN_OF_WEIGHTS
    robust_z: bool = False

    def __post_init__(self):
        object.__setattr__(self, "window_param", WarpWindow.parse(self.window_param))
        object.__setattr__(self, "bandwidth", BandwidthSpec.parse(self.bandwidth))
        if self.s_limit is not None and not self.s_limit > 0:
            raise ValueError(f"s_limit must be > 0, got {self.s_limit!r}")
        if self.t_limit is not None and not self.t_limit >= 0:
            raise ValueError(f"t_limit must be >= 0, got {self.t_limit!r}")
        if int(self.minimum_neighbors) != self.minimum_neighbors or self.minimum_neighbors < 1:
            raise ValueError(f"minimum_neighbors must be an integer >= 1, got {self.minimum_neighbors!r}")
        if not math.isfinite(self.steepness):
            raise ValueError(f"steepness must be finite, got {self.steepness!r}")
        if not 0 <= self.outlier_perc <= 100:
            raise ValueError(f"outlier_perc must lie in [0, 100], got {self.outlier_perc!r}")
        if self.distance_measure not in METRICS:
            raise ValueError(f"distance_measure must be one of {METRICS}, got {self.distance_measure!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.rescale_form not in RESCALE_FORMS:
            raise ValueError(f"rescale_form must be one of {RESCALE_FORMS}, got {self.rescale_form!r}")

    def replace(self, **changes):
        return replace(self, **changes)


def neighbor_mask(spatial, temporal, s_limit, t_limit):
    """Boolean adjacency: both distances strictly below their limits, no self-loops."""
    spatial = np.asarray(spatial)
    temporal = np.asarray(temporal)
    if spatial.shape != temporal.shape or spatial.ndim != 2 or spatial.shape[0] != spatial.shape[1]:
        raise ValueError(f"matrix shapes differ or are not square: {spatial.shape} vs {temporal.shape}")
    adj = (spatial < s_limit) & (temporal < t_limit)
    np.fill_diagonal(adj, False)
    return adj


def neighbors(f, spatial, temporal, s_limit, t_limit):
    """Sorted indices ``i != f`` with ``spatial[f, i] < s_limit`` and ``temporal[f, i] < t_limit``."""
    spatial = np.asarray(spatial)
    temporal = np.asarray(temporal)
    n = spatial.shape[0]
    if not 0 <= f < n:
        raise IndexError(f"point index {f} out of range for {n} points")
    hit = (spatial[f] < s_limit) & (temporal[f] < t_limit)
    hit[f] = False
    return np.flatnonzero(hit)


@njit
def _expand_jit(adj, min_neighbors, labels, c):
    n = adj.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if adj[i, j]:
                counts[i] += 1
    stack = np.empty(n, dtype=np.int64)
    for i in range(n):
        if labels[i] != -2:
            continue
        if counts[i] < min_neighbors:
            labels[i] = -1
            continue
        c += 1
        labels[i] = c
        top = 0
        for j in range(n):
            if adj[i, j]:
                if labels[j] == -2:
                    labels[j] = c
                    stack[top] = j
                    top += 1
                elif labels[j] == -1:
                    labels[j] = c
        while top > 0:
            top -= 1
            j = stack[top]
            if counts[j] < min_neighbors:
                continue
            for l in range(n):
                if adj[j, l]:
                    if labels[l] == -2:
                        labels[l] = c
                        stack[top] = l
                        top += 1
                    elif labels[l] == -1:
                        labels[l] = c
    return c


def _expand_np(adj, min_neighbors, labels, c):
    counts = adj.sum(axis=1)
    for i in range(adj.shape[0]):
        if labels[i] != UNASSIGNED:
            continue
        if counts[i] < min_neighbors:
            labels[i] = NOISE
            continue
        c += 1
        labels[i] = c
        stack = []
        frontier = np.flatnonzero(adj[i])
        while True:
            fresh = frontier[labels[frontier] == UNASSIGNED]
            labels[frontier[labels[frontier] == NOISE]] = c
            labels[fresh] = c
            stack.extend(fresh.tolist())
            # skip border points; they do not extend the cluster
            while stack and counts[stack[-1]] < min_neighbors:
                stack.pop()
            if not stack:
                break
            frontier = np.flatnonzero(adj[stack.pop()])
    return c


_expand = pick(_expand_jit, _expand_np)


def expand_clusters(adj, min_neighbors, labels=None, first_label=0):
    """Seed-set expansion in index order over a boolean adjacency matrix.

    ``labels`` uses -2 for unassigned and -1 for noise and is updated in place;
    new clusters are numbered from ``first_label + 1``.  Returns the last
    cluster number used.
    """
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    if labels is None:
        labels = np.full(adj.shape[0], UNASSIGNED, dtype=np.int64)
    return int(_expand(adj, int(min_neighbors), labels, int(first_label))), labels


def dbscan_labels(spatial, temporal, s_limit, t_limit, min_neighbors):
    """Single-pass labels over precomputed matrices: 0 outlier, 1..c clusters."""
    adj = neighbor_mask(spatial, temporal, s_limit, t_limit)
    _, labels = expand_clusters(adj, min_neighbors)
    labels[labels == NOISE] = 0
    return labels


@dataclass
class Reassignment:
    labels: np.ndarray
    pseudo_labels: list
    cap_unreachable: bool
    passes: int


def _finite_max(m):
    finite = m[np.isfinite(m)]
    return float(finite.max()) if finite.size else 0.0


def reassign_outliers(labels, spatial, temporal, params):
    """Fold remaining outliers into pseudo-clusters until ``outlier_perc`` is met.

    Each pass reruns the expansion over the current outliers only, with both
    limits doubled relative to the previous pass.  Stops when the cap is met,
    when a pass assigns nothing while both limits already exceed every finite
    distance among the outliers, or after 64 passes.
    """
    labels = np.array(labels, dtype=np.int64)
    spatial = np.asarray(spatial)
    temporal = np.asarray(temporal)
    n = labels.size
    if params.outlier_perc >= 100 or n == 0:
        return Reassignment(labels, [], False, 0)
    cap = params.outlier_perc / 100.0
    s_limit, t_limit = float(params.s_limit), float(params.t_limit)
    c = int(labels.max(initial=0))
    pseudo = []
    passes = 0
    while np.count_nonzero(labels == 0) / n > cap and passes < MAX_REASSIGN_PASSES:
        idx = np.flatnonzero(labels == 0)
        s_limit *= 2.0
        t_limit *= 2.0
        passes += 1
        sub_s = spatial[np.ix_(idx, idx)]
        sub_t = temporal[np.ix_(idx, idx)]
        c_new, sub = expand_clusters(neighbor_mask(sub_s, sub_t, s_limit, t_limit),
                                     params.minimum_neighbors, first_label=c)
        hit = sub > 0
        labels[idx[hit]] = sub[hit]
        pseudo.extend(range(c + 1, c_new + 1))
        log.debug("reassignment pass %d: s_limit=%g t_limit=%g, %d points into %d pseudo-clusters",
                  passes, s_limit, t_limit, int(hit.sum()), c_new - c)
        c = c_new
        if not hit.any() and s_limit > _finite_max(sub_s) and t_limit > _finite_max(sub_t):
            break
    unreachable = np.count_nonzero(labels == 0) / n > cap
    return Reassignment(labels, pseudo, bool(unreachable), passes)


def heuristic_s_limit(points):
    """Spatial limit from coordinate spread.

    Mean of the two per-coordinate (population) standard deviations divided by
    the squared mean of the two half-ranges.  The result is in coordinate units
    whatever metric is used for clustering, so it is unit-sensitive.
    """
    coords = as_coordinates(points)
    if coords.shape[0] < 2:
        raise ValueError("need at least 2 points for the spatial heuristic")
    half_ranges = (coords.max(axis=0) - coords.min(axis=0)) / 2.0
    if not np.any(half_ranges > 0):
        raise ValueError("all points are identical; spatial heuristic is undefined")
    return float(coords.std(axis=0).mean() / half_ranges.mean() ** 2)


def heuristic_t_limit(temporal):
    """Mean of every entry of the temporal matrix, diagonal included."""
    temporal = np.asarray(temporal, dtype=np.float64)
    return float(temporal.sum() / temporal.shape[0] ** 2)


@dataclass
class ClusterResult:
    labels: np.ndarray
    n_clusters: int
    pseudo: np.ndarray  # per cluster id 1..c: formed during reassignment?
    cap_unreachable: bool
    passes: int
    params: ClusterParams  # with the limits actually used
    spatial: np.ndarray = field(repr=False)
    temporal: np.ndarray = field(repr=False)

    @property
    def outlier_fraction(self):
        return float(np.count_nonzero(self.labels == 0) / self.labels.size)

    @property
    def pseudo_labels(self):
        return (np.flatnonzero(self.pseudo) + 1).tolist()


def cluster(points, series, params=ClusterParams(), earth=EARTH, workers=1, density=None):
    """Cluster ``points`` (n x (lat, lon)) carrying one time series each.

    ``workers`` only affects how the distance matrices are computed, never the
    labels.
    """
    coords = as_coordinates(points)
    series = list(series)
    if coords.shape[0] < 2:
        raise ValueError(f"need at least 2 points, got {coords.shape[0]}")
    if len(series) != coords.shape[0]:
        raise ValueError(f"{coords.shape[0]} points but {len(series)} time series")
    if len({np.size(s) for s in series}) != 1:
        raise ValueError("time series must all have the same length")

    spatial = spatial_distance_matrix(
        coords, params.steepness, params.distance_measure, params.bandwidth,
        params.algorithm, params.rescale_form, earth, workers, density,
    )
    temporal = temporal_distance_matrix(
        series, params.window_param, params.z_score, params.robust_z, workers
    )
    if params.s_limit is None:
        params = params.replace(s_limit=heuristic_s_limit(coords))
        log.info("s_limit from heuristic: %r", params.s_limit)
    if params.t_limit is None:
        t_limit = heuristic_t_limit(temporal)
        if t_limit == 0:
            log.warning("all temporal distances are zero; using t_limit=%r", FLAT_T_LIMIT)
            t_limit = FLAT_T_LIMIT
        params = params.replace(t_limit=t_limit)
        log.info("t_limit from heuristic: %r", params.t_limit)

    labels = dbscan_labels(spatial, temporal, params.s_limit, params.t_limit,
                           params.minimum_neighbors)
    n_first = int(labels.max(initial=0))
    re = reassign_outliers(labels, spatial, temporal, params)
    n_clusters = int(re.labels.max(initial=0))
    pseudo = np.zeros(n_clusters, dtype=bool)
    pseudo[n_first:] = True
    return ClusterResult(re.labels, n_clusters, pseudo, re.cap_unreachable, re.passes,
                         params, spatial, temporal)
