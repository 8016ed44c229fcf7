"""Spatio-temporal DBSCAN with density-based distance rescaling and DTW."""

__version__ = "0.1.0"

from ._accel import USE_NUMBA
from .cluster import (
    ClusterParams,
    ClusterResult,
    cluster,
    heuristic_s_limit,
    heuristic_t_limit,
    neighbors,
    reassign_outliers,
)
from .density import (
    BandwidthSpec,
    DensityModel,
    kde_evaluate,
    logistic_weight,
    scott_bandwidth,
    silverman_bandwidth,
    spatial_distance_matrix,
)
from .geodesy import (
    EarthModel,
    GeoPoint,
    euclidean_distance,
    haversine_distance,
    pairwise_distances,
    vincenty_distance,
)
from .warp import WarpWindow, dtw_distance, temporal_distance_matrix, z_normalize
