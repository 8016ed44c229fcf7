"""CSV ingestion, density-grid resampling, the synthetic eight-Gaussian set, writers.

All files are UTF-8, comma separated, ``.`` decimal, with a mandatory header.
Floats are written with ``repr`` so a write/read round trip is exact.  Random
draws use numpy's PCG64 generator seeded with a 64-bit integer.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SEED = 42


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass
class SpatialTable:
    ids: list
    points: np.ndarray  # (n, 2) lat, lon in degrees
    dropped: int = 0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if len(self.ids) != self.points.shape[0]:
            raise DataError(f"{len(self.ids)} ids for {self.points.shape[0]} points")
        if len(set(self.ids)) != len(self.ids):
            raise DataError("ids are not unique")

    def __len__(self):
        return len(self.ids)


@dataclass
class TemporalTable:
    ids: list
    series: np.ndarray  # (n, M)

    def __post_init__(self):
        self.series = np.asarray(self.series, dtype=np.float64)
        if self.series.ndim != 2 or len(self.ids) != self.series.shape[0]:
            raise DataError(f"{len(self.ids)} ids for series of shape {self.series.shape}")

    def __len__(self):
        return len(self.ids)


def rng(seed=DEFAULT_SEED):
    return np.random.Generator(np.random.PCG64(int(seed)))


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    if not rows:
        raise DataError(f"{path}: empty file, header row missing")
    return [c.strip() for c in rows[0]], rows[1:]


def _number(text, path, line, name):
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{path}:{line}: non-numeric {name} {text!r}") from None


def load_spatial_csv(path):
    """Read an ``id,lat,lon`` file.

    Rows whose lat or lon is empty or NaN are dropped and counted in
    ``SpatialTable.dropped``; out-of-range coordinates are an error.
    """
    header, rows = _read_rows(path)
    if header[:3] != ["id", "lat", "lon"]:
        raise DataError(f"{path}: header must start with id,lat,lon, got {','.join(header)}")
    ids, points, dropped = [], [], 0
    for line, row in enumerate(rows, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) < 3:
            row = row + [""] * (3 - len(row))
        rid, lat_s, lon_s = (c.strip() for c in row[:3])
        if lat_s.lower() in ("", "nan") or lon_s.lower() in ("", "nan"):
            dropped += 1
            continue
        lat = _number(lat_s, path, line, "lat")
        lon = _number(lon_s, path, line, "lon")
        if not -90 <= lat <= 90:
            raise DataError(f"{path}:{line}: lat {lat_s} outside [-90, 90] (id {rid})")
        if not -180 <= lon <= 180:
            raise DataError(f"{path}:{line}: lon {lon_s} outside [-180, 180] (id {rid})")
        ids.append(rid)
        points.append((lat, lon))
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DataError(f"{path}: duplicate ids {', '.join(dupes)}")
    return SpatialTable(ids, np.array(points, dtype=np.float64).reshape(-1, 2), dropped)


def load_temporal_csv(path, ids=None):
    """Read an ``id,t1,...,tM`` file, reordered to match ``ids`` when given.

    Rows for ids outside ``ids`` (e.g. locations dropped for missing
    coordinates) are ignored.
    """
    header, rows = _read_rows(path)
    if not header or header[0] != "id" or len(header) < 2:
        raise DataError(f"{path}: header must be id,t1,...,tM")
    width = len(header)
    by_id = {}
    for line, row in enumerate(rows, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) != width:
            raise DataError(f"{path}:{line}: expected {width} fields, got {len(row)}")
        rid = row[0].strip()
        if rid in by_id:
            raise DataError(f"{path}:{line}: duplicate id {rid}")
        values = [_number(c.strip(), path, line, f"value in column {k}")
                  for k, c in enumerate(row[1:], start=2)]
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"{path}:{line}: non-finite value")
        by_id[rid] = values
    if ids is None:
        ids = list(by_id)
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise DataError(f"{path}: no time series for ids {', '.join(missing)}")
    series = np.array([by_id[i] for i in ids], dtype=np.float64).reshape(len(ids), width - 1)
    return TemporalTable(list(ids), series)


def write_spatial_csv(path, table):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "lat", "lon"])
        for rid, (lat, lon) in zip(table.ids, table.points):
            w.writerow([rid, repr(float(lat)), repr(float(lon))])


def write_temporal_csv(path, table):
    m = table.series.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"t{k}" for k in range(1, m + 1)])
        for rid, row in zip(table.ids, table.series):
            w.writerow([rid] + [repr(float(v)) for v in row])


def write_labels_csv(path, ids, labels, column="cluster"):
    labels = np.asarray(labels)
    if len(ids) != labels.size:
        raise ValueError(f"{len(ids)} ids for {labels.size} labels")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", column])
        for rid, lab in zip(ids, labels):
            w.writerow([rid, int(lab)])


def load_labels_csv(path, column="cluster"):
    header, rows = _read_rows(path)
    if header != ["id", column]:
        raise DataError(f"{path}: header must be id,{column}")
    ids = [r[0] for r in rows if r]
    labels = np.array([int(r[1]) for r in rows if r], dtype=np.int64)
    return ids, labels


def summarize(labels, series, pseudo=()):
    """Per-group rows ``(cluster, kind, count, percent, mean_series)``.

    The outlier row (cluster 0) always comes first; its mean series is NaN when
    there are no outliers.
    """
    labels = np.asarray(labels)
    series = np.asarray(series, dtype=np.float64).reshape(labels.size, -1)
    n = labels.size
    pseudo = set(int(p) for p in pseudo)
    rows = []
    for lab in [0] + sorted(int(v) for v in np.unique(labels) if v > 0):
        mask = labels == lab
        count = int(mask.sum())
        mean = series[mask].mean(axis=0) if count else np.full(series.shape[1], np.nan)
        kind = "outlier" if lab == 0 else ("pseudo" if lab in pseudo else "cluster")
        rows.append((lab, kind, count, 100.0 * count / n if n else 0.0, mean))
    return rows


def write_summary(path, labels, series, pseudo=(), cap_unreachable=False):
    """Write per-cluster counts, the outlier share and per-timestep mean series.

    Columns: ``cluster,kind,count,percent,flags,mean_t1..mean_tM``.  ``kind`` is
    ``outlier``, ``cluster`` or ``pseudo``; the outlier row carries the
    ``cap_unreachable`` flag when reassignment could not meet the cap.
    """
    labels = np.asarray(labels)
    series = np.asarray(series, dtype=np.float64).reshape(labels.size, -1)
    rows = summarize(labels, series, pseudo)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster", "kind", "count", "percent", "flags"]
                   + [f"mean_t{k}" for k in range(1, series.shape[1] + 1)])
        for lab, kind, count, pct, mean in rows:
            flags = "cap_unreachable" if (lab == 0 and cap_unreachable) else ""
            w.writerow([lab, kind, count, repr(pct), flags]
                       + ["" if math.isnan(v) else repr(float(v)) for v in mean])


def load_summary(path):
    header, rows = _read_rows(path)
    out = []
    for r in rows:
        out.append({
            "cluster": int(r[0]), "kind": r[1], "count": int(r[2]),
            "percent": float(r[3]), "flags": r[4],
            "mean": np.array([float(v) if v else np.nan for v in r[5:]]),
        })
    return out


# -- density grids ---------------------------------------------------------

@dataclass
class DensityGrid:
    """Nonnegative values on a regular lat/lon grid.

    ``values[r, c]`` covers ``lat_edges[r]..lat_edges[r+1]`` by
    ``lon_edges[c]..lon_edges[c+1]``.
    """

    lat_edges: np.ndarray
    lon_edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.lat_edges = np.asarray(self.lat_edges, dtype=np.float64)
        self.lon_edges = np.asarray(self.lon_edges, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        shape = (self.lat_edges.size - 1, self.lon_edges.size - 1)
        if self.values.shape != shape:
            raise DataError(f"grid values have shape {self.values.shape}, edges imply {shape}")
        if np.any(np.diff(self.lat_edges) <= 0) or np.any(np.diff(self.lon_edges) <= 0):
            raise DataError("grid edges must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise DataError("grid values must be finite and nonnegative")

    @property
    def probabilities(self):
        total = self.values.sum()
        if not total > 0:
            raise DataError("grid is all zeros; nothing to sample")
        return self.values / total


def load_grid_csv(path, cell_size=None):
    """Read ``lat,lon,value`` rows giving cell centres of a regular grid.

    Cells absent from the file are zero.  The cell size is inferred from the
    smallest spacing between distinct centres unless ``cell_size`` (degrees, or
    a ``(dlat, dlon)`` pair) is given; it must be given for a single row/column.
    """
    header, rows = _read_rows(path)
    if header[:3] != ["lat", "lon", "value"]:
        raise DataError(f"{path}: header must be lat,lon,value")
    recs = []
    for line, row in enumerate(rows, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) < 3:
            raise DataError(f"{path}:{line}: expected 3 fields, got {len(row)}")
        recs.append(tuple(_number(c.strip(), path, line, name)
                          for c, name in zip(row[:3], ("lat", "lon", "value"))))
    if not recs:
        raise DataError(f"{path}: no grid cells")
    arr = np.array(recs)
    if cell_size is not None:
        steps = np.broadcast_to(np.asarray(cell_size, dtype=np.float64), (2,))
    else:
        steps = []
        for col in (0, 1):
            centres = np.unique(arr[:, col])
            if centres.size < 2:
                raise DataError(f"{path}: cannot infer cell size from one centre; pass cell_size")
            steps.append(np.diff(centres).min())
        steps = np.array(steps)
    edges, index = [], []
    for col in (0, 1):
        lo = arr[:, col].min()
        k = np.rint((arr[:, col] - lo) / steps[col]).astype(np.int64)
        if not np.allclose(lo + k * steps[col], arr[:, col], rtol=0, atol=1e-6 * steps[col]):
            raise DataError(f"{path}: cell centres are not on a regular grid")
        edges.append(lo - steps[col] / 2 + steps[col] * np.arange(k.max() + 2))
        index.append(k)
    values = np.zeros((edges[0].size - 1, edges[1].size - 1))
    np.add.at(values, (index[0], index[1]), arr[:, 2])
    return DensityGrid(edges[0], edges[1], values)


def sample_from_grid(grid, n, seed=DEFAULT_SEED):
    """Draw ``n`` locations with probability proportional to the grid values.

    Cells are drawn i.i.d. by inverting the cumulative distribution of the
    normalised grid; each draw is then placed uniformly inside its cell.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    p = grid.probabilities.ravel()
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    gen = rng(seed)
    u = gen.random(n)
    cells = np.searchsorted(cdf, u, side="right")
    # guard against u landing on the final edge through rounding
    cells = np.minimum(cells, np.flatnonzero(p > 0)[-1])
    r, c = np.divmod(cells, grid.values.shape[1])
    jitter = gen.random((n, 2))
    lat = grid.lat_edges[r] + jitter[:, 0] * (grid.lat_edges[r + 1] - grid.lat_edges[r])
    lon = grid.lon_edges[c] + jitter[:, 1] * (grid.lon_edges[c + 1] - grid.lon_edges[c])
    pts = np.column_stack([np.clip(lat, -90, 90), np.clip(lon, -180, 180)])
    width = len(str(n - 1))
    return SpatialTable([f"s{k:0{width}d}" for k in range(n)], pts)


# -- synthetic data --------------------------------------------------------

TOY_MEANS = ((4.0, 4.0), (4.0, 8.0), (8.0, 4.0), (8.0, 8.0))
TOY_SIGMAS = (1.0, 0.1)
TOY_SAMPLES = 100
TOY_SERIES_LENGTH = 12


def generate_toy_dataset(seed=DEFAULT_SEED, series_length=TOY_SERIES_LENGTH):
    """Eight isotropic Gaussians, a broad and a narrow one at each of four means.

    Returns ``(spatial, temporal, truth)`` where ``temporal`` holds identical
    all-zero series and ``truth`` gives the generating mean (1..4) per point.
    """
    gen = rng(seed)
    pts, truth = [], []
    for q, mean in enumerate(TOY_MEANS, start=1):
        for sigma in TOY_SIGMAS:
            pts.append(gen.normal(mean, sigma, size=(TOY_SAMPLES, 2)))
            truth += [q] * TOY_SAMPLES
    pts = np.vstack(pts)
    ids = [f"p{k:03d}" for k in range(pts.shape[0])]
    spatial = SpatialTable(ids, pts)
    temporal = TemporalTable(list(ids), np.zeros((pts.shape[0], series_length)))
    return spatial, temporal, np.array(truth, dtype=np.int64)
