"""Time-series normalisation and dynamic time warping.

``dtw_distance`` is the square root of the minimum summed squared difference
over monotone, contiguous alignment paths from (1, 1) to (m, n).  An optional
Sakoe-Chiba band keeps cells with ``|i * n - j * m| <= w * max(m, n)``, i.e.
within ``w`` steps of the diagonal measured along the longer series, which is
symmetric in the two arguments.  For unequal lengths ``w`` is raised to
``|m - n|`` so the far corner stays reachable.  DTW is not a metric, and nothing here tries to
make it one.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit, pick
from ._parallel import fill_upper, mirror_upper

DEFAULT_WINDOW_FRACTION = 0.1
MAD_SCALE = 1.4826

# window modes understood by the kernels
_UNCONSTRAINED, _ABSOLUTE, _FRACTION = 0, 1, 2


@dataclass(frozen=True)
class WarpWindow:
    """Sakoe-Chiba half-width.

    ``size=None`` means unconstrained.  A size below one is a fraction of the
    longer series' length (rounded up); anything else is an absolute number of
    cells (also rounded up).
    """

    size: float = DEFAULT_WINDOW_FRACTION

    def __post_init__(self):
        if self.size is not None and not (math.isfinite(self.size) and self.size >= 0):
            raise ValueError(f"window size must be a nonnegative number, got {self.size!r}")

    @classmethod
    def parse(cls, text):
        if isinstance(text, WarpWindow):
            return text
        if text is None:
            return cls(None)
        if isinstance(text, (int, float)):
            return cls(float(text))
        key = str(text).strip().lower()
        if key in ("none", "unconstrained", "inf"):
            return cls(None)
        try:
            return cls(float(key))
        except ValueError:
            raise ValueError(f"window_param must be a number or 'none', got {text!r}") from None

    @property
    def mode(self):
        if self.size is None:
            return _UNCONSTRAINED
        return _FRACTION if 0 < self.size < 1 else _ABSOLUTE

    def effective(self, m, n):
        """Half-width actually used between series of lengths ``m`` and ``n``
        (``-1`` when unconstrained)."""
        return _effective_window(self.mode, -1.0 if self.size is None else float(self.size), m, n)

    def __str__(self):
        return "none" if self.size is None else repr(self.size)


UNCONSTRAINED = WarpWindow(None)


def z_normalize(x, robust=False):
    """Shift and scale ``x`` to mean 0 and population standard deviation 1.

    Constant series map to all zeros.  With ``robust=True`` the median and the
    MAD (scaled by 1.4826) are used instead; when the MAD is zero this falls
    back to the plain z-score.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalise an empty series")
    if np.ptp(x) == 0:
        return np.zeros_like(x)
    if robust:
        med = np.median(x)
        mad = np.median(np.abs(x - med)) * MAD_SCALE
        if mad > 0:
            return (x - med) / mad
    d = x - x.mean()
    return d / math.sqrt(np.mean(d * d))


@njit
def _effective_window(mode, size, m, n):
    if mode == 0:
        return -1
    if mode == 2:
        w = int(math.ceil(size * max(m, n)))
    else:
        w = int(math.ceil(size))
    return max(w, abs(m - n))


@njit
def _dtw_jit(x, y, w):
    m, n = x.shape[0], y.shape[0]
    acc = np.full((m + 1, n + 1), np.inf)
    acc[0, 0] = 0.0
    cells = 0
    big = max(m, n)
    for i in range(1, m + 1):
        if w < 0:
            lo, hi = 1, n
        else:
            # |i*n - j*m| <= w*max(m, n), solved for j in integer arithmetic
            lo = max(1, -((-(i * n - w * big)) // m))
            hi = min(n, (i * n + w * big) // m)
        for j in range(lo, hi + 1):
            d = x[i - 1] - y[j - 1]
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = d * d + best
            cells += 1
    return math.sqrt(acc[m, n]), cells


def _band_limits(m, n, w):
    i = np.arange(1, m + 1)
    if w < 0:
        return np.ones(m, dtype=np.int64), np.full(m, n, dtype=np.int64)
    big = max(m, n)
    lo = np.maximum(1, -((-(i * n - w * big)) // m))
    hi = np.minimum(n, (i * n + w * big) // m)
    return lo, hi


def _dtw_np(x, y, w):
    # sweeps anti-diagonals: every cell on diagonal s depends only on s-1, s-2
    m, n = x.shape[0], y.shape[0]
    acc = np.full((m + 1, n + 1), np.inf)
    acc[0, 0] = 0.0
    lo, hi = _band_limits(m, n, w)
    cells = 0
    for s in range(2, m + n + 1):
        i = np.arange(max(1, s - n), min(m, s - 1) + 1)
        j = s - i
        keep = (j >= lo[i - 1]) & (j <= hi[i - 1])
        i, j = i[keep], j[keep]
        if i.size == 0:
            continue
        d = x[i - 1] - y[j - 1]
        best = np.minimum(np.minimum(acc[i - 1, j - 1], acc[i - 1, j]), acc[i, j - 1])
        acc[i, j] = d * d + best
        cells += i.size
    return math.sqrt(acc[m, n]), cells


_dtw = pick(_dtw_jit, _dtw_np)


def _as_series(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"time series must be one-dimensional, got shape {x.shape}")
    if x.size == 0:
        raise ValueError("time series must not be empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("time series contains non-finite values")
    return x


def dtw_distance(x, y, window=UNCONSTRAINED, return_cells=False):
    """DTW dissimilarity between two series.

    With ``return_cells=True`` also returns how many DP cells were filled.
    """
    x, y = _as_series(x), _as_series(y)
    w = WarpWindow.parse(window).effective(x.size, y.size)
    dist, cells = _dtw(x, y, int(w))
    if not math.isfinite(dist):
        raise RuntimeError(f"no admissible warping path for lengths {x.size}, {y.size}, window {w}")
    return (dist, cells) if return_cells else dist


@njit
def _dtw_rows_jit(values, lengths, mode, size, i0, i1, out):
    n = values.shape[0]
    for i in range(i0, i1):
        for j in range(i + 1, n):
            w = _effective_window(mode, size, lengths[i], lengths[j])
            out[i, j] = _dtw_jit(values[i, :lengths[i]], values[j, :lengths[j]], w)[0]


def _dtw_batch_np(x, ys, w):
    # one series against a stack of equal-length series, same sweep as _dtw_np
    m, n = x.shape[0], ys.shape[1]
    acc = np.full((ys.shape[0], m + 1, n + 1), np.inf)
    acc[:, 0, 0] = 0.0
    lo, hi = _band_limits(m, n, w)
    for s in range(2, m + n + 1):
        i = np.arange(max(1, s - n), min(m, s - 1) + 1)
        j = s - i
        keep = (j >= lo[i - 1]) & (j <= hi[i - 1])
        i, j = i[keep], j[keep]
        if i.size == 0:
            continue
        d = x[i - 1] - ys[:, j - 1]
        best = np.minimum(np.minimum(acc[:, i - 1, j - 1], acc[:, i - 1, j]), acc[:, i, j - 1])
        acc[:, i, j] = d * d + best
    return np.sqrt(acc[:, m, n])


def _dtw_rows_np(values, lengths, mode, size, i0, i1, out):
    n = values.shape[0]
    for i in range(i0, i1):
        m = lengths[i]
        rest = np.arange(i + 1, n)
        for length in np.unique(lengths[rest]):
            js = rest[lengths[rest] == length]
            w = _effective_window(mode, size, m, length)
            out[i, js] = _dtw_batch_np(values[i, :m], values[js, :length], w)


_dtw_rows = pick(_dtw_rows_jit, _dtw_rows_np)


def prepare_series(series, z_score=False, robust=False):
    """Validate ``series`` and pack them into a zero-padded 2-D array.

    Returns ``(values, lengths)``.
    """
    rows = [_as_series(s) for s in series]
    if z_score:
        rows = [z_normalize(s, robust=robust) for s in rows]
    lengths = np.array([r.size for r in rows], dtype=np.int64)
    values = np.zeros((len(rows), int(lengths.max()) if rows else 0))
    for k, r in enumerate(rows):
        values[k, : r.size] = r
    return values, lengths


def temporal_distance_matrix(series, window=WarpWindow(), z_score=False, robust=False, workers=1):
    """Symmetric matrix of pairwise DTW distances (zero diagonal)."""
    if len(series) < 2:
        raise ValueError(f"need at least 2 series, got {len(series)}")
    values, lengths = prepare_series(series, z_score, robust)
    window = WarpWindow.parse(window)
    mode, size = window.mode, -1.0 if window.size is None else float(window.size)
    n = values.shape[0]
    out = np.zeros((n, n))
    fill_upper(lambda a, b: _dtw_rows(values, lengths, mode, size, a, b, out), n, workers)
    if not np.all(np.isfinite(out)):
        raise RuntimeError("temporal distance matrix contains non-finite entries")
    return mirror_upper(out)
