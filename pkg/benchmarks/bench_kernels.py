"""Time each compiled kernel against its numpy twin.

    python3 benchmarks/bench_kernels.py [--n 800] [--length 12] [--repeat 3]

Both versions are imported directly, so the SCADDA_NO_NUMBA flag does not
matter here.  The first jit call (compilation, or a cache load) is excluded.
"""
import argparse
import importlib
import time

import numpy as np

from scadda import density, geodesy, warp
from scadda.io import generate_toy_dataset

cluster = importlib.import_module("scadda.cluster")


def best_of(repeat, fn):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(n, length):
    rng = np.random.default_rng(0)
    coords = np.column_stack([rng.uniform(-60, 60, n), rng.uniform(-170, 170, n)])
    series = rng.normal(size=(n, length))
    values, lengths = warp.prepare_series(series)
    mode, size = warp.WarpWindow().mode, 0.1
    x, y = rng.normal(size=200), rng.normal(size=180)
    spatial, temporal, _ = generate_toy_dataset(0)
    d = geodesy.pairwise_distances(spatial.points, "euclidean")
    adj = d < 0.5
    np.fill_diagonal(adj, False)

    def rows(kernel, *args):
        return lambda: kernel(*args, 0, n, np.zeros((n, n)))

    def expand(kernel):
        return lambda: kernel(adj, 5, np.full(adj.shape[0], -2, dtype=np.int64), 0)

    out = np.empty(n)
    yield ("euclidean rows", rows(geodesy._euclidean_rows_jit, coords),
           rows(geodesy._euclidean_rows_np, coords))
    yield ("orthodromic rows", rows(geodesy._orthodromic_rows_jit, coords, 6371.0088),
           rows(geodesy._orthodromic_rows_np, coords, 6371.0088))
    yield ("kde", lambda: density._kde_jit(coords, coords, 5.0, out),
           lambda: density._kde_np(coords, coords, 5.0, out))
    yield ("dtw 200x180", lambda: warp._dtw_jit(x, y, -1), lambda: warp._dtw_np(x, y, -1))
    yield ("dtw rows", rows(warp._dtw_rows_jit, values, lengths, mode, size),
           rows(warp._dtw_rows_np, values, lengths, mode, size))
    yield ("expand (toy)", expand(cluster._expand_jit), expand(cluster._expand_np))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=800, help="points per matrix kernel")
    ap.add_argument("--length", type=int, default=12, help="series length for dtw rows")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for name, jit, npy in cases(args.n, args.length):
        a, b = best_of(args.repeat, jit), best_of(args.repeat, npy)
        print(f"{name:<18}{a:>10.4f}{b:>10.4f}{b / a:>8.1f}x")


if __name__ == "__main__":
    main()
