"""Row-block scheduling for upper-triangle matrix fills."""
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def row_blocks(n, parts):
    """Split rows ``0..n`` into ``parts`` contiguous blocks of roughly equal
    upper-triangle work (row ``i`` owns ``n - i - 1`` pairs)."""
    parts = max(1, min(int(parts), n))
    work = np.arange(n, 0, -1, dtype=np.float64) - 1.0
    cum = np.concatenate(([0.0], np.cumsum(work)))
    targets = np.linspace(0.0, cum[-1], parts + 1)
    edges = np.searchsorted(cum, targets, side="left")
    edges[0], edges[-1] = 0, n
    edges = np.unique(edges)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def fill_upper(fill, n, workers=1):
    """Call ``fill(i0, i1)`` over row blocks, concurrently when ``workers > 1``.

    ``fill`` must write only rows ``i0..i1`` of the upper triangle; each entry is
    written exactly once, so the result does not depend on the worker count.
    """
    workers = max(1, int(workers))
    if workers == 1 or n < 4:
        fill(0, n)
        return
    blocks = row_blocks(n, 4 * workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fill, a, b) for a, b in blocks]:
            fut.result()


def mirror_upper(mat):
    """Copy the strict upper triangle onto the lower one and zero the diagonal."""
    iu = np.triu_indices(mat.shape[0], k=1)
    mat[(iu[1], iu[0])] = mat[iu]
    np.fill_diagonal(mat, 0.0)
    return mat
