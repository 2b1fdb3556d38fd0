"""Exact quadratic-time baselines used as ground truth.

Both baselines look at every pair of points.  ``brute_alc`` keeps per-cluster
sums of squared pairwise distances and never uses centroids or variances,
so it shares nothing with the incremental statistics in :mod:`rphc.alc`.
"""
from __future__ import annotations

import numpy as np

from .geometry import Dataset, pair_distances, pair_sq_distances
from .merges import MergeRecorder, MergeSequence, UnionFind


def full_distance_matrix(ds: Dataset, squared: bool = False) -> np.ndarray:
    """Symmetric ``N x N`` matrix of (squared) Euclidean distances with zero diagonal."""
    n = ds.n
    i, j = np.triu_indices(n, 1)
    vals = pair_sq_distances(ds.coords, i, j) if squared else pair_distances(ds.coords, i, j)
    M = np.zeros((n, n))
    M[i, j] = vals
    M[j, i] = vals
    return M


def brute_slc(ds: Dataset) -> MergeSequence:
    """Single linkage by Kruskal over all ``N(N-1)/2`` edges.

    Edges are taken in ``(distance, i, j)`` order, so exact ties resolve the
    same way as in :func:`rphc.slc.rp_slc`.
    """
    n = ds.n
    rec = MergeRecorder(n)
    n_pairs = n * (n - 1) // 2
    if n > 1:
        i, j = np.triu_indices(n, 1)
        dist = pair_distances(ds.coords, i, j)
        order = np.lexsort((j, i, dist))
        uf = UnionFind(n)
        merged = 0
        for s in range(0, len(order), 1 << 16):
            o = order[s:s + (1 << 16)]
            for a, b, h in zip(i[o].tolist(), j[o].tolist(), dist[o].tolist()):
                if uf.find(a) != uf.find(b):
                    uf.union(a, b)
                    rec.add(a, b, h)
                    merged += 1
                    if merged == n - 1:
                        break
            if merged == n - 1:
                break
    return rec.finish({"n_distances": n_pairs, "algorithm": "oracle-slc"})


def brute_alc(ds: Dataset) -> MergeSequence:
    """Average linkage on squared distances by exhaustive search.

    The height of a merge is the mean squared distance over all cross pairs,
    obtained from running sums of the explicit pairwise squared distances.
    Ties resolve by the smallest representative pair; a cluster's
    representative is its smallest point id.
    """
    n = ds.n
    rec = MergeRecorder(n)
    info = {"n_distances": n * (n - 1) // 2, "algorithm": "oracle-alc"}
    if n == 1:
        return rec.finish(info)
    W = full_distance_matrix(ds, squared=True)
    sizes = np.ones(n)
    H = W.copy()
    np.fill_diagonal(H, np.inf)
    rowmin = H.min(axis=1)
    rowarg = H.argmin(axis=1)
    live = np.ones(n, dtype=bool)
    for _ in range(n - 1):
        i = int(np.argmin(rowmin))
        j = int(rowarg[i])
        a, b = min(i, j), max(i, j)
        rec.add(a, b, float(H[a, b]))
        W[a] += W[b]
        W[:, a] = W[a]
        sizes[a] += sizes[b]
        live[b] = False
        H[a] = W[a] / (sizes[a] * sizes)
        H[a, ~live] = np.inf
        H[a, a] = np.inf
        H[:, a] = H[a]
        H[b] = np.inf
        H[:, b] = np.inf
        rowmin[b] = np.inf
        # rows whose best partner vanished or changed get a full rescan
        stale = live & ((rowarg == a) | (rowarg == b))
        stale[a] = True
        rows = np.flatnonzero(stale)
        if len(rows):
            rowarg[rows] = H[rows].argmin(axis=1)
            rowmin[rows] = H[rows, rowarg[rows]]
        others = live & ~stale
        better = others & ((H[:, a] < rowmin) | ((H[:, a] == rowmin) & (a < rowarg)))
        rowmin[better] = H[better, a]
        rowarg[better] = a
    return rec.finish(info)
