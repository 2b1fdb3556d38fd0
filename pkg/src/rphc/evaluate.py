"""Cutting and comparing dendrograms, plus diagnostics for the difficulty parameter B.

Preservation compares two dendrograms over the same points level by level:
both are cut into ``k`` clusters and the Fowlkes-Mallows index of the two
partitions is taken, for every ``k`` in ``2..N-1``.  The contingency table is
maintained while replaying both merge sequences, so all ``N - 2`` scores
cost about ``O(N log N)`` dictionary updates in total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Dataset, RandomSource, as_generator, pair_distances, sample_unit_vectors
from .merges import MergeSequence, UnionFind

SIN1_2 = 2.0 * math.sin(1.0)


class PreconditionError(ValueError):
    """The hypothesis of the projection bound does not hold for the given triple."""


@dataclass(frozen=True, eq=False)
class CutLabels:
    k: int
    labels: np.ndarray


@dataclass(frozen=True, eq=False)
class PreservationScore:
    levels: np.ndarray
    scores: np.ndarray

    @property
    def average(self) -> float:
        # N <= 2 has no non-trivial level; the dendrograms agree vacuously
        return float(self.scores.mean()) if len(self.scores) else 1.0


def _require_complete(hc: MergeSequence, n: Optional[int]) -> int:
    if n is not None and hc.n_points != n:
        raise ValueError(f"dendrogram covers {hc.n_points} points, expected {n}")
    if not hc.complete:
        raise ValueError(f"dendrogram is incomplete ({len(hc)} of {hc.n_points - 1} merges)")
    return hc.n_points


def cut(hc: MergeSequence, k: int, n: Optional[int] = None) -> CutLabels:
    """Labels ``0..k-1`` after applying the first ``N - k`` merges.

    Labels are numbered in order of first appearance by point id.
    """
    n = _require_complete(hc, n)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    uf = UnionFind(n)
    for a, b in zip(hc.edge_a[:n - k].tolist(), hc.edge_b[:n - k].tolist()):
        uf.union(a, b)
    _, labels = np.unique(uf.labels(), return_inverse=True)
    order = np.full(k, -1)
    out = np.empty(n, dtype=np.int64)
    nxt = 0
    for i, lab in enumerate(labels.tolist()):
        if order[lab] < 0:
            order[lab] = nxt
            nxt += 1
        out[i] = order[lab]
    return CutLabels(k, out)


def fowlkes_mallows(labels_a, labels_b) -> float:
    """Fowlkes-Mallows index of two flat clusterings, from their contingency table."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("label arrays must be 1-d and of equal length")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    _, nij = np.unique(ia.astype(np.int64) * (ib.max() + 1) + ib, return_counts=True)
    pairs = lambda c: sum(int(x) * (int(x) - 1) // 2 for x in c)
    tp = pairs(nij)
    sa = pairs(np.bincount(ia))
    sb = pairs(np.bincount(ib))
    return _fm(tp, sa, sb)


def _fm(tp: int, sa: int, sb: int) -> float:
    if sa == 0 or sb == 0:
        return 1.0 if sa == sb else 0.0
    if sa == sb:
        return tp / sa
    return tp / math.sqrt(sa * sb)


class _Contingency:
    """Contingency table of two partitions under merges on either side."""

    def __init__(self, n: int):
        # rows[side][cluster] -> {cluster on the other side: count}
        self.rows = ({i: {i: 1} for i in range(n)}, {i: {i: 1} for i in range(n)})
        self.size = ([1] * n, [1] * n)
        self.uf = (UnionFind(n), UnionFind(n))
        self.tp = 0
        self.same = [0, 0]

    def merge(self, side: int, a: int, b: int) -> None:
        uf, rows, size = self.uf[side], self.rows[side], self.size[side]
        other_rows = self.rows[1 - side]
        ra, rb = uf.find(a), uf.find(b)
        keep = uf.union(ra, rb)
        gone = rb if keep == ra else ra
        self.same[side] += size[ra] * size[rb]
        size[keep] = size[ra] + size[rb]
        big, small = rows[keep], rows.pop(gone)
        for j, cnt in small.items():
            prev = big.get(j, 0)
            self.tp += prev * cnt
            big[j] = prev + cnt
            col = other_rows[j]
            del col[gone]
            col[keep] = prev + cnt


def preservation(a: MergeSequence, b: MergeSequence, n: Optional[int] = None) -> PreservationScore:
    """Per-level Fowlkes-Mallows agreement of two complete dendrograms, levels ``k = 2..N-1``."""
    n = _require_complete(a, n)
    if _require_complete(b, None) != n:
        raise ValueError(f"dendrograms cover different point counts ({n} vs {b.n_points})")
    table = _Contingency(n)
    scores = np.empty(max(n - 2, 0))
    ea = list(zip(a.edge_a.tolist(), a.edge_b.tolist()))
    eb = list(zip(b.edge_a.tolist(), b.edge_b.tolist()))
    for s in range(n - 2):
        table.merge(0, *ea[s])
        table.merge(1, *eb[s])
        scores[s] = _fm(table.tp, table.same[0], table.same[1])
    levels = np.arange(n - 1, 1, -1)
    return PreservationScore(levels, scores)


@dataclass(frozen=True, eq=False)
class BSizes:
    sizes: np.ndarray
    radius: np.ndarray

    @property
    def maximum(self) -> int:
        return int(self.sizes.max())


def compute_B(ds: Dataset, hc: MergeSequence, c: float, chunk: int = 256) -> BSizes:
    """For every point ``P``, count points within ``c`` times the longest dendrogram edge at ``P``.

    Edge lengths are Euclidean distances between the recorded edge endpoints.
    ``P`` counts itself.  Distances within a relative ``1e-12`` of the radius
    count as inside, so rounding does not drop points lying exactly on it.
    """
    _require_complete(hc, ds.n)
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    X = ds.coords
    longest = np.zeros(ds.n)
    if len(hc):
        lengths = pair_distances(X, hc.edge_a, hc.edge_b)
        np.maximum.at(longest, hc.edge_a, lengths)
        np.maximum.at(longest, hc.edge_b, lengths)
    radius = c * longest * (1 + 1e-12)
    sq = np.einsum("ij,ij->i", X, X)
    sizes = np.empty(ds.n, dtype=np.int64)
    for s in range(0, ds.n, chunk):
        rows = slice(s, s + chunk)
        d2 = sq[rows, None] + sq[None, :] - 2.0 * X[rows] @ X.T
        # exact recheck near the boundary, where the expanded form loses precision
        r2 = radius[rows, None] ** 2
        near = np.abs(d2 - r2) <= 1e-9 * (sq[rows, None] + sq[None, :] + r2) + 1e-300
        inside = d2 <= r2
        if near.any():
            ii, jj = np.nonzero(near)
            exact = pair_distances(X, ii + s, jj) <= radius[ii + s]
            inside[ii, jj] = exact
        idx = np.arange(s, min(s + chunk, ds.n))
        inside[idx - s, idx] = True
        sizes[rows] = inside.sum(axis=1)
    return BSizes(sizes, radius)


def _coords(p) -> np.ndarray:
    return np.asarray(getattr(p, "coords", p), dtype=np.float64)


def pr_bound(P, R, T) -> float:
    """Claimed upper bound ``D(P,T) / (pi D(P,R))`` on the probability of the PR event."""
    p, r, t = _coords(P), _coords(R), _coords(T)
    return float(np.linalg.norm(p - t) / (math.pi * np.linalg.norm(p - r)))


def pr_probability_exact(P, R, T) -> float:
    """Exact probability that ``R`` projects between ``P`` and ``T`` on a uniform random line.

    This is the angle at ``R`` between ``P - R`` and ``T - R`` divided by pi
    (for ``d >= 2``; zero-length legs give 0).
    """
    p, r, t = _coords(P), _coords(R), _coords(T)
    u, v = p - r, t - r
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0 or np.array_equal(p, t):
        return 0.0
    cos = float(np.clip(u @ v / (nu * nv), -1.0, 1.0))
    return math.acos(cos) / math.pi


def check_pr_hypothesis(P, R, T, rtol: float = 1e-12) -> bool:
    p, r, t = _coords(P), _coords(R), _coords(T)
    dpt = np.linalg.norm(p - t)
    return bool(dpt <= SIN1_2 * min(np.linalg.norm(p - r), np.linalg.norm(t - r)) * (1 + rtol))


def projection_bound_mc(P, R, T, trials: int, rng: RandomSource, chunk: int = 100_000) -> float:
    """Monte-Carlo frequency of ``R`` projecting between ``P`` and ``T`` (closed interval, both orientations)."""
    p, r, t = _coords(P), _coords(R), _coords(T)
    if not (p.shape == r.shape == t.shape) or p.ndim != 1:
        raise ValueError("P, R and T must be vectors of one dimension")
    if not check_pr_hypothesis(p, r, t):
        raise PreconditionError("D(P,T) exceeds 2 sin(1) min(D(P,R), D(T,R))")
    if trials < 1:
        raise ValueError("trials must be positive")
    gen = as_generator(rng)
    pts = np.stack([p, r, t], axis=1)
    hits = 0
    for s in range(0, trials, chunk):
        L = sample_unit_vectors(len(p), min(chunk, trials - s), gen)
        proj = L @ pts
        lo = np.minimum(proj[:, 0], proj[:, 2])
        hi = np.maximum(proj[:, 0], proj[:, 2])
        hits += int(np.count_nonzero((lo <= proj[:, 1]) & (proj[:, 1] <= hi)))
    return hits / trials
