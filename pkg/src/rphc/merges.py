"""Merge sequences (dendrograms) and a small union-find."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


class UnionFind:
    """Disjoint sets over ``0..n-1`` with union by size and path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.min_id = list(range(n))
        self.n_clusters = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.min_id[ra] = min(self.min_id[ra], self.min_id[rb])
        self.n_clusters -= 1
        return ra

    def labels(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))], dtype=np.int64)


@dataclass(eq=False)
class MergeSequence:
    """Ordered merge events of an agglomerative clustering.

    Event ``i`` joined the cluster holding ``edge_a[i]`` with the cluster
    holding ``edge_b[i]`` at height ``distance[i]``.  ``left``/``right`` are the
    smallest point ids of the two clusters just before the merge and
    ``size`` is the size of the result.  For single linkage the edge is the
    point pair that caused the merge; for average linkage it is the pair of
    cluster representatives.
    """

    n_points: int
    edge_a: np.ndarray
    edge_b: np.ndarray
    left: np.ndarray
    right: np.ndarray
    distance: np.ndarray
    size: np.ndarray
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.distance)

    @property
    def complete(self) -> bool:
        return len(self) == self.n_points - 1

    @classmethod
    def from_edges(cls, n_points: int, edges, distances, info=None) -> "MergeSequence":
        rec = MergeRecorder(n_points)
        for (a, b), h in zip(edges, distances):
            rec.add(int(a), int(b), float(h))
        return rec.finish(info)

    def to_linkage(self) -> np.ndarray:
        """SciPy linkage matrix (requires a complete sequence)."""
        if not self.complete:
            raise ValueError("linkage matrix needs a complete merge sequence")
        n = self.n_points
        uf = UnionFind(n)
        node = list(range(n))
        Z = np.zeros((n - 1, 4))
        for i, (a, b) in enumerate(zip(self.edge_a, self.edge_b)):
            ra, rb = uf.find(int(a)), uf.find(int(b))
            Z[i] = (min(node[ra], node[rb]), max(node[ra], node[rb]), self.distance[i], self.size[i])
            node[uf.union(ra, rb)] = n + i
        return Z

    def to_newick(self) -> str:
        if not self.complete:
            raise ValueError("newick export needs a complete merge sequence")
        n = self.n_points
        uf = UnionFind(n)
        text = [str(i) for i in range(n)]
        height = [0.0] * n
        for a, b, h in zip(self.edge_a, self.edge_b, self.distance):
            ra, rb = uf.find(int(a)), uf.find(int(b))
            h = float(h)
            sub = f"({text[ra]}:{h - height[ra]:.17g},{text[rb]}:{h - height[rb]:.17g})"
            r = uf.union(ra, rb)
            text[r], height[r] = sub, h
        return text[uf.find(0)] + ";"

    def to_csv(self) -> str:
        buf = io.StringIO()
        for i in range(len(self)):
            buf.write(f"{i},{self.left[i]},{self.right[i]},{float(self.distance[i]):.17g},{self.size[i]}\n")
        return buf.getvalue()


class MergeRecorder:
    """Accumulates merge events while tracking cluster representatives."""

    def __init__(self, n_points: int):
        self.n = n_points
        self.uf = UnionFind(n_points)
        self.rows = []

    def add(self, a: int, b: int, height: float) -> None:
        uf = self.uf
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            raise ValueError(f"points {a} and {b} are already in one cluster")
        left, right = uf.min_id[ra], uf.min_id[rb]
        r = uf.union(ra, rb)
        self.rows.append((a, b, left, right, height, uf.size[r]))

    @property
    def n_clusters(self) -> int:
        return self.uf.n_clusters

    def finish(self, info=None) -> MergeSequence:
        rows = self.rows
        cols = list(zip(*rows)) if rows else [()] * 6
        as_int = lambda c: np.asarray(c, dtype=np.int64)
        return MergeSequence(self.n, as_int(cols[0]), as_int(cols[1]), as_int(cols[2]), as_int(cols[3]),
                             np.asarray(cols[4], dtype=np.float64), as_int(cols[5]), dict(info or {}))
