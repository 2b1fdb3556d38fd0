"""Single linkage / minimum spanning tree from random-projection candidate sets.

Two entry points:

``rp_slc``
    One partition family with a fixed ``min_pts``; Kruskal over the
    candidate edges.  May finish with several clusters when ``min_pts`` was
    too small; the result is then flagged incomplete.

``rp_slc_parameter_free``
    Repeats partition + merge, doubling ``min_pts`` whenever the frequency
    gate fails and rescaling the perturbation length to the current edge
    scale.  Always returns a complete dendrogram.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geometry import Dataset, RngStream, pair_distances
from .merges import MergeRecorder, MergeSequence, UnionFind
from .partition import PartitionConfig, PartitionFamily, perturb_multi_partition

log = logging.getLogger(__name__)

C_F_DEFAULT = 0.66


@dataclass(eq=False)
class CandidateEdgeTable:
    """Distinct co-occurring point pairs, sorted by ``(distance, i, j)``.

    ``count[k]`` is the number of sets containing both ``i[k]`` and ``j[k]``;
    ``n_distances`` is how many distances were evaluated to build the table.
    """

    n_points: int
    i: np.ndarray
    j: np.ndarray
    distance: np.ndarray
    count: np.ndarray
    rounds: int

    def __len__(self):
        return len(self.i)

    @property
    def n_distances(self) -> int:
        return len(self.i)

    def as_dict(self) -> dict:
        return {(int(a), int(b)): (float(d), int(c))
                for a, b, d, c in zip(self.i, self.j, self.distance, self.count)}


def _sorted_table(ds: Dataset, i, j, count, rounds) -> CandidateEdgeTable:
    dist = pair_distances(ds.coords, i, j)
    order = np.lexsort((j, i, dist))
    return CandidateEdgeTable(ds.n, i[order], j[order], dist[order], count[order], rounds)


def build_candidate_table(family: PartitionFamily, ds: Dataset) -> CandidateEdgeTable:
    """Collect every pair that shares a set, with its co-occurrence count.

    Each distinct pair's distance is evaluated once on the original
    coordinates, however many sets contain it.
    """
    if family.n_points != ds.n:
        raise ValueError(f"family covers {family.n_points} points, dataset has {ds.n}")
    M = family.incidence()
    C = (M @ M.T).tocoo()
    keep = C.row < C.col
    i = C.row[keep].astype(np.int64)
    j = C.col[keep].astype(np.int64)
    return _sorted_table(ds, i, j, C.data[keep].astype(np.int64), family.rounds)


def full_candidate_table(ds: Dataset, rounds: int) -> CandidateEdgeTable:
    """All pairs, each counted in every round (what ``min_pts >= N`` yields)."""
    i, j = np.triu_indices(ds.n, 1)
    return _sorted_table(ds, i.astype(np.int64), j.astype(np.int64), np.full(len(i), rounds, dtype=np.int64), rounds)


def rp_slc(ds: Dataset, cfg: PartitionConfig, workers: Optional[int] = None) -> MergeSequence:
    """Single linkage restricted to pairs that co-occur in a small set.

    ``cfg.l_per`` is ignored; the points are partitioned unperturbed.  Check
    ``result.complete``: an incomplete sequence means ``min_pts`` was too
    small for this data.
    """
    cfg = replace(cfg, l_per=0.0)
    if cfg.min_pts >= ds.n:
        table = full_candidate_table(ds, cfg.rounds)
    else:
        table = build_candidate_table(perturb_multi_partition(ds, cfg, workers=workers), ds)
    rec = MergeRecorder(ds.n)
    uf = rec.uf
    for a, b, h in zip(table.i.tolist(), table.j.tolist(), table.distance.tolist()):
        if uf.find(a) != uf.find(b):
            rec.add(a, b, h)
            if uf.n_clusters == 1:
                break
    info = {"algorithm": "rp-slc", "n_distances": table.n_distances, "min_pts": cfg.min_pts,
            "rounds": cfg.rounds}
    return rec.finish(info)


# ---------------------------------------------------------------- edge classes

@dataclass
class EdgeClassification:
    """Frequent edges split by the current clustering.

    ``feasible[p]`` and ``taken[p]`` map a point to ``(neighbour, distance)``
    pairs sorted by distance.
    """

    feasible: dict
    taken: dict

    @property
    def feasible_edges(self) -> list:
        seen = {}
        for p, lst in self.feasible.items():
            for q, dist in lst:
                seen[(min(p, q), max(p, q))] = dist
        return sorted(seen.items(), key=lambda kv: (kv[1], kv[0]))

    @property
    def min_feasible(self) -> float:
        best = math.inf
        for lst in self.feasible.values():
            if lst:
                best = min(best, lst[0][1])
        return best


def _labels_of(clustering, n: int) -> np.ndarray:
    if isinstance(clustering, UnionFind):
        return clustering.labels()
    labels = np.asarray(clustering)
    if labels.shape != (n,):
        raise ValueError("clustering must give one label per point")
    return labels


def classify_edges(table: CandidateEdgeTable, clustering, rounds: int, c_f: float) -> EdgeClassification:
    """Frequent pairs (``count / rounds > c_f``) split into feasible and taken."""
    if not 0 < c_f < 1:
        raise ValueError(f"c_f must lie in (0, 1), got {c_f}")
    labels = _labels_of(clustering, table.n_points)
    feasible = {p: [] for p in range(table.n_points)}
    taken = {p: [] for p in range(table.n_points)}
    freq = table.count / rounds > c_f
    for a, b, dist in zip(table.i[freq].tolist(), table.j[freq].tolist(), table.distance[freq].tolist()):
        target = feasible if labels[a] != labels[b] else taken
        target[a].append((b, dist))
        target[b].append((a, dist))
    for dct in (feasible, taken):
        for lst in dct.values():
            lst.sort(key=lambda t: (t[1], t[0]))
    return EdgeClassification(feasible, taken)


def condition_62(classification: EdgeClassification, check_set) -> bool:
    """Merge gate: some feasible edge exists and every checked point has a
    feasible edge or a taken edge at least as long as the shortest feasible edge."""
    min_f = classification.min_feasible
    if math.isinf(min_f):
        return False
    for p in check_set:
        if classification.feasible.get(p):
            continue
        taken = classification.taken.get(p)
        if not taken or max(d for _, d in taken) < min_f:
            return False
    return True


# ---------------------------------------------------------- parameter-free run

def _csr_rows(indptr: np.ndarray, rows: np.ndarray):
    """Flat positions of all entries in ``rows`` plus the owning row of each."""
    starts = indptr[rows]
    lens = indptr[rows + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    owner = np.repeat(rows, lens)
    offs = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
    return np.arange(total) + offs, owner


class _Clusters:
    """Explicit cluster labels; merging relabels the smaller cluster."""

    def __init__(self, n: int):
        self.label = np.arange(n)
        self.members = {p: np.array([p]) for p in range(n)}

    @property
    def count(self) -> int:
        return len(self.members)

    def merge(self, la: int, lb: int) -> tuple:
        """Merge clusters ``la`` and ``lb``; return ``(absorbed_members, kept_label)``."""
        if len(self.members[la]) > len(self.members[lb]):
            la, lb = lb, la
        moved = self.members.pop(la)
        self.label[moved] = lb
        self.members[lb] = np.concatenate([self.members[lb], moved])
        return moved, lb


class _FrequentState:
    """Incrementally maintained feasible/taken bookkeeping for one iteration."""

    def __init__(self, table: CandidateEdgeTable, c_f: float, clusters: _Clusters):
        n = table.n_points
        self.clusters = clusters
        freq = table.count / table.rounds > c_f
        fi, fj, fd = table.i[freq], table.j[freq], table.distance[freq]
        self.fi, self.fj, self.fd = fi, fj, fd  # already in ascending distance order
        self.fptr = 0
        src = np.concatenate([fi, fj])
        dst = np.concatenate([fj, fi])
        dd = np.concatenate([fd, fd])
        order = np.argsort(src, kind="stable")
        self.adj = dst[order]
        self.adj_d = dd[order]
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=n))]).astype(np.int64)
        lab = clusters.label
        inter = lab[src] != lab[dst]
        self.n_feasible = np.bincount(src[inter], minlength=n)
        self.max_taken = np.full(n, -np.inf)
        np.maximum.at(self.max_taken, src[~inter], dd[~inter])

    def min_feasible(self) -> float:
        lab = self.clusters.label
        fi, fj = self.fi, self.fj
        while self.fptr < len(fi) and lab[fi[self.fptr]] == lab[fj[self.fptr]]:
            self.fptr += 1
        return float(self.fd[self.fptr]) if self.fptr < len(fi) else math.inf

    def feasible_neighbours(self, p: int) -> np.ndarray:
        nb = self.adj[self.indptr[p]:self.indptr[p + 1]]
        return nb[self.clusters.label[nb] != self.clusters.label[p]]

    def condition(self, check: Optional[np.ndarray]) -> bool:
        min_f = self.min_feasible()
        if math.isinf(min_f):
            return False
        if check is None:
            ok = (self.n_feasible > 0) | (self.max_taken >= min_f)
        else:
            ok = (self.n_feasible[check] > 0) | (self.max_taken[check] >= min_f)
        return bool(np.all(ok))

    def merge(self, p: int, q: int) -> None:
        cl = self.clusters
        lab = cl.label
        la, lb = int(lab[p]), int(lab[q])
        if len(cl.members[la]) > len(cl.members[lb]):
            la, lb = lb, la
        pos, owner = _csr_rows(self.indptr, cl.members[la])
        nb = self.adj[pos]
        hit = lab[nb] == lb  # frequent edges between the two clusters turn from feasible to taken
        cl.merge(la, lb)
        if hit.any():
            u, v, w = owner[hit], nb[hit], self.adj_d[pos][hit]
            np.subtract.at(self.n_feasible, u, 1)
            np.subtract.at(self.n_feasible, v, 1)
            np.maximum.at(self.max_taken, u, w)
            np.maximum.at(self.max_taken, v, w)


def initial_min_pts(n: int, c0: float = 1.0, floor: int = 4) -> int:
    return max(2, min(n, max(floor, math.ceil(c0 * math.log2(max(n, 2))))))


def rp_slc_parameter_free(ds: Dataset, base_cfg: Optional[PartitionConfig] = None, c_f: float = C_F_DEFAULT,
                          workers: Optional[int] = None) -> MergeSequence:
    """Single linkage without a ``min_pts`` parameter.

    Each iteration partitions the points with the current ``min_pts`` and
    perturbation length, counts pair co-occurrences afresh and merges along
    ascending candidate edges while

    * more than one cluster remains,
    * the merge gate holds for the points to check (all points before the
      first merge; afterwards the feasible neighbours the two endpoints had
      just before their merge), and
    * the shortest feasible edge is at least 8 perturbation lengths.

    When the gate fails ``min_pts`` doubles (capped at ``N``, where every pair
    is a candidate and the gate is not needed); the perturbation length then
    becomes 1/16 of the shortest feasible edge.  Clusters and merges carry
    over between iterations.

    ``base_cfg`` supplies rounds, lines per round and the seed; its
    ``min_pts`` is the starting value (use :func:`initial_min_pts`).
    """
    n = ds.n
    if base_cfg is None:
        base_cfg = PartitionConfig.for_size(n, min_pts=initial_min_pts(n))
    if not 0 < c_f < 1:
        raise ValueError(f"c_f must lie in (0, 1), got {c_f}")
    rec = MergeRecorder(n)
    clusters = _Clusters(n)
    min_pts = min(base_cfg.min_pts, n)
    l_per = 0.0
    check = None
    doublings = 0
    n_dist = 0
    restarts = []
    iteration = 0
    root = RngStream(base_cfg.master_seed)
    while clusters.count > 1:
        full = min_pts >= n
        if full:
            table = full_candidate_table(ds, base_cfg.rounds)
        else:
            cfg = replace(base_cfg, min_pts=min_pts, l_per=l_per)
            table = build_candidate_table(perturb_multi_partition(ds, cfg, root.child(iteration), workers), ds)
        n_dist += table.n_distances
        state = _FrequentState(table, c_f, clusters)
        lab = clusters.label
        ok = True if full else state.condition(check)
        ti, tj, td = table.i.tolist(), table.j.tolist(), table.distance.tolist()
        k = 0
        merged_here = 0
        while clusters.count > 1 and ok and (full or state.min_feasible() / 8 >= l_per):
            while k < len(ti) and lab[ti[k]] == lab[tj[k]]:
                k += 1
            if k == len(ti):
                break
            p, q, h = ti[k], tj[k], td[k]
            k += 1
            nxt = np.union1d(state.feasible_neighbours(p), state.feasible_neighbours(q))
            state.merge(p, q)
            rec.add(p, q, h)
            merged_here += 1
            check = nxt
            if not full:
                ok = state.condition(check)
        if clusters.count == 1:
            break
        min_f = state.min_feasible()
        if not ok:
            reason = "condition"
            min_pts = min(2 * min_pts, n)
            doublings += 1
        else:
            reason = "rescale"
        if not math.isinf(min_f):
            l_per = min_f / 16
        restarts.append((reason, min_pts, l_per, merged_here))
        log.debug("restart %d (%s): min_pts=%d l_per=%g merged=%d", iteration, reason, min_pts, l_per, merged_here)
        iteration += 1
    info = {"algorithm": "rp-slc-parameter-free", "n_distances": n_dist, "final_min_pts": min_pts,
            "doublings": doublings, "iterations": iteration + 1, "restarts": restarts, "c_f": c_f,
            "rounds": base_cfg.rounds}
    return rec.finish(info)
