"""Average linkage from constant-size cluster summaries.

The average squared distance between two clusters only needs their sizes,
centroids and variances::

    mean_{p in A, q in B} |p - q|^2 = |mu_A - mu_B|^2 + var_A + var_B

and the summaries of a union follow from those of its parts, so merges cost
O(d).  The random-projection variant only compares clusters that share a
partition set; sets shrink as clusters merge (both members are replaced by
the merged cluster).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import sparse

from .geometry import Dataset, RngStream, pair_sq_distances
from .merges import MergeRecorder, MergeSequence
from .partition import PartitionConfig, PartitionFamily, perturb_multi_partition
from .slc import C_F_DEFAULT, initial_min_pts

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClusterStats:
    size: int
    centroid: np.ndarray
    variance: float

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("cluster size must be positive")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")

    @classmethod
    def singleton(cls, x) -> "ClusterStats":
        return cls(1, np.asarray(x, dtype=np.float64), 0.0)

    @classmethod
    def of_points(cls, X) -> "ClusterStats":
        """Direct computation from the member coordinates."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        mu = X.mean(axis=0)
        diff = X - mu
        return cls(len(X), mu, float(np.einsum("ij,ij->", diff, diff) / len(X)))


def _check_dims(a: ClusterStats, b: ClusterStats) -> None:
    if a.centroid.shape != b.centroid.shape:
        raise ValueError(f"dimension mismatch: {a.centroid.shape} vs {b.centroid.shape}")


def alc_distance(a: ClusterStats, b: ClusterStats) -> float:
    """Mean squared distance over all cross pairs of the two clusters."""
    _check_dims(a, b)
    diff = a.centroid - b.centroid
    return float(diff @ diff + a.variance + b.variance)


def merge_stats(a: ClusterStats, b: ClusterStats) -> ClusterStats:
    """Size, centroid and variance of the union of two disjoint clusters."""
    _check_dims(a, b)
    n = a.size + b.size
    diff = a.centroid - b.centroid
    mu = (a.size * a.centroid + b.size * b.centroid) / n
    var = (a.size * a.variance + b.size * b.variance + a.size * b.size / n * float(diff @ diff)) / n
    return ClusterStats(n, mu, max(var, 0.0))


class SparseSetState:
    """Partition sets expressed over live clusters.

    A cluster is named by its smallest point id.  Merging ``a`` and ``b``
    replaces both by ``min(a, b)`` in every set that held either of them.
    """

    def __init__(self, family: PartitionFamily, rep: Optional[np.ndarray] = None):
        n = family.n_points
        self.n = n
        self.indptr = family.indptr
        self.points = family.members
        self.rep = np.arange(n) if rep is None else np.array(rep)
        self.set_of_entry = np.repeat(np.arange(family.n_sets), family.set_sizes)
        slot_sets = self._slot_sets()
        self.sets_of = {int(c): slot_sets.indices[slot_sets.indptr[c]:slot_sets.indptr[c + 1]].copy()
                        for c in np.unique(self.rep)}
        self.members = {int(c): np.flatnonzero(self.rep == c) for c in self.sets_of}

    def _slot_sets(self) -> sparse.csr_matrix:
        """Cluster-by-set 0/1 matrix for the current representatives."""
        M = sparse.csr_matrix((np.ones(len(self.points), dtype=np.int32), (self.rep[self.points], self.set_of_entry)),
                              shape=(self.n, len(self.indptr) - 1))
        M.sum_duplicates()
        M.data[:] = 1
        return M

    def live_set(self, s: int) -> np.ndarray:
        return np.unique(self.rep[self.points[self.indptr[s]:self.indptr[s + 1]]])

    def cooccurrence_matrix(self) -> np.ndarray:
        """Dense cluster-by-cluster count of shared sets (diagonal zeroed)."""
        B = self._slot_sets()
        C = (B @ B.T).toarray()
        np.fill_diagonal(C, 0)
        return C

    def cooccurrence_row(self, c: int) -> np.ndarray:
        sets = self.sets_of[c]
        lens = self.indptr[sets + 1] - self.indptr[sets]
        total = int(lens.sum())
        offs = np.repeat(self.indptr[sets] - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
        pts = self.points[np.arange(total) + offs]
        keys = np.unique(np.repeat(np.arange(len(sets)), lens) * self.n + self.rep[pts])
        row = np.bincount(keys % self.n, minlength=self.n)
        row[c] = 0
        return row

    def merge(self, a: int, b: int) -> int:
        keep, gone = min(a, b), max(a, b)
        self.rep[self.members[gone]] = keep
        self.members[keep] = np.concatenate([self.members[keep], self.members.pop(gone)])
        self.sets_of[keep] = np.union1d(self.sets_of[keep], self.sets_of.pop(gone))
        return keep


class _AlcState:
    """Dense bookkeeping over cluster slots for one partition family."""

    def __init__(self, ds: Dataset, rounds: int, c_f: float):
        n = ds.n
        self.n = n
        self.rounds = rounds
        self.c_f = c_f
        self.size = np.ones(n)
        self.mu = np.array(ds.coords, dtype=np.float64)
        self.var = np.zeros(n)
        self.rep = np.arange(n)
        self.live = np.ones(n, dtype=bool)
        self.n_dist = 0

    # -- per-family setup -------------------------------------------------
    def load(self, family: Optional[PartitionFamily]) -> None:
        n = self.n
        self.sets = None if family is None else SparseSetState(family, self.rep)
        if family is None:
            cnt = np.where(self.live[:, None] & self.live[None, :], self.rounds, 0)
            np.fill_diagonal(cnt, 0)
        else:
            cnt = self.sets.cooccurrence_matrix()
        self.cnt = cnt
        self.dalc = np.full((n, n), np.inf)
        self.cd2 = np.zeros((n, n))
        i, j = np.nonzero(np.triu(cnt > 0, 1))
        cd2 = pair_sq_distances(self.mu, i, j)
        self.n_dist += len(i)
        dal = cd2 + self.var[i] + self.var[j]
        self.cd2[i, j] = self.cd2[j, i] = cd2
        self.dalc[i, j] = self.dalc[j, i] = dal
        self.tmax = np.full(n, -np.inf)
        self.rowmin = np.full(n, np.inf)
        self.rowarg = np.zeros(n, dtype=np.int64)
        self.mx = np.full(n, -np.inf)
        self.mxarg = np.zeros(n, dtype=np.int64)
        self.minpf = np.full(n, np.inf)
        self.pfarg = np.zeros(n, dtype=np.int64)
        self._rescan(np.flatnonzero(self.live))

    def _rescan(self, rows: np.ndarray) -> None:
        if not len(rows):
            return
        k = np.arange(len(rows))
        D = self.dalc[rows]
        self.rowarg[rows] = D.argmin(axis=1)
        self.rowmin[rows] = D[k, self.rowarg[rows]]
        pf = self.potentially_feasible(rows)
        C = np.where(pf, self.cd2[rows], -np.inf)
        self.mxarg[rows] = C.argmax(axis=1)
        self.mx[rows] = C[k, self.mxarg[rows]]
        P = np.where(pf, D, np.inf)
        self.pfarg[rows] = P.argmin(axis=1)
        self.minpf[rows] = P[k, self.pfarg[rows]]

    def _update_column(self, a: int, b: int) -> None:
        """Refresh row summaries after column ``a`` changed and column ``b`` died."""
        gone = (a, b)
        stale = self.live & (np.isin(self.rowarg, gone) | np.isin(self.mxarg, gone) | np.isin(self.pfarg, gone))
        stale[a] = True
        self._rescan(np.flatnonzero(stale))
        rest = np.flatnonzero(self.live & ~stale)
        col = self.dalc[rest, a]
        better = (col < self.rowmin[rest]) | ((col == self.rowmin[rest]) & (a < self.rowarg[rest]))
        self.rowmin[rest[better]] = col[better]
        self.rowarg[rest[better]] = a
        pf = self.cnt[rest, a] / self.rounds > self.c_f
        c2 = self.cd2[rest, a]
        up = pf & (c2 > self.mx[rest])
        self.mx[rest[up]] = c2[up]
        self.mxarg[rest[up]] = a
        lo = pf & (col < self.minpf[rest])
        self.minpf[rest[lo]] = col[lo]
        self.pfarg[rest[lo]] = a

    def potentially_feasible(self, rows) -> np.ndarray:
        return (self.cnt[rows] / self.rounds > self.c_f) & self.live

    def feasible_of(self, c: int) -> np.ndarray:
        pf = self.potentially_feasible(c)
        return np.flatnonzero(pf & (self.dalc[c] <= self.mx[c]))

    @property
    def has_feasible(self) -> np.ndarray:
        return self.live & (self.minpf <= self.mx)

    def min_feasible(self) -> float:
        f = self.has_feasible
        return float(self.minpf[f].min()) if f.any() else math.inf

    def condition(self, check: Optional[np.ndarray]) -> bool:
        min_f = self.min_feasible()
        if math.isinf(min_f):
            return False
        rows = np.flatnonzero(self.live) if check is None else check
        ok = self.has_feasible[rows] | (self.tmax[rows] >= min_f)
        return bool(np.all(ok))

    def stats(self, c: int) -> ClusterStats:
        return ClusterStats(int(self.size[c]), self.mu[c].copy(), float(self.var[c]))

    def best_pair(self):
        i = int(np.argmin(np.where(self.live, self.rowmin, np.inf)))
        if math.isinf(self.rowmin[i]) or not self.live[i]:
            return None
        j = int(self.rowarg[i])
        return min(i, j), max(i, j), float(self.dalc[i, j])

    def merge(self, a: int, b: int) -> None:
        frequent = self.cnt[a, b] / self.rounds > self.c_f
        sa, sb = self.stats(a), self.stats(b)
        m = merge_stats(sa, sb)
        self.size[a], self.mu[a], self.var[a] = m.size, m.centroid, m.variance
        self.live[b] = False
        self.rep[self.rep == b] = a
        if self.sets is None:
            row = np.where(self.live, self.rounds, 0)
            row[a] = 0
        else:
            self.sets.merge(a, b)
            row = self.sets.cooccurrence_row(a)
            row[~self.live] = 0
        self.cnt[a] = row
        self.cnt[:, a] = row
        self.cnt[b] = 0
        self.cnt[:, b] = 0
        js = np.flatnonzero(row > 0)
        cd2 = pair_sq_distances(self.mu, np.full(len(js), a), js)
        self.n_dist += len(js)
        for M in (self.dalc, self.cd2):
            M[a] = M[:, a] = M[b] = M[:, b] = np.inf if M is self.dalc else 0.0
        self.cd2[a, js] = self.cd2[js, a] = cd2
        self.dalc[a, js] = self.dalc[js, a] = cd2 + self.var[a] + self.var[js]
        self.rowmin[b] = np.inf
        self.tmax[b] = -np.inf
        # taken edges of the merged cluster: its two parts, if the merging edge was frequent
        self.tmax[a] = max(alc_distance(m, sa), alc_distance(m, sb)) if frequent else -np.inf
        self._update_column(a, b)


def _run_alc(ds: Dataset, base_cfg: PartitionConfig, c_f: float, parameter_free: bool,
             workers: Optional[int]) -> MergeSequence:
    n = ds.n
    rec = MergeRecorder(n)
    st = _AlcState(ds, base_cfg.rounds, c_f)
    min_pts = min(base_cfg.min_pts, n)
    l_per = 0.0
    check = None
    doublings = 0
    restarts = []
    iteration = 0
    root = RngStream(base_cfg.master_seed)
    n_clusters = n
    while n_clusters > 1:
        full = min_pts >= n
        if full:
            st.load(None)
        else:
            cfg = replace(base_cfg, min_pts=min_pts, l_per=l_per if parameter_free else 0.0)
            st.load(perturb_multi_partition(ds, cfg, root.child(iteration), workers))
        gated = parameter_free and not full
        if check is not None:
            check = np.unique(st.rep[check])
        ok = st.condition(check) if gated else True
        merged_here = 0
        while n_clusters > 1 and ok and (not gated or math.sqrt(st.min_feasible()) / 8 >= l_per):
            best = st.best_pair()
            if best is None:
                break
            a, b, h = best
            if gated:
                nxt = np.union1d(st.feasible_of(a), st.feasible_of(b))
            st.merge(a, b)
            rec.add(a, b, h)
            n_clusters -= 1
            merged_here += 1
            if gated:
                check = np.unique(st.rep[nxt])
                ok = st.condition(check)
        if n_clusters == 1 or not parameter_free:
            break
        min_f = st.min_feasible()
        if not ok:
            reason = "condition"
            min_pts = min(2 * min_pts, n)
            doublings += 1
        else:
            reason = "rescale"
        if not math.isinf(min_f):
            l_per = math.sqrt(min_f) / 16
        restarts.append((reason, min_pts, l_per, merged_here))
        log.debug("restart %d (%s): min_pts=%d l_per=%g merged=%d", iteration, reason, min_pts, l_per, merged_here)
        iteration += 1
    info = {"n_distances": st.n_dist, "rounds": base_cfg.rounds, "c_f": c_f}
    if parameter_free:
        info.update(algorithm="rp-alc-parameter-free", final_min_pts=min_pts, doublings=doublings,
                    iterations=iteration + 1, restarts=restarts)
    else:
        info.update(algorithm="rp-alc", min_pts=base_cfg.min_pts)
    return rec.finish(info)


def rp_alc(ds: Dataset, cfg: PartitionConfig, workers: Optional[int] = None) -> MergeSequence:
    """Average linkage over one unperturbed partition family with fixed ``min_pts``.

    Clusters are only compared while they share a set; the result is
    incomplete when the candidates run out first.
    """
    return _run_alc(ds, cfg, C_F_DEFAULT, parameter_free=False, workers=workers)


def rp_alc_parameter_free(ds: Dataset, base_cfg: Optional[PartitionConfig] = None, c_f: float = C_F_DEFAULT,
                          workers: Optional[int] = None) -> MergeSequence:
    """Average linkage without a ``min_pts`` parameter.

    Same iteration scheme as :func:`rphc.slc.rp_slc_parameter_free` on
    cluster summaries.  A cluster pair is potentially feasible when it shares
    more than a ``c_f`` fraction of the rounds' sets; it is feasible for a
    cluster ``P`` when its average-linkage distance does not exceed the
    largest squared centroid distance among ``P``'s potentially feasible
    pairs.  Heights are mean squared distances.  The perturbation length is
    1/16 of the square root of the shortest feasible height.
    """
    n = ds.n
    if base_cfg is None:
        base_cfg = PartitionConfig.for_size(n, min_pts=initial_min_pts(n))
    if not 0 < c_f < 1:
        raise ValueError(f"c_f must lie in (0, 1), got {c_f}")
    return _run_alc(ds, base_cfg, c_f, parameter_free=True, workers=workers)
