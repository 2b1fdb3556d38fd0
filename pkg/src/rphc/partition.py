"""Recursive random-projection splitting and the multi-round perturbed partition."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy import sparse

from .geometry import LINES, PERTURB, SPLITS, Dataset, RandomSource, RngStream, as_generator, perturb, sample_unit_vectors

MIN_PTS_DEFAULT = 14
ROUNDS_FACTOR_DEFAULT = 20.0
LINES_FACTOR_DEFAULT = 8.0


class DepthExhaustedWarning(UserWarning):
    """A round ran out of projection lines before every set was below ``min_pts``."""


def default_workers() -> int:
    env = os.environ.get("RPHC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def log2_ceil_times(factor: float, n: int) -> int:
    return max(1, math.ceil(factor * math.log2(max(n, 2))))


@dataclass(frozen=True)
class PartitionConfig:
    min_pts: int = MIN_PTS_DEFAULT
    rounds: int = 1
    lines_per_round: int = 1
    l_per: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        if self.min_pts < 2:
            raise ValueError(f"min_pts must be >= 2, got {self.min_pts}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.lines_per_round < 1:
            raise ValueError(f"lines_per_round must be >= 1, got {self.lines_per_round}")
        if not self.l_per >= 0:
            raise ValueError(f"l_per must be >= 0, got {self.l_per}")

    @classmethod
    def for_size(cls, n: int, min_pts: int = MIN_PTS_DEFAULT, rounds_factor: float = ROUNDS_FACTOR_DEFAULT,
                 lines_factor: float = LINES_FACTOR_DEFAULT, l_per: float = 0.0, seed: int = 0) -> "PartitionConfig":
        """Defaults for ``n`` points: ``ceil(20 log2 n)`` rounds, ``ceil(8 log2 n)`` lines per round."""
        return cls(min_pts=min_pts, rounds=log2_ceil_times(rounds_factor, n),
                   lines_per_round=log2_ceil_times(lines_factor, n), l_per=l_per, master_seed=seed)


class RoundResult(NamedTuple):
    sets: list
    flagged: list
    max_depth: int

    @property
    def exhausted(self) -> bool:
        return any(self.flagged)


def partition_once(points, min_pts: int, lines, rng: RandomSource, ids=None) -> RoundResult:
    """Split ``points`` recursively along ``lines`` until every set has fewer than ``min_pts`` members.

    At depth ``j`` the current set is projected onto ``lines[j]``; a member is
    drawn uniformly as the splitting point and everything projecting at or
    below it (ties ordered by id) forms the first part.  The first part is
    processed before the second, depth first, which fixes the order in which
    random draws are consumed.

    Parameters
    ----------
    points : array of shape (n, d)
    min_pts : int
        Sets smaller than this are emitted as leaves.
    lines : array of shape (k, d)
        One unit direction per recursion level.
    rng : RngStream or Generator
        Source of splitting-point draws.
    ids : array of shape (n,), optional
        Ids reported in the leaves (defaults to ``0..n-1``); must be ascending.

    Returns
    -------
    RoundResult
        Leaves as ascending id arrays, a parallel list of depth-limit flags and
        the deepest level at which a leaf was emitted.  Flagged leaves still
        have ``min_pts`` or more members because the lines ran out.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    L = np.atleast_2d(np.asarray(lines, dtype=np.float64))
    if L.shape[0] < 1:
        raise ValueError("need at least one projection line")
    if min_pts < 2:
        raise ValueError(f"min_pts must be >= 2, got {min_pts}")
    n = X.shape[0]
    ids = np.arange(n) if ids is None else np.asarray(ids)
    gen = as_generator(rng)
    k = L.shape[0]
    proj = X @ L.T if n >= min_pts else None

    sets, flagged = [], []
    max_depth = 0
    stack = [(np.arange(n), 0)]
    while stack:
        idx, depth = stack.pop()
        if len(idx) < min_pts or depth == k:
            sets.append(ids[idx])
            flagged.append(len(idx) >= min_pts)
            max_depth = max(max_depth, depth)
            continue
        p = proj[idx, depth]
        sub_ids = ids[idx]
        for _ in range(4):
            s = gen.integers(len(idx))
            left = (p < p[s]) | ((p == p[s]) & (sub_ids <= sub_ids[s]))
            if not left.all():
                break
        else:
            # cannot happen with distinct ids; kept as a guard for degenerate input
            left = np.zeros(len(idx), dtype=bool)
            left[: len(idx) // 2] = True
        stack.append((idx[~left], depth + 1))
        stack.append((idx[left], depth + 1))
    if any(flagged):
        warnings.warn(f"projection lines exhausted after {k} levels; increase lines_per_round",
                      DepthExhaustedWarning, stacklevel=2)
    return RoundResult(sets, flagged, max_depth)


@dataclass(frozen=True, eq=False)
class PartitionFamily:
    """All leaf sets of all rounds, stored as a ragged array.

    ``members[indptr[s]:indptr[s+1]]`` holds the ids of set ``s``.
    """

    n_points: int
    rounds: int
    indptr: np.ndarray
    members: np.ndarray
    round_of_set: np.ndarray
    flagged: np.ndarray
    round_depth: np.ndarray

    @property
    def n_sets(self) -> int:
        return len(self.round_of_set)

    def __len__(self):
        return self.n_sets

    @property
    def sets(self) -> list:
        return [self.members[a:b] for a, b in zip(self.indptr[:-1], self.indptr[1:])]

    @property
    def set_sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def exhausted_rounds(self) -> np.ndarray:
        out = np.zeros(self.rounds, dtype=bool)
        out[self.round_of_set[self.flagged]] = True
        return out

    def incidence(self) -> sparse.csr_matrix:
        """Point-by-set 0/1 matrix of shape ``(n_points, n_sets)``."""
        cols = np.repeat(np.arange(self.n_sets), self.set_sizes)
        data = np.ones(len(self.members), dtype=np.int32)
        return sparse.csr_matrix((data, (self.members, cols)), shape=(self.n_points, self.n_sets))

    def pair_occurrences(self) -> int:
        s = self.set_sizes.astype(np.int64)
        return int((s * (s - 1) // 2).sum())

    @classmethod
    def from_sets(cls, n_points: int, sets, round_of_set=None, flagged=None) -> "PartitionFamily":
        sets = [np.asarray(sorted(int(v) for v in s), dtype=np.int64) for s in sets]
        sizes = np.array([len(s) for s in sets], dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        members = np.concatenate(sets) if sets else np.zeros(0, dtype=np.int64)
        if np.any((members < 0) | (members >= n_points)):
            raise ValueError("set member outside 0..n_points-1")
        r = np.zeros(len(sets), dtype=np.int64) if round_of_set is None else np.asarray(round_of_set, dtype=np.int64)
        fl = np.zeros(len(sets), dtype=bool) if flagged is None else np.asarray(flagged, dtype=bool)
        rounds = int(r.max()) + 1 if len(r) else 0
        return cls(n_points, rounds, indptr, members, r, fl, np.zeros(rounds, dtype=np.int64))


def _one_round(ds: Dataset, cfg: PartitionConfig, stream: RngStream) -> RoundResult:
    lines = sample_unit_vectors(ds.d, cfg.lines_per_round, stream.child(LINES))
    moved, _ = perturb(ds, cfg.l_per, stream.child(PERTURB))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DepthExhaustedWarning)
        return partition_once(moved.coords, cfg.min_pts, lines, stream.child(SPLITS))


def perturb_multi_partition(ds: Dataset, cfg: PartitionConfig, stream: Optional[RngStream] = None,
                            workers: Optional[int] = None) -> PartitionFamily:
    """Run ``cfg.rounds`` independent perturb-and-split rounds over ``ds``.

    Round ``r`` draws its lines, perturbation vectors and splitting points
    from ``stream.child(r, ...)`` so the family does not depend on how rounds
    are scheduled across ``workers`` threads.  Sets refer to the ids of the
    unperturbed points.
    """
    stream = RngStream(cfg.master_seed) if stream is None else stream
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [stream.child(r) for r in range(cfg.rounds)]
    if workers > 1 and cfg.rounds > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _one_round(ds, cfg, s), jobs))
    else:
        results = [_one_round(ds, cfg, s) for s in jobs]

    sets, rounds_of, flags = [], [], []
    depth = np.zeros(cfg.rounds, dtype=np.int64)
    for r, res in enumerate(results):
        sets.extend(res.sets)
        flags.extend(res.flagged)
        rounds_of.extend([r] * len(res.sets))
        depth[r] = res.max_depth
    sizes = np.fromiter((len(s) for s in sets), dtype=np.int64, count=len(sets))
    fam = PartitionFamily(
        n_points=ds.n,
        rounds=cfg.rounds,
        indptr=np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64),
        members=np.concatenate(sets).astype(np.int64),
        round_of_set=np.asarray(rounds_of, dtype=np.int64),
        flagged=np.asarray(flags, dtype=bool),
        round_depth=depth,
    )
    n_bad = int(fam.exhausted_rounds.sum())
    if n_bad:
        warnings.warn(f"{n_bad} of {cfg.rounds} rounds exhausted their {cfg.lines_per_round} lines",
                      DepthExhaustedWarning, stacklevel=2)
    return fam


def with_min_pts(cfg: PartitionConfig, min_pts: int, l_per: float) -> PartitionConfig:
    return replace(cfg, min_pts=min_pts, l_per=l_per)
