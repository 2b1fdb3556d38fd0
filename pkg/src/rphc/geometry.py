"""Points, seeded random streams, random lines and perturbation.

Every random quantity in the package is drawn from an :class:`RngStream`,
which is a pure function of ``(master_seed, path)``.  Two streams with the
same key produce identical draws no matter which thread consumes them or in
which order, so partition rounds can run concurrently and still yield a
bit-identical result.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

_MASK64 = (1 << 64) - 1

# purpose tags for stream derivation
LINES = 0
SPLITS = 1
PERTURB = 2


class InvalidInputError(ValueError):
    """Raised for malformed geometric input (dimension mismatch, bad lengths)."""


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by a master seed and a derivation path.

    >>> a = RngStream(7).child(3, LINES).generator().random()
    >>> b = RngStream(7, (3, LINES)).generator().random()
    >>> a == b
    True
    """

    master_seed: int = 0
    path: tuple = ()

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed & _MASK64, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


RandomSource = Union[RngStream, np.random.Generator, int, None]


def as_generator(rng: RandomSource) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(0 if rng is None else int(rng)).generator()


class Point(NamedTuple):
    id: int
    coords: np.ndarray


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ``N x d`` point cloud; point ids are the row indices."""

    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        X = np.array(self.coords, dtype=np.float64, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidInputError(f"expected a non-empty (N, d) array, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("coordinates must be finite")
        X.setflags(write=False)
        object.__setattr__(self, "coords", X)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n)

    def point(self, i: int) -> Point:
        return Point(int(i), self.coords[i])

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d})"


def sample_unit_vectors(d: int, count: int, rng: RandomSource) -> np.ndarray:
    """Return ``count`` directions drawn uniformly from the unit sphere in R^d.

    Normalised standard-normal vectors; the distribution is rotation
    invariant in every dimension.
    """
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    gen = as_generator(rng)
    V = gen.standard_normal((count, d))
    norms = np.linalg.norm(V, axis=1)
    bad = norms == 0.0
    while np.any(bad):  # measure-zero event, redraw for safety
        V[bad] = gen.standard_normal((int(bad.sum()), d))
        norms[bad] = np.linalg.norm(V[bad], axis=1)
        bad = norms == 0.0
    return V / norms[:, None]


def sample_unit_vector(d: int, rng: RandomSource) -> np.ndarray:
    return sample_unit_vectors(d, 1, rng)[0]


def project(p, line) -> float:
    """Dot product of a point with a line direction."""
    p = np.asarray(getattr(p, "coords", p), dtype=np.float64)
    line = np.asarray(line, dtype=np.float64)
    if p.shape != line.shape:
        raise InvalidInputError(f"dimension mismatch: point {p.shape} vs line {line.shape}")
    return float(p @ line)


def perturb(ds: Dataset, l_per: float, rng: RandomSource) -> tuple[Dataset, np.ndarray]:
    """Shift every point by an independent, uniformly oriented vector of length ``l_per``.

    Returns the perturbed dataset and the id map (perturbed row ``i`` stems
    from original point ``ids[i]``; the map is the identity).
    """
    if not l_per >= 0:
        raise InvalidInputError(f"perturbation length must be >= 0, got {l_per}")
    ids = ds.ids
    if l_per == 0:
        return ds, ids
    shift = sample_unit_vectors(ds.d, ds.n, rng) * l_per
    return Dataset(ds.coords + shift), ids


def pair_sq_distances(X: np.ndarray, i: np.ndarray, j: np.ndarray, chunk: int = 1 << 22) -> np.ndarray:
    """Squared Euclidean distances between rows ``X[i]`` and ``X[j]``, computed in chunks."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    out = np.empty(len(i), dtype=np.float64)
    step = max(1, chunk // max(1, X.shape[1]))
    for s in range(0, len(i), step):
        diff = X[i[s:s + step]] - X[j[s:s + step]]
        out[s:s + step] = np.einsum("ij,ij->i", diff, diff)
    return out


def pair_distances(X: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    return np.sqrt(pair_sq_distances(X, i, j))
