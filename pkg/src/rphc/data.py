"""CSV input, merges/labels output and synthetic Gaussian blobs."""
from __future__ import annotations

import csv
import io
import math
import os
from typing import Iterable, Optional, Union

import numpy as np

from .geometry import Dataset, RngStream
from .merges import MergeSequence

PathLike = Union[str, os.PathLike]


class CsvFormatError(ValueError):
    """Malformed numeric CSV; the message names the offending row and column (1-based)."""

    def __init__(self, msg: str, row: Optional[int] = None, col: Optional[int] = None):
        where = "" if row is None else f"row {row}" + ("" if col is None else f", column {col}")
        super().__init__(f"{where}: {msg}" if where else msg)
        self.row, self.col = row, col


class GenerationError(ValueError):
    pass


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_csv(text: str) -> Dataset:
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(io.StringIO(text))) if any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]  # header
    if not rows:
        raise CsvFormatError("no data rows")
    width = len(rows[0][1])
    X = np.empty((len(rows), width))
    for k, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise CsvFormatError(f"expected {width} fields, found {len(cells)}", line)
        for j, cell in enumerate(cells):
            try:
                X[k, j] = float(cell)
            except ValueError:
                raise CsvFormatError(f"not a number: {cell.strip()!r}", line, j + 1) from None
            if not math.isfinite(X[k, j]):
                raise CsvFormatError(f"non-finite value: {cell.strip()!r}", line, j + 1)
    return Dataset(X)


def ingest_csv(path: PathLike) -> Dataset:
    """Read a numeric CSV; row order defines ids ``0..N-1``; a non-numeric first row is a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read())


def format_merges(hc: MergeSequence) -> str:
    return hc.to_csv()


def read_merges(path_or_text: Union[PathLike, Iterable[str]], n_points: Optional[int] = None) -> MergeSequence:
    """Parse the ``step,id_a,id_b,distance,new_cluster_size`` format back into a :class:`MergeSequence`."""
    if isinstance(path_or_text, (str, os.PathLike)) and os.path.exists(path_or_text):
        with open(path_or_text, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = list(path_or_text.splitlines() if isinstance(path_or_text, str) else path_or_text)
    edges, heights, sizes = [], [], []
    for k, line in enumerate(lines):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise CsvFormatError(f"expected 5 fields, found {len(parts)}", k + 1)
        step, a, b, h, sz = parts
        if int(step) != len(edges):
            raise CsvFormatError(f"step {step} out of order", k + 1, 1)
        edges.append((int(a), int(b)))
        heights.append(float(h))
        sizes.append(int(sz))
    n = n_points if n_points is not None else len(edges) + 1
    hc = MergeSequence.from_edges(n, edges, heights)
    if sizes and not np.array_equal(hc.size, sizes):
        raise CsvFormatError("cluster sizes disagree with the merge sequence")
    return hc


def format_labels(labels: np.ndarray) -> str:
    return "".join(f"{i},{int(l)}\n" for i, l in enumerate(labels))


def generate_synthetic(n_clusters: int, points_per_cluster: int, d: int, spread: float, separation: float,
                       seed: int, max_tries: int = 1000) -> tuple[Dataset, np.ndarray]:
    """Isotropic Gaussian blobs around centers that are pairwise at least ``separation`` apart.

    Centers are drawn one at a time, uniformly in a cube whose side grows
    with the number of clusters, and redrawn when too close to an earlier
    center.  Returns the dataset and the blob index of every point
    (points are grouped by blob).
    """
    if n_clusters < 1 or points_per_cluster < 1 or d < 1:
        raise ValueError("cluster count, cluster size and dimension must be positive")
    if spread < 0 or separation < 0:
        raise ValueError("spread and separation must be non-negative")
    gen = RngStream(seed).generator()
    side = separation * max(1.0, n_clusters ** (1.0 / d)) * 2.0
    centers = np.empty((n_clusters, d))
    for c in range(n_clusters):
        for _ in range(max_tries):
            x = gen.uniform(-side / 2, side / 2, size=d)
            if c == 0 or np.min(np.linalg.norm(centers[:c] - x, axis=1)) >= separation:
                centers[c] = x
                break
        else:
            raise GenerationError(f"could not place center {c} at separation {separation} after {max_tries} tries")
    labels = np.repeat(np.arange(n_clusters), points_per_cluster)
    X = centers[labels] + spread * gen.standard_normal((len(labels), d))
    return Dataset(X), labels
