"""Run configurations and the benchmark harness.

A benchmark suite is a TOML file::

    [suite]
    n = [256, 512]            # point counts
    d = [64]                  # dimensions
    seeds = [0, 1, 2]
    algorithms = ["slc:parameter-free", "alc:parameter-free", "slc:fixed"]
    clusters = 5              # Gaussian blobs per dataset
    spread = 1.0
    separation = 10.0
    min_pts = 14              # fixed mode only
    rounds_factor = 20
    oracle = true             # add oracle rows and preservation scores

Every cell generates its dataset from its own seed, so the report does not
depend on how cells are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .alc import rp_alc, rp_alc_parameter_free
from .data import generate_synthetic
from .evaluate import preservation
from .geometry import Dataset
from .merges import MergeSequence
from .oracle import brute_alc, brute_slc
from .partition import MIN_PTS_DEFAULT, ROUNDS_FACTOR_DEFAULT, PartitionConfig, default_workers
from .slc import C_F_DEFAULT, initial_min_pts, rp_slc, rp_slc_parameter_free

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

LINKAGES = ("slc", "alc")
MODES = ("fixed", "parameter-free", "oracle")
ORACLE_MAX_N = 5000


@dataclass
class RunConfig:
    linkage: str = "slc"
    mode: str = "parameter-free"
    min_pts: Optional[int] = None
    rounds_factor: float = ROUNDS_FACTOR_DEFAULT
    c_f: float = C_F_DEFAULT
    seed: int = 0
    input: Optional[str] = None
    output: Optional[str] = None
    output_format: str = "merges"
    compare_oracle: bool = False

    def __post_init__(self):
        self.mode = self.mode.replace("_", "-")
        if self.linkage not in LINKAGES:
            raise ValueError(f"linkage must be one of {LINKAGES}, got {self.linkage!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "fixed" and self.min_pts is None:
            self.min_pts = MIN_PTS_DEFAULT
        if self.min_pts is not None and self.min_pts < 2:
            raise ValueError("min_pts must be at least 2")
        if not 0 < self.c_f < 1:
            raise ValueError("c_f must lie in (0, 1)")
        if not self.rounds_factor > 0:
            raise ValueError("rounds_factor must be positive")
        self.label_k  # validates the format

    @property
    def label_k(self) -> Optional[int]:
        fmt = self.output_format
        if fmt in ("merges", "summary"):
            return None
        if fmt.startswith("labels:"):
            try:
                k = int(fmt.split(":", 1)[1])
            except ValueError:
                k = 0
            if k >= 1:
                return k
        raise ValueError(f"output format must be merges, summary or labels:K with K >= 1, got {fmt!r}")


def run_algorithm(ds: Dataset, linkage: str, mode: str, *, min_pts: Optional[int] = None,
                  rounds_factor: float = ROUNDS_FACTOR_DEFAULT, c_f: float = C_F_DEFAULT, seed: int = 0,
                  workers: Optional[int] = None) -> tuple[MergeSequence, float]:
    """Run one algorithm and return its merges and the wall time in seconds."""
    mode = mode.replace("_", "-")
    t0 = time.perf_counter()
    if mode == "oracle":
        hc = brute_slc(ds) if linkage == "slc" else brute_alc(ds)
    elif mode == "fixed":
        cfg = PartitionConfig.for_size(ds.n, min_pts=min_pts or MIN_PTS_DEFAULT, rounds_factor=rounds_factor, seed=seed)
        hc = (rp_slc if linkage == "slc" else rp_alc)(ds, cfg, workers=workers)
    elif mode == "parameter-free":
        start = min_pts if min_pts is not None else initial_min_pts(ds.n)
        cfg = PartitionConfig.for_size(ds.n, min_pts=min(start, ds.n), rounds_factor=rounds_factor, seed=seed)
        fn = rp_slc_parameter_free if linkage == "slc" else rp_alc_parameter_free
        hc = fn(ds, cfg, c_f=c_f, workers=workers)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return hc, time.perf_counter() - t0


REPORT_FIELDS = ("n", "d", "algorithm", "seed", "wall_time", "n_distances", "preservation",
                 "final_min_pts", "doublings", "complete")


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: ("" if r.get(k) is None else r[k]) for k in REPORT_FIELDS})
        return buf.getvalue()

    def summary(self) -> str:
        if not self.rows:
            return "empty suite: no runs\n"
        lines = []
        for r in self.rows:
            pres = "" if r.get("preservation") is None else f" preservation={r['preservation']:.6f}"
            lines.append(f"N={r['n']:<6} d={r['d']:<4} {r['algorithm']:<22} seed={r['seed']:<3} "
                         f"time={r['wall_time']:.3f}s distances={r['n_distances']}{pres}")
        return "\n".join(lines) + "\n"


def load_suite(path) -> dict:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return doc.get("suite", doc)


def _cell(suite: dict, n: int, d: int, seed: int, algorithms: list) -> list:
    clusters = int(suite.get("clusters", 5))
    ds, _ = generate_synthetic(clusters, math.ceil(n / clusters), d, float(suite.get("spread", 1.0)),
                               float(suite.get("separation", 10.0)), seed)
    ds = Dataset(ds.coords[:n])
    common = dict(rounds_factor=float(suite.get("rounds_factor", ROUNDS_FACTOR_DEFAULT)),
                  c_f=float(suite.get("c_f", C_F_DEFAULT)), seed=seed, workers=1)
    want_oracle = bool(suite.get("oracle", True)) and n <= ORACLE_MAX_N
    oracles = {}
    rows = []
    if want_oracle:
        for linkage in sorted({a.split(":")[0] for a in algorithms}):
            hc, wall = run_algorithm(ds, linkage, "oracle", **common)
            oracles[linkage] = hc
            rows.append(_row(n, d, f"{linkage}:oracle", seed, wall, hc, None))
    for algo in algorithms:
        linkage, mode = algo.split(":")
        if mode == "oracle":
            continue
        hc, wall = run_algorithm(ds, linkage, mode, min_pts=suite.get("min_pts"), **common)
        pres = None
        if linkage in oracles and hc.complete:
            pres = preservation(hc, oracles[linkage]).average
        rows.append(_row(n, d, algo, seed, wall, hc, pres))
    return rows


def _row(n, d, algo, seed, wall, hc, pres) -> dict:
    return {"n": n, "d": d, "algorithm": algo, "seed": seed, "wall_time": round(wall, 6),
            "n_distances": hc.info.get("n_distances"), "preservation": pres,
            "final_min_pts": hc.info.get("final_min_pts"), "doublings": hc.info.get("doublings"),
            "complete": hc.complete}


def bench(suite: dict, workers: Optional[int] = None) -> BenchReport:
    """Run every ``(n, d, seed)`` cell of a suite; rows come back in suite order."""
    ns = list(suite.get("n", []))
    ds_ = list(suite.get("d", []))
    seeds = list(suite.get("seeds", [0]))
    algorithms = list(suite.get("algorithms", ["slc:parameter-free", "alc:parameter-free"]))
    for a in algorithms:
        linkage, _, mode = a.partition(":")
        if linkage not in LINKAGES or mode not in MODES:
            raise ValueError(f"unknown algorithm {a!r}; use LINKAGE:MODE")
    cells = list(product(ns, ds_, seeds))
    if not cells:
        return BenchReport()
    workers = workers or default_workers()
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(cells)))) as pool:
        results = list(pool.map(lambda c: _cell(suite, int(c[0]), int(c[1]), int(c[2]), algorithms), cells))
    return BenchReport([r for rows in results for r in rows])
