"""How many distances does fixed-min_pts single linkage evaluate as N grows?

Blobs hold 64 points each, so the local neighbourhood is the same at every
size.  The exact algorithm needs all N(N-1)/2 pairs.

    python3 demos/work_scaling.py
"""
import numpy as np

from rphc import PartitionConfig, generate_synthetic, rp_slc

ns = [512, 1024, 2048]
counts = []
for n in ns:
    ds, _ = generate_synthetic(n // 64, 64, 64, 1.0, 10.0, seed=n)
    hc = rp_slc(ds, PartitionConfig.for_size(n, min_pts=14, seed=5))
    counts.append(hc.info["n_distances"])
    print(f"N={n:5d} distances={counts[-1]:9d} all pairs={n * (n - 1) // 2:9d} complete={hc.complete}")
slope = np.polyfit(np.log(ns), np.log(counts), 1)[0]
print(f"log-log slope: {slope:.2f} (exact algorithm: 2)")
