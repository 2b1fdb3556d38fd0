"""Average linkage from centroids and variances instead of member lists.

The merge heights are mean squared distances between clusters.  The exact
baseline keeps running pairwise sums, so the two share no arithmetic.

    python3 demos/average_linkage.py
"""
import numpy as np

from rphc import brute_alc, generate_synthetic, preservation, rp_alc_parameter_free

ds, _ = generate_synthetic(n_clusters=5, points_per_cluster=60, d=8, spread=1.0, separation=10.0, seed=3)
hc = rp_alc_parameter_free(ds)
exact = brute_alc(ds)

print(f"complete={hc.complete} preservation={preservation(hc, exact).average:.6f}")
print(f"largest height gap: {np.max(np.abs(np.sort(hc.distance) - np.sort(exact.distance))):.3e}")
print("last five merges (a, b, height, size):")
for a, b, h, s in list(zip(hc.left, hc.right, hc.distance, hc.size))[-5:]:
    print(f"  {a:4d} {b:4d} {h:10.3f} {s:4d}")
