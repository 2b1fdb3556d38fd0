"""Cluster three Gaussian blobs and compare against exact single linkage.

    python3 demos/quickstart.py
"""
from rphc import brute_slc, cut, generate_synthetic, preservation, rp_slc_parameter_free

ds, truth = generate_synthetic(n_clusters=3, points_per_cluster=100, d=16, spread=1.0, separation=12.0, seed=0)
hc = rp_slc_parameter_free(ds)
exact = brute_slc(ds)

print(f"points={ds.n} dims={ds.d}")
print(f"random-projection run: complete={hc.complete} distances={hc.info['n_distances']} "
      f"final min_pts={hc.info['final_min_pts']} doublings={hc.info['doublings']}")
print(f"exact run: distances={exact.info['n_distances']}")
print(f"average Fowlkes-Mallows over all cut levels: {preservation(hc, exact).average:.6f}")

labels = cut(hc, 3).labels
agree = sum(len(set(truth[labels == c])) == 1 for c in range(3))
print(f"pure clusters at k=3: {agree}/3")
