"""Chance that a random line projects R between P and T.

The frequency is estimated by sampling lines and set beside the exact
angle/pi and the closed-form lower bound that the library also reports.
For the isoceles triple below the bound is not a lower bound at all.

    python3 demos/projection_probability.py
"""
import math

import numpy as np

from rphc import RngStream, pr_bound, pr_probability_exact, projection_bound_mc

side = 1.0 / (2 * math.sin(1.0))
P, T = np.array([-0.5, 0.0]), np.array([0.5, 0.0])
R = np.array([0.0, math.sqrt(side**2 - 0.25)])

freq = projection_bound_mc(P, R, T, 200_000, RngStream(1))
print(f"Monte-Carlo frequency: {freq:.4f}")
print(f"exact angle/pi:        {pr_probability_exact(P, R, T):.4f}")
print(f"closed-form bound:     {pr_bound(P, R, T):.4f}")
