"""Grid oracle versus multistart local search for least Hölder constants.

Run with ``python3 demos/search.py``.
"""

import numpy as np

from snowlab.search import (
    SearchConfig,
    brute_min_distortion,
    grid_tolerance,
    local_min_distortion,
    path_alpha_bound_check,
    path_space,
)
from snowlab.spaces import FiniteMetricSpace

cycle = FiniteMetricSpace(tuple("abcd"), [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
cfg = SearchConfig(grid_resolution=0.05)
oracle = brute_min_distortion(cycle, cfg)
print(f"4-cycle in the plane, grid oracle: A = {oracle.A:.4f} (grid slack <= {grid_tolerance(cycle, cfg, oracle.A):.3f})")
for restarts, iterations in ((1, 200), (4, 2000), (8, 10_000)):
    res = local_min_distortion(cycle, SearchConfig(restarts=restarts, iterations=iterations))
    print(f"  local search {restarts:2d} x {iterations:6d}: A = {res.A:.4f}")
print("  best local images:\n", np.round(res.table.image_array(), 4))

# above exponent 1 the path cannot be embedded with A^2 < n^(alpha-1)
print("\npath F_n with alpha = 1.5")
for n in (4, 16, 64):
    rep = local_min_distortion(path_space(n), SearchConfig(alpha=1.5, restarts=4, iterations=3000)).report()
    print(f"  n = {n:2d}: A^2 = {rep.constantA**2:8.3f}  >= n^0.5 = {n**0.5:5.2f}: {path_alpha_bound_check(n, 1.5, rep)}")
