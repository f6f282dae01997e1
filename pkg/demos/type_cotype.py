"""Type and cotype ratios, hypercube obstructions and reducibility verdicts.

Run with ``python3 demos/type_cotype.py``.
"""

import numpy as np

from snowlab.spaces import PNormVector
from snowlab.typecotype import (
    Sampled,
    hypercube_obstruction_experiment,
    iff_verdict,
    metric_cotype_ratio,
    necessary_conditions,
    parse_space,
    rademacher_type_ratio,
    sigma_grid,
    space_profile,
)

# Rademacher averages: repeated vectors in l_1 versus an orthonormal basis
ones = [PNormVector((1.0,), 1.0)] * 4
basis = [PNormVector(tuple(e), 2.0) for e in np.eye(4)]
print("type ratio, four copies in l_1, p=1:", float(rademacher_type_ratio(ones, 1.0)))
print("type ratio, basis of l_2^4, p=2:   ", float(rademacher_type_ratio(basis, 2.0)))

rng = np.random.default_rng(0)
vecs = [PNormVector(tuple(v), 3.0) for v in rng.normal(size=(30, 5))]
est = rademacher_type_ratio(vecs, 1.5, mode=Sampled(seed=1, count=200_000))
print(f"30 vectors in l_3^5, p=1.5, sampled: {est.value:.5f} +/- {est.stderr:.5f}")

# identity from the l_1 cube into l_2: the source ratio grows like sqrt(n)
print("\n n    A    source metric-type ratio  growth")
for row in hypercube_obstruction_experiment([1, 2, 4, 8], p_src=1.0, p_tgt=2.0, alpha=1.0, iterations=1):
    print(f"{row.n:2d}  {row.A:.3f}  {row.source_metric_type_ratio:10.4f}  {row.growth:10.4f}")

# the circle embedding of the discrete torus keeps the metric cotype ratio bounded
print("\n m   cotype ratio of sigma_2 (q=2)")
for m in (4, 8, 16, 32):
    print(f"{m:3d}  {metric_cotype_ratio(sigma_grid(2, m, 2.0), 2.0).value:.5f}")

print()
for name in ("l_1", "L_3", "l_4(L_1.5)", "c0"):
    prof = space_profile(parse_space(name))
    print(f"{name:12s} p = {prof.p_sup:g}, q = {prof.q_inf:g}")

print("\nnecessary conditions (r,s,p,q) = (1,2,2,2):", tuple(necessary_conditions(1, 2, 2, 2)))
print("E(L_1,1) into E(L_1,2):", iff_verdict(r=1, s=1, p=1, q=2))
print("E(L_1,2) into E(L_2,2):", iff_verdict(r=1, s=2, p=2, q=2))
