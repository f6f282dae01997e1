"""Scaled reduction families, their conditions and the partial-sum sandwich.

Run with ``python3 demos/reductions.py``.
"""

import math

import numpy as np

from snowlab.embeddings import HolderLine
from snowlab.reductions import (
    blockwise_partial_sum,
    ep_partial_sums,
    flat_partial_sum,
    measured_constant,
    plant_middle_pair,
    plant_pair,
    sample_scaled_pairs,
    scaled_family,
    theta,
    verify_reduction_conditions,
)

# a Hölder(3/4) map of the line gives maps T_n for p = 3, q = 4
T = HolderLine(0.75)
A = 1.25 * measured_constant(T, 0.75)
fam = scaled_family(T, 3.0, 4.0, 1.0, A, A=A, C=1.0)
print(f"A = {A:.4f}, C = {fam.C}, D = {fam.D:.4f}")

rep = verify_reduction_conditions(fam, sample_scaled_pairs(2000, seed=0))
print("coverage per regime:", rep.coverage, "violations:", len(rep.violations))
print(f"sum eps^p = {rep.eps_sum:.6f} (limit {1 / (1 - 2**-3):.6f}), sum delta^q = {rep.delta_sum:.4f}")

# pairs inside the middle regime: the flat sum is pinned between A^-q S_N and A^q S_N
pair = plant_middle_pair(fam, 10_000, seed=0)
a, b = theta(fam, pair.x), theta(fam, pair.y)
S = ep_partial_sums(pair, fam.p)
print("\n     N        flat   blockwise    A^-q S_N     A^q S_N")
for N in (10, 100, 1000, 10_000):
    flat = flat_partial_sum(a, b, fam.q, N)
    block = blockwise_partial_sum(fam, pair, N)
    print(f"{N:6d}  {flat:10.4f}  {block:10.4f}  {S[N - 1] / A**4:10.4f}  {S[N - 1] * A**4:10.4f}")

# finite traces only suggest convergence
print()
for spec, p, note in (("geometric:0.5", 1, "-> 2"), ("power:1", 2, f"-> {math.pi**2 / 6:.6f}"), ("power:0.5", 2, "~ ln N")):
    tr = ep_partial_sums(plant_pair(spec, 10_000), p)
    print(f"{spec:14s} p={p}: S_100 = {tr[99]:.6f}, S_10000 = {tr[-1]:.6f}  ({note})")
print(f"ln(10^4) + gamma = {math.log(1e4) + np.euler_gamma:.6f}")
