"""Walk through the Koch curve K_r and the Hölder line maps built from it.

Run with ``python3 demos/koch_curve.py``.
"""

import numpy as np

from snowlab.embeddings import (
    HolderLine,
    KochParams,
    holder_exponent_fit,
    koch_eval,
    koch_extend,
    sample_pairs,
)

r = 0.3
P = KochParams(r)
print(f"K_r with r = {r}: Hölder exponent log(1/r)/log 4 = {P.alpha:.6f}")

# the five anchors of the first generation
t = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
for ti, (x, y) in zip(t, koch_eval(P, t)):
    print(f"  K({ti:.2f}) = ({x:.6f}, {y:.6f})")

# shrinking the parameter by 4 shrinks the curve by r
u = np.random.default_rng(0).random(5)
gap = np.abs(koch_eval(P, u / 4) - r * koch_eval(P, u)).max()
print(f"max |K(t/4) - r K(t)| on random t: {gap:.1e}")

# fit the exponent from random pairs
s, v = sample_pairs(np.random.default_rng(1), 10_000)
slope, A = holder_exponent_fit(lambda x: koch_eval(P, x), s, v, alpha=P.alpha)
print(f"fitted slope {slope:.4f}, two-sided constant on these pairs {A:.3f}")

# the curve continues to the whole line; K(4) = (1/r, 0)
print("extension at 4, -12:", koch_extend(P, [4.0, -12.0]).round(6).tolist())

# composing stages gives any exponent in (0, 1]
for alpha in (0.75, 0.3):
    T = HolderLine(alpha)
    s, v = sample_pairs(np.random.default_rng(2), 5000, lo=-3, hi=3)
    slope, A = holder_exponent_fit(T, s, v, alpha=alpha)
    print(f"line map alpha={alpha}: {T.dim} coordinates, slope {slope:.4f}, A {A:.3f}")
