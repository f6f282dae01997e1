"""Explicit embedding constructions.

The Koch-type curve ``K_r`` is the attractor of the four orientation-preserving
similarities of ratio ``r`` that map the unit segment onto the polyline
``(0,0)-(r,0)-(1/2,h)-(1-r,0)-(1,0)``.  It is Hölder with exponent
``log(1/r)/log 4`` and extends to the whole line by alternately prepending a
copy in front and behind (``koch_extend``).  Composing the extension with itself
coordinatewise gives Hölder maps ``R -> R^(2^k)`` for every exponent in (0, 1].

Frames are kept in scale-normalised form (``a_m / 4^m`` and ``r^m c_m``) so
that evaluating at ``2^n u`` and rescaling by ``2^(-alpha n)`` never overflows,
which the scaled reduction families need for large ``n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .spaces import (
    INF,
    EmbeddingTable,
    FiniteMetricSpace,
    PNormVector,
    StepFunction,
    _check_exponent,
    holder_constant,
    norms,
)

DEFAULT_DEPTH = 64


@dataclass(frozen=True)
class KochParams:
    r: float

    def __post_init__(self):
        if not 0.25 < self.r < 0.5:
            raise ValueError(f"similarity ratio must lie in (1/4, 1/2), got {self.r}")

    @property
    def alpha(self) -> float:
        return math.log(1.0 / self.r) / math.log(4.0)

    @property
    def h(self) -> float:
        # sqrt(r^2 - (1/2 - r)^2) simplifies to sqrt(r - 1/4)
        return math.sqrt(self.r * self.r - (0.5 - self.r) ** 2)

    @classmethod
    def from_alpha(cls, alpha: float) -> "KochParams":
        if not 0.5 < alpha < 1.0:
            raise ValueError("a single Koch stage realises exponents in (1/2, 1) only")
        return cls(4.0 ** (-alpha))

    def vertices(self) -> np.ndarray:
        """Polyline vertices as complex numbers."""
        return np.array([0.0, self.r, complex(0.5, self.h), 1.0 - self.r, 1.0])


def _as_points(z) -> np.ndarray:
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


def _koch_complex(params: KochParams, t, depth: int) -> np.ndarray:
    P = params.vertices()
    B = P[1:] - P[:-1]
    t = np.asarray(t, dtype=float)
    digits = np.empty((depth,) + t.shape, dtype=np.intp)
    res = t.copy()
    for i in range(depth):
        x = 4.0 * res
        d = np.minimum(np.floor(x), 3.0)
        digits[i] = d
        res = x - d
    z = res.astype(complex)
    for i in range(depth - 1, -1, -1):
        z = P[digits[i]] + B[digits[i]] * z
    return z


def koch_eval(params: KochParams, t, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Point ``K_r(t)`` in R^2 (last axis) for ``t`` in [0, 1].

    ``depth`` base-4 digits of ``t`` are descended; the residual point of the
    unit segment is then mapped through the composed similarities, so the
    truncation error is at most ``r**depth``.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0.0) | (t > 1.0)) or np.any(np.isnan(t)):
        raise ValueError("t must lie in [0, 1]")
    return _as_points(_koch_complex(params, t, depth))


@dataclass(frozen=True)
class ExtensionFrame:
    """Affine data of the m-th extension: ``K^m(t) = r^-m K((t - a_m)/4^m) + c_m``."""

    m: int
    a_m: float
    c_m: tuple
    scale: float

    @property
    def domain(self) -> tuple[float, float]:
        return self.a_m, self.a_m + 4.0**self.m


@lru_cache(maxsize=64)
def _normalised_frames(r: float, count: int):
    """``(a_m / 4^m, r^m c_m)`` for m < count.

    Odd steps prepend the curve in front (first quarter of the new frame),
    even steps behind (last quarter).
    """
    a_hat = np.zeros(count)
    c_hat = np.zeros(count, dtype=complex)
    for m in range(count - 1):
        if (m + 1) % 2 == 1:
            a_hat[m + 1] = a_hat[m] / 4.0
            c_hat[m + 1] = r * c_hat[m]
        else:
            a_hat[m + 1] = (a_hat[m] - 3.0) / 4.0
            c_hat[m + 1] = r * c_hat[m] - (1.0 - r)
    a_hat.setflags(write=False)
    c_hat.setflags(write=False)
    return a_hat, c_hat


def extension_frame(params: KochParams, m: int) -> ExtensionFrame:
    a = 0.0
    c = 0.0
    r = params.r
    for j in range(m):
        if (j + 1) % 2 == 1:
            continue
        a -= 3.0 * 4.0**j
        c -= r ** -(j + 1) - r**-j
    return ExtensionFrame(m, a, (c, 0.0), r**-m)


def _koch_dilated_complex(params: KochParams, v, log2_scale, max_steps: int | None, depth: int):
    v = np.asarray(v, dtype=float)
    shape = v.shape
    L = np.broadcast_to(np.asarray(log2_scale, dtype=float), shape).reshape(-1)
    v = v.reshape(-1)
    Li = np.floor(L)
    vf = v * np.exp2(L - Li)
    Li = Li.astype(np.int64)
    with np.errstate(divide="ignore"):
        # the frame for t needs 4^m >= |t|
        lower = np.where(vf == 0, 0, np.floor((np.log2(np.abs(vf)) + Li) / 2.0) - 1)
    m = np.maximum(lower, 0).astype(np.int64)
    limit = int(m.max(initial=0)) + 8 if max_steps is None else max_steps
    a_hat, c_hat = _normalised_frames(params.r, max(limit, 1) + 1)
    found = np.zeros(v.shape, dtype=bool)
    s = np.zeros(v.shape)
    while True:
        todo = ~found
        if not todo.any():
            break
        if np.any(m[todo] > limit):
            raise ValueError(f"t lies outside the domain reachable in {limit} steps; increase max_steps")
        mm = m[todo]
        x = np.ldexp(vf[todo], Li[todo] - 2 * mm)
        inside = (x >= a_hat[mm]) & (x <= a_hat[mm] + 1.0)
        idx = np.flatnonzero(todo)
        hit = idx[inside]
        found[hit] = True
        s[hit] = np.clip(x[inside] - a_hat[mm[inside]], 0.0, 1.0)
        m[idx[~inside]] += 1
    z = _koch_complex(params, s, depth) + c_hat[m]
    return (z * np.exp2(params.alpha * (2.0 * m - L))).reshape(shape)


def koch_extend(params: KochParams, t, max_steps: int = 40, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """Extension ``K_r^inf`` of the curve to the real line.

    Uses the smallest frame whose domain contains ``t``.  Raises ``ValueError``
    when ``t`` is not reached within ``max_steps`` frames.
    """
    return _as_points(_koch_dilated_complex(params, t, 0.0, max_steps, depth))


def koch_dilated(params: KochParams, v, log2_scale, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    """``lam**-alpha * K_r^inf(lam * v)`` with ``lam = 2**log2_scale``, without overflow."""
    return _as_points(_koch_dilated_complex(params, v, log2_scale, None, depth))


def stage_count(alpha: float) -> int:
    """Number of Koch stages used for a target exponent (1 for alpha in (1/2, 1))."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return 0
    return int(math.floor(math.log2(1.0 / alpha))) + 1


class HolderLine:
    """Hölder(alpha) map from R into R^(2^k) built from Koch stages.

    Each stage applies ``K_r^inf`` to every coordinate with the common stage
    exponent ``alpha**(1/k)``.
    """

    def __init__(self, alpha: float, depth: int = DEFAULT_DEPTH):
        self.alpha = float(alpha)
        self.stages = stage_count(self.alpha)
        self.depth = depth
        if self.stages:
            self.beta = self.alpha ** (1.0 / self.stages)
            self.params = KochParams.from_alpha(self.beta)
        else:
            self.beta = 1.0
            self.params = None

    @property
    def dim(self) -> int:
        return 2**self.stages

    def dilated(self, u, log2_scale=0.0) -> np.ndarray:
        """``lam**-alpha * T(lam * u)`` for ``lam = 2**log2_scale``."""
        x = np.asarray(u, dtype=float)[..., None]
        L = np.asarray(log2_scale, dtype=float)
        if self.stages == 0:
            return x
        L = np.broadcast_to(L, x.shape[:-1])[..., None]
        for _ in range(self.stages):
            pts = koch_dilated(self.params, x, np.broadcast_to(L, x.shape), self.depth)
            x = pts.reshape(x.shape[:-1] + (-1,))
            L = L * self.beta
        return x

    def __call__(self, t) -> np.ndarray:
        return self.dilated(t, 0.0)


def holder_line_map(alpha: float, t) -> np.ndarray:
    return HolderLine(alpha)(t)


def sample_pairs(rng: np.random.Generator, count: int, lo: float = 0.0, hi: float = 1.0, min_gap: float = 1e-6):
    """Random pairs in ``[lo, hi]`` whose gaps are log-uniform in ``[min_gap * (hi-lo), hi-lo]``."""
    width = hi - lo
    gap = width * np.exp(rng.uniform(math.log(min_gap), 0.0, count))
    s = lo + rng.uniform(0.0, 1.0, count) * (width - gap)
    return s, s + gap


def holder_exponent_fit(f: Callable, s, t, p: float = 2.0, alpha: float | None = None):
    """Least-squares slope of ``log |f(s)-f(t)|`` on ``log |s-t|``.

    Returns ``(slope, A)`` where ``A`` is the Hölder constant for exponent
    ``alpha`` (the fitted slope if not given) over these pairs.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    d = np.abs(s - t)
    diff = np.asarray(f(s), dtype=float) - np.asarray(f(t), dtype=float)
    dd = np.abs(diff) if diff.ndim == s.ndim else norms(diff, p)
    slope = np.polyfit(np.log(d), np.log(dd), 1)[0]
    a = slope if alpha is None else alpha
    return float(slope), holder_constant(d, dd, a)


class TabulatedMap:
    """A map R -> R^n known on a finite grid of inputs."""

    def __init__(self, inputs: Sequence[float], outputs):
        self.inputs = np.array(inputs, dtype=float)
        out = np.array(outputs, dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        if out.shape[0] != self.inputs.size:
            raise ValueError("one output per input")
        self.outputs = out
        self._index = {float(x): i for i, x in enumerate(self.inputs)}

    @property
    def dim(self) -> int:
        return self.outputs.shape[1]

    @classmethod
    def from_function(cls, fn: Callable, inputs: Sequence[float]) -> "TabulatedMap":
        inputs = np.asarray(inputs, dtype=float)
        return cls(inputs, np.asarray(fn(inputs)).reshape(inputs.size, -1))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        try:
            rows = [self._index[float(v)] for v in flat]
        except KeyError as exc:
            raise ValueError(f"tabulated map is undefined at {exc.args[0]!r}") from None
        return self.outputs[rows].reshape(x.shape + (self.dim,))

    def to_json(self) -> str:
        return json.dumps([[float(x), y.tolist()] for x, y in zip(self.inputs, self.outputs)])

    @classmethod
    def from_json(cls, text: str) -> "TabulatedMap":
        pairs = json.loads(text)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])


def _apply(T: Callable, values: np.ndarray) -> np.ndarray:
    out = np.asarray(T(values), dtype=float)
    return out.reshape(values.size, -1)


def lift_lr(T: Callable, f: StepFunction, r: float, s: float) -> StepFunction:
    """Lift ``R -> R^n`` pointwise to step functions: block k of n carries coordinate k.

    On block k the m pieces hold ``n**(1/s) * T(f_j)[k]`` so that
    ``int |Tf - Tg|^s = int ||T(f) - T(g)||_s^s``.
    """
    _check_exponent(r, "r")
    s = _check_exponent(s, "s")
    vals = _apply(T, f.array)
    n = vals.shape[1]
    return StepFunction(tuple((n ** (1.0 / s) * vals.T).reshape(-1)))


def lift_lr_identity(T: Callable, f: StepFunction, g: StepFunction, s: float) -> tuple[float, float]:
    """Both sides of the lift's norm identity as finite sums."""
    from .spaces import lr_distance

    lhs = lr_distance(lift_lr(T, f, 1.0, s), lift_lr(T, g, 1.0, s), s) ** s
    a, b = (np.repeat(h.array, math.lcm(f.m, g.m) // h.m) for h in (f, g))
    rhs = float(np.sum(norms(_apply(T, a) - _apply(T, b), s) ** s) / a.size)
    return lhs, rhs


def lift_c0(T: Callable, x) -> np.ndarray:
    """Flatten ``T(x(k))(m)`` to position ``n*k + (m-1)``."""
    x = np.asarray(x, dtype=float)
    return _apply(T, x).reshape(-1)


def _sample_indices(M: int, m: int) -> np.ndarray:
    # cell [k/m, (k+1)/m) starts in the piece containing (k/m)+
    return (np.arange(m) * M) // m


def discretize_Lr(F: Sequence[StepFunction], r: float, m: int) -> tuple[PNormVector, ...]:
    """``m**(-1/r) * (f(0), f(1/m), ..., f((m-1)/m))`` for each ``f`` in ``F``.

    Grid values use the piece the sampling cell ``[k/m, (k+1)/m)`` starts in, so
    distances are reproduced exactly whenever every piece count divides ``m``.
    """
    r = _check_exponent(r, "r")
    if m < 1:
        raise ValueError("sample count must be >= 1")
    scale = m ** (-1.0 / r)
    return tuple(PNormVector(tuple(scale * f.array[_sample_indices(f.m, m)]), r) for f in F)


def discretization_threshold(F: Sequence[StepFunction], r: float) -> int:
    """A sample count from which on all pairwise ratios lie in [1/2, 3/2].

    Each jump of ``f`` spoils at most one sampling cell, so the sampled step
    function is within ``(jumps * maxjump**r / m)**(1/r)`` of ``f``; the count
    makes that at most a quarter of the smallest pairwise distance.
    """
    from .spaces import lr_distance

    r = _check_exponent(r, "r")
    eps = min(lr_distance(f, g, r) for i, f in enumerate(F) for g in F[i + 1 :])
    if eps <= 0:
        raise ValueError("family contains equal functions")
    need = 1
    for f in F:
        jumps = np.abs(np.diff(f.array))
        jumps = jumps[jumps > 0]
        if jumps.size:
            need = max(need, math.ceil(jumps.size * jumps.max() ** r * (4.0 / eps) ** r))
    return need


def kuratowski_embed(M: FiniteMetricSpace, basepoint=None, recenter: bool = False) -> EmbeddingTable:
    """Isometric embedding into sup-norm: ``u -> (d(u, x_m) - d(b, x_m))_m``.

    Without a basepoint the plain Fréchet coordinates ``d(u, x_m)`` are used.
    ``recenter`` shifts every coordinate so its minimum over the space is 0,
    which puts it in ``[0, diam M]``.
    """
    x = np.array(M.dist, dtype=float)
    if basepoint is not None:
        x = x - x[M.index(basepoint)][None, :]
    if recenter:
        x = x - x.min(axis=0, keepdims=True)
    return EmbeddingTable.from_array(M, x, INF, 1.0)


def dyadic_round(x, indices=None) -> np.ndarray:
    """Round entry ``x(n)`` down to the grid ``{k / 2^n}``."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise ValueError("entries must lie in [0, 1]")
    n = np.arange(x.size) if indices is None else np.asarray(indices, dtype=np.int64)
    if n.shape != x.shape:
        raise ValueError("one index per entry")
    if np.any(n < 0):
        raise ValueError("indices must be nonnegative")
    return np.ldexp(np.floor(np.ldexp(x, n)), -n)
