"""Reindexing reductions between sequence equivalence relations.

A family ``T_n`` of maps into ``l_q(X)`` is flattened into a single
``X``-valued sequence through the Cantor pairing, ``theta(x)(<n,m>) =
T_n(x(n))(m)``.  Whether a family meets the threshold conditions is checked on
samples; summability itself is only ever traced at finite horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .spaces import INF, StepFunction, _check_exponent, norms

DEFAULT_HORIZON = 10_000


# ---------------------------------------------------------------- pairing


def cantor_pair(n: int, m: int) -> int:
    if n < 0 or m < 0:
        raise ValueError("pairing is defined on nonnegative integers")
    w = n + m
    return w * (w + 1) // 2 + m


def cantor_unpair(k: int) -> tuple[int, int]:
    if k < 0:
        raise ValueError("pairing is defined on nonnegative integers")
    w = (math.isqrt(8 * k + 1) - 1) // 2
    m = k - w * (w + 1) // 2
    return w - m, m


def cantor_pair_array(n, m) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    w = n + m
    return w * (w + 1) // 2 + m


def cantor_unpair_array(k) -> tuple[np.ndarray, np.ndarray]:
    k = np.asarray(k, dtype=np.int64)
    w = ((np.sqrt(8.0 * k + 1.0) - 1.0) // 2).astype(np.int64)
    # float sqrt can be off by one near perfect squares
    w = np.where(w * (w + 1) // 2 > k, w - 1, w)
    w = np.where((w + 1) * (w + 2) // 2 <= k, w + 1, w)
    m = k - w * (w + 1) // 2
    return w - m, m


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class ReductionFamily:
    """Maps ``T_n`` into ``l_q(X)`` with thresholds ``eps_n``, ``delta_n`` and constants.

    ``maps(n, u)`` is batched: ``n`` is an integer array and ``u`` a matching
    batch of source points; it returns images of shape ``(k, blocks, dim X)``
    or ``(k, dim X)`` for a single block.  ``eps`` and ``delta`` take integer
    arrays.  ``source_p`` and ``target_p`` are the norm exponents of the source
    space and of ``X``.
    """

    maps: Callable
    eps: Callable
    delta: Callable
    A: float
    C: float
    D: float
    p: float
    q: float
    source_p: float = 2.0
    target_p: float = 2.0

    def __post_init__(self):
        if min(self.A, self.C, self.D) <= 0:
            raise ValueError("A, C and D must be positive")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 1.0 <= v < INF:
                raise ValueError(f"{name} must lie in [1, inf)")

    def apply(self, n, u) -> np.ndarray:
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        out = np.asarray(self.maps(n, np.asarray(u, dtype=float)), dtype=float)
        if out.ndim == 2:
            out = out[:, None, :]
        return out

    def source_distance(self, u, v) -> np.ndarray:
        diff = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
        if diff.ndim <= 1:
            return np.abs(diff)
        return norms(diff, self.source_p)

    def target_distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``||a - b||_{X,q}`` for batches of shape ``(k, blocks, dim X)``."""
        return norms(norms(a - b, self.target_p), self.q)


def scaled_family(T: Callable, p: float, q: float, c: float, d: float, A: float = 1.0, C: float = 1.0) -> ReductionFamily:
    """``T_n(u) = 2^(-n p/q) T(2^n u)`` with ``eps_n = 2^-n c``, ``delta_n = 2^(-n p/q) d``.

    ``A`` is the two-sided constant ``T`` satisfies above the scale ``c`` and
    ``C`` the large-distance threshold; the separation constant is then
    ``D = C^(p/q) / A``.  When ``T`` exposes ``dilated(u, log2_scale)`` with
    exponent ``p/q`` it is used so large ``n`` never overflows.
    """
    p = _check_exponent(p)
    q = _check_exponent(q, "q")
    if c <= 0 or d <= 0:
        raise ValueError("c and d must be positive")
    ratio = p / q
    dilated = getattr(T, "dilated", None)
    if dilated is not None and math.isclose(getattr(T, "alpha", -1.0), ratio, rel_tol=0, abs_tol=1e-15):
        def maps(n, u):
            return dilated(u, np.asarray(n, dtype=float))
    else:
        def maps(n, u):
            n = np.asarray(n, dtype=float)
            u = np.asarray(u, dtype=float)
            scale = np.exp2(n).reshape(n.shape + (1,) * (u.ndim - n.ndim))
            out = np.asarray(T(scale * u), dtype=float)
            if out.ndim == n.ndim:
                out = out[..., None]
            shrink = np.exp2(-n * ratio).reshape(n.shape + (1,) * (out.ndim - n.ndim))
            return shrink * out

    return ReductionFamily(
        maps=maps,
        eps=lambda n: c * np.exp2(-np.asarray(n, dtype=float)),
        delta=lambda n: d * np.exp2(-np.asarray(n, dtype=float) * ratio),
        A=A,
        C=C,
        D=C**ratio / A,
        p=p,
        q=q,
    )


# ---------------------------------------------------------------- theta


@dataclass(frozen=True)
class SequencePair:
    """Two truncated sequences ``x(0..N-1)``, ``y(0..N-1)`` of points in one space."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape:
            raise ValueError("x and y must have equal length and point shape")
        if x.shape[0] < 1:
            raise ValueError("horizon must be >= 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def horizon(self) -> int:
        return self.x.shape[0]

    def distances(self, p: float = 2.0) -> np.ndarray:
        diff = self.x - self.y
        return np.abs(diff) if diff.ndim == 1 else norms(diff.reshape(len(diff), -1), p)


@dataclass(frozen=True)
class FlatSequence:
    """Finitely many entries of an ``X``-valued sequence, sorted by flat index."""

    index: np.ndarray
    values: np.ndarray

    def blocks(self) -> np.ndarray:
        return cantor_unpair_array(self.index)[0]


def theta(fam: ReductionFamily, x, horizon: int | None = None) -> FlatSequence:
    """Flatten ``n -> T_n(x(n))`` into entries indexed by ``<n, m>``."""
    x = np.asarray(x, dtype=float)
    N = x.shape[0] if horizon is None else int(horizon)
    if N > x.shape[0]:
        raise ValueError("horizon exceeds the sequence length")
    n = np.arange(N)
    img = fam.apply(n, x[:N])
    if not np.all(np.isfinite(img)):
        raise ValueError("T_n is undefined at some x(n)")
    blocks = img.shape[1]
    nn, mm = np.meshgrid(n, np.arange(blocks), indexing="ij")
    index = cantor_pair_array(nn.ravel(), mm.ravel())
    order = np.argsort(index, kind="stable")
    return FlatSequence(index[order], img.reshape(N * blocks, -1)[order])


def flat_partial_sum(a: FlatSequence, b: FlatSequence, q: float, horizon: int, target_p: float = 2.0) -> float:
    """``sum ||a(k) - b(k)||^q`` over flat entries whose block index is below ``horizon``."""
    if not np.array_equal(a.index, b.index):
        raise ValueError("flat sequences are supported on different indices")
    keep = a.blocks() < horizon
    return math.fsum(norms(a.values[keep] - b.values[keep], target_p) ** q)


def blockwise_partial_sum(fam: ReductionFamily, pair: SequencePair, horizon: int) -> float:
    """``sum_{n < horizon} ||T_n(x(n)) - T_n(y(n))||_{X,q}^q``."""
    n = np.arange(horizon)
    d = fam.target_distance(fam.apply(n, pair.x[:horizon]), fam.apply(n, pair.y[:horizon]))
    return math.fsum(d**fam.q)


# ---------------------------------------------------------------- conditions


@dataclass(frozen=True)
class Violation:
    n: int
    u: object
    v: object
    regime: str
    distance: float
    image_distance: float


@dataclass
class ConditionReport:
    """Outcome of sampling the threshold conditions of a family.

    ``coverage`` counts the sampled pairs per regime (``small``: below eps_n,
    ``large``: above C, ``middle``: in between).  The summability flags are a
    finite-horizon diagnostic: the last decade of partial sums moved by less
    than ``1e-6`` relative.
    """

    violations: list = field(default_factory=list)
    coverage: dict = field(default_factory=lambda: {"small": 0, "large": 0, "middle": 0})
    eps_sum: float = 0.0
    delta_sum: float = 0.0
    eps_cauchy: bool = True
    delta_cauchy: bool = True
    horizon: int = DEFAULT_HORIZON

    @property
    def ok(self) -> bool:
        return not self.violations


def _numerically_cauchy(terms: np.ndarray) -> tuple[float, bool]:
    total = math.fsum(terms)
    head = math.fsum(terms[: max(1, len(terms) // 10)])
    return total, abs(total - head) <= 1e-6 * abs(total)


def verify_reduction_conditions(fam: ReductionFamily, samples, horizon: int = DEFAULT_HORIZON) -> ConditionReport:
    """Check the small/large/middle distance clauses on ``samples = [(n, u, v), ...]``."""
    n_all = np.arange(horizon)
    eps_sum, eps_ok = _numerically_cauchy(np.asarray(fam.eps(n_all), dtype=float) ** fam.p)
    delta_sum, delta_ok = _numerically_cauchy(np.asarray(fam.delta(n_all), dtype=float) ** fam.q)
    report = ConditionReport(eps_sum=eps_sum, delta_sum=delta_sum, eps_cauchy=eps_ok, delta_cauchy=delta_ok, horizon=horizon)
    if len(samples) == 0:
        return report
    n = np.array([s[0] for s in samples], dtype=np.int64)
    u = np.array([s[1] for s in samples], dtype=float)
    v = np.array([s[2] for s in samples], dtype=float)
    d = fam.source_distance(u, v)
    img = fam.target_distance(fam.apply(n, u), fam.apply(n, v))
    eps = np.asarray(fam.eps(n), dtype=float)
    delta = np.asarray(fam.delta(n), dtype=float)
    small = d < eps
    large = d > fam.C
    middle = ~small & ~large
    power = d ** (fam.p / fam.q)
    bad = np.where(
        small,
        ~(img < delta),
        np.where(large, ~(img > fam.D), ~((power / fam.A <= img) & (img <= fam.A * power))),
    )
    report.coverage = {"small": int(small.sum()), "large": int(large.sum()), "middle": int(middle.sum())}
    for k in np.flatnonzero(bad):
        regime = "small" if small[k] else ("large" if large[k] else "middle")
        report.violations.append(Violation(int(n[k]), samples[k][1], samples[k][2], regime, float(d[k]), float(img[k])))
    return report


# ---------------------------------------------------------------- traces


def ep_partial_sums(pair: SequencePair, p: float, point_p: float = 2.0) -> np.ndarray:
    """``S_N = sum_{n<N} d_n^p`` for ``N = 1..horizon``; for ``p = 0`` the tail sup ``sup_{n>=N-1} d_n``."""
    d = pair.distances(point_p)
    if p == 0:
        return np.maximum.accumulate(d[::-1])[::-1]
    p = _check_exponent(p)
    return np.cumsum(d**p)


def planted_distances(spec: str, horizon: int) -> np.ndarray:
    """``geometric:r`` gives ``r^n`` (n from 0), ``power:e`` gives ``(n+1)^-e``."""
    kind, _, arg = spec.partition(":")
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"bad planting spec {spec!r}; use geometric:ratio or power:exponent") from None
    n = np.arange(horizon, dtype=float)
    if kind == "geometric":
        if not 0 < value:
            raise ValueError("geometric ratio must be positive")
        return value**n
    if kind == "power":
        return (n + 1.0) ** (-value)
    raise ValueError(f"bad planting spec {spec!r}; use geometric:ratio or power:exponent")


def plant_pair(spec: str, horizon: int = DEFAULT_HORIZON, seed: int = 0) -> SequencePair:
    """Random ``x(n)`` in [0, 1) with ``y(n) = x(n) + d_n`` for the planted ``d_n``."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    from ._parallel import chunk_rng

    x = chunk_rng(seed, 0).random(horizon)
    return SequencePair(x, x + planted_distances(spec, horizon))


def plant_middle_pair(fam: ReductionFamily, horizon: int, seed: int = 0, min_gap: float = 1e-3) -> SequencePair:
    """Real sequences whose distances lie in ``[max(eps_n, min_gap), C]`` for every ``n``.

    Gaps are log-uniform and kept a relative 1e-9 inside the interval so the
    rounding in ``(x + gap) - x`` cannot leave it.  Where the interval is the
    single point ``C`` the pair is ``(0, C)``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    from ._parallel import chunk_rng

    rng = chunk_rng(seed, 1)
    n = np.arange(horizon)
    lo = np.log(np.maximum(fam.eps(n), min_gap))
    hi = math.log(fam.C)
    if np.any(lo > hi):
        raise ValueError("the middle regime is empty at some index")
    point = hi - lo < 4e-9
    gap = np.exp(rng.uniform(np.where(point, hi, lo + 1e-9), np.where(point, hi, hi - 1e-9)))
    x = rng.random(horizon)
    gap[point] = fam.C
    x[point] = 0.0
    return SequencePair(x, x + gap)


def theta_window(samples, step: float) -> list[StepFunction]:
    """Unit windows ``f(. + n + 1)`` of samples ``f(1 + k step)`` as step functions.

    Window ``n`` takes the samples in ``[n+1, n+2)``, so the final sample at
    ``N+1`` only closes the grid.
    """
    per_float = 1.0 / step if step > 0 else math.inf
    per = int(round(per_float))
    if not (per >= 1 and abs(per_float - per) <= 1e-9 * per):
        raise ValueError("misaligned grid: 1/step must be a positive integer")
    f = np.asarray(samples, dtype=float)
    if len(f) < per + 1 or (len(f) - 1) % per:
        raise ValueError("misaligned grid: samples must span [1, N+1] in whole unit windows")
    count = (len(f) - 1) // per
    return [StepFunction(tuple(f[n * per:(n + 1) * per])) for n in range(count)]


def window_sup_distances(a: Sequence[StepFunction], b: Sequence[StepFunction]) -> np.ndarray:
    return np.array([float(np.max(np.abs(f.array - g.array))) for f, g in zip(a, b)])


def measured_constant(T, alpha: float, count: int = 20_000, seed: int = 0, max_log2_scale: float = 200.0) -> float:
    """Largest two-sided Hölder ratio of ``T`` seen on random pairs across scales.

    Uses ``T.dilated`` when available so pairs far out on the line are covered.
    This is a measurement, not a bound; callers add their own margin.
    """
    from ._parallel import chunk_rng
    from .embeddings import sample_pairs

    rng = chunk_rng(seed, 0)
    s, t = sample_pairs(rng, count, 0.0, 1.0, 1e-9)
    dilated = getattr(T, "dilated", None)
    if dilated is not None:
        L = rng.uniform(0.0, max_log2_scale, size=count)
        a, b = dilated(s, L), dilated(t, L)
    else:
        a, b = np.asarray(T(s), dtype=float), np.asarray(T(t), dtype=float)
    a = a.reshape(count, -1)
    b = b.reshape(count, -1)
    rho = norms(a - b, 2.0) / np.abs(s - t) ** alpha
    return float(max(rho.max(), 1.0 / rho.min()))


def sample_scaled_pairs(count: int, max_index: int = 60, seed: int = 0, spread: float = 5.0, min_gap: float = 1e-8, max_gap: float = 100.0):
    """Samples ``(n, u, v)`` for scaled families, drawn in dilated coordinates.

    ``u = 2^-n w`` and ``v = 2^-n (w + g)`` with ``w`` uniform in
    ``[-spread, spread]`` and ``g`` log-uniform in ``[min_gap, max_gap 2^n]``,
    so ``2^n u`` is exact and every gap stays far above the rounding of ``w``.
    All three distance regimes get covered at every index.
    """
    from ._parallel import chunk_rng

    rng = chunk_rng(seed, 3)
    n = rng.integers(0, max_index + 1, size=count)
    w = rng.uniform(-spread, spread, size=count)
    g = np.exp(rng.uniform(math.log(min_gap), np.log(max_gap) + n * math.log(2.0)))
    return [(int(k), math.ldexp(float(a), -int(k)), math.ldexp(float(a + b), -int(k))) for k, a, b in zip(n, w, g)]
