"""Type and cotype diagnostics.

Rademacher averages, the diagonal/edge ratio on the discrete cube (metric
type), the half-period/unit-step ratio on the discrete torus (metric cotype),
the torus map into ``l_q^n(C)``, the closed-form type/cotype profile of the
classical spaces, and the resulting reducibility checks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _parallel
from .spaces import INF, FiniteMetricSpace, PNormVector, _check_exponent, norms

#: exact Rademacher enumeration is allowed up to this many vectors
MAX_EXACT_RADEMACHER = 24
#: exact metric cotype enumeration is allowed while m^n * 3^n stays below this
EXACT_COTYPE_BUDGET = 10**8


@dataclass(frozen=True)
class Sampled:
    seed: int = 0
    count: int = 100_000


@dataclass(frozen=True)
class RatioEstimate:
    value: float
    stderr: float = 0.0
    samples: int = 0
    exact: bool = True

    def __float__(self):
        return self.value


# ---------------------------------------------------------------- Rademacher


def _stack(vectors: Sequence[PNormVector]):
    if not vectors:
        raise ValueError("empty family")
    first = vectors[0]
    for v in vectors[1:]:
        if (v.p, v.dim, v.block) != (first.p, first.dim, first.block):
            raise ValueError("vectors must live in the same space")
    return np.array([v.coords for v in vectors]), first.p, first.block


def _sign_chunk(lo: int, hi: int, n: int) -> np.ndarray:
    # pattern k fixes eps_1 = +1 and reads eps_2..eps_n from the bits of k
    k = np.arange(lo, hi, dtype=np.int64)[:, None]
    bits = (k >> np.arange(n - 1, dtype=np.int64)) & 1
    return np.hstack([np.ones((hi - lo, 1)), 1.0 - 2.0 * bits])


def _rademacher_mean(U: np.ndarray, norm_p: float, block: int, power: float, mode):
    """Mean of ``||sum eps_j u_j||^power`` and its standard error."""
    n = U.shape[0]
    if mode == "exact":
        if n > MAX_EXACT_RADEMACHER:
            raise ValueError(f"exact mode supports at most {MAX_EXACT_RADEMACHER} vectors")
        total = 1 << (n - 1)
        bounds = _parallel.chunk_bounds(total)

        def part(c):
            lo, hi = bounds[c]
            return float(np.sum(norms(_sign_chunk(lo, hi, n) @ U, norm_p, block) ** power))

        return _parallel.exact_sum(_parallel.map_ordered(part, len(bounds))) / total, 0.0, total
    if not isinstance(mode, Sampled):
        raise ValueError("mode must be 'exact' or Sampled(seed, count)")
    bounds = _parallel.chunk_bounds(mode.count)

    def part(c):
        lo, hi = bounds[c]
        signs = 2.0 * _parallel.chunk_rng(mode.seed, c).integers(0, 2, size=(hi - lo, n)) - 1.0
        x = norms(signs @ U, norm_p, block) ** power
        return float(np.sum(x)), float(np.sum(x * x))

    parts = _parallel.map_ordered(part, len(bounds))
    s1 = _parallel.exact_sum([a for a, _ in parts])
    s2 = _parallel.exact_sum([b for _, b in parts])
    N = mode.count
    mean = s1 / N
    var = max(s2 / N - mean * mean, 0.0) * N / max(N - 1, 1)
    return mean, math.sqrt(var / N), N


def _rademacher_ratio(vectors, exponent: float, mode) -> RatioEstimate:
    U, norm_p, block = _stack(vectors)
    denom_terms = norms(U, norm_p, block) ** exponent
    denom = math.fsum(denom_terms) ** (1.0 / exponent)
    if denom == 0:
        raise ValueError("degenerate denominator: all vectors are zero")
    mean, se, count = _rademacher_mean(U, norm_p, block, exponent, mode)
    value = mean ** (1.0 / exponent) / denom
    if se and mean > 0:
        se = se * mean ** (1.0 / exponent - 1.0) / exponent / denom
    return RatioEstimate(value, se, count, mode == "exact")


def rademacher_type_ratio(vectors: Sequence[PNormVector], p: float, mode="exact") -> RatioEstimate:
    """``(E ||sum eps_j u_j||^p)^(1/p) / (sum ||u_j||^p)^(1/p)``.

    This is the least type-``p`` constant witnessed by the family.
    """
    p = _check_exponent(p)
    if p == INF:
        raise ValueError("type exponent must be finite")
    return _rademacher_ratio(vectors, p, mode)


def rademacher_cotype_ratio(vectors: Sequence[PNormVector], q: float, mode="exact") -> RatioEstimate:
    """Same average with exponent ``q``; the greatest cotype constant the family allows."""
    q = float(q)
    if not 2.0 <= q < INF:
        raise ValueError("cotype exponent must be finite and >= 2")
    return _rademacher_ratio(vectors, q, mode)


# ---------------------------------------------------------------- metric type


@dataclass(frozen=True, eq=False)
class HypercubeMap:
    """Images of the vertices of {0,1}^n; row ``v`` is the vertex whose j-th bit is coordinate j."""

    n: int
    images: np.ndarray
    p: float = 2.0
    block: int = 1

    def __post_init__(self):
        img = np.array(self.images, dtype=float)
        if img.ndim == 1:
            img = img[:, None]
        if self.n < 1 or img.shape[0] != 2**self.n:
            raise ValueError(f"need exactly 2^n = {2**self.n} images")
        object.__setattr__(self, "images", img)

    @classmethod
    def identity(cls, n: int, p: float = 2.0) -> "HypercubeMap":
        return cls(n, hypercube_vertices(n), p)


def hypercube_vertices(n: int) -> np.ndarray:
    v = np.arange(2**n, dtype=np.int64)[:, None]
    return ((v >> np.arange(n, dtype=np.int64)) & 1).astype(float)


def hypercube_space(n: int, p: float) -> FiniteMetricSpace:
    x = hypercube_vertices(n)
    d = norms(x[:, None, :] - x[None, :, :], p)
    return FiniteMetricSpace(tuple(range(2**n)), d)


def metric_type_ratio(H: HypercubeMap, p: float) -> float:
    """``sqrt(sum_diag d^2) / (n^(1/p - 1/2) sqrt(sum_edge d^2))`` over unordered pairs."""
    p = _check_exponent(p)
    n = H.n
    v = np.arange(2**n, dtype=np.int64)
    img = H.images
    edge_parts = []
    for j in range(n):
        lo = v[(v >> j) & 1 == 0]
        edge_parts.append(float(np.sum(norms(img[lo] - img[lo ^ (1 << j)], H.p, H.block) ** 2)))
    lo = v[(v >> (n - 1)) & 1 == 0]
    diag = math.fsum(norms(img[lo] - img[lo ^ ((1 << n) - 1)], H.p, H.block) ** 2)
    edges = math.fsum(edge_parts)
    if edges == 0:
        raise ValueError("degenerate map: every edge has length zero")
    return math.sqrt(diag) / (n ** (1.0 / p - 0.5) * math.sqrt(edges))


# ---------------------------------------------------------------- metric cotype


class GridMap:
    """A map on the torus Z_m^n, given densely or by a vectorised function.

    ``func`` receives integer arrays of shape ``(..., n)`` and returns images of
    shape ``(..., d)``; a dense table has shape ``(m,)*n + (d,)``.
    """

    def __init__(self, n: int, m: int, images=None, func: Callable | None = None, p: float = 2.0, block: int = 1):
        if m < 2 or m % 2:
            raise ValueError("m must be even and >= 2")
        if (images is None) == (func is None):
            raise ValueError("give either a dense table or a function")
        self.n, self.m, self.p, self.block = n, m, float(p), block
        self.func = func
        if images is not None:
            img = np.array(images, dtype=float)
            if img.shape[:n] != (m,) * n:
                raise ValueError(f"dense table must have leading shape {(m,) * n}")
            if img.ndim == n:
                img = img[..., None]
            self.images = img
        else:
            self.images = None

    def dense(self) -> np.ndarray:
        if self.images is not None:
            return self.images
        axes = np.meshgrid(*([np.arange(self.m)] * self.n), indexing="ij")
        return np.asarray(self.func(np.stack(axes, axis=-1)), dtype=float)

    def at(self, s: np.ndarray) -> np.ndarray:
        s = np.mod(s, self.m)
        if self.images is not None:
            return self.images[tuple(np.moveaxis(s, -1, 0))]
        return np.asarray(self.func(s), dtype=float)


def metric_cotype_ratio(H: GridMap, q: float, mode="exact") -> RatioEstimate:
    """Least ``Gamma`` in the metric cotype inequality for this particular map.

    ``Gamma = (LHS / RHS)^(1/q) / m`` with LHS the summed half-period shifts
    and RHS the average over unit steps ``eps`` in {-1,0,1}^n.
    """
    q = float(q)
    if not q > 0:
        raise ValueError("q must be positive")
    n, m = H.n, H.m
    if mode == "exact":
        if m**n * 3**n > EXACT_COTYPE_BUDGET:
            raise ValueError(f"exact enumeration needs m^n 3^n = {m**n * 3**n} evaluations")
        img = H.dense()
        axes = tuple(range(n))
        lhs_parts = [
            float(np.mean(norms(np.roll(img, -m // 2, axis=j) - img, H.p, H.block) ** q)) for j in range(n)
        ]
        steps = np.array(np.meshgrid(*([[-1, 0, 1]] * n), indexing="ij")).reshape(n, -1).T
        rhs_parts = [
            float(np.mean(norms(np.roll(img, tuple(-e), axis=axes) - img, H.p, H.block) ** q)) for e in steps
        ]
        lhs = math.fsum(lhs_parts)
        rhs = math.fsum(rhs_parts) / len(steps)
        if rhs == 0:
            return RatioEstimate(0.0, 0.0, m**n * 3**n, True)
        return RatioEstimate((lhs / rhs) ** (1.0 / q) / m, 0.0, m**n * 3**n, True)
    if not isinstance(mode, Sampled):
        raise ValueError("mode must be 'exact' or Sampled(seed, count)")
    bounds = _parallel.chunk_bounds(mode.count)

    def part(c):
        lo, hi = bounds[c]
        rng = _parallel.chunk_rng(mode.seed, c)
        k = hi - lo
        s = rng.integers(0, m, size=(k, n))
        j = rng.integers(0, n, size=k)
        shift = np.zeros((k, n), dtype=np.int64)
        shift[np.arange(k), j] = m // 2
        eps = rng.integers(-1, 2, size=(k, n))
        base = H.at(s)
        a = n * norms(H.at(s + shift) - base, H.p, H.block) ** q
        b = norms(H.at(s + eps) - base, H.p, H.block) ** q
        return float(a.sum()), float((a * a).sum()), float(b.sum()), float((b * b).sum())

    parts = _parallel.map_ordered(part, len(bounds))
    N = mode.count
    sums = [_parallel.exact_sum([pt[i] for pt in parts]) for i in range(4)]
    lhs, rhs = sums[0] / N, sums[2] / N
    if rhs == 0:
        return RatioEstimate(0.0, 0.0, N, False)
    var_l = max(sums[1] / N - lhs * lhs, 0.0) / N
    var_r = max(sums[3] / N - rhs * rhs, 0.0) / N
    value = (lhs / rhs) ** (1.0 / q) / m
    rel = math.sqrt((var_l / lhs**2 if lhs else 0.0) + var_r / rhs**2) / q
    return RatioEstimate(value, value * rel, N, False)


def sigma_points(s, m: int) -> np.ndarray:
    """Real coordinates of ``(exp(2 pi i s_j / m))_j``: shape ``(..., 2n)``."""
    if m < 2:
        raise ValueError("m must be >= 2")
    ang = 2.0 * math.pi * np.asarray(s, dtype=float) / m
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1).reshape(ang.shape[:-1] + (-1,))


def sigma_embed(s: Sequence[int], m: int, q: float) -> PNormVector:
    """The torus point ``s`` as a vector of ``l_q^n(C)`` written over real pairs."""
    return PNormVector(tuple(sigma_points(np.asarray(s)[None, :], m)[0]), q, block=2)


def sigma_grid(n: int, m: int, q: float) -> GridMap:
    return GridMap(n, m, func=lambda s: sigma_points(s, m), p=q, block=2)


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class TypeCotypeProfile:
    p_sup: float
    q_inf: float

    def __post_init__(self):
        if not 1.0 <= self.p_sup <= 2.0 <= self.q_inf:
            raise ValueError(f"invalid profile ({self.p_sup}, {self.q_inf})")


@dataclass(frozen=True)
class SpaceDescriptor:
    """``l_r``, ``L_r``, ``c0`` or ``l_q(inner)``."""

    kind: str
    r: float | None = None
    inner: "SpaceDescriptor | None" = None

    def __str__(self):
        if self.kind == "c0":
            return "c0"
        if self.kind == "sum":
            return f"l_{_fmt(self.r)}({self.inner})"
        return f"{self.kind}_{_fmt(self.r)}"


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def ell(r: float) -> SpaceDescriptor:
    return SpaceDescriptor("l", _check_exponent(r, "r"))


def Lr(r: float) -> SpaceDescriptor:
    return SpaceDescriptor("L", _check_exponent(r, "r"))


def c0() -> SpaceDescriptor:
    return SpaceDescriptor("c0")


def ell_sum(q: float, inner: SpaceDescriptor) -> SpaceDescriptor:
    return SpaceDescriptor("sum", _check_exponent(q, "q"), inner)


_ATOM = re.compile(r"\s*(l|L)_?([0-9.]+(?:e[-+]?\d+)?)\s*$")


def parse_space(text: str) -> SpaceDescriptor:
    """Parse ``l_3``, ``L_1.5``, ``c0`` or nested sums such as ``l_2(L_3)``."""
    t = text.strip()
    if t == "c0":
        return c0()
    m = re.fullmatch(r"l_?([0-9.]+(?:e[-+]?\d+)?)\((.*)\)", t)
    if m:
        return ell_sum(float(m.group(1)), parse_space(m.group(2)))
    m = _ATOM.fullmatch(t)
    if m:
        return (ell if m.group(1) == "l" else Lr)(float(m.group(2)))
    raise ValueError(f"unknown space descriptor {text!r}")


def space_profile(X: SpaceDescriptor) -> TypeCotypeProfile:
    if X.kind in ("l", "L"):
        return TypeCotypeProfile(min(X.r, 2.0), max(X.r, 2.0))
    if X.kind == "c0":
        return TypeCotypeProfile(1.0, INF)
    if X.kind == "sum":
        inner = space_profile(X.inner)
        return TypeCotypeProfile(min(inner.p_sup, X.r), max(inner.q_inf, X.r))
    raise ValueError(f"unknown descriptor kind {X.kind!r}")


class Conditions(NamedTuple):
    exponents_ordered: bool
    type_condition: bool
    cotype_condition: bool

    def all(self) -> bool:
        return all(self)


def _at_least_one(**kw):
    for name, v in kw.items():
        if not 1.0 <= float(v) < INF:
            raise ValueError(f"{name} must lie in [1, inf), got {v}")


def necessary_conditions(r: float, s: float, p: float, q: float) -> Conditions:
    """The three conditions any reduction ``E(L_r, p) -> E(L_s, q)`` forces."""
    _at_least_one(r=r, s=s, p=p, q=q)
    return Conditions(
        p <= q,
        min(r / p, 2.0 / p) >= min(s / q, 1.0, 2.0 / q),
        max(r, 2.0) <= max(s, q, 2.0),
    )


def iff_verdict(r: float, s: float, p: float, q: float) -> bool:
    """Reducibility of ``E(L_r, p)`` to ``E(L_s, q)`` for ``r, s`` in [1, 2] and ``s <= q``.

    A relation compared with itself is reducible through the identity, so
    ``(r, p) == (s, q)`` answers true even when ``s > q``.
    """
    _at_least_one(p=p, q=q)
    if not 1.0 <= r <= 2.0:
        raise ValueError(f"hypothesis r in [1, 2] fails: r = {r}")
    if not 1.0 <= s <= 2.0:
        raise ValueError(f"hypothesis s in [1, 2] fails: s = {s}")
    if r == s and p == q:
        return True
    if not s <= q:
        raise ValueError(f"hypothesis s <= q fails: s = {s}, q = {q}")
    return p <= q and r / p >= s / q


# ---------------------------------------------------------------- experiment


@dataclass(frozen=True)
class ObstructionRow:
    n: int
    A: float
    metric_type_ratio: float
    source_metric_type_ratio: float
    growth: float

    @property
    def A_squared(self) -> float:
        return self.A**2


def hypercube_obstruction_experiment(
    n_values: Sequence[int],
    p_src: float,
    p_tgt: float,
    alpha: float,
    restarts: int = 4,
    iterations: int = 2000,
    seed: int = 0,
    init: str = "identity",
) -> list[ObstructionRow]:
    """Embed the cube of ``l_{p_src}^n`` into ``l_{p_tgt}^n`` and measure.

    Each row reports the searched Hölder constant ``A``, the metric type ratio
    of the found map and of the source cube at exponent ``min(p_tgt, 2)``, and
    the growth ``n^(alpha/min(p_src,2) - 1/min(p_tgt,2))`` the type argument
    compares against ``A^2``.  Nothing is asserted here.
    """
    from .search import SearchConfig, local_min_distortion

    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    p_type = min(float(p_tgt), 2.0)
    rows = []
    for n in n_values:
        M = hypercube_space(n, p_src)
        cfg = SearchConfig(target_dim=n, q=p_tgt, alpha=alpha, restarts=restarts, iterations=iterations, seed=seed)
        start = hypercube_vertices(n) if init == "identity" else None
        found = local_min_distortion(M, cfg, init=start)
        img = found.table.image_array()
        rows.append(
            ObstructionRow(
                n=n,
                A=found.A,
                metric_type_ratio=metric_type_ratio(HypercubeMap(n, img, p_tgt), p_type),
                source_metric_type_ratio=metric_type_ratio(HypercubeMap.identity(n, p_src), p_type),
                growth=n ** (alpha / min(float(p_src), 2.0) - 1.0 / p_type),
            )
        )
    return rows
