"""Minimising the Hölder constant of an embedding of a finite metric space.

Two independent routes: :func:`brute_min_distortion` enumerates a grid
(exhaustive up to pruning that cannot discard an optimum) and serves as the
oracle for :func:`local_min_distortion`, a seeded multistart hill climber on
``max |log d'(Tu,Tv) - alpha log d(u,v)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._parallel import chunk_rng, map_ordered
from .spaces import DistortionReport, EmbeddingTable, FiniteMetricSpace, holder_distortion, norms


@dataclass(frozen=True)
class SearchConfig:
    target_dim: int = 2
    q: float = 2.0
    alpha: float = 1.0
    restarts: int = 8
    iterations: int = 2000
    initial_step: float | None = None
    decay: float = 0.95
    patience: int = 100
    seed: int = 0
    grid_resolution: float = 0.05
    grid_extent: float | None = None
    budget: float = 1e16
    # probability of perturbing an endpoint of the currently worst pair
    worst_pair_bias: float = 0.5

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("restarts and iterations must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.target_dim < 1:
            raise ValueError("target_dim must be >= 1")
        if not self.q >= 1:
            raise ValueError("target exponent must be >= 1")


@dataclass
class SearchResult:
    A: float
    table: EmbeddingTable
    objective: float
    trace: list = field(default_factory=list)

    def report(self) -> DistortionReport:
        return holder_distortion(self.table.source, self.table)


def _constant(X: np.ndarray, target: np.ndarray, q: float) -> float:
    n = X.shape[0]
    iu, ju = np.triu_indices(n, 1)
    d = norms(X[iu] - X[ju], q)
    rho = d / target[iu, ju]
    if np.any(rho <= 0):
        return math.inf
    return float(max(rho.max(), 1.0 / rho.min()))


def brute_min_distortion(M: FiniteMetricSpace, cfg: SearchConfig) -> SearchResult:
    """Exhaustive grid search for the least Hölder constant.

    The first point sits at the origin, the second on the positive first axis
    and (in the plane) the third in the closed upper half plane.  Branches
    whose partial constant already reaches the incumbent are cut, which never
    discards a grid optimum because the constant is a maximum over pairs.
    """
    n = len(M)
    dim = cfg.target_dim
    if n > 5 or dim > 2:
        raise ValueError("brute force is limited to 5 points in at most 2 dimensions")
    if n < 2:
        raise ValueError("need at least two points")
    target = M.dist**cfg.alpha
    res = cfg.grid_resolution
    extent = cfg.grid_extent if cfg.grid_extent is not None else 1.5 * float(target.max())
    K = int(math.ceil(extent / res))
    axis = res * np.arange(-K, K + 1)
    if dim == 1:
        grid = axis[:, None]
        ray = axis[axis > 0][:, None]
        half = grid
    else:
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
        ray = np.stack([axis[axis > 0], np.zeros(K)], axis=1)
        half = grid[grid[:, 1] >= 0]
    choices = [np.zeros((1, dim)), ray] + [half] + [grid] * max(0, n - 3)
    choices = choices[:n]
    count = math.prod(len(c) for c in choices)
    if count > cfg.budget:
        raise ValueError(f"brute force budget exceeded: {count:.3g} candidate placements")

    best = [math.inf, None]
    placed = np.zeros((n, dim))

    def descend(i: int, current: float):
        cand = choices[i]
        worst = np.full(len(cand), current)
        for j in range(i):
            rho = norms(cand - placed[j], cfg.q) / target[i, j]
            with np.errstate(divide="ignore"):
                worst = np.maximum(worst, np.maximum(rho, 1.0 / rho))
        keep = np.flatnonzero(worst < best[0])
        if keep.size == 0:
            return
        order = keep[np.argsort(worst[keep], kind="stable")]
        if i == n - 1:
            k = order[0]
            best[0] = float(worst[k])
            placed[i] = cand[k]
            best[1] = placed.copy()
            return
        for k in order:
            if worst[k] >= best[0]:
                break
            placed[i] = cand[k]
            descend(i + 1, float(worst[k]))

    descend(1, 1.0)
    A = best[0]
    table = EmbeddingTable.from_array(M, best[1], cfg.q, cfg.alpha)
    return SearchResult(A, table, math.log(A), [A])


def grid_tolerance(M: FiniteMetricSpace, cfg: SearchConfig, A: float) -> float:
    """Upper bound on how much the grid optimum can exceed the continuous one.

    Snapping a continuous optimum with constant ``A`` to the grid moves every
    image distance by at most ``res * sqrt(dim)`` while image distances are at
    least ``min d**alpha / A``.
    """
    iu, ju = np.triu_indices(len(M), 1)
    smallest = float((M.dist[iu, ju] ** cfg.alpha).min()) / A
    shift = cfg.grid_resolution * math.sqrt(cfg.target_dim)
    if shift >= smallest:
        return math.inf
    return A * (smallest / (smallest - shift) - 1.0)


def _log_dev(X: np.ndarray, i: int, log_target: np.ndarray, q: float) -> np.ndarray:
    d = norms(X - X[i], q)
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = np.abs(np.log(d) - log_target[i])
    dev[i] = 0.0
    return dev


def _climb(M: FiniteMetricSpace, cfg: SearchConfig, restart: int, init: np.ndarray | None):
    n = len(M)
    rng = chunk_rng(cfg.seed, restart)
    target = M.dist**cfg.alpha
    with np.errstate(divide="ignore"):
        log_target = np.log(target)
    scale = float(target.max())
    if init is not None:
        X = np.array(init, dtype=float).reshape(n, cfg.target_dim)
    else:
        X = rng.normal(size=(n, cfg.target_dim))
        iu, ju = np.triu_indices(n, 1)
        spread = norms(X[iu] - X[ju], cfg.q)
        X *= float(np.mean(target[iu, ju]) / np.mean(spread))
    dev = np.vstack([_log_dev(X, i, log_target, cfg.q) for i in range(n)])
    obj = float(dev.max())
    step = cfg.initial_step if cfg.initial_step is not None else scale / 4.0
    stale = 0
    mask = np.ones(n, dtype=bool)
    for _ in range(cfg.iterations - 1):
        if rng.random() < cfg.worst_pair_bias:
            a, b = np.unravel_index(int(np.argmax(dev)), dev.shape)
            i = int(a if rng.random() < 0.5 else b)
        else:
            i = int(rng.integers(n))
        proposal = X[i] + step * rng.normal(size=cfg.target_dim)
        old = X[i].copy()
        X[i] = proposal
        row = _log_dev(X, i, log_target, cfg.q)
        mask[i] = False
        rest = dev[mask][:, mask].max() if n > 2 else 0.0
        mask[i] = True
        new = max(float(rest), float(row.max()))
        if new < obj:
            obj = new
            dev[i, :] = row
            dev[:, i] = row
            stale = 0
        else:
            X[i] = old
            stale += 1
            if stale >= cfg.patience:
                step *= cfg.decay
                stale = 0
    return obj, X


def local_min_distortion(M: FiniteMetricSpace, cfg: SearchConfig, init=None) -> SearchResult:
    """Multistart local search; restart 0 starts from ``init`` when given.

    The best restart wins, ties going to the lower restart index.
    ``iterations`` counts the initial evaluation, so a budget of one returns
    the starting objective.
    """
    if len(M) < 2:
        raise ValueError("need at least two points")
    runs = map_ordered(lambda k: _climb(M, cfg, k, init if k == 0 else None), cfg.restarts)
    trace = [math.exp(obj) for obj, _ in runs]
    k = int(np.argmin([obj for obj, _ in runs]))
    obj, X = runs[k]
    table = EmbeddingTable.from_array(M, X, cfg.q, cfg.alpha)
    return SearchResult(_constant(X, M.dist**cfg.alpha, cfg.q), table, obj, trace)


def path_space(n: int) -> FiniteMetricSpace:
    """The points ``0, 1/n, ..., 1`` of a line."""
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.arange(n + 1) / n
    return FiniteMetricSpace(tuple(range(n + 1)), np.abs(t[:, None] - t[None, :]))


def path_alpha_bound_check(n: int, alpha: float, report: DistortionReport) -> bool:
    """Whether ``A**2 >= n**(alpha - 1)``, the chain bound along the path.

    Any map of the ``n``-step path into a metric space has to satisfy it.
    """
    if report.n_points != n + 1:
        raise ValueError(f"report covers {report.n_points} points, the path has {n + 1}")
    if not math.isclose(report.alpha, alpha, rel_tol=0, abs_tol=1e-12):
        raise ValueError("report was computed for a different exponent")
    return report.constantA**2 >= n ** (alpha - 1.0) * (1.0 - 1e-12)


def with_budget(cfg: SearchConfig, restarts: int, iterations: int) -> SearchConfig:
    return replace(cfg, restarts=restarts, iterations=iterations)
