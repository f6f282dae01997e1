"""Value types and distance computations shared by the rest of the package.

Points of ``l_p^d`` are :class:`PNormVector`, desk-scale elements of ``L_r[0,1]``
are :class:`StepFunction`, and finite metric spaces carry an explicit distance
matrix.  Everything is immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

INF = math.inf

#: absolute tolerance for comparisons of computed invariants
ATOL = 1e-9


def _check_exponent(p: float, name: str = "p") -> float:
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"{name} must be >= 1 or inf, got {p}")
    return p


def norms(arr, p: float, block: int = 1) -> np.ndarray:
    """p-norm along the last axis.

    With ``block > 1`` consecutive groups of ``block`` coordinates are first
    collapsed to their Euclidean length, so ``block=2`` realises the norm of
    ``l_p^n(C)`` on real pairs.
    """
    a = np.abs(np.asarray(arr, dtype=float))
    if block > 1:
        if a.shape[-1] % block:
            raise ValueError(f"dimension {a.shape[-1]} is not a multiple of block {block}")
        a = a.reshape(a.shape[:-1] + (a.shape[-1] // block, block))
        a = np.sqrt(np.sum(a * a, axis=-1))
    if p == INF:
        return np.max(a, axis=-1)
    if p == 1.0:
        return np.sum(a, axis=-1)
    if p == 2.0:
        return np.sqrt(np.sum(a * a, axis=-1))
    return np.sum(a**p, axis=-1) ** (1.0 / p)


@dataclass(frozen=True)
class PNormVector:
    """A point of ``l_p^d``; ``p`` may be :data:`INF`.

    ``block`` groups coordinates (see :func:`norms`); it is 1 for ordinary
    real sequences.
    """

    coords: tuple
    p: float = 2.0
    block: int = 1

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise ValueError("coords must be nonempty")
        if not all(math.isfinite(c) for c in coords):
            raise ValueError("coords must be finite")
        if self.block < 1 or len(coords) % self.block:
            raise ValueError("block must divide the dimension")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "p", _check_exponent(self.p))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    def __sub__(self, other: "PNormVector") -> "PNormVector":
        _same_space(self, other)
        return PNormVector(tuple(a - b for a, b in zip(self.coords, other.coords)), self.p, self.block)

    def norm(self) -> float:
        return p_norm(self)


def _same_space(u: PNormVector, v: PNormVector):
    if u.p != v.p or u.dim != v.dim or u.block != v.block:
        raise ValueError(
            f"points live in different spaces: (p={u.p}, dim={u.dim}) vs (p={v.p}, dim={v.dim})"
        )


def p_norm(v: PNormVector) -> float:
    """``(sum |x_i|^p)^(1/p)``, or ``max |x_i|`` for ``p = inf``."""
    return float(norms(v.array, v.p, v.block))


@dataclass(frozen=True)
class StepFunction:
    """Function on [0,1] constant on the pieces ``((k-1)/m, k/m]``.

    The first piece also covers 0.
    """

    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("a step function needs at least one piece")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("step values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)

    def refine(self, factor: int) -> "StepFunction":
        """Same function on ``factor * m`` pieces."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        return StepFunction(tuple(np.repeat(self.array, factor)))

    def __call__(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        k = max(1, math.ceil(t * self.m))
        return self.values[k - 1]

    @classmethod
    def constant(cls, a: float, m: int = 1) -> "StepFunction":
        return cls((a,) * m)


def coarsest_values(f: StepFunction) -> np.ndarray:
    """Values of ``f`` on the coarsest uniform partition representing it."""
    a = f.array
    m = a.size
    for parts in range(1, m + 1):
        if m % parts == 0:
            blocks = a.reshape(parts, m // parts)
            if np.all(blocks == blocks[:, :1]):
                return blocks[:, 0].copy()
    return a


def common_refinement(*fs: StepFunction) -> list[np.ndarray]:
    """Value arrays of all ``fs`` on the lcm partition."""
    m = math.lcm(*(f.m for f in fs))
    return [np.repeat(f.array, m // f.m) for f in fs]


def lr_distance(f: StepFunction, g: StepFunction, r: float) -> float:
    """``||f - g||_r`` on the common refinement of the coarsest representatives.

    Reducing to the coarsest partition first makes the value independent of
    how finely ``f`` and ``g`` happen to be written.
    """
    r = _check_exponent(r, "r")
    a, b = common_refinement(StepFunction(tuple(coarsest_values(f))), StepFunction(tuple(coarsest_values(g))))
    diff = np.abs(a - b)
    if r == INF:
        return float(np.max(diff))
    return float((np.sum(diff**r) / a.size) ** (1.0 / r))


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labelled points with a validated distance matrix."""

    labels: tuple
    dist: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        d = np.array(self.dist, dtype=float)
        n = len(labels)
        if n == 0:
            raise ValueError("a metric space needs at least one point")
        if len(set(labels)) != n:
            raise ValueError("labels must be distinct")
        if d.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("distances must be finite")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix is not symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError("diagonal must be zero")
        off = d[~np.eye(n, dtype=bool)]
        if np.any(off <= 0):
            raise ValueError("distinct points must be at positive distance")
        bad = triangle_violation(d)
        if bad is not None:
            i, j, k = bad
            raise ValueError(
                f"triangle inequality fails: d({labels[i]},{labels[k]}) > "
                f"d({labels[i]},{labels[j]}) + d({labels[j]},{labels[k]})"
            )
        d.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", d)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)

    def d(self, u, v) -> float:
        return float(self.dist[self.index(u), self.index(v)])

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.labels), "dist": self.dist.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FiniteMetricSpace":
        obj = json.loads(text)
        labels = tuple(tuple(lab) if isinstance(lab, list) else lab for lab in obj["labels"])
        return cls(labels, np.array(obj["dist"], dtype=float))

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    __hash__ = None


def triangle_violation(d: np.ndarray, atol: float = ATOL):
    """First ``(i, j, k)`` with ``d[i,k] > d[i,j] + d[j,k] + atol``, else None."""
    n = d.shape[0]
    for j in range(n):
        slack = d[:, j][:, None] + d[j, :][None, :] - d
        if np.any(slack < -atol):
            i, k = np.argwhere(slack < -atol)[0]
            return int(i), j, int(k)
    return None


def metric_space_from_points(points: Sequence[PNormVector], labels: Sequence[Hashable] | None = None) -> FiniteMetricSpace:
    if not points:
        raise ValueError("need at least one point")
    first = points[0]
    for q in points[1:]:
        _same_space(first, q)
    if labels is None:
        labels = tuple(range(len(points)))
    if len(labels) != len(points):
        raise ValueError("one label per point")
    x = np.array([q.coords for q in points])
    d = norms(x[:, None, :] - x[None, :, :], first.p, first.block)
    # enforce exact symmetry against rounding in the p-th power sums
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(tuple(labels), d)


@dataclass(frozen=True)
class EmbeddingTable:
    """A map from the points of ``source`` to vectors of a common ``l_p^d``."""

    source: FiniteMetricSpace
    images: Mapping
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        images = dict(self.images)
        if set(images) != set(self.source.labels):
            raise ValueError("every source label needs exactly one image")
        vecs = [images[lab] for lab in self.source.labels]
        for v in vecs[1:]:
            _same_space(vecs[0], v)
        object.__setattr__(self, "images", images)

    @property
    def p(self) -> float:
        return next(iter(self.images.values())).p

    def image_array(self) -> np.ndarray:
        return np.array([self.images[lab].coords for lab in self.source.labels])

    def image_distances(self) -> np.ndarray:
        x = self.image_array()
        v = self.images[self.source.labels[0]]
        return norms(x[:, None, :] - x[None, :, :], v.p, v.block)

    @classmethod
    def from_array(cls, source: FiniteMetricSpace, x, p: float, alpha: float = 1.0, block: int = 1):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        return cls(source, {lab: PNormVector(tuple(row), p, block) for lab, row in zip(source.labels, x)}, alpha)

    def to_json(self) -> str:
        p = self.p
        return json.dumps(
            {
                "alpha": self.alpha,
                "p": "inf" if p == INF else p,
                "images": {str(lab): list(self.images[lab].coords) for lab in self.source.labels},
            }
        )

    @classmethod
    def from_json(cls, text: str, source: FiniteMetricSpace) -> "EmbeddingTable":
        obj = json.loads(text)
        p = INF if obj["p"] in ("inf", "Infinity") else float(obj["p"])
        by_str = {str(lab): lab for lab in source.labels}
        images = {by_str[k]: PNormVector(tuple(v), p) for k, v in obj["images"].items()}
        return cls(source, images, float(obj["alpha"]))


@dataclass(frozen=True)
class DistortionReport:
    alpha: float
    constantA: float
    worst_expanding_pair: tuple
    worst_contracting_pair: tuple
    max_expansion: float
    max_contraction: float
    n_points: int

    def __post_init__(self):
        if self.constantA < 1.0:
            raise ValueError("constantA is at least 1 by construction")


def _label_key(pair):
    try:
        return tuple(sorted(pair))
    except TypeError:
        return tuple(sorted(map(str, pair)))


def holder_ratios(d_source, d_image, alpha: float) -> np.ndarray:
    """``d'/d**alpha`` for aligned arrays of source and image distances."""
    d_source = np.asarray(d_source, dtype=float)
    d_image = np.asarray(d_image, dtype=float)
    return d_image / d_source**alpha


def holder_constant(d_source, d_image, alpha: float) -> float:
    """Least A with ``d**alpha / A <= d' <= A * d**alpha`` over the given pairs."""
    rho = holder_ratios(d_source, d_image, alpha)
    if np.any(rho <= 0):
        raise ValueError("embedding collapses a pair")
    return float(max(rho.max(), 1.0 / rho.min()))


def holder_distortion(M: FiniteMetricSpace, T: EmbeddingTable) -> DistortionReport:
    """Smallest Hölder(alpha) constant of ``T`` together with its extremal pairs.

    Ties between pairs are broken by lexicographic order of the label pair.
    """
    if T.source != M:
        raise ValueError("embedding table is defined on a different space")
    n = len(M)
    if n < 2:
        raise ValueError("need at least two points")
    iu, ju = np.triu_indices(n, 1)
    rho = holder_ratios(M.dist[iu, ju], T.image_distances()[iu, ju], T.alpha)
    if np.any(rho <= 0):
        k = int(np.argmin(rho))
        raise ValueError(f"embedding collapses a pair: {M.labels[iu[k]]!r}, {M.labels[ju[k]]!r}")
    pairs = [(M.labels[i], M.labels[j]) for i, j in zip(iu, ju)]

    def pick(values):
        best = values.max()
        cands = [pairs[k] for k in np.flatnonzero(values == best)]
        return min(cands, key=_label_key)

    up = float(rho.max())
    down = float(1.0 / rho.min())
    return DistortionReport(
        alpha=T.alpha,
        constantA=max(up, down),
        worst_expanding_pair=pick(rho),
        worst_contracting_pair=pick(-rho),
        max_expansion=up,
        max_contraction=down,
        n_points=n,
    )
