import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from snowlab.spaces import (
    INF,
    EmbeddingTable,
    FiniteMetricSpace,
    PNormVector,
    StepFunction,
    holder_distortion,
    lr_distance,
    metric_space_from_points,
    p_norm,
    triangle_violation,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
exponents = st.one_of(st.floats(1.0, 8.0), st.just(INF))


@pytest.mark.parametrize("p, expected", [(2.0, 5.0), (1.0, 7.0), (INF, 4.0)])
def test_p_norm_examples(p, expected):
    assert p_norm(PNormVector((3.0, 4.0), p)) == expected


def test_vector_validation():
    with pytest.raises(ValueError):
        PNormVector(())
    with pytest.raises(ValueError):
        PNormVector((1.0, math.nan))
    with pytest.raises(ValueError):
        PNormVector((1.0,), 0.5)
    with pytest.raises(ValueError, match="different spaces"):
        PNormVector((1.0,), 2.0) - PNormVector((1.0,), 1.0)


@given(st.lists(st.tuples(finite, finite, finite), min_size=1, max_size=6), exponents, finite)
def test_p_norm_is_a_norm(rows, p, c):
    x, y, _ = (tuple(col) for col in zip(*rows))
    u, v = PNormVector(x, p), PNormVector(y, p)
    s = PNormVector(tuple(a + b for a, b in zip(x, y)), p)
    assert s.norm() <= u.norm() + v.norm() + 1e-12 * (1 + u.norm() + v.norm())
    scaled = PNormVector(tuple(c * a for a in x), p)
    assert math.isclose(scaled.norm(), abs(c) * u.norm(), rel_tol=1e-12, abs_tol=1e-12)


def test_p_norm_matches_loop_oracle():
    rng = np.random.default_rng(3)
    for p in (1.0, 1.5, 2.0, 3.0, INF):
        x = rng.normal(size=7)
        assert math.isclose(p_norm(PNormVector(tuple(x), p)), oracles.pnorm(list(x), p), rel_tol=1e-12)


def test_complex_pairs_norm():
    # block=2 takes moduli of pairs before the outer exponent
    v = PNormVector((3.0, 4.0, 0.0, 1.0), 1.0, block=2)
    assert v.norm() == 6.0


def test_step_function_pieces():
    f = StepFunction((1.0, 2.0))
    assert f(0.0) == 1.0 and f(0.5) == 1.0 and f(0.51) == 2.0 and f(1.0) == 2.0
    with pytest.raises(ValueError):
        StepFunction(())
    with pytest.raises(ValueError):
        f(1.5)


def test_lr_distance_examples():
    f = StepFunction((1.0, 0.0, 2.0))
    assert lr_distance(f, f, 2.0) == 0.0
    assert lr_distance(StepFunction.constant(3.0, 2), StepFunction.constant(1.5, 5), 3.0) == 1.5
    assert lr_distance(StepFunction((1.0, 0.0)), StepFunction((0.0,)), 1.0) == 0.5
    with pytest.raises(ValueError):
        lr_distance(f, f, 0.5)


@given(
    st.lists(finite, min_size=1, max_size=6),
    st.lists(finite, min_size=1, max_size=6),
    st.integers(1, 5),
    st.sampled_from([1, 2, 3]),
)
def test_lr_distance_refinement_invariant(a, b, k, r):
    f, g = StepFunction(tuple(a)), StepFunction(tuple(b))
    base = lr_distance(f, g, r)
    m = math.lcm(f.m, g.m) * k
    assert lr_distance(f.refine(m // f.m), g.refine(m // g.m), r) == base
    assert math.isclose(base, oracles.lr_distance(a, b, r), rel_tol=1e-12, abs_tol=1e-12)


def test_metric_space_from_points_examples():
    M = metric_space_from_points([PNormVector((0.0,), 1.0), PNormVector((3.0,), 1.0)])
    assert M.d(0, 1) == 3.0
    sq = [PNormVector(c, 2.0) for c in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]]
    M = metric_space_from_points(sq)
    assert M.d(0, 1) == 1.0 and M.d(0, 3) == math.sqrt(2.0)
    single = metric_space_from_points([PNormVector((1.0, 2.0))])
    assert single.dist.shape == (1, 1) and single.dist[0, 0] == 0.0
    with pytest.raises(ValueError):
        metric_space_from_points([PNormVector((0.0,)), PNormVector((0.0, 1.0))])


@settings(max_examples=50)
@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=8, unique=True), exponents)
def test_points_pass_exhaustive_triangle_check(pts, p):
    vecs = [PNormVector(c, p) for c in pts]
    try:
        M = metric_space_from_points(vecs)
    except ValueError as exc:
        # coincident points after float rounding are the only legitimate failure
        assert "positive distance" in str(exc)
        return
    assert triangle_violation(M.dist) is None


def test_metric_space_validation():
    with pytest.raises(ValueError, match="symmetric"):
        FiniteMetricSpace((0, 1), [[0, 1], [2, 0]])
    with pytest.raises(ValueError, match="diagonal"):
        FiniteMetricSpace((0, 1), [[1, 1], [1, 0]])
    with pytest.raises(ValueError, match="positive"):
        FiniteMetricSpace((0, 1), [[0, 0], [0, 0]])
    with pytest.raises(ValueError, match="triangle"):
        FiniteMetricSpace((0, 1, 2), [[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_json_round_trips_bit_exactly():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(5, 3))
    M = metric_space_from_points([PNormVector(tuple(r)) for r in x], labels=["a", "b", "c", "d", "e"])
    M2 = FiniteMetricSpace.from_json(M.to_json())
    assert M2 == M
    T = EmbeddingTable.from_array(M, x * math.pi, INF, 0.7)
    T2 = EmbeddingTable.from_json(T.to_json(), M)
    assert np.array_equal(T2.image_array(), T.image_array()) and T2.p == INF and T2.alpha == 0.7
    assert json.loads(T.to_json())["p"] == "inf"


def test_embedding_table_validation():
    M = metric_space_from_points([PNormVector((0.0,)), PNormVector((1.0,))])
    with pytest.raises(ValueError):
        EmbeddingTable(M, {0: PNormVector((0.0,))})
    with pytest.raises(ValueError):
        EmbeddingTable(M, {0: PNormVector((0.0,)), 1: PNormVector((0.0, 1.0))})


def _line(points):
    return metric_space_from_points([PNormVector((float(t),)) for t in points])


def test_holder_distortion_examples():
    M = _line([0, 1, 2])
    rep = holder_distortion(M, EmbeddingTable.from_array(M, [0.0, 1.0, 2.0], 2.0))
    assert rep.constantA == 1.0
    rep = holder_distortion(M, EmbeddingTable.from_array(M, [0.0, 3.0, 6.0], 2.0))
    assert rep.constantA == 3.0
    rep = holder_distortion(M, EmbeddingTable.from_array(M, [0.0, 0.25, 0.5], 2.0))
    assert rep.constantA == 4.0
    rep = holder_distortion(M, EmbeddingTable.from_array(M, [0.0, 1.0, 1.5], 2.0))
    assert rep.constantA == 2.0
    assert rep.worst_contracting_pair == (1, 2)
    assert rep.worst_expanding_pair == (0, 1)


def test_holder_distortion_collapse():
    M = _line([0, 1])
    with pytest.raises(ValueError, match="collapses a pair"):
        holder_distortion(M, EmbeddingTable.from_array(M, [1.0, 1.0], 2.0))


def test_holder_distortion_matches_oracle():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(6, 2))
    M = metric_space_from_points([PNormVector(tuple(r)) for r in pts])
    img = rng.normal(size=(6, 3))
    for alpha in (0.5, 1.0):
        rep = holder_distortion(M, EmbeddingTable.from_array(M, img, 2.0, alpha))
        want = oracles.holder_constant(M.dist.tolist(), img.tolist(), alpha)
        assert math.isclose(rep.constantA, want, rel_tol=1e-12)


@settings(max_examples=40)
@given(st.integers(0, 2**31), st.floats(0.05, 20.0))
def test_holder_distortion_pairs_are_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    M = metric_space_from_points([PNormVector(tuple(r)) for r in rng.normal(size=(5, 2))])
    img = rng.normal(size=(5, 2))
    a = holder_distortion(M, EmbeddingTable.from_array(M, img, 2.0))
    b = holder_distortion(M, EmbeddingTable.from_array(M, c * img, 2.0))
    assert a.worst_expanding_pair == b.worst_expanding_pair
    assert a.worst_contracting_pair == b.worst_contracting_pair
    want = max(c * a.max_expansion, a.max_contraction / c)
    assert math.isclose(b.constantA, want, rel_tol=1e-12)
