"""Acceptance criteria 1-12, each reported as one PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest,
which repeats the lines in its terminal summary.
"""

import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cli_cases import CASES, write_inputs  # noqa: E402
from snowlab.cli import run  # noqa: E402
from snowlab.embeddings import (  # noqa: E402
    HolderLine,
    KochParams,
    TabulatedMap,
    discretization_threshold,
    discretize_Lr,
    holder_exponent_fit,
    holder_line_map,
    koch_eval,
    koch_extend,
    lift_lr_identity,
    sample_pairs,
)
from snowlab.reductions import (  # noqa: E402
    blockwise_partial_sum,
    ep_partial_sums,
    flat_partial_sum,
    measured_constant,
    plant_middle_pair,
    plant_pair,
    scaled_family,
    theta,
)
from snowlab.search import (  # noqa: E402
    SearchConfig,
    brute_min_distortion,
    local_min_distortion,
    path_alpha_bound_check,
    path_space,
)
from snowlab.spaces import INF, FiniteMetricSpace, PNormVector, StepFunction, lr_distance  # noqa: E402
from snowlab.typecotype import (  # noqa: E402
    GridMap,
    HypercubeMap,
    TypeCotypeProfile,
    Lr,
    c0,
    ell,
    ell_sum,
    iff_verdict,
    metric_cotype_ratio,
    metric_type_ratio,
    necessary_conditions,
    rademacher_type_ratio,
    sigma_points,
    space_profile,
)

RESULTS: dict[int, str] = {}
KOCH_RATIOS = (0.30, 0.35, 0.45)


def record(k: int, ok: bool, detail: str) -> bool:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    return ok


def criterion_1():
    t0 = time.perf_counter()
    t = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    err = 0.0
    for r in KOCH_RATIOS:
        want = np.array([[0, 0], [r, 0], [0.5, math.sqrt(r - 0.25)], [1 - r, 0], [1, 0]])
        err = max(err, float(np.max(np.abs(koch_eval(KochParams(r), t, 64) - want))))
    dt = time.perf_counter() - t0
    return record(1, err <= 1e-12 and dt < 1.0, f"anchor error {err:.2e}, {dt:.3f} s")


def criterion_2():
    rng = np.random.default_rng(20)
    self_err = ext_err = 0.0
    for r in KOCH_RATIOS:
        P = KochParams(r)
        t = rng.random(1000)
        self_err = max(self_err, float(np.max(np.abs(koch_eval(P, t / 4) - r * koch_eval(P, t)))))
        t1 = rng.uniform(0, 4, 1000)
        K1 = koch_eval(P, t1 / 4) / r
        ext_err = max(ext_err, float(np.max(np.abs(koch_extend(P, t1) - K1))))
        t2 = rng.uniform(-12, 4, 1000)
        K2 = koch_eval(P, (t2 + 12) / 16) / r**2 - np.array([r**-2 - r**-1, 0.0])
        ext_err = max(ext_err, float(np.max(np.abs(koch_extend(P, t2) - K2))))
    ok = self_err <= 1e-10 and ext_err <= 1e-10
    return record(2, ok, f"self-similarity error {self_err:.2e}, extension error {ext_err:.2e}")


def criterion_3():
    t0 = time.perf_counter()
    worst = 0.0
    parts = []
    for r in KOCH_RATIOS:
        P = KochParams(r)
        s, t = sample_pairs(np.random.default_rng(30), 10_000)
        slope, _ = holder_exponent_fit(lambda x: koch_eval(P, x), s, t)
        worst = max(worst, abs(slope - P.alpha))
        parts.append(f"K_{r}: {slope:.4f} vs {P.alpha:.4f}")
    for alpha in (0.75, 0.3):
        s, t = sample_pairs(np.random.default_rng(31), 10_000)
        slope, _ = holder_exponent_fit(lambda x: holder_line_map(alpha, x), s, t)
        worst = max(worst, abs(slope - alpha))
        parts.append(f"line {alpha}: {slope:.4f}")
    dt = time.perf_counter() - t0
    return record(3, worst <= 0.02 and dt < 30, f"max slope error {worst:.4f}, {dt:.2f} s ({'; '.join(parts)})")


def criterion_4():
    t0 = time.perf_counter()
    err = 0.0
    for p in (2.0, 1.0):
        for n in range(1, 11):
            err = max(err, abs(metric_type_ratio(HypercubeMap.identity(n, p), p) - 1.0))
    dt = time.perf_counter() - t0
    return record(4, err <= 1e-9 and dt < 5, f"max |ratio - 1| {err:.2e}, {dt:.2f} s")


def criterion_5():
    ones = [PNormVector((1.0,), 1.0)] * 4
    a = float(rademacher_type_ratio(ones, 1.0))
    basis = [PNormVector(tuple(row), 2.0) for row in np.eye(4)]
    b = float(rademacher_type_ratio(basis, 2.0))
    ok = a == 0.375 and abs(b - 1.0) <= 1e-12
    return record(5, ok, f"l_1 copies {a!r}, l_2 basis {b!r}")


def criterion_6():
    H = GridMap(1, 2, images=[0.0, 1.0])
    g = metric_cotype_ratio(H, 2).value
    err_g = abs(g - math.sqrt(1.5) / 2)
    err_s = 0.0
    for m in (2, 4, 8, 16):
        for n in range(1, 5):
            s = np.stack(np.meshgrid(*[np.arange(m)] * n, indexing="ij"), -1).reshape(-1, n)
            base = sigma_points(s, m).reshape(len(s), n, 2)
            for j in range(n):
                t = s.copy()
                t[:, j] += m // 2
                moved = sigma_points(t, m).reshape(len(s), n, 2)
                err_s = max(err_s, float(np.max(np.abs(np.hypot(*(moved[:, j] - base[:, j]).T) - 2.0))))
    ok = err_g <= 1e-12 and err_s <= 1e-12
    return record(6, ok, f"Gamma_est {g:.15f} (error {err_g:.1e}), half-shift error {err_s:.1e}")


def criterion_7():
    rng = np.random.default_rng(70)
    grid = np.arange(9) / 4.0
    T = TabulatedMap.from_function(HolderLine(0.75), grid)
    lift_err = 0.0
    for _ in range(100):
        f = StepFunction(tuple(grid[rng.integers(0, 9, size=int(rng.integers(1, 6)))]))
        g = StepFunction(tuple(grid[rng.integers(0, 9, size=int(rng.integers(1, 6)))]))
        lhs, rhs = lift_lr_identity(T, f, g, float(rng.choice([1.0, 2.0, 3.0])))
        if lhs or rhs:
            lift_err = max(lift_err, abs(lhs - rhs) / max(lhs, rhs))
    common_err = 0.0
    coarse_lo, coarse_hi = INF, 0.0
    families = 0
    while families < 100:
        F = [StepFunction(tuple(rng.normal(size=k))) for k in (1, 2, 4, 8)]
        r = float(rng.choice([1.0, 2.0, 3.0]))
        vecs = discretize_Lr(F, r, 8)
        for i in range(4):
            for j in range(i + 1, 4):
                common_err = max(common_err, abs((vecs[i] - vecs[j]).norm() / lr_distance(F[i], F[j], r) - 1.0))
        G = [StepFunction(tuple(rng.integers(0, 3, size=int(rng.integers(2, 7))).astype(float))) for _ in range(3)]
        if min(lr_distance(f, g, r) for i, f in enumerate(G) for g in G[i + 1 :]) == 0:
            continue
        families += 1
        vg = discretize_Lr(G, r, discretization_threshold(G, r))
        for i in range(3):
            for j in range(i + 1, 3):
                ratio = (vg[i] - vg[j]).norm() / lr_distance(G[i], G[j], r)
                coarse_lo, coarse_hi = min(coarse_lo, ratio), max(coarse_hi, ratio)
    ok = lift_err <= 1e-12 and common_err <= 1e-12 and 0.5 <= coarse_lo and coarse_hi <= 2.0
    detail = f"lift identity {lift_err:.1e} rel, common grid {common_err:.1e}, coarse ratios in [{coarse_lo:.3f}, {coarse_hi:.3f}]"
    return record(7, ok, detail)


def criterion_8():
    T = HolderLine(0.75)
    A = 1.25 * measured_constant(T, 0.75)
    fam = scaled_family(T, 3.0, 4.0, 1.0, A, A=A, C=1.0)
    N = 10_000
    pair = plant_middle_pair(fam, N, seed=80)
    eps = fam.eps(np.arange(N))
    d = pair.distances()
    in_middle = bool(np.all((d >= eps) & (d <= fam.C)))
    a, b = theta(fam, pair.x), theta(fam, pair.y)
    S = ep_partial_sums(pair, fam.p)
    sandwich = True
    order_err = 0.0
    for H in (1, 10, 100, 1000, N):
        flat = flat_partial_sum(a, b, fam.q, H)
        order_err = max(order_err, abs(flat - blockwise_partial_sum(fam, pair, H)) / flat)
        sandwich &= A**-fam.q * S[H - 1] <= flat <= A**fam.q * S[H - 1]
    geo = ep_partial_sums(plant_pair("geometric:0.5", 200), 1)[-1]
    harm = ep_partial_sums(plant_pair("power:0.5", N), 2)
    basel = ep_partial_sums(plant_pair("power:1", N), 2)[-1]
    traces = (
        abs(geo - 2.0) <= 1e-12
        and harm[-1] > 9
        and abs(harm[-1] - math.log(N) - np.euler_gamma) < 1e-3
        and abs(basel - math.pi**2 / 6) <= 1e-3
    )
    ok = in_middle and sandwich and order_err <= 1e-12 and traces
    detail = (
        f"A = {A:.3f}, planted in middle regime {in_middle}, sandwich {sandwich}, flat/blockwise {order_err:.1e}; "
        f"geometric {geo:.15f}, n^-1/2 {harm[-1]:.4f}, 1/n {basel:.6f}"
    )
    return record(8, ok, detail)


def _cycle4():
    d = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], float)
    return FiniteMetricSpace(tuple(range(4)), d)


def criterion_9():
    t0 = time.perf_counter()
    M = _cycle4()
    oracle = brute_min_distortion(M, SearchConfig(grid_resolution=0.05)).A
    local = local_min_distortion(M, SearchConfig(restarts=32, iterations=10_000)).A
    tri = FiniteMetricSpace((0, 1, 2), 1.0 - np.eye(3))
    A_tri = local_min_distortion(tri, SearchConfig(restarts=32, iterations=10_000)).A
    dt = time.perf_counter() - t0
    ok = abs(local - oracle) <= 0.02 * oracle and A_tri <= 1.001 and dt < 60
    return record(9, ok, f"4-cycle oracle {oracle:.4f}, local {local:.4f}; triangle {A_tri:.6f}; {dt:.1f} s")


def criterion_10():
    checked = 0
    least = INF
    ok = True
    for n in (4, 16, 64):
        M = path_space(n)
        for seed in range(3):
            for iterations in (1, 500, 3000):
                cfg = SearchConfig(alpha=1.5, restarts=2, iterations=iterations, seed=seed)
                rep = local_min_distortion(M, cfg).report()
                ok &= path_alpha_bound_check(n, 1.5, rep)
                least = min(least, rep.constantA**2 / n**0.5)
                checked += 1
    return record(10, ok, f"{checked} embeddings, least A^2 / n^0.5 = {least:.4f}")


NECESSARY_ROWS = {(1, 1, 1, 2): (True, True, True), (1, 2, 2, 2): (True, False, True), (3, 1, 1, 1): (True, False, False)}
VERDICT_ROWS = {(1, 1, 1, 2): True, (1, 2, 2, 2): False, (2, 1, 2, 1): True}
# the listed value of clause (2) at this row disagrees with min(3, 2) >= min(1, 1, 2)
KNOWN_ROW = "necessary_conditions(3, 1, 1, 1)"


def criterion_11():
    bad = []
    for (r, s, p, q), want in NECESSARY_ROWS.items():
        got = tuple(necessary_conditions(r, s, p, q))
        if got != want:
            bad.append(f"necessary_conditions{(r, s, p, q)}")
    for (r, p, s, q), want in VERDICT_ROWS.items():
        if iff_verdict(r=r, p=p, s=s, q=q) is not want:
            bad.append(f"iff_verdict(r={r}, p={p}, s={s}, q={q})")
    grid_bad = 0
    values = np.linspace(1.0, 6.0, 20)
    for r in values:
        base = TypeCotypeProfile(min(r, 2.0), max(r, 2.0))
        grid_bad += space_profile(ell(r)) != base
        grid_bad += space_profile(Lr(r)) != base
        for q in values:
            want = TypeCotypeProfile(min(r, q, 2.0), max(r, q, 2.0))
            grid_bad += space_profile(ell_sum(q, ell(r))) != want
            grid_bad += space_profile(ell_sum(q, Lr(r))) != want
            grid_bad += space_profile(ell_sum(q, c0())) != TypeCotypeProfile(1.0, INF)
    ok = not bad and grid_bad == 0
    detail = f"mismatched rows {bad or 'none'}; profile grid mismatches {grid_bad}/1640"
    record(11, ok, detail)
    return ok, bad, grid_bad


def _run_all_cases(directory: Path, threads: int) -> dict[str, bytes]:
    outputs = {}
    old = os.environ.get("SNOWFLAKE_THREADS")
    os.environ["SNOWFLAKE_THREADS"] = str(threads)
    cwd = os.getcwd()
    try:
        os.chdir(directory)
        for name, args in CASES.items():
            out = directory / f"{name}.out"
            code = run([name, *args, "--out", str(out)])
            manifest = json.loads((directory / f"{name}.out.manifest.json").read_text())
            manifest.pop("wall_clock_seconds")
            manifest["outputs"] = [Path(o).name for o in manifest["outputs"]]
            outputs[name] = bytes([code]) + out.read_bytes() + json.dumps(manifest, sort_keys=True).encode()
    finally:
        os.chdir(cwd)
        if old is None:
            os.environ.pop("SNOWFLAKE_THREADS", None)
        else:
            os.environ["SNOWFLAKE_THREADS"] = old
    return outputs


def criterion_12():
    runs = []
    for threads in (1, 8, 1, 8):
        with tempfile.TemporaryDirectory() as tmp:
            write_inputs(Path(tmp))
            runs.append(_run_all_cases(Path(tmp), threads))
    differing = sorted(name for name in CASES if len({r[name] for r in runs}) != 1)
    failed = sorted(name for name in CASES if runs[0][name][0] != 0)
    ok = not differing and not failed
    return record(12, ok, f"{len(CASES)} subcommands x 4 runs; differing {differing or 'none'}; nonzero exits {failed or 'none'}")


# ---------------------------------------------------------------- pytest wrappers


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12])
def test_criterion(k):
    assert globals()[f"criterion_{k}"](), RESULTS[k]


def test_criterion_11():
    ok, bad, grid_bad = criterion_11()
    assert grid_bad == 0, RESULTS[11]
    assert set(bad) <= {KNOWN_ROW}, RESULTS[11]
    if bad:
        pytest.xfail(f"{KNOWN_ROW}: the listed clause (2) value contradicts its literal evaluation")


if __name__ == "__main__":
    outcomes = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(), criterion_7(),
                criterion_8(), criterion_9(), criterion_10(), criterion_11()[0], criterion_12()]
    print(f"{sum(outcomes)}/12 criteria pass")
    sys.exit(0 if all(outcomes) else 1)
