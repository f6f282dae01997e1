"""Command-line entry point.

Every operation is a subcommand.  Results go to ``--out`` (or stdout) as CSV or
JSON, and every run writes a manifest with the resolved configuration, the
seed, input digests and output paths next to its output (``<out>.manifest.json``)
or to stderr when printing to stdout.

Exit codes: 0 success, 2 invalid input or configuration, 1 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
import time

import numpy as np

from . import embeddings as emb
from . import reductions as red
from . import search as srch
from . import typecotype as tc
from .spaces import INF, FiniteMetricSpace, PNormVector, StepFunction, lr_distance


class UsageError(ValueError):
    """Invalid command-line input (exit code 2)."""


# ---------------------------------------------------------------- formatting


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def csv_text(header: list[str], rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_num(v) for v in row) + "\n")
    return out.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n"


def _exponent(text: str) -> float:
    t = str(text).strip().lower()
    if t in ("inf", "infinity"):
        return INF
    return float(t)


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).replace(",", " ").split()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# ---------------------------------------------------------------- inputs


class Inputs:
    """Reads input files and remembers their digests for the manifest."""

    def __init__(self):
        self.digests: dict[str, str] = {}

    def text(self, path: str) -> str:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read input {path}: {exc.strerror}") from None
        self.digests[path] = hashlib.sha256(raw).hexdigest()
        return raw.decode("utf-8")

    def json(self, path: str):
        try:
            return json.loads(self.text(path))
        except json.JSONDecodeError as exc:
            raise UsageError(f"input {path} is not valid JSON: {exc}") from None


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _builtin_space(spec: str) -> FiniteMetricSpace:
    """``cycle:n``, ``path:n``, ``triangle`` or ``hypercube:n:p``."""
    kind, *rest = spec.split(":")
    try:
        if kind == "triangle":
            return _builtin_space("cycle:3")
        if kind == "cycle":
            n = int(rest[0])
            if n < 3:
                raise UsageError("a cycle needs at least 3 points")
            k = np.arange(n)
            gap = np.abs(k[:, None] - k[None, :])
            return FiniteMetricSpace(tuple(range(n)), np.minimum(gap, n - gap).astype(float))
        if kind == "path":
            return srch.path_space(int(rest[0]))
        if kind == "hypercube":
            return tc.hypercube_space(int(rest[0]), _exponent(rest[1]) if len(rest) > 1 else 2.0)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad built-in space {spec!r}") from None
    raise UsageError(f"unknown built-in space {spec!r}; use cycle:n, path:n, triangle or hypercube:n:p")


def _space(args, inputs: Inputs) -> FiniteMetricSpace:
    if args.space:
        try:
            return FiniteMetricSpace.from_json(inputs.text(args.space))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"bad metric space JSON: {exc}") from None
    return _builtin_space(_need(args.builtin, "--space or --builtin"))


def _line_map(args, inputs: Inputs, values: np.ndarray):
    if args.map:
        return emb.TabulatedMap.from_json(inputs.text(args.map))
    if args.generator == "koch-composite":
        return emb.TabulatedMap.from_function(emb.HolderLine(args.alpha), np.unique(values))
    if args.generator == "identity":
        return emb.TabulatedMap.from_function(lambda v: v, np.unique(values))
    raise UsageError("give --map or --generator koch-composite|identity")


def _hypercube(args, inputs: Inputs, n: int) -> tc.HypercubeMap:
    if args.map:
        return tc.HypercubeMap(n, np.array(inputs.json(args.map), dtype=float), args.norm_p)
    x = tc.hypercube_vertices(n)
    if args.generator == "identity-lp":
        return tc.HypercubeMap(n, x, args.norm_p)
    if args.generator == "koch-composite":
        img = emb.HolderLine(args.alpha)(x).reshape(len(x), -1)
        return tc.HypercubeMap(n, img, args.norm_p)
    raise UsageError("give --map or --generator identity-lp|koch-composite")


def _grid(args, inputs: Inputs, n: int, m: int) -> tc.GridMap:
    if args.map:
        return tc.GridMap(n, m, images=np.array(inputs.json(args.map), dtype=float), p=args.norm_p)
    if args.generator == "sigma":
        return tc.sigma_grid(n, m, args.norm_p)
    if args.generator == "identity-lp":
        return tc.GridMap(n, m, func=lambda s: np.asarray(s, dtype=float), p=args.norm_p)
    if args.generator == "koch-composite":
        line = emb.HolderLine(args.alpha)

        def func(s):
            s = np.asarray(s, dtype=float) / m
            return line(s).reshape(s.shape[:-1] + (-1,))

        return tc.GridMap(n, m, func=func, p=args.norm_p)
    raise UsageError("give --map or --generator sigma|identity-lp|koch-composite")


def _mode(args):
    if args.mode == "exact":
        return "exact"
    return tc.Sampled(args.seed, args.samples)


def _vectors(args, inputs: Inputs, p: float) -> list[PNormVector]:
    raw = inputs.json(_need(args.vectors, "--vectors"))
    return [PNormVector(tuple(np.atleast_1d(np.asarray(v, dtype=float))), p) for v in raw]


def _steps(raw) -> StepFunction:
    return StepFunction(tuple(float(v) for v in np.atleast_1d(raw)))


def _pair(args, inputs: Inputs) -> red.SequencePair:
    if args.pair:
        raw = inputs.json(args.pair)
        try:
            return red.SequencePair(raw["x"], raw["y"])
        except (KeyError, TypeError):
            raise UsageError('pair JSON must be {"x": [...], "y": [...]}') from None
    return red.plant_pair(_need(args.plant, "--pair or --plant"), args.horizon, args.seed)


# ---------------------------------------------------------------- handlers


def cmd_curve(args, inputs):
    params = emb.KochParams(args.r)
    if args.samples < 5:
        raise UsageError("--samples must be >= 5 so the anchors fit")
    t = np.linspace(0.0, 1.0, args.samples)
    for a in (0.25, 0.5, 0.75):
        t[int(np.argmin(np.abs(t - a)))] = a
    xy = emb.koch_eval(params, t, args.depth)
    return csv_text(["t", "x", "y"], zip(t, xy[:, 0], xy[:, 1]))


def _grid_points(args) -> np.ndarray:
    if args.t is not None:
        return np.array(_floats(args.t))
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    return np.linspace(args.start, args.stop, args.samples)


def cmd_extend(args, inputs):
    t = _grid_points(args)
    xy = emb.koch_extend(emb.KochParams(args.r), t, args.max_steps, args.depth)
    return csv_text(["t", "x", "y"], zip(t, xy[:, 0], xy[:, 1]))


def cmd_line_map(args, inputs):
    t = _grid_points(args)
    line = emb.HolderLine(args.alpha, args.depth)
    img = line(t).reshape(len(t), -1)
    return csv_text(["t"] + [f"c{j}" for j in range(img.shape[1])], (row for row in np.column_stack([t, img])))


def cmd_lift_lr(args, inputs):
    f = _steps(inputs.json(_need(args.f, "--f")))
    g = _steps(inputs.json(args.g)) if args.g else None
    values = f.array if g is None else np.concatenate([f.array, g.array])
    T = _line_map(args, inputs, values)
    result = {"lift": emb.lift_lr(T, f, args.r, args.s).values, "blocks": T.dim, "pieces": f.m}
    if g is not None:
        lhs, rhs = emb.lift_lr_identity(T, f, g, args.s)
        result.update(lhs=lhs, rhs=rhs)
    return json_text(result)


def cmd_lift_c0(args, inputs):
    x = np.atleast_1d(np.asarray(inputs.json(_need(args.x, "--x")), dtype=float))
    T = _line_map(args, inputs, x)
    return json_text({"blocks": T.dim, "values": emb.lift_c0(T, x)})


def cmd_discretize(args, inputs):
    F = [_steps(v) for v in inputs.json(_need(args.family, "--family"))]
    if len(F) < 2:
        raise UsageError("family needs at least two step functions")
    threshold = emb.discretization_threshold(F, args.r)
    m = args.m if args.m else math.lcm(*(f.m for f in F))
    vecs = emb.discretize_Lr(F, args.r, m)
    ratios = [
        [i, j, (vecs[i] - vecs[j]).norm() / lr_distance(F[i], F[j], args.r)]
        for i in range(len(F))
        for j in range(i + 1, len(F))
    ]
    return json_text({"m": m, "threshold": threshold, "vectors": [v.coords for v in vecs], "ratios": ratios})


def cmd_kuratowski(args, inputs):
    M = _space(args, inputs)
    base = None
    if args.basepoint is not None:
        base = M.labels[int(args.basepoint)]
    return emb.kuratowski_embed(M, base, args.recenter).to_json() + "\n"


def cmd_round(args, inputs):
    raw = inputs.json(_need(args.input, "--in"))
    if isinstance(raw, dict):
        x, idx = raw.get("x"), raw.get("indices")
        if x is None:
            raise UsageError('round input must be a list or {"x": [...], "indices": [...]}')
    else:
        x, idx = raw, None
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if idx is None:
        idx = args.start + np.arange(x.size)
    return json_text(emb.dyadic_round(x, idx))


def _ratio_csv(est: tc.RatioEstimate) -> str:
    return csv_text(["ratio", "stderr", "samples", "exact"], [[est.value, est.stderr, est.samples, est.exact]])


def cmd_type(args, inputs):
    return _ratio_csv(tc.rademacher_type_ratio(_vectors(args, inputs, args.norm_p), args.p, _mode(args)))


def cmd_cotype(args, inputs):
    return _ratio_csv(tc.rademacher_cotype_ratio(_vectors(args, inputs, args.norm_p), args.q, _mode(args)))


def cmd_metric_type(args, inputs):
    rows = []
    for n in _ints(args.n):
        H = _hypercube(args, inputs, n)
        rows.append([n, tc.metric_type_ratio(H, args.p)])
    return csv_text(["n", "ratio"], rows)


def _m_values(args, n: int) -> list[int]:
    if args.sweep_c is None:
        return _ints(_need(args.m, "--m or --sweep-c"))
    start = max(2, math.ceil(args.sweep_c * n ** (1.0 / args.q)))
    start += start % 2
    return [start * 2**k for k in range(args.sweep_count)]


def cmd_metric_cotype(args, inputs):
    rows = []
    for n in _ints(args.n):
        for m in _m_values(args, n):
            est = tc.metric_cotype_ratio(_grid(args, inputs, n, m), args.q, _mode(args))
            rows.append([n, m, est.value, est.stderr, est.samples, est.exact])
    return csv_text(["n", "m", "gamma", "stderr", "samples", "exact"], rows)


def cmd_sigma(args, inputs):
    s = _ints(_need(args.s, "--s"))
    v = tc.sigma_embed(s, args.m, args.q)
    half = []
    for j in range(len(s)):
        t = list(s)
        t[j] = (t[j] + args.m // 2) % args.m
        w = tc.sigma_embed(t, args.m, args.q)
        half.append(float(np.hypot(*(w.array - v.array)[2 * j:2 * j + 2])))
    return json_text({"coords": v.coords, "half_shift_distances": half, "q": args.q})


def cmd_profile(args, inputs):
    prof = tc.space_profile(tc.parse_space(args.space_name))
    return f"space,p_sup,q_inf\n{args.space_name},{_num(prof.p_sup)},{_num(prof.q_inf)}\n"


def cmd_conditions(args, inputs):
    c = tc.necessary_conditions(args.r, args.s, args.p, args.q)
    return (
        f"exponents_ordered: {_num(c.exponents_ordered)}\n"
        f"type_condition: {_num(c.type_condition)}\n"
        f"cotype_condition: {_num(c.cotype_condition)}\n"
        f"all: {_num(c.all())}\n"
    )


def cmd_verdict(args, inputs):
    return f"reducible: {_num(tc.iff_verdict(args.r, args.s, args.p, args.q))}\n"


def _family(args):
    if not args.p <= args.q:
        raise UsageError("the scaled family needs p <= q (its exponent p/q lies in (0, 1])")
    alpha = args.p / args.q
    T = emb.HolderLine(alpha)
    A = args.A if args.A is not None else args.margin * red.measured_constant(T, alpha, seed=args.seed)
    d = args.d if args.d is not None else A * args.c**alpha
    return red.scaled_family(T, args.p, args.q, args.c, d, A=A, C=args.C)


def _horizons(horizon: int) -> list[int]:
    out = [10**k for k in range(1, 12) if 10**k < horizon]
    return out + [horizon]


def cmd_theta(args, inputs):
    fam = _family(args)
    if args.pair:
        pair = _pair(args, inputs)
    else:
        pair = red.plant_middle_pair(fam, args.horizon, args.seed, args.min_gap)
    a, b = red.theta(fam, pair.x), red.theta(fam, pair.y)
    S = red.ep_partial_sums(pair, fam.p)
    rows = []
    for N in _horizons(pair.horizon):
        flat = red.flat_partial_sum(a, b, fam.q, N)
        block = red.blockwise_partial_sum(fam, pair, N)
        s = S[N - 1]
        rows.append([N, flat, block, s, fam.A ** -fam.q * s, fam.A**fam.q * s, fam.A ** -fam.q * s <= flat <= fam.A**fam.q * s])
    return csv_text(["N", "flat_sum", "blockwise_sum", "source_sum", "lower", "upper", "within"], rows)


def cmd_scale_family(args, inputs):
    fam = _family(args)
    n = np.arange(args.horizon)
    eps, delta = fam.eps(n), fam.delta(n)
    head = f"# A={_num(fam.A)} C={_num(fam.C)} D={_num(fam.D)} p={_num(fam.p)} q={_num(fam.q)}\n"
    return head + csv_text(["n", "eps", "delta"], zip(n, eps, delta))


def cmd_verify_family(args, inputs):
    fam = _family(args)
    samples = red.sample_scaled_pairs(args.samples, args.max_index, args.seed, args.spread, args.min_gap, args.max_gap)
    rep = red.verify_reduction_conditions(fam, samples, args.horizon)
    return json_text(
        {
            "A": fam.A,
            "C": fam.C,
            "D": fam.D,
            "coverage": rep.coverage,
            "eps_sum": rep.eps_sum,
            "delta_sum": rep.delta_sum,
            "eps_numerically_cauchy": rep.eps_cauchy,
            "delta_numerically_cauchy": rep.delta_cauchy,
            "violations": [vars(v) for v in rep.violations],
        }
    )


def cmd_partial_sums(args, inputs):
    pair = _pair(args, inputs)
    S = red.ep_partial_sums(pair, args.p)
    return csv_text(["N", "S_N"], zip(range(1, len(S) + 1), S))


def cmd_window(args, inputs):
    if args.f:
        f = np.asarray(inputs.json(args.f), dtype=float)
    elif args.function:
        per = int(round(1.0 / args.step))
        t = 1.0 + np.arange(args.windows * per + 1) / per
        f = {"reciprocal": lambda t: 1.0 / t, "zero": np.zeros_like}[args.function](t)
    else:
        raise UsageError("give --f or --function")
    wf = red.theta_window(f, args.step)
    cols = [np.arange(len(wf)), [float(np.max(np.abs(w.array))) for w in wf]]
    header = ["n", "sup_f"]
    if args.g:
        wg = red.theta_window(np.asarray(inputs.json(args.g), dtype=float), args.step)
        if len(wg) != len(wf):
            raise UsageError("f and g must be sampled on the same grid")
        cols.append(red.window_sup_distances(wf, wg))
        header.append("sup_distance")
    return csv_text(header, zip(*cols))


def _search_cfg(args) -> srch.SearchConfig:
    return srch.SearchConfig(
        target_dim=args.dim,
        q=args.target_p,
        alpha=args.alpha,
        restarts=args.restarts,
        iterations=args.iterations,
        seed=args.seed,
        grid_resolution=args.resolution,
        grid_extent=args.extent,
    )


def _search_json(result: srch.SearchResult, extra: dict) -> str:
    body = {"A": result.A, "embedding": json.loads(result.table.to_json()), "restart_constants": result.trace}
    body.update(extra)
    return json_text(body)


def cmd_brute(args, inputs):
    M = _space(args, inputs)
    cfg = _search_cfg(args)
    res = srch.brute_min_distortion(M, cfg)
    return _search_json(res, {"grid_tolerance": srch.grid_tolerance(M, cfg, res.A)})


def cmd_search(args, inputs):
    M = _space(args, inputs)
    res = srch.local_min_distortion(M, _search_cfg(args))
    extra = {}
    if args.builtin and args.builtin.startswith("path:"):
        n = len(M) - 1
        extra["path_bound_holds"] = srch.path_alpha_bound_check(n, args.alpha, res.report())
    return _search_json(res, extra)


def cmd_obstruction(args, inputs):
    rows = tc.hypercube_obstruction_experiment(
        _ints(args.n), args.p_src, args.p_tgt, args.alpha, args.restarts, args.iterations, args.seed
    )
    return csv_text(
        ["n", "A", "A_squared", "metric_type_ratio", "source_metric_type_ratio", "growth"],
        ([r.n, r.A, r.A_squared, r.metric_type_ratio, r.source_metric_type_ratio, r.growth] for r in rows),
    )


# ---------------------------------------------------------------- parser


def _add_mode(p):
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--samples", type=int, default=100_000, help="draws in sampled mode")


def _add_space(p):
    p.add_argument("--space", help="metric space JSON {labels, dist}")
    p.add_argument("--builtin", help="cycle:n, path:n, triangle or hypercube:n:p")


def _add_search(p, restarts=8, iterations=2000):
    p.add_argument("--dim", type=int, default=2, help="target dimension")
    p.add_argument("--target-p", type=_exponent, default=2.0, help="target norm exponent")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--iterations", type=int, default=iterations)
    p.add_argument("--resolution", type=float, default=0.05, help="brute-force grid step")
    p.add_argument("--extent", type=float, default=None, help="brute-force grid half-width")


def _add_line_map(p):
    p.add_argument("--map", help="tabulated map JSON [[input, [outputs...]], ...]")
    p.add_argument("--generator", choices=["koch-composite", "identity"])
    p.add_argument("--alpha", type=float, default=0.75, help="exponent for koch-composite")


def _add_grid_points(p):
    p.add_argument("--t", help="explicit comma-separated parameters")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=101)


def _add_family(p, horizon=red.DEFAULT_HORIZON):
    p.add_argument("--p", type=float, default=3.0, help="source exponent")
    p.add_argument("--q", type=float, default=4.0, help="target exponent")
    p.add_argument("--c", type=float, default=1.0, help="small-distance threshold of the base map")
    p.add_argument("--d", type=float, default=None, help="small-image threshold (default A c^(p/q))")
    p.add_argument("--A", type=float, default=None, help="two-sided constant (default measured x margin)")
    p.add_argument("--C", type=float, default=1.0, help="large-distance threshold")
    p.add_argument("--margin", type=float, default=1.25, help="factor on the measured constant")
    p.add_argument("--horizon", type=int, default=horizon)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snowlab", description="Hölder embeddings, type/cotype and reduction diagnostics.")
    subs = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    subs.required = True

    def add(name, fn, anchor, doc):
        p = subs.add_parser(name, help=doc, description=f"{doc}\n\nConstruction: {anchor}.",
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(handler=fn)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("curve", cmd_curve, "Koch-type curve K_r, four similarities of ratio r", "Sample K_r on [0, 1] as CSV (t, x, y)")
    p.add_argument("--r", type=float, default=0.3)
    p.add_argument("--samples", type=int, default=1001)
    p.add_argument("--depth", type=int, default=emb.DEFAULT_DEPTH)

    p = add("extend", cmd_extend, "extension of K_r to the whole line by alternating quarter frames", "Evaluate the extended curve on a grid")
    p.add_argument("--r", type=float, default=0.3)
    p.add_argument("--max-steps", type=int, default=40)
    p.add_argument("--depth", type=int, default=emb.DEFAULT_DEPTH)
    _add_grid_points(p)

    p = add("line-map", cmd_line_map, "Hölder(alpha) map of the line by composing extended Koch curves", "Evaluate the Hölder line map on a grid")
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--depth", type=int, default=emb.DEFAULT_DEPTH)
    _add_grid_points(p)

    p = add("lift-lr", cmd_lift_lr, "pointwise lift of a line map to L_r step functions", "Lift a step function through a map R -> R^n")
    p.add_argument("--f", help="step values JSON list")
    p.add_argument("--g", help="second step function; reports both sides of the norm identity")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--s", type=float, default=2.0)
    _add_line_map(p)

    p = add("lift-c0", cmd_lift_c0, "blockwise lift of a line map to sup-norm sequences", "Lift a finite sequence through a map R -> R^n")
    p.add_argument("--x", help="sequence JSON list")
    _add_line_map(p)

    p = add("discretize", cmd_discretize, "grid sampling of finitely many L_r step functions into l_r^m", "Discretize a family of step functions")
    p.add_argument("--family", help="JSON list of step-value lists")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--m", type=int, default=None, help="sample count (default: lcm of piece counts)")

    p = add("kuratowski", cmd_kuratowski, "Fréchet/Kuratowski isometric embedding into sup-norm", "Embed a finite metric space isometrically into l_inf")
    _add_space(p)
    p.add_argument("--basepoint", default=None, help="index of the base point")
    p.add_argument("--recenter", type=_bool, default=False)

    p = add("round", cmd_round, "dyadic rounding of entry n to the grid k/2^n", "Round sequence entries to dyadic grids")
    p.add_argument("--in", dest="input", help='JSON list, or {"x": [...], "indices": [...]}')
    p.add_argument("--start", type=int, default=0, help="index of the first entry for plain lists")

    for name, fn, exp_name, anchor, doc in (
        ("type", cmd_type, "p", "Rademacher type inequality", "Least type constant witnessed by a family"),
        ("cotype", cmd_cotype, "q", "Rademacher cotype inequality", "Greatest cotype constant allowed by a family"),
    ):
        p = add(name, fn, anchor, doc)
        p.add_argument("--vectors", help="JSON list of coordinate lists")
        p.add_argument(f"--{exp_name}", type=float, default=2.0)
        p.add_argument("--norm-p", type=_exponent, default=2.0, help="norm exponent of the ambient space")
        _add_mode(p)

    p = add("metric-type", cmd_metric_type, "diagonal versus edge inequality on the discrete cube (metric type)", "Metric type ratio of a cube map")
    p.add_argument("--n", default="1,2,3,4", help="cube dimensions")
    p.add_argument("--p", type=float, default=2.0, help="type exponent")
    p.add_argument("--norm-p", type=_exponent, default=2.0, help="target norm exponent")
    p.add_argument("--map", help="JSON list of 2^n images (single n only)")
    p.add_argument("--generator", choices=["identity-lp", "koch-composite"], default="identity-lp")
    p.add_argument("--alpha", type=float, default=0.75)

    p = add("metric-cotype", cmd_metric_cotype, "half-period versus unit-step inequality on the discrete torus (metric cotype)", "Metric cotype ratio of a torus map")
    p.add_argument("--n", default="1,2")
    p.add_argument("--m", default="4", help="even moduli")
    p.add_argument("--sweep-c", type=float, default=None, help="sweep m from C n^(1/q) upward by doubling")
    p.add_argument("--sweep-count", type=int, default=3)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--norm-p", type=_exponent, default=2.0)
    p.add_argument("--map", help="dense JSON table of shape (m,)*n + (d,)")
    p.add_argument("--generator", choices=["sigma", "identity-lp", "koch-composite"], default="sigma")
    p.add_argument("--alpha", type=float, default=0.75)
    _add_mode(p)

    p = add("sigma", cmd_sigma, "torus map into l_q^n(C) by roots of unity", "Embed a torus point by roots of unity")
    p.add_argument("--s", help="comma-separated torus coordinates")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--q", type=_exponent, default=2.0)

    p = add("profile", cmd_profile, "type/cotype exponents of l_r, L_r, c0 and l_q-sums", "Supremum of types and infimum of cotypes")
    p.add_argument("--space", dest="space_name", default="l_2", help="e.g. l_1, L_3, c0, l_2(L_3)")

    for name, fn, anchor, doc in (
        ("conditions", cmd_conditions, "necessary conditions from type and cotype", "Evaluate the three necessary conditions"),
        ("verdict", cmd_verdict, "characterisation for r, s in [1, 2] and s <= q", "Decide reducibility of E(L_r,p) to E(L_s,q)"),
    ):
        p = add(name, fn, anchor, doc)
        for key in ("r", "s", "p", "q"):
            p.add_argument(f"--{key}", type=float, required=False, default=1.0)

    p = add("theta", cmd_theta, "pairing reduction theta(x)(<n,m>) = T_n(x(n))(m)", "Flat versus blockwise sums and the sandwich bound")
    _add_family(p)
    p.add_argument("--pair", help='JSON {"x": [...], "y": [...]}')
    p.add_argument("--plant", help="geometric:ratio or power:exponent (with --pair unset uses middle-regime planting)")
    p.add_argument("--min-gap", type=float, default=1e-3)

    p = add("scale-family", cmd_scale_family, "scaled family T_n(u) = 2^(-np/q) T(2^n u)", "Thresholds of the scaled family")
    _add_family(p, horizon=64)

    p = add("verify-family", cmd_verify_family, "threshold conditions of a reduction family", "Sample the small/large/middle distance clauses")
    _add_family(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--max-index", type=int, default=60)
    p.add_argument("--spread", type=float, default=5.0)
    p.add_argument("--min-gap", type=float, default=1e-8, help="smallest gap in dilated coordinates")
    p.add_argument("--max-gap", type=float, default=100.0, help="largest gap over 2^n in dilated coordinates")

    p = add("partial-sums", cmd_partial_sums, "membership traces for E(X,p) and E(M,0)", "Partial sums or tail suprema of a sequence pair")
    p.add_argument("--pair", help='JSON {"x": [...], "y": [...]}')
    p.add_argument("--plant", help="geometric:ratio or power:exponent")
    p.add_argument("--p", type=float, default=1.0, help="exponent; 0 gives tail suprema")
    p.add_argument("--horizon", type=int, default=red.DEFAULT_HORIZON)

    p = add("window", cmd_window, "unit windows theta_0(f)(n)(t) = f(t + n + 1)", "Cut a sampled function into unit windows")
    p.add_argument("--f", help="JSON samples of f at 1 + k step")
    p.add_argument("--g", help="second function on the same grid")
    p.add_argument("--function", choices=["reciprocal", "zero"])
    p.add_argument("--windows", type=int, default=10)
    p.add_argument("--step", type=float, default=0.01)

    p = add("brute", cmd_brute, "exhaustive grid oracle for the least Hölder constant", "Brute-force embedding search")
    _add_space(p)
    _add_search(p)

    p = add("search", cmd_search, "multistart local search for the least Hölder constant", "Local embedding search")
    _add_space(p)
    _add_search(p)

    p = add("obstruction", cmd_obstruction, "metric type obstruction on cubes", "Cube embedding experiment across dimensions")
    p.add_argument("--n", default="1,2,3")
    p.add_argument("--p-src", type=_exponent, default=1.0)
    p.add_argument("--p-tgt", type=_exponent, default=2.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--iterations", type=int, default=500)
    return parser


# ---------------------------------------------------------------- config and run

_RESERVED = {"config", "out", "handler", "command", "help"}


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def config_load(path: str, sub: argparse.ArgumentParser) -> dict:
    """Parse a ``key = value`` file against the options of one subcommand."""
    actions = {a.dest: a for a in sub._actions if a.dest not in _RESERVED and a.option_strings}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    values = {}
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, raw = text.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: malformed line, expected key=value")
        if key not in actions:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}; valid keys: {', '.join(sorted(actions))}")
        action = actions[key]
        raw = raw.strip()
        try:
            value = action.type(raw) if action.type else raw
        except (TypeError, ValueError):
            raise UsageError(f"{path}:{lineno}: bad value {raw!r} for {key}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{path}:{lineno}: {key} must be one of {sorted(action.choices)}")
        values[key] = value
    return values


def _manifest(args, inputs: Inputs, wall: float) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _RESERVED}
    return {
        "subcommand": args.command,
        "config": _jsonable(config),
        "seed": args.seed,
        "inputs": inputs.digests,
        "outputs": [args.out] if args.out else [],
        "wall_clock_seconds": wall,
    }


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    inputs = Inputs()
    try:
        if args.config:
            sub = _subparser(parser, args.command)
            sub.set_defaults(**config_load(args.config, sub))
            args = parser.parse_args(argv)
        text = args.handler(args, inputs)
        manifest = _manifest(args, inputs, time.perf_counter() - started)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
                fh.write(json_text(manifest))
        else:
            sys.stdout.write(text)
            sys.stderr.write(json.dumps(_jsonable(manifest), sort_keys=True) + "\n")
        return 0
    except (UsageError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"snowlab {args.command}: error: {msg}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort reporting
        print(f"snowlab {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
