"""Command-line surface: graph generation, single-instance evaluation, bound
tables, Monte Carlo sweeps, scaling fits, and verification suites.

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .graphs import (
    ParameterError,
    gamma_of,
    gen_ba,
    gen_er,
    gen_sparse_er,
    graph_text,
    load_graph,
    save_graph,
)
from .harness import (
    SweepConfig,
    derive_seed,
    fit_scaling,
    load,
    parse_config,
    persist,
    run_sweep,
    with_overrides,
)
from .oracle import (
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    build_oracle,
    default_score_const,
    sample_interventions,
)
from .ordering import (
    EXHAUSTIVE_LIMIT,
    ExhaustiveLimitError,
    evaluate,
    opt_exact,
    opt_heuristic,
)
from .verify import verify_lemma, verify_lipschitz, verify_optimizer

MAXDEG_MARKER = "# orderlab-maxdeg v1"


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _gen_from_args(args, seed: int):
    model = args.model.replace("-", "_")
    if model == "er":
        if args.pe is None:
            raise ParameterError("--pe is required for the er model")
        return gen_er(args.d, args.pe, seed)
    if model == "sparse_er":
        if args.c is None:
            raise ParameterError("--c is required for the sparse-er model")
        return gen_sparse_er(args.d, args.c, seed)
    if model == "ba":
        return gen_ba(args.d, args.m, args.kappa, seed)
    raise ParameterError(f"unknown model {args.model!r}")


def cmd_gen(args) -> int:
    dag = _gen_from_args(args, args.seed)
    if args.out:
        save_graph(dag, args.out)
    else:
        sys.stdout.write(graph_text(dag))
    return 0


def cmd_eval(args) -> int:
    if args.graph:
        dag = load_graph(args.graph)
    else:
        if not args.model:
            raise ParameterError("either --graph or --model is required")
        dag = _gen_from_args(args, derive_seed(args.seed, 0))
    iv = sample_interventions(dag.d, args.p_int, seed=derive_seed(args.seed, 1))
    oracle = build_oracle(dag, iv, epsilon=args.epsilon, delta=args.delta,
                          mode=args.mode, eta=args.eta, seed=derive_seed(args.seed, 2))
    c = args.score_const if args.score_const is not None else default_score_const(
        args.epsilon, args.delta)
    optimizer = args.optimizer
    if optimizer == "auto":
        optimizer = "exact" if dag.d <= EXHAUSTIVE_LIMIT else "heuristic"
    if optimizer == "exact":
        order = opt_exact(oracle, iv, c)
    else:
        order = opt_heuristic(oracle, iv, c, seed=derive_seed(args.seed, 3))
    ev = evaluate(dag, order, oracle, iv, c)
    record = ev.as_dict()
    record.update({
        "provenance": order.provenance,
        "mode": args.mode,
        "d": dag.d,
        "edge_count": dag.edge_count,
        "intervened": [int(x) for x in iv.targets()],
    })
    if args.dump_oracle:
        oracle.dump_csv(args.dump_oracle)
    perm_line = " ".join(str(p) for p in order.perm)
    _write_or_print(perm_line + "\n" + json.dumps(record, sort_keys=True), args.out)
    return 0


def _bound_rows(args) -> list[tuple[str, str, float]]:
    family = args.family.replace("-", "_")
    rows: list[tuple[str, str, float]] = []
    delta = args.delta_slack
    for p_int in args.p_int:
        tag = f"d={args.d} p_int={p_int}"
        if family == "er":
            if args.pe is None:
                raise ParameterError("--pe is required for the er family")
            rows.append(("er_expectation_fnr", f"{tag} p_e={args.pe}",
                         bounds_mod.er_expectation_fnr(args.d, args.pe, p_int, delta)))
            rows.append(("er_dense_g_tail", f"{tag} p_e={args.pe} t={args.t}",
                         bounds_mod.er_dense_g_tail(args.t, args.d, args.pe, p_int, delta)))
            rows.append(("chernoff_edge_lower", f"d={args.d} p_e={args.pe} delta={args.ce_delta}",
                         bounds_mod.chernoff_edge_lower(args.d, args.pe, args.ce_delta)))
        elif family == "sparse_er":
            if args.c is None:
                raise ParameterError("--c is required for the sparse-er family")
            rows.append(("sparse_er_expectation_fnr", f"{tag} c={args.c}",
                         bounds_mod.sparse_er_expectation_fnr(args.d, args.c, p_int, delta)))
            rows.append(("sparse_er_expectation_fnr_limit", f"p_int={p_int} c={args.c}",
                         bounds_mod.sparse_er_expectation_fnr_limit(args.c, p_int)))
            rows.append(("sparse_er_prob_fnr", f"{tag} c={args.c} c_e={args.c_e}",
                         bounds_mod.sparse_er_prob_fnr(args.c_e, args.d, args.c, p_int, delta)))
        elif family == "ba":
            ba = bounds_mod.ba_expectation_bounds(args.d, args.m, p_int)
            rows.append(("ba_f_mean", f"{tag} m={args.m}", ba.f_mean))
            rows.append(("ba_g_mean", f"{tag} m={args.m}", ba.g_mean))
            rows.append(("ba_fnr_tail", f"{tag} c_e={args.c_e}",
                         bounds_mod.ba_fnr_tail(args.c_e, p_int)))
            if args.c_hat is not None:
                _, beta = gamma_of(args.m, args.kappa)
                rows.append((
                    "ba_mcdiarmid_tail",
                    f"{tag} m={args.m} kappa={args.kappa} c_hat={args.c_hat} t={args.t}",
                    bounds_mod.ba_mcdiarmid_tail(args.t, args.d, args.m, beta, args.c_hat),
                ))
        else:
            raise ParameterError(f"unknown bound family {args.family!r}")
    return rows


def cmd_bounds(args) -> int:
    rows = _bound_rows(args)
    lines = ["bound,params,value,clamped"]
    for name, params, value in rows:
        clamped = "1" if name != "ba_f_mean" and value >= 1.0 else "0"
        lines.append(f"{name},{params},{value!r},{clamped}")
    _write_or_print("\n".join(lines), args.out)
    return 0


def cmd_sweep(args) -> int:
    overrides = dict(
        ensemble=args.ensemble.replace("-", "_") if args.ensemble else None,
        d_grid=[int(x) for x in args.d_grid.split(",")] if args.d_grid else None,
        density_grid=[float(x) for x in args.density_grid.split(",")] if args.density_grid else None,
        p_int_grid=[float(x) for x in args.p_int_grid.split(",")] if args.p_int_grid else None,
        m=args.m,
        runs_per_cell=args.runs,
        optimizer=args.optimizer,
        mode=args.mode,
        master_seed=args.seed,
    )
    if args.config:
        config = with_overrides(parse_config(Path(args.config).read_text()), **overrides)
    else:
        required = ("ensemble", "d_grid", "density_grid", "p_int_grid")
        if any(overrides[key] is None for key in required):
            raise ParameterError(
                "without --config, --ensemble/--d-grid/--density-grid/--p-int-grid are required")
        config = with_overrides(
            SweepConfig(**{key: overrides.pop(key) for key in required}), **overrides)
    records = run_sweep(config)
    out = args.out or "sweep.csv"
    persist(records, out)
    print(f"wrote {len(records)} cells ({sum(r.n_runs for r in records)} runs) to {out}")
    return 0


def _ba_maxdeg_points(m: int, kappa: float, d_grid: list[int], seeds_per_d: int, seed: int):
    points = []
    for d in d_grid:
        for s in range(seeds_per_d):
            dag = gen_ba(d, m, kappa, seed=derive_seed(seed, d, s))
            points.append((d, s, int((dag.in_degrees() + dag.out_degrees()).max())))
    return points


def cmd_fit(args) -> int:
    if args.target == "ba-maxdeg":
        d_grid = [int(x) for x in args.d_grid.split(",")]
        points = _ba_maxdeg_points(args.m, args.kappa, d_grid, args.seeds_per_d, args.seed)
        ds = sorted({d for d, _, _ in points})
        means = [float(np.mean([v for d2, _, v in points if d2 == d])) for d in ds]
        fit = fit_scaling(ds, means)
        gamma_hat = 1.0 / fit.exponent + 1.0
        gamma, beta = gamma_of(args.m, args.kappa)
        report = {
            "target": "ba-maxdeg", "m": args.m, "kappa": args.kappa,
            "beta_hat": fit.exponent, "gamma_hat": gamma_hat, "r2": fit.r2,
            "beta_theory": beta, "gamma_theory": gamma,
        }
        if args.out:
            lines = [MAXDEG_MARKER,
                     f"# m={args.m} kappa={args.kappa} seed={args.seed}"
                     f" beta_hat={fit.exponent!r} gamma_hat={gamma_hat!r} r2={fit.r2!r}",
                     "d,seed_index,max_total_deg,aggregate,mean_max_deg"]
            for d, s, v in points:
                lines.append(f"{d},{s},{v},0,")
            for d, mean in zip(ds, means):
                lines.append(f"{d},,,1,{mean!r}")
            Path(args.out).write_text("\n".join(lines) + "\n")
        print(json.dumps(report, sort_keys=True))
        return 0
    if args.target == "csv-width":
        if not args.csv:
            raise ParameterError("--csv is required for the csv-width target")
        records = load(args.csv)
        if args.density is not None:
            records = [r for r in records if r.density == args.density]
        if args.p_int_filter is not None:
            records = [r for r in records if r.p_int == args.p_int_filter]
        if not records:
            raise ParameterError("no records left after filtering")
        from .harness import deviation_profile

        profile = deviation_profile(records, metric=args.metric, stat=args.stat)
        fit = fit_scaling([d for d, _ in profile], [v for _, v in profile])
        report = {
            "target": "csv-width", "metric": args.metric, "stat": args.stat,
            "exponent": fit.exponent, "r2": fit.r2, "n_used": fit.n_used,
        }
        out_text = json.dumps(report, sort_keys=True)
        _write_or_print(out_text, args.out)
        if args.out:
            print(out_text)
        return 0
    raise ParameterError(f"unknown fit target {args.target!r}")


def cmd_verify(args) -> int:
    suites = []
    wanted = ("optimizer", "lemma", "lipschitz") if args.suite == "all" else (args.suite,)
    modes = ("ancestral", "restricted") if args.mode == "both" else (args.mode,)
    for mode in modes:
        if "optimizer" in wanted:
            suites.append(verify_optimizer(args.instances, args.d_max, mode, args.seed))
        if "lemma" in wanted:
            suites.append(verify_lemma(args.instances, args.d_max, mode, args.seed))
        if "lipschitz" in wanted:
            suites.append(verify_lipschitz(args.instances, min(args.d_max, 7), mode, args.seed))
    lines = []
    failed = False
    for suite in suites:
        ok = suite.passed()
        failed = failed or not ok
        lines.append(("PASS " if ok else "FAIL ") + suite.summary())
        if not ok:
            violations = getattr(suite, "violations", None) or getattr(suite, "excess", [])
            lines.extend("  " + v for v in violations[:20])
            if len(violations) > 20:
                lines.append(f"  ... and {len(violations) - 20} more")
    _write_or_print("\n".join(lines), args.out)
    if args.out:
        print("\n".join(line for line in lines if not line.startswith("  ")))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orderlab",
        description="Interventional causal-order recovery on random DAGs, with"
                    " Monte Carlo verification of analytic error bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_default=0):
        p.add_argument("--seed", type=int, default=seed_default, help="master random seed")
        p.add_argument("--out", help="output file (default: stdout)")

    p_gen = sub.add_parser("gen", help="generate a random DAG and write its edge list")
    p_gen.add_argument("--model", required=True, choices=["er", "sparse-er", "ba"])
    p_gen.add_argument("--d", type=int, required=True)
    p_gen.add_argument("--pe", type=float, help="edge probability (er)")
    p_gen.add_argument("--c", type=float, help="average-degree constant (sparse-er)")
    p_gen.add_argument("--m", type=int, default=3, help="links per node (ba)")
    p_gen.add_argument("--kappa", type=float, default=1.0, help="attractiveness (ba)")
    add_common(p_gen)
    p_gen.set_defaults(func=cmd_gen)

    p_eval = sub.add_parser("eval", help="run the oracle/optimizer pipeline on one instance")
    p_eval.add_argument("--graph", help="edge-list file (alternative to --model)")
    p_eval.add_argument("--model", choices=["er", "sparse-er", "ba"])
    p_eval.add_argument("--d", type=int)
    p_eval.add_argument("--pe", type=float)
    p_eval.add_argument("--c", type=float)
    p_eval.add_argument("--m", type=int, default=3)
    p_eval.add_argument("--kappa", type=float, default=1.0)
    p_eval.add_argument("--p-int", type=float, default=0.5, dest="p_int")
    p_eval.add_argument("--mode", choices=["ancestral", "restricted"], default="ancestral")
    p_eval.add_argument("--optimizer", choices=["exact", "heuristic", "auto"], default="auto")
    p_eval.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p_eval.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p_eval.add_argument("--eta", type=float, default=0.0, help="oracle noise level in [0,1)")
    p_eval.add_argument("--score-const", type=float, dest="score_const")
    p_eval.add_argument("--dump-oracle", dest="dump_oracle",
                        help="also write the oracle distance matrix as CSV")
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_bounds = sub.add_parser("bounds", help="emit a CSV table of analytic bounds")
    p_bounds.add_argument("--family", required=True, choices=["er", "sparse-er", "ba"])
    p_bounds.add_argument("--d", type=int, required=True)
    p_bounds.add_argument("--pe", type=float)
    p_bounds.add_argument("--c", type=float)
    p_bounds.add_argument("--m", type=int, default=3)
    p_bounds.add_argument("--kappa", type=float, default=1.0)
    p_bounds.add_argument("--p-int", type=float, nargs="+", default=[0.25, 0.5, 0.75],
                          dest="p_int")
    p_bounds.add_argument("--t", type=float, default=0.1, help="deviation threshold")
    p_bounds.add_argument("--c-e", type=float, default=0.5, dest="c_e",
                          help="FNR tail threshold")
    p_bounds.add_argument("--delta-slack", type=float, dest="delta_slack",
                          help="Chernoff slack (default d**-0.5)")
    p_bounds.add_argument("--ce-delta", type=float, default=0.1, dest="ce_delta",
                          help="slack for the edge-count Chernoff row")
    p_bounds.add_argument("--c-hat", type=float, dest="c_hat",
                          help="empirical degree constant enabling the ba deviation row")
    add_common(p_bounds)
    p_bounds.set_defaults(func=cmd_bounds)

    p_sweep = sub.add_parser("sweep", help="run a seeded Monte Carlo sweep to CSV")
    p_sweep.add_argument("--config", help="key = value sweep configuration file")
    p_sweep.add_argument("--ensemble", choices=["er", "sparse-er", "sparse_er", "ba"])
    p_sweep.add_argument("--d-grid", dest="d_grid")
    p_sweep.add_argument("--density-grid", dest="density_grid")
    p_sweep.add_argument("--p-int-grid", dest="p_int_grid")
    p_sweep.add_argument("--m", type=int)
    p_sweep.add_argument("--runs", type=int)
    p_sweep.add_argument("--optimizer", choices=["exact", "heuristic", "auto"])
    p_sweep.add_argument("--mode", choices=["ancestral", "restricted"])
    add_common(p_sweep, seed_default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_fit = sub.add_parser("fit", help="log-log scaling fits (max degree or sweep widths)")
    p_fit.add_argument("--target", required=True, choices=["ba-maxdeg", "csv-width"])
    p_fit.add_argument("--m", type=int, default=3)
    p_fit.add_argument("--kappa", type=float, default=1.0)
    p_fit.add_argument("--d-grid", dest="d_grid",
                       default="30,60,120,250,500,1000,2000,4000")
    p_fit.add_argument("--seeds-per-d", type=int, default=10, dest="seeds_per_d")
    p_fit.add_argument("--csv", help="sweep CSV (csv-width target)")
    p_fit.add_argument("--metric", choices=["f", "g"], default="g")
    p_fit.add_argument("--stat", choices=["iqr", "std", "mean"], default="std")
    p_fit.add_argument("--density", type=float, help="filter sweep rows by density")
    p_fit.add_argument("--p-int-filter", type=float, dest="p_int_filter",
                       help="filter sweep rows by intervention coverage")
    add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_verify = sub.add_parser("verify", help="run the small-instance gold suites")
    p_verify.add_argument("--suite", choices=["optimizer", "lemma", "lipschitz", "all"],
                          default="all")
    p_verify.add_argument("--d-max", type=int, default=8, dest="d_max")
    p_verify.add_argument("--instances", type=int, default=500)
    p_verify.add_argument("--mode", choices=["ancestral", "restricted", "both"],
                          default="both")
    add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError, ExhaustiveLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
