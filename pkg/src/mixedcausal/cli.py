"""Command-line interface.

Subcommands: simulate, citest, mgm, learn, cpss, evaluate, bench. File
formats are documented in :mod:`mixedcausal.formats`.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from functools import partial
from pathlib import Path

from . import bench as bench_mod
from . import formats
from .citest import CiTester
from .cpss import CpssConfig, cpss_run
from .metrics import evaluate
from .mgm import MgmConfig, mgm_learn
from .search import SearchConfig, cpc_stable, mgm_cpcs, mgm_pcs, pc_stable
from .simulate import SimConfig, simulate_dataset

ALGO_CHOICES = ("pcs", "cpcs", "mgm-pcs", "mgm-cpcs")


def _parse_lambdas(text: str) -> MgmConfig:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 1:
        return MgmConfig(lam=parts[0])
    if len(parts) == 3:
        return MgmConfig(
            lam=parts[0], lam_cc=parts[0], lam_cd=parts[1], lam_dd=parts[2]
        )
    raise argparse.ArgumentTypeError("--lambda takes one or three values")


def _load_dataset(args):
    meta = getattr(args, "meta", None)
    return formats.read_dataset(args.data, meta_path=meta)


def _cmd_simulate(args) -> int:
    if args.preset:
        cfg = bench_mod.resolve_preset(args.preset)
        cfg = SimConfig(
            n_vars=cfg.n_vars,
            frac_discrete=cfg.frac_discrete,
            n_samples=args.samples or cfg.n_samples,
            seed=args.seed,
        )
    else:
        cfg = SimConfig(
            n_vars=args.nvars,
            frac_discrete=args.frac_discrete,
            n_samples=args.samples or 500,
            n_levels=args.levels,
            max_degree=args.max_degree,
            max_avg_degree=args.avg_degree,
            seed=args.seed,
        )
    model, data = simulate_dataset(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats.write_dataset(data, out / "data.csv")
    formats.write_graph(model.dag, out / "truth.graph")
    formats.write_meta(data, out / "meta.json")
    print(f"wrote {out}/data.csv, truth.graph, meta.json "
          f"({data.n} samples, {data.n_vars} variables, {model.dag.n_edges} edges)")
    return 0


def _cmd_citest(args) -> int:
    data = _load_dataset(args)
    tester = CiTester(data)
    x, y = data.index_of(args.x), data.index_of(args.y)
    given = [data.index_of(n) for n in args.given.split(",") if n] if args.given else []
    res = tester.test(x, y, set(given), args.alpha)
    verdict = "independent" if res.independent else "dependent"
    flag = " (degenerate)" if res.degenerate else ""
    print(f"statistic={res.statistic:.6g} dof={res.dof} p={res.p_value:.6g} "
          f"-> {verdict} at alpha={args.alpha}{flag}")
    return 0


def _cmd_mgm(args) -> int:
    data = _load_dataset(args)
    cfg = _parse_lambdas(args.lam)
    result = mgm_learn(data, cfg)
    formats.write_graph(result.graph, args.out)
    print(f"mgm: {result.graph.n_edges} edges, {result.iterations} iterations, "
          f"converged={result.converged}")
    return 0


def _cmd_learn(args) -> int:
    data = _load_dataset(args)
    cfg = SearchConfig(alpha=args.alpha, max_depth=args.depth, threads=args.threads)
    stats: dict = {}
    t0 = time.perf_counter()
    if args.algo in ("mgm-pcs", "mgm-cpcs"):
        if args.lam is None:
            raise SystemExit("--lambda is required for MGM hybrids")
        mgm_cfg = _parse_lambdas(args.lam)
        fn = mgm_pcs if args.algo == "mgm-pcs" else mgm_cpcs
        graph = fn(data, cfg, mgm_cfg, stats=stats)
    else:
        fn = pc_stable if args.algo == "pcs" else cpc_stable
        graph = fn(data, cfg, stats=stats)
    seconds = time.perf_counter() - t0
    formats.write_graph(graph, args.out)
    print(f"{args.algo}: {graph.n_edges} edges, {stats.get('n_tests', 0)} tests, "
          f"{seconds:.2f}s")
    return 0


def _cmd_cpss(args) -> int:
    data = _load_dataset(args)
    base = partial(
        bench_mod._base_runner,
        args.algo,
        args.alpha,
        float(args.lam.split(",")[0]) if args.lam else None,
    )
    cfg = CpssConfig(q=args.q, pairs=args.pairs, seed=args.seed, workers=args.threads)
    result = cpss_run(data, base, cfg)
    formats.write_graph(result.graph, args.out)
    if args.freq_out:
        names = [v.name for v in data.variables]
        with open(args.freq_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("a,b,adjacency_freq,freq_a_to_b,freq_b_to_a\n")
            for (a, b), count in sorted(result.frequencies.adjacency.items()):
                fh.write(
                    f"{names[a]},{names[b]},"
                    f"{count / result.frequencies.n_runs},"
                    f"{result.frequencies.orientation_freq(a, b)},"
                    f"{result.frequencies.orientation_freq(b, a)}\n"
                )
    print(f"cpss: threshold={result.threshold:.4f} "
          f"avg_selected={result.frequencies.avg_selected:.1f} "
          f"edges={result.graph.n_edges}")
    return 0


def _cmd_evaluate(args) -> int:
    variables = formats.read_meta(args.meta) if args.meta else None
    est = formats.read_graph(args.est, variables)
    truth = formats.read_graph(args.truth, variables)
    report = evaluate(est, truth)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("scope,metric,value,tp,fp,fn,tn\n")
        for scope, metric, value, tp, fp, fn, tn in report.rows():
            val = "NA" if value is None else repr(value)
            fh.write(f"{scope},{metric},{val},{tp},{fp},{fn},{tn}\n")
    print(f"evaluate: shd={report.shd['all']} -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    kwargs = {}
    if args.config:
        kwargs = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.algos:
        kwargs["algos"] = tuple(args.algos.split(","))
    if args.alphas:
        kwargs["alphas"] = tuple(float(x) for x in args.alphas.split(","))
    if args.lambdas:
        kwargs["lambdas"] = tuple(float(x) for x in args.lambdas.split(","))
    if args.qs:
        kwargs["qs"] = tuple(float(x) for x in args.qs.split(","))
    spec = bench_mod.make_spec(
        preset=kwargs.pop("preset", args.preset),
        replicates=kwargs.pop("replicates", args.replicates),
        seed=kwargs.pop("seed", args.seed),
        threads=kwargs.pop("threads", args.threads),
        **kwargs,
    )
    paths = bench_mod.run_benchmark_to_dir(spec, args.out)
    print("wrote " + ", ".join(str(p) for p in paths.values()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedcausal",
        description="Directed causal graphs over mixed continuous/categorical data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--preset", choices=("ld", "hd"))
    p.add_argument("--nvars", type=int, default=50)
    p.add_argument("--frac-discrete", type=float, default=0.5)
    p.add_argument("--samples", type=int)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--max-degree", type=int, default=10)
    p.add_argument("--avg-degree", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("citest", help="one conditional independence query")
    p.add_argument("--data", required=True)
    p.add_argument("--meta")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--given", default="")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(fn=_cmd_citest)

    p = sub.add_parser("mgm", help="learn the undirected MGM graph")
    p.add_argument("--data", required=True)
    p.add_argument("--meta")
    p.add_argument("--lambda", dest="lam", required=True,
                   help="one value, or cc,cd,dd")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_mgm)

    p = sub.add_parser("learn", help="run a directed search")
    p.add_argument("--algo", choices=ALGO_CHOICES, required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--meta")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_learn)

    p = sub.add_parser("cpss", help="stability selection over a search")
    p.add_argument("--algo", choices=ALGO_CHOICES, required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--meta")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--freq-out")
    p.set_defaults(fn=_cmd_cpss)

    p = sub.add_parser("evaluate", help="score an estimate against truth")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--meta")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("bench", help="replicated benchmark over grids")
    p.add_argument("--preset", default="hd")
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--algos")
    p.add_argument("--alphas")
    p.add_argument("--lambdas")
    p.add_argument("--qs")
    p.add_argument("--config", help="JSON file with make_spec keyword arguments")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
