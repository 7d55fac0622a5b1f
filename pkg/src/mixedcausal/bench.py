"""Benchmark harness: replicated synthetic runs over parameter grids.

Each replicate simulates one network (seeded as ``seed + replicate``) and
runs every requested (algorithm, alpha, lambda, q) cell on it, recording
evaluation metrics, wall time and predicted edge count. Output is a
long-form results table plus mean/standard-error summaries and a timing
table; per-cell failures become rows with an error flag and the run
continues. With a fixed seed the results are bit-identical apart from the
seconds column.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path

from .cpss import CpssConfig, cpss_run
from .metrics import evaluate
from .mgm import MgmConfig
from .search import SearchConfig, cpc_stable, mgm_cpcs, mgm_pcs, pc_stable
from .simulate import HD_PRESET, LD_PRESET, SimConfig, simulate_dataset

__all__ = [
    "BenchCell",
    "BenchSpec",
    "make_spec",
    "run_benchmark",
    "run_benchmark_to_dir",
    "timing_report",
    "summarize",
]

DEFAULT_ALPHAS = (0.001, 0.01, 0.05, 0.1)
DEFAULT_LAMBDAS = (0.1, 0.14, 0.2, 0.28, 0.4, 0.57, 0.8)
DEFAULT_QS = (0.001, 0.01, 0.05, 0.1)
DEFAULT_ALGOS = ("pcs", "cpcs", "mgm-pcs", "mgm-cpcs")

RESULT_COLUMNS = (
    "replicate",
    "algo",
    "alpha",
    "lambda",
    "q",
    "scope",
    "metric",
    "value",
    "seconds",
    "n_edges",
    "error",
)


@dataclass(frozen=True)
class BenchCell:
    algo: str
    alpha: float | None = None
    lam: float | None = None
    q: float | None = None


@dataclass(frozen=True)
class BenchSpec:
    sim: SimConfig
    cells: tuple[BenchCell, ...]
    replicates: int = 50
    seed: int = 0
    threads: int = 1
    cpss_pairs: int = 50


def resolve_preset(preset) -> SimConfig:
    if isinstance(preset, SimConfig):
        return preset
    if isinstance(preset, dict):
        return SimConfig(**preset)
    name = str(preset).lower()
    if name == "ld":
        return LD_PRESET
    if name == "hd":
        return HD_PRESET
    raise ValueError(f"unknown preset {preset!r}")


def make_spec(
    preset="hd",
    algos=DEFAULT_ALGOS,
    alphas=DEFAULT_ALPHAS,
    lambdas=DEFAULT_LAMBDAS,
    qs=DEFAULT_QS,
    replicates: int = 50,
    seed: int = 0,
    threads: int = 1,
    cpss_pairs: int = 50,
) -> BenchSpec:
    """Expand grids into the cell list (lambda only for MGM hybrids, q only
    for CPSS wrappers)."""
    cells = []
    for algo in algos:
        lam_grid = lambdas if "mgm" in algo else (None,)
        q_grid = qs if algo.startswith("cpss-") else (None,)
        for alpha in alphas:
            for lam in lam_grid:
                for q in q_grid:
                    cells.append(BenchCell(algo, alpha, lam, q))
    return BenchSpec(
        sim=resolve_preset(preset),
        cells=tuple(cells),
        replicates=replicates,
        seed=seed,
        threads=threads,
        cpss_pairs=cpss_pairs,
    )


def _base_runner(algo: str, alpha: float, lam: float | None, data):
    cfg = SearchConfig(alpha=alpha)
    if algo == "pcs":
        return pc_stable(data, cfg)
    if algo == "cpcs":
        return cpc_stable(data, cfg)
    if algo == "mgm-pcs":
        return mgm_pcs(data, cfg, MgmConfig(lam))
    if algo == "mgm-cpcs":
        return mgm_cpcs(data, cfg, MgmConfig(lam))
    raise ValueError(f"unknown algorithm {algo!r}")


_EXTRA_ALGOS: dict = {}


def register_algo(name: str, fn) -> None:
    """Register a custom cell runner (cell, data, seed, pairs) -> graph.

    Intended for harness self-tests (timing stubs and the like).
    """
    _EXTRA_ALGOS[name] = fn


def run_cell(cell: BenchCell, data, seed: int, cpss_pairs: int):
    if cell.algo in _EXTRA_ALGOS:
        return _EXTRA_ALGOS[cell.algo](cell, data, seed, cpss_pairs)
    if cell.algo.startswith("cpss-"):
        base = partial(_base_runner, cell.algo[len("cpss-") :], cell.alpha, cell.lam)
        cfg = CpssConfig(q=cell.q, pairs=cpss_pairs, seed=seed)
        return cpss_run(data, base, cfg).graph
    return _base_runner(cell.algo, cell.alpha, cell.lam, data)


def _replicate_rows(spec: BenchSpec, rep: int) -> list[tuple]:
    sim_cfg = replace(spec.sim, seed=spec.seed + rep)
    model, data = simulate_dataset(sim_cfg)
    rows = []
    for cell in spec.cells:
        t0 = time.perf_counter()
        try:
            graph = run_cell(cell, data, seed=spec.seed + rep, cpss_pairs=spec.cpss_pairs)
            seconds = time.perf_counter() - t0
            report = evaluate(graph, model.dag)
        except Exception as exc:  # per-cell failure: flag the row, continue
            seconds = time.perf_counter() - t0
            rows.append(
                (rep, cell.algo, cell.alpha, cell.lam, cell.q, "all", "error",
                 None, seconds, None, f"{type(exc).__name__}: {exc}")
            )
            continue
        n_edges = graph.n_edges
        for scope, metric, value, *_ in report.rows():
            rows.append(
                (rep, cell.algo, cell.alpha, cell.lam, cell.q, scope, metric,
                 value, seconds, n_edges, "")
            )
    return rows


def run_benchmark(spec: BenchSpec) -> list[tuple]:
    """All result rows, ordered by replicate then cell."""
    if spec.threads > 1:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            chunks = list(
                pool.map(partial(_replicate_rows, spec), range(spec.replicates))
            )
    else:
        chunks = [_replicate_rows(spec, r) for r in range(spec.replicates)]
    return [row for chunk in chunks for row in chunk]


def _mean_se(values: list[float]) -> tuple[float, float, int]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0, n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n), n


def summarize(rows: list[tuple]) -> list[tuple]:
    """Mean and standard error per cell/scope/metric over replicates.

    Undefined values (failed cells, undefined precision) are excluded from
    the average; the count of defined values is reported alongside.
    """
    groups: dict[tuple, list[float]] = {}
    for rep, algo, alpha, lam, q, scope, metric, value, *_ in rows:
        if metric == "error":
            continue
        groups.setdefault((algo, alpha, lam, q, scope, metric), []).append(value)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        values = [v for v in groups[key] if v is not None]
        if values:
            mean, se, n = _mean_se(values)
        else:
            mean, se, n = None, None, 0
        out.append((*key, mean, se, n))
    return out


def timing_report(rows: list[tuple]) -> list[tuple]:
    """Mean wall seconds with a 95 percent CI per (algo, alpha, lambda, q)."""
    seen: dict[tuple, dict[int, float]] = {}
    for rep, algo, alpha, lam, q, *_rest in rows:
        seconds = _rest[3]
        seen.setdefault((algo, alpha, lam, q), {})[rep] = seconds
    out = []
    for key in sorted(seen, key=lambda k: tuple(str(x) for x in k)):
        per_rep = list(seen[key].values())
        mean, se, n = _mean_se(per_rep)
        half = 1.96 * se
        out.append((*key, mean, mean - half, mean + half, n))
    return out


def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_benchmark_to_dir(spec: BenchSpec, outdir) -> dict[str, Path]:
    """Run and write results.csv, summary.csv and timing.csv."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = run_benchmark(spec)
    paths = {
        "results": outdir / "results.csv",
        "summary": outdir / "summary.csv",
        "timing": outdir / "timing.csv",
    }
    _write_csv(paths["results"], RESULT_COLUMNS, rows)
    _write_csv(
        paths["summary"],
        ("algo", "alpha", "lambda", "q", "scope", "metric", "mean", "se", "n"),
        summarize(rows),
    )
    _write_csv(
        paths["timing"],
        ("algo", "alpha", "lambda", "q", "mean_seconds", "ci95_lo", "ci95_hi", "n"),
        timing_report(rows),
    )
    return paths
