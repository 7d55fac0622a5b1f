import csv
import time

from mixedcausal.bench import (
    BenchCell,
    BenchSpec,
    make_spec,
    register_algo,
    run_benchmark,
    run_benchmark_to_dir,
    summarize,
    timing_report,
)
from mixedcausal.model import MarkedGraph, undirected
from mixedcausal.simulate import SimConfig

TINY = SimConfig(n_vars=8, frac_discrete=0.5, n_samples=80)


def tiny_spec(cells, replicates=3, threads=1):
    return BenchSpec(
        sim=TINY, cells=tuple(cells), replicates=replicates, seed=5, threads=threads
    )


class TestSpecBuilding:
    def test_grid_expansion(self):
        spec = make_spec(
            preset="ld",
            algos=("pcs", "mgm-pcs", "cpss-mgm-cpcs"),
            alphas=(0.01, 0.05),
            lambdas=(0.1, 0.2),
            qs=(0.05,),
            replicates=2,
        )
        by_algo = {}
        for c in spec.cells:
            by_algo.setdefault(c.algo, []).append(c)
        assert len(by_algo["pcs"]) == 2  # alphas only
        assert len(by_algo["mgm-pcs"]) == 4  # alphas x lambdas
        assert len(by_algo["cpss-mgm-cpcs"]) == 4  # alphas x lambdas x one q
        assert all(c.q == 0.05 for c in by_algo["cpss-mgm-cpcs"])

    def test_preset_sizes(self):
        assert make_spec(preset="hd").sim.n_vars == 200
        assert make_spec(preset="ld").sim.n_samples == 500


class TestRun:
    def test_row_counts_per_cell(self):
        cells = [BenchCell("pcs", 0.05), BenchCell("mgm-pcs", 0.05, 0.2)]
        rows = run_benchmark(tiny_spec(cells, replicates=3))
        per_cell = {}
        for r in rows:
            per_cell.setdefault((r[1], r[2], r[3]), set()).add(r[0])
        for key, reps in per_cell.items():
            assert reps == {0, 1, 2}, key
        # 4 scopes x (6 metrics + shd) per replicate per cell
        assert len(rows) == 3 * 2 * 4 * 7

    def test_deterministic_apart_from_seconds(self):
        cells = [BenchCell("pcs", 0.05)]
        r1 = run_benchmark(tiny_spec(cells))
        r2 = run_benchmark(tiny_spec(cells))
        strip = lambda rows: [r[:8] + r[9:] for r in rows]
        assert strip(r1) == strip(r2)

    def test_parallel_matches_serial(self):
        cells = [BenchCell("pcs", 0.05), BenchCell("cpcs", 0.05)]
        r1 = run_benchmark(tiny_spec(cells, threads=1))
        r2 = run_benchmark(tiny_spec(cells, threads=2))
        strip = lambda rows: [r[:8] + r[9:] for r in rows]
        assert strip(r1) == strip(r2)

    def test_cell_failure_flagged_and_run_continues(self):
        def broken(cell, data, seed, pairs):
            raise RuntimeError("deliberate")

        register_algo("broken", broken)
        cells = [BenchCell("broken"), BenchCell("pcs", 0.05)]
        rows = run_benchmark(tiny_spec(cells, replicates=2))
        errors = [r for r in rows if r[6] == "error"]
        assert len(errors) == 2
        assert all("deliberate" in r[10] for r in errors)
        ok = [r for r in rows if r[1] == "pcs"]
        assert len(ok) == 2 * 28

    def test_cpss_cell_runs(self):
        cells = [BenchCell("cpss-mgm-pcs", 0.05, 0.3, 0.05)]
        spec = BenchSpec(
            sim=TINY, cells=tuple(cells), replicates=1, seed=2, cpss_pairs=3
        )
        rows = run_benchmark(spec)
        assert len(rows) == 28
        assert all(r[10] == "" for r in rows)


class TestAggregation:
    def test_summary_excludes_undefined(self):
        rows = [
            (0, "a", 0.05, None, None, "all", "m", 1.0, 0.1, 5, ""),
            (1, "a", 0.05, None, None, "all", "m", None, 0.1, 5, ""),
            (2, "a", 0.05, None, None, "all", "m", 3.0, 0.1, 5, ""),
        ]
        out = summarize(rows)
        assert len(out) == 1
        *_, mean, se, n = out[0]
        assert mean == 2.0 and n == 2

    def test_timing_stub_sleep(self):
        def sleeper(cell, data, seed, pairs):
            time.sleep(0.01)
            return MarkedGraph(data.variables, [undirected(0, 1)])

        register_algo("sleep10ms", sleeper)
        rows = run_benchmark(tiny_spec([BenchCell("sleep10ms")], replicates=4))
        table = timing_report(rows)
        assert len(table) == 1
        mean, lo, hi = table[0][4], table[0][5], table[0][6]
        assert 0.009 <= mean <= 0.06
        assert hi - lo < 0.05


class TestOutputs:
    def test_written_files(self, tmp_path):
        cells = [BenchCell("pcs", 0.05)]
        paths = run_benchmark_to_dir(tiny_spec(cells, replicates=2), tmp_path)
        for name in ("results", "summary", "timing"):
            assert paths[name].exists()
        with open(paths["results"]) as fh:
            header = next(csv.reader(fh))
        assert header == [
            "replicate", "algo", "alpha", "lambda", "q", "scope", "metric",
            "value", "seconds", "n_edges", "error",
        ]
