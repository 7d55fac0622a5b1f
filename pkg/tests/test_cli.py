import csv
import json

import pytest

from mixedcausal.cli import main
from mixedcausal.formats import read_dataset, read_graph, read_meta


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    rc = main([
        "simulate", "--nvars", "12", "--frac-discrete", "0.5",
        "--samples", "250", "--seed", "3", "--out", str(out),
    ])
    assert rc == 0
    return out


class TestSimulateCommand:
    def test_outputs_exist_and_parse(self, sim_dir):
        data = read_dataset(sim_dir / "data.csv", meta_path=sim_dir / "meta.json")
        assert data.n == 250 and data.n_vars == 12
        metas = read_meta(sim_dir / "meta.json")
        truth = read_graph(sim_dir / "truth.graph", metas)
        assert truth.n_vars == 12

    def test_roundtrip_values_exact(self, sim_dir):
        data = read_dataset(sim_dir / "data.csv", meta_path=sim_dir / "meta.json")
        again = read_dataset(sim_dir / "data.csv", meta_path=sim_dir / "meta.json")
        for c1, c2 in zip(data.columns, again.columns):
            assert (c1 == c2).all()

    def test_meta_schema(self, sim_dir):
        payload = json.loads((sim_dir / "meta.json").read_text())
        assert payload["n"] == 250
        kinds = {v["kind"] for v in payload["variables"]}
        assert kinds == {"continuous", "categorical"}
        for v in payload["variables"]:
            if v["kind"] == "categorical":
                assert v["levels"] == ["0", "1", "2"]


class TestCiTestCommand:
    def test_prints_verdict(self, sim_dir, capsys):
        data = read_dataset(sim_dir / "data.csv", meta_path=sim_dir / "meta.json")
        names = [v.name for v in data.variables]
        rc = main([
            "citest", "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--x", names[0], "--y", names[1], "--alpha", "0.05",
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "statistic=" in out and "dof=" in out and "p=" in out

    def test_conditional_query(self, sim_dir, capsys):
        data = read_dataset(sim_dir / "data.csv", meta_path=sim_dir / "meta.json")
        names = [v.name for v in data.variables]
        rc = main([
            "citest", "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--x", names[0], "--y", names[1],
            "--given", f"{names[2]},{names[3]}",
        ])
        assert rc == 0


class TestLearnCommands:
    def test_mgm_writes_graph(self, sim_dir, tmp_path):
        out = tmp_path / "mgm.graph"
        rc = main([
            "mgm", "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--lambda", "0.2", "--out", str(out),
        ])
        assert rc == 0
        g = read_graph(out)
        assert g.n_vars == 12

    @pytest.mark.parametrize("algo", ["pcs", "cpcs", "mgm-pcs", "mgm-cpcs"])
    def test_learn_all_algos(self, sim_dir, tmp_path, algo, capsys):
        out = tmp_path / f"{algo}.graph"
        args = [
            "learn", "--algo", algo, "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--alpha", "0.05", "--out", str(out),
        ]
        if algo.startswith("mgm"):
            args += ["--lambda", "0.3"]
        assert main(args) == 0
        stats_line = capsys.readouterr().out
        assert "tests" in stats_line and "edges" in stats_line
        assert read_graph(out).n_vars == 12

    def test_three_lambdas_accepted(self, sim_dir, tmp_path):
        out = tmp_path / "m3.graph"
        rc = main([
            "mgm", "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--lambda", "0.2,0.3,0.4", "--out", str(out),
        ])
        assert rc == 0


class TestCpssCommand:
    def test_cpss_with_frequency_table(self, sim_dir, tmp_path):
        out = tmp_path / "cpss.graph"
        freq = tmp_path / "freq.csv"
        rc = main([
            "cpss", "--algo", "mgm-pcs", "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--alpha", "0.05", "--lambda", "0.3", "--q", "0.05",
            "--pairs", "4", "--seed", "1",
            "--out", str(out), "--freq-out", str(freq),
        ])
        assert rc == 0
        with open(freq) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["a", "b", "adjacency_freq", "freq_a_to_b", "freq_b_to_a"]


class TestEvaluateCommand:
    def test_report_csv(self, sim_dir, tmp_path):
        est = tmp_path / "est.graph"
        main([
            "learn", "--algo", "pcs", "--data", str(sim_dir / "data.csv"),
            "--meta", str(sim_dir / "meta.json"),
            "--alpha", "0.05", "--out", str(est),
        ])
        report = tmp_path / "report.csv"
        rc = main([
            "evaluate", "--est", str(est), "--truth", str(sim_dir / "truth.graph"),
            "--meta", str(sim_dir / "meta.json"), "--out", str(report),
        ])
        assert rc == 0
        with open(report) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["scope", "metric", "value", "tp", "fp", "fn", "tn"]
        scopes = {r[0] for r in rows[1:]}
        assert scopes == {"all", "cc", "cd", "dd"}


class TestBenchCommand:
    def test_tiny_bench_run(self, tmp_path):
        cfg = tmp_path / "bench.json"
        cfg.write_text(json.dumps({
            "preset": {"n_vars": 8, "frac_discrete": 0.5, "n_samples": 60},
        }))
        out = tmp_path / "bench"
        rc = main([
            "bench", "--preset", "ld", "--replicates", "2", "--seed", "4",
            "--algos", "pcs", "--alphas", "0.05", "--config", str(cfg),
            "--out", str(out),
        ])
        assert rc == 0
        for name in ("results.csv", "summary.csv", "timing.csv"):
            assert (out / name).exists()
