import numpy as np
import pytest

from oracles import sem_covariance

from mixedcausal.model import MarkedGraph, VariableMeta, directed, is_dag
from mixedcausal.regress import chi_squared_sf
from mixedcausal.simulate import (
    HD_PRESET,
    LD_PRESET,
    SemModel,
    SimConfig,
    make_rng,
    sample_dag,
    sample_parameters,
    simulate_data,
    simulate_dataset,
)


class TestSampleDag:
    def test_hd_preset_split(self):
        dag = sample_dag(HD_PRESET, make_rng(0))
        n_disc = sum(1 for v in dag.variables if not v.is_continuous)
        assert dag.n_vars == 200 and n_disc == 100
        assert all(v.n_levels == 3 for v in dag.variables if not v.is_continuous)

    def test_ld_preset_split(self):
        dag = sample_dag(LD_PRESET, make_rng(0))
        n_disc = sum(1 for v in dag.variables if not v.is_continuous)
        assert dag.n_vars == 50 and n_disc == 25

    def test_degree_constraints_and_dagness(self):
        for seed in range(5):
            dag = sample_dag(SimConfig(60, 0.5, 100, seed=seed), make_rng(seed))
            assert is_dag(dag)
            deg = np.zeros(dag.n_vars)
            for e in dag.edges:
                deg[e.a] += 1
                deg[e.b] += 1
            assert deg.max() <= 10
            assert deg.mean() <= 2.0
            assert dag.n_edges == 60  # floor(60 * 2 / 2)

    def test_zero_avg_degree_gives_empty(self):
        dag = sample_dag(SimConfig(2, 0.5, 10, max_avg_degree=0.0), make_rng(1))
        assert dag.n_edges == 0

    def test_unsatisfiable_raises(self):
        with pytest.raises(ValueError):
            sample_dag(SimConfig(2, 0.0, 10, max_avg_degree=4.0), make_rng(1))

    def test_seed_determinism(self):
        d1 = sample_dag(SimConfig(30, 0.4, 50, seed=5), make_rng(5))
        d2 = sample_dag(SimConfig(30, 0.4, 50, seed=5), make_rng(5))
        assert d1.named_edges() == d2.named_edges()


@pytest.fixture(scope="module")
def param_model():
    cfg = SimConfig(40, 0.5, 100, seed=3)
    rng = make_rng(3)
    dag = sample_dag(cfg, rng)
    return sample_parameters(dag, rng)


class TestSampleParameters:
    @pytest.fixture
    def model(self, param_model):
        return param_model

    def test_cc_weight_range(self, model):
        assert model.cc, "expect at least one cc edge at this seed"
        for w in model.cc.values():
            assert 1.0 <= abs(w) <= 1.5

    def test_cd_zero_sum_and_max(self, model):
        assert model.cd
        for v in model.cd.values():
            assert abs(v.sum()) < 1e-9
            assert 1.0 <= v.max() <= 1.5

    def test_dd_rows_cyclic_permutations(self, model):
        assert model.dd
        for m in model.dd.values():
            base = m[0]
            assert np.abs(m.sum(axis=1)).max() < 1e-9
            for r in range(m.shape[0]):
                np.testing.assert_allclose(m[r], np.roll(base, r))
            assert 1.0 <= base.max() <= 1.5

    def test_noise_sd_range(self, model):
        for sd in model.noise_sd.values():
            assert 1.0 <= sd <= 2.0


class TestSimulateData:
    def test_kinds_match_and_determinism(self):
        cfg = SimConfig(25, 0.4, 120, seed=11)
        m1, d1 = simulate_dataset(cfg)
        m2, d2 = simulate_dataset(cfg)
        for v, c1, c2 in zip(d1.variables, d1.columns, d2.columns):
            np.testing.assert_array_equal(c1, c2)
            assert (c1.dtype == np.float64) == v.is_continuous

    def test_root_continuous_moments(self):
        meta = VariableMeta("X")
        dag = MarkedGraph([meta], [])
        model = SemModel(dag, {}, {}, {}, {0: 1.5})
        col = simulate_data(model, 5000, make_rng(2)).columns[0]
        assert abs(col.mean()) < 4 * 1.5 / np.sqrt(5000)
        assert 1.0 <= col.std() <= 2.0

    def test_root_categorical_uniform_gof(self):
        # Chi-squared goodness of fit against uniform level probabilities.
        meta = VariableMeta("D", ("0", "1", "2"))
        dag = MarkedGraph([meta], [])
        model = SemModel(dag, {}, {}, {}, {})
        col = simulate_data(model, 5000, make_rng(4)).columns[0]
        counts = np.bincount(col, minlength=3)
        expected = 5000 / 3
        stat = float(((counts - expected) ** 2 / expected).sum())
        assert chi_squared_sf(stat, 2) > 0.001

    def test_single_cc_edge_matches_covariance_oracle(self):
        w, sd_x, sd_y = 1.3, 1.2, 1.7
        metas = [VariableMeta("X"), VariableMeta("Y")]
        dag = MarkedGraph(metas, [directed(0, 1)])
        model = SemModel(dag, {(0, 1): w}, {}, {}, {0: sd_x, 1: sd_y})
        n = 5000
        data = simulate_data(model, n, make_rng(6))
        cov = sem_covariance(2, {(0, 1): w}, {0: sd_x**2, 1: sd_y**2})
        rho = cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1])
        r = np.corrcoef(data.columns[0], data.columns[1])[0, 1]
        se = (1 - rho**2) / np.sqrt(n)
        assert abs(r - rho) < 3 * se

    def test_discrete_child_depends_on_parent(self):
        metas = [VariableMeta("D", ("0", "1", "2")), VariableMeta("E", ("0", "1", "2"))]
        dag = MarkedGraph(metas, [directed(0, 1)])
        base = np.array([1.4, -0.2, -1.2])
        dd = {(0, 1): np.stack([np.roll(base, r) for r in range(3)])}
        model = SemModel(dag, {}, {}, dd, {})
        data = simulate_data(model, 4000, make_rng(8))
        table = np.zeros((3, 3))
        for a, b in zip(data.columns[0], data.columns[1]):
            table[a, b] += 1
        # Conditional child distributions should be rotations of one another.
        cond = table / table.sum(axis=1, keepdims=True)
        assert cond.max(axis=1).min() > 0.5
        assert not np.allclose(cond[0], cond[1], atol=0.05)

    def test_preset_shapes(self):
        model, data = simulate_dataset(SimConfig(50, 0.5, 60, seed=9))
        assert data.n == 60 and data.n_vars == 50
        assert is_dag(model.dag)
