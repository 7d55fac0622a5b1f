"""Random DAGs and mixed structural-equation data for the benchmarks.

Continuous children get linear contributions from parents plus Gaussian
noise; categorical children get log-linear level potentials pushed through
a softmax and sampled by inverse CDF against a uniform error term. The RNG
is Philox (64-bit counter-based), so a seed reproduces draws exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Edge,
    Mark,
    MarkedGraph,
    MixedDataset,
    VariableMeta,
    edge_type,
    topological_order,
)

__all__ = [
    "SimConfig",
    "SemModel",
    "LD_PRESET",
    "HD_PRESET",
    "make_rng",
    "sample_dag",
    "sample_parameters",
    "simulate_data",
    "simulate_dataset",
]

# Edge-weight magnitude range and continuous noise-sd range.
WEIGHT_LO, WEIGHT_HI = 1.0, 1.5
NOISE_SD_LO, NOISE_SD_HI = 1.0, 2.0


@dataclass(frozen=True)
class SimConfig:
    """Settings for one synthetic network draw."""

    n_vars: int
    frac_discrete: float
    n_samples: int
    n_levels: int = 3
    max_degree: int = 10
    max_avg_degree: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n_vars < 2:
            raise ValueError("need at least two variables")
        if not 0.0 <= self.frac_discrete <= 1.0:
            raise ValueError("frac_discrete must be in [0, 1]")
        if self.n_samples < 1:
            raise ValueError("need at least one sample")
        if self.n_levels < 2:
            raise ValueError("categoricals need >= 2 levels")


LD_PRESET = SimConfig(n_vars=50, frac_discrete=0.5, n_samples=500)
HD_PRESET = SimConfig(n_vars=200, frac_discrete=0.5, n_samples=100)


@dataclass(frozen=True)
class SemModel:
    """Ground-truth DAG with edge parameters and noise terms.

    Parameter keys are (tail, head) variable indices. cc edges carry one
    signed weight; cd edges a zero-sum vector over the discrete endpoint's
    levels whose maximum equals the weight magnitude; dd edges a matrix
    (parent level x child level) whose rows are the cyclic shifts of one
    zero-sum base vector.
    """

    dag: MarkedGraph
    cc: dict[tuple[int, int], float]
    cd: dict[tuple[int, int], np.ndarray]
    dd: dict[tuple[int, int], np.ndarray]
    noise_sd: dict[int, float]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _variable_names(n_vars: int) -> list[str]:
    width = len(str(n_vars))
    return [f"X{i + 1:0{width}d}" for i in range(n_vars)]


def sample_dag(cfg: SimConfig, rng: np.random.Generator) -> MarkedGraph:
    """DAG drawn as: uniform topological order, then uniform edge additions
    until the average-degree target, rejecting max-degree violations."""
    p = cfg.n_vars
    n_disc = round(p * cfg.frac_discrete)
    kinds = np.zeros(p, dtype=bool)
    kinds[:n_disc] = True
    kinds = kinds[rng.permutation(p)]
    names = _variable_names(p)
    metas = [
        VariableMeta(nm, tuple(str(l) for l in range(cfg.n_levels)))
        if disc
        else VariableMeta(nm)
        for nm, disc in zip(names, kinds)
    ]

    position = np.empty(p, dtype=np.int64)
    position[rng.permutation(p)] = np.arange(p)

    target = int(math.floor(p * cfg.max_avg_degree / 2.0))
    candidates = [(i, j) for i in range(p) for j in range(i + 1, p)]
    degree = np.zeros(p, dtype=np.int64)
    edges: list[Edge] = []
    while len(edges) < target:
        if not candidates:
            raise ValueError(
                "degree constraints unsatisfiable for requested edge count"
            )
        idx = int(rng.integers(len(candidates)))
        a, b = candidates[idx]
        candidates[idx] = candidates[-1]
        candidates.pop()
        if degree[a] >= cfg.max_degree or degree[b] >= cfg.max_degree:
            continue
        tail, head = (a, b) if position[a] < position[b] else (b, a)
        edges.append(Edge(Mark.DIRECTED, tail, head))
        degree[a] += 1
        degree[b] += 1
    return MarkedGraph(metas, edges)


def _zero_sum_base(rng: np.random.Generator, k: int, magnitude: float) -> np.ndarray:
    """k uniforms, centered to sum 0, scaled so the maximum equals magnitude."""
    while True:
        v = rng.uniform(0.0, 1.0, k)
        v -= v.mean()
        top = v.max()
        if top > 1e-8:
            return v * (magnitude / top)


def sample_parameters(dag: MarkedGraph, rng: np.random.Generator) -> SemModel:
    """Draw edge parameters and noise scales for a kinded DAG."""
    cc: dict[tuple[int, int], float] = {}
    cd: dict[tuple[int, int], np.ndarray] = {}
    dd: dict[tuple[int, int], np.ndarray] = {}
    for e in sorted(dag.edges, key=lambda e: (e.a, e.b)):
        magnitude = rng.uniform(WEIGHT_LO, WEIGHT_HI)
        sign = -1.0 if rng.random() < 0.5 else 1.0
        weight = sign * magnitude
        tail_meta, head_meta = dag.variables[e.a], dag.variables[e.b]
        kind = edge_type(tail_meta, head_meta)
        if kind == "cc":
            cc[(e.a, e.b)] = weight
        elif kind == "cd":
            disc = head_meta if tail_meta.is_continuous else tail_meta
            cd[(e.a, e.b)] = _zero_sum_base(rng, disc.n_levels, magnitude)
        else:
            base = _zero_sum_base(rng, head_meta.n_levels, magnitude)
            rows = [np.roll(base, r) for r in range(tail_meta.n_levels)]
            dd[(e.a, e.b)] = np.stack(rows)
    noise_sd = {
        i: float(rng.uniform(NOISE_SD_LO, NOISE_SD_HI))
        for i, v in enumerate(dag.variables)
        if v.is_continuous
    }
    return SemModel(dag, cc, cd, dd, noise_sd)


def simulate_data(model: SemModel, n: int, rng: np.random.Generator) -> MixedDataset:
    """Sample ``n`` rows from the structural model.

    Error terms are drawn for every variable in index order, then values
    are resolved in topological order; discrete roots are uniform over
    their levels.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    dag = model.dag
    p = dag.n_vars
    errors: list[np.ndarray] = []
    for i, v in enumerate(dag.variables):
        if v.is_continuous:
            errors.append(rng.normal(0.0, model.noise_sd[i], n))
        else:
            errors.append(rng.uniform(0.0, 1.0, n))

    parents: dict[int, list[int]] = {i: [] for i in range(p)}
    for e in dag.edges:
        parents[e.b].append(e.a)
    for i in parents:
        parents[i].sort()

    values: list[np.ndarray | None] = [None] * p
    for i in topological_order(dag):
        v = dag.variables[i]
        if v.is_continuous:
            mean = np.zeros(n)
            for par in parents[i]:
                key = (par, i)
                if dag.variables[par].is_continuous:
                    mean += model.cc[key] * values[par]
                else:
                    mean += model.cd[key][values[par]]
            values[i] = mean + errors[i]
        else:
            k = v.n_levels
            logits = np.zeros((n, k))
            for par in parents[i]:
                key = (par, i)
                if dag.variables[par].is_continuous:
                    logits += values[par][:, None] * model.cd[key][None, :]
                else:
                    logits += model.dd[key][values[par], :]
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            cum = np.cumsum(probs, axis=1)
            cum[:, -1] = 1.0
            values[i] = (errors[i][:, None] > cum).sum(axis=1).astype(np.int32)
    return MixedDataset(dag.variables, values)


def simulate_dataset(cfg: SimConfig) -> tuple[SemModel, MixedDataset]:
    """Full pipeline from one seed: DAG, parameters, then data."""
    rng = make_rng(cfg.seed)
    dag = sample_dag(cfg, rng)
    model = sample_parameters(dag, rng)
    data = simulate_data(model, cfg.n_samples, rng)
    return model, data
