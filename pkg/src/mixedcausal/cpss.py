"""Complementary-pairs stability selection over edge-producing algorithms.

B pairs of disjoint half-samples are drawn; the base algorithm runs on all
2B subsamples and edges are kept by thresholding their selection
frequency. The threshold is the smallest tau for which the closed-form
complementary-pairs bound on falsely selected low-probability edges,
E(V) <= q_hat^2 / (p_total * (2 tau - 1)), stays below ``q * p_total``.
A selected adjacency is additionally oriented X -> Y only when that exact
orientation's own frequency clears the same threshold.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import MarkedGraph, Mark, MixedDataset, directed, undirected
from .simulate import make_rng

__all__ = ["CpssConfig", "EdgeFrequencies", "CpssResult", "cpss_run"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CpssConfig:
    """Error-rate target and subsampling plan."""

    q: float
    pairs: int = 50
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must be in (0, 1)")
        if self.pairs < 1:
            raise ValueError("need at least one complementary pair")


@dataclass
class EdgeFrequencies:
    """Selection counts over the 2B subsample runs."""

    n_runs: int
    adjacency: dict[tuple[int, int], int] = field(default_factory=dict)
    orientation: dict[tuple[int, int], int] = field(default_factory=dict)
    avg_selected: float = 0.0
    n_failed: int = 0

    def adjacency_freq(self, a: int, b: int) -> float:
        key = (a, b) if a < b else (b, a)
        return self.adjacency.get(key, 0) / self.n_runs

    def orientation_freq(self, tail: int, head: int) -> float:
        return self.orientation.get((tail, head), 0) / self.n_runs


@dataclass
class CpssResult:
    graph: MarkedGraph
    frequencies: EdgeFrequencies
    threshold: float


def selection_threshold(q: float, avg_selected: float, p_total: int) -> float:
    """Minimal tau with q_hat^2 / (p_total * (2 tau - 1)) <= q * p_total."""
    return 0.5 * (1.0 + avg_selected**2 / (q * p_total**2))


def _subsample_indices(n: int, pairs: int, seed: int) -> list[np.ndarray]:
    rng = make_rng(seed)
    half = n // 2
    out = []
    for _ in range(pairs):
        perm = rng.permutation(n)
        out.append(np.sort(perm[:half]))
        out.append(np.sort(perm[half : 2 * half]))
    return out


def cpss_run(
    data: MixedDataset, base_algo, cfg: CpssConfig
) -> CpssResult:
    """Stability selection of ``base_algo`` (data -> MarkedGraph) edges.

    A failed subsample run selects nothing and is logged. With a fixed
    seed the subsample index sets are reproducible.
    """
    if data.n < 4:
        raise ValueError("need n >= 4 for two disjoint halves")
    indices = _subsample_indices(data.n, cfg.pairs, cfg.seed)
    graphs: list[MarkedGraph | None] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_run_one, base_algo, data, idx) for idx in indices
            ]
            graphs = [f.result() for f in futures]
    else:
        graphs = [_run_one(base_algo, data, idx) for idx in indices]

    freqs = EdgeFrequencies(n_runs=len(indices))
    selected_counts = []
    for g in graphs:
        if g is None:
            freqs.n_failed += 1
            selected_counts.append(0)
            continue
        selected_counts.append(g.n_edges)
        for e in g.edges:
            key = e.pair
            freqs.adjacency[key] = freqs.adjacency.get(key, 0) + 1
            if e.mark is Mark.DIRECTED:
                okey = (e.a, e.b)
                freqs.orientation[okey] = freqs.orientation.get(okey, 0) + 1
    freqs.avg_selected = float(np.mean(selected_counts))

    p = data.n_vars
    p_total = p * (p - 1) // 2
    tau = selection_threshold(cfg.q, freqs.avg_selected, p_total)

    edges = []
    for key, count in sorted(freqs.adjacency.items()):
        if count / freqs.n_runs < tau:
            continue
        a, b = key
        if freqs.orientation_freq(a, b) >= tau:
            edges.append(directed(a, b))
        elif freqs.orientation_freq(b, a) >= tau:
            edges.append(directed(b, a))
        else:
            edges.append(undirected(a, b))
    graph = MarkedGraph(data.variables, edges)
    if freqs.n_failed:
        log.warning("%d of %d subsample runs failed", freqs.n_failed, freqs.n_runs)
    return CpssResult(graph, freqs, tau)


def _run_one(base_algo, data: MixedDataset, idx: np.ndarray) -> MarkedGraph | None:
    try:
        return base_algo(data.subsample(idx))
    except Exception:
        log.exception("base algorithm failed on a subsample")
        return None
