"""Undirected mixed graphical model via penalized pseudolikelihood.

Pairwise model over Gaussian and categorical variables (continuous
conditionals are linear, categorical conditionals multinomial-logit with
shared pairwise parameters). The negative log-pseudolikelihood is
minimized by proximal gradient with backtracking; group soft-thresholding
(absolute value for cc weights, L2 for cd vectors, Frobenius for dd
blocks) produces exact zeros, and an edge survives wherever its group is
nonzero.

Continuous columns are standardized internally; penalty levels refer to
that scale. The quoted objective is the per-sample average; reported
objective values are on the summed scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import MarkedGraph, MixedDataset, undirected

__all__ = ["MgmConfig", "MgmParams", "MgmResult", "mgm_learn", "mgm_objective"]


class ZeroVariance(ValueError):
    """A continuous column is constant and cannot be standardized."""


@dataclass(frozen=True)
class MgmConfig:
    """Penalty levels and stopping rules for the learner.

    ``lam`` applies to all three edge groups unless the specific values
    are given. Optimization stops once the relative objective change drops
    below ``tol_obj`` while the nonzero-edge set has been stable for
    ``edge_stable_iters`` consecutive iterations (or at ``max_iter``).
    """

    lam: float
    lam_cc: float | None = None
    lam_cd: float | None = None
    lam_dd: float | None = None
    max_iter: int = 500
    tol_obj: float = 1e-5
    edge_stable_iters: int = 3

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")

    @property
    def lambdas(self) -> tuple[float, float, float]:
        return (
            self.lam if self.lam_cc is None else self.lam_cc,
            self.lam if self.lam_cd is None else self.lam_cd,
            self.lam if self.lam_dd is None else self.lam_dd,
        )


@dataclass
class MgmParams:
    """Parameter blocks of the pairwise mixed model.

    ``beta`` is the symmetric zero-diagonal continuous-continuous weight
    matrix; ``theta`` stacks one level-vector per (discrete var, continuous
    var) pair as rows grouped by discrete-variable blocks; ``phi`` is the
    block-symmetric discrete-discrete matrix with zero diagonal blocks.
    ``sigma`` holds conditional variances on the standardized scale.
    """

    beta: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    alpha_cont: np.ndarray
    alpha_disc: np.ndarray
    sigma: np.ndarray

    @classmethod
    def zeros(cls, n_cont: int, total_levels: int) -> "MgmParams":
        return cls(
            beta=np.zeros((n_cont, n_cont)),
            theta=np.zeros((total_levels, n_cont)),
            phi=np.zeros((total_levels, total_levels)),
            alpha_cont=np.zeros(n_cont),
            alpha_disc=np.zeros(total_levels),
            sigma=np.ones(n_cont),
        )

    def copy(self) -> "MgmParams":
        return MgmParams(
            self.beta.copy(),
            self.theta.copy(),
            self.phi.copy(),
            self.alpha_cont.copy(),
            self.alpha_disc.copy(),
            self.sigma.copy(),
        )


@dataclass
class MgmResult:
    params: MgmParams
    graph: MarkedGraph
    converged: bool
    iterations: int
    objective_trace: list[float] = field(default_factory=list)


class _Problem:
    """Standardized data views and block bookkeeping for one dataset."""

    def __init__(self, data: MixedDataset):
        self.data = data
        # Variables enter in name order so that a column permutation of the
        # input yields bitwise-identical results up to relabeling.
        by_name = sorted(range(data.n_vars), key=lambda i: data.variables[i].name)
        self.cont_idx = [i for i in by_name if data.variables[i].is_continuous]
        self.disc_idx = [i for i in by_name if not data.variables[i].is_continuous]
        self.n = data.n
        n = data.n
        cols = []
        for i in self.cont_idx:
            col = data.columns[i]
            sd = float(col.std())
            if sd == 0.0:
                raise ZeroVariance(f"{data.variables[i].name} has zero variance")
            cols.append((col - col.mean()) / sd)
        self.X = (
            np.column_stack(cols) if cols else np.empty((n, 0))
        )
        self.levels = [data.variables[j].n_levels for j in self.disc_idx]
        self.block_starts = np.cumsum([0] + self.levels[:-1]).astype(np.int64) if (
            self.levels
        ) else np.zeros(0, dtype=np.int64)
        self.total_levels = int(sum(self.levels))
        Z = np.zeros((n, self.total_levels))
        for b, j in enumerate(self.disc_idx):
            Z[np.arange(n), self.block_starts[b] + data.columns[j]] = 1.0
        self.Z = Z
        self._uniform_k = len(set(self.levels)) <= 1

    def smooth_nll_grad(self, prm: MgmParams, want_grad: bool = True):
        """Summed negative log-pseudolikelihood of the smooth part and its
        gradients (sigma fixed at the values carried by ``prm``)."""
        n, X, Z = self.n, self.X, self.Z
        sig = prm.sigma
        nll = 0.0
        grads = None
        mean = prm.alpha_cont + X @ prm.beta + Z @ prm.theta
        resid = mean - X
        if X.shape[1]:
            nll += float(
                (0.5 * (resid**2) / sig).sum()
                + 0.5 * n * np.log(2.0 * np.pi * sig).sum()
            )
        logits = prm.alpha_disc + X @ prm.theta.T + Z @ prm.phi
        P = np.zeros_like(logits)
        if self.total_levels:
            q = len(self.levels)
            if self._uniform_k:
                k = self.levels[0]
                blk = logits.reshape(n, q, k)
                m0 = blk.max(axis=2, keepdims=True)
                lse = m0[..., 0] + np.log(np.exp(blk - m0).sum(axis=2))
                nll += float(lse.sum() - (logits * Z).sum())
                P = np.exp(blk - lse[..., None]).reshape(n, q * k)
            else:
                for b in range(q):
                    s, e = self.block_starts[b], self.block_starts[b] + self.levels[b]
                    blk = logits[:, s:e]
                    m0 = blk.max(axis=1, keepdims=True)
                    lse = m0[:, 0] + np.log(np.exp(blk - m0).sum(axis=1))
                    nll += float(lse.sum() - (blk * Z[:, s:e]).sum())
                    P[:, s:e] = np.exp(blk - lse[:, None])
        if not want_grad:
            return nll, None
        Rw = resid / sig
        G = P - Z
        d_beta = X.T @ Rw
        d_beta = d_beta + d_beta.T
        np.fill_diagonal(d_beta, 0.0)
        d_theta = Z.T @ Rw + G.T @ X
        d_phi = Z.T @ G
        d_phi = d_phi + d_phi.T
        for b in range(len(self.levels)):
            s, e = self.block_starts[b], self.block_starts[b] + self.levels[b]
            d_phi[s:e, s:e] = 0.0
        grads = MgmParams(
            beta=d_beta,
            theta=d_theta,
            phi=d_phi,
            alpha_cont=Rw.sum(axis=0),
            alpha_disc=G.sum(axis=0),
            sigma=np.zeros_like(sig),
        )
        return nll, grads

    def penalty(self, prm: MgmParams, lams: tuple[float, float, float]) -> float:
        lcc, lcd, ldd = lams
        val = lcc * float(np.abs(np.triu(prm.beta, 1)).sum())
        if self.total_levels and len(self.cont_idx):
            norms = np.sqrt(
                np.add.reduceat(prm.theta**2, self.block_starts, axis=0)
            )
            val += lcd * float(norms.sum())
        if len(self.levels) > 1:
            sq = np.add.reduceat(
                np.add.reduceat(prm.phi**2, self.block_starts, axis=0),
                self.block_starts,
                axis=1,
            )
            fro = np.sqrt(sq)
            val += ldd * float(np.triu(fro, 1).sum())
        return val

    def prox(self, prm: MgmParams, step: float, lams) -> MgmParams:
        """Group soft-thresholding; groups at or below the threshold become
        exactly zero."""
        lcc, lcd, ldd = lams
        out = prm.copy()
        t = step * lcc
        out.beta = np.sign(prm.beta) * np.maximum(np.abs(prm.beta) - t, 0.0)
        np.fill_diagonal(out.beta, 0.0)
        if self.total_levels and len(self.cont_idx):
            t = step * lcd
            norms = np.sqrt(
                np.add.reduceat(prm.theta**2, self.block_starts, axis=0)
            )
            scale = np.where(norms <= t, 0.0, 1.0 - t / np.where(norms > 0, norms, 1.0))
            out.theta = prm.theta * np.repeat(scale, self.levels, axis=0)
        if len(self.levels) > 1:
            t = step * ldd
            sq = np.add.reduceat(
                np.add.reduceat(prm.phi**2, self.block_starts, axis=0),
                self.block_starts,
                axis=1,
            )
            fro = np.sqrt(sq)
            scale = np.where(fro <= t, 0.0, 1.0 - t / np.where(fro > 0, fro, 1.0))
            np.fill_diagonal(scale, 0.0)
            out.phi = prm.phi * np.repeat(
                np.repeat(scale, self.levels, axis=0), self.levels, axis=1
            )
        return out

    def edge_set(self, prm: MgmParams) -> frozenset[tuple[int, int]]:
        edges = set()
        nc = len(self.cont_idx)
        for a, b in zip(*np.nonzero(np.triu(prm.beta, 1))):
            edges.add(_pair(self.cont_idx[a], self.cont_idx[b]))
        if self.total_levels and nc:
            hit = np.add.reduceat(prm.theta != 0.0, self.block_starts, axis=0)
            for bj, a in zip(*np.nonzero(hit)):
                edges.add(_pair(self.cont_idx[a], self.disc_idx[bj]))
        if len(self.levels) > 1:
            hit = np.add.reduceat(
                np.add.reduceat(prm.phi != 0.0, self.block_starts, axis=0),
                self.block_starts,
                axis=1,
            )
            for bj, br in zip(*np.nonzero(np.triu(hit, 1))):
                edges.add(_pair(self.disc_idx[bj], self.disc_idx[br]))
        return frozenset(edges)


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def mgm_objective(
    params: MgmParams, data: MixedDataset, cfg: MgmConfig | None = None
) -> float:
    """Penalized negative log-pseudolikelihood on the summed scale.

    Without ``cfg`` the penalty is omitted. Continuous columns are
    standardized exactly as in :func:`mgm_learn`.
    """
    prob = _Problem(data)
    nll, _ = prob.smooth_nll_grad(params, want_grad=False)
    if cfg is not None:
        nll += data.n * prob.penalty(params, cfg.lambdas)
    return nll


def mgm_learn(data: MixedDataset, cfg: MgmConfig) -> MgmResult:
    """Fit the model and read off the undirected graph of nonzero groups."""
    if data.n < 2:
        raise ValueError("need at least two samples")
    prob = _Problem(data)
    n = data.n
    lams = cfg.lambdas
    prm = MgmParams.zeros(len(prob.cont_idx), prob.total_levels)

    def objective(p: MgmParams, smooth: float | None = None) -> float:
        if smooth is None:
            smooth = prob.smooth_nll_grad(p, want_grad=False)[0]
        return smooth / n + prob.penalty(p, lams)

    f_cur = objective(prm)
    trace = [n * f_cur]
    step = 1.0
    stable = 0
    edges = prob.edge_set(prm)
    converged = False
    iterations = 0
    for it in range(1, cfg.max_iter + 1):
        iterations = it
        smooth, grads = prob.smooth_nll_grad(prm)
        moved = False
        for _ in range(40):
            cand = prm.copy()
            cand.beta = prm.beta - (step / n) * grads.beta
            cand.theta = prm.theta - (step / n) * grads.theta
            cand.phi = prm.phi - (step / n) * grads.phi
            cand.alpha_cont = prm.alpha_cont - (step / n) * grads.alpha_cont
            cand.alpha_disc = prm.alpha_disc - (step / n) * grads.alpha_disc
            cand = prob.prox(cand, step, lams)
            f_new = objective(cand)
            if f_new <= f_cur:
                moved = True
                break
            step *= 0.5
        if not moved:
            converged = True
            break
        new_edges = prob.edge_set(cand)
        stable = stable + 1 if new_edges == edges else 0
        edges = new_edges
        rel = abs(f_cur - f_new) / (abs(f_cur) + 1e-12)
        prm = cand
        f_cur = f_new
        trace.append(n * f_cur)
        step *= 2.0
        if rel < cfg.tol_obj and stable >= cfg.edge_stable_iters:
            converged = True
            break

    graph = MarkedGraph(
        data.variables, [undirected(a, b) for a, b in sorted(edges)]
    )
    return MgmResult(prm, graph, converged, iterations, trace)
