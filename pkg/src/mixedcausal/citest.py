"""Mixed-type conditional independence: likelihood-ratio test of X | Y, S.

The test fits nested regressions of a dependent variable on S and on
S + {other}; twice the log-likelihood gap is referred to chi-squared with
``dof(X) * dof(Y)`` degrees of freedom, where a continuous variable
contributes 1 and a categorical variable its level count minus 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import MixedDataset, VariableMeta
from .regress import SEPARATION_RIDGE, chi_squared_sf, gaussian_loglik

__all__ = ["CiResult", "CiTester", "ci_test", "choose_dependent"]


@dataclass(frozen=True)
class CiResult:
    """Outcome of one conditional independence test.

    ``degenerate`` marks tests whose regressions failed preconditions or
    needed the non-convergence fallback; those report ``p_value`` 0.0 and
    are scored as dependent (the edge is kept).
    """

    statistic: float
    dof: int
    p_value: float
    independent: bool
    degenerate: bool


def choose_dependent(x: VariableMeta, y: VariableMeta) -> int:
    """Pick the regression's dependent variable: 0 for ``x``, 1 for ``y``.

    A continuous variable is preferred (linear regression beats logistic on
    mixed pairs); between two categoricals the one with fewer levels wins,
    ties going to ``x``.
    """
    if x.is_continuous and not y.is_continuous:
        return 0
    if y.is_continuous and not x.is_continuous:
        return 1
    if x.is_continuous and y.is_continuous:
        return 0
    if y.n_levels < x.n_levels:
        return 1
    return 0


class CiTester:
    """Reusable tester over one immutable dataset.

    Precomputes float columns, dummy codings (levels defined by the full
    dataset's metadata, so codings stay stable across subsamples), and
    level presence. ``test`` is pure and safe to call from worker threads.
    """

    def __init__(self, data: MixedDataset, backend=None):
        self.data = data
        self._kern = (
            _kernels.get_backend(backend) if isinstance(backend, str) else
            (backend or _kernels)
        )
        n = data.n
        self._float_cols: list[np.ndarray | None] = []
        self._onehots: list[np.ndarray | None] = []
        self._widths: list[int] = []
        self._codes: list[np.ndarray | None] = []
        self._all_levels_present: list[bool] = []
        for v, col in zip(data.variables, data.columns):
            if v.is_continuous:
                self._float_cols.append(np.ascontiguousarray(col, dtype=np.float64))
                self._onehots.append(None)
                self._codes.append(None)
                self._widths.append(1)
                self._all_levels_present.append(True)
            else:
                k = v.n_levels
                onehot = np.zeros((n, k))
                onehot[np.arange(n), col] = 1.0
                self._float_cols.append(None)
                self._onehots.append(onehot)
                self._codes.append(np.ascontiguousarray(col, dtype=np.int32))
                self._widths.append(k - 1)
                self._all_levels_present.append(
                    int(np.bincount(col, minlength=k).min()) > 0
                )

    def _fill_block(self, X: np.ndarray, c: int, v: int) -> int:
        if self._float_cols[v] is not None:
            X[:, c] = self._float_cols[v]
            return c + 1
        w = self._widths[v]
        X[:, c : c + w] = self._onehots[v][:, 1:]
        return c + w

    def _loglik(self, dep: int, X: np.ndarray) -> tuple[float, bool]:
        """Fit dep ~ X; returns (loglik, converged)."""
        if self._float_cols[dep] is not None:
            coef, rss, _ = self._kern.linear_fit(X, self._float_cols[dep])
            return gaussian_loglik(rss, X.shape[0]), True
        k = self.data.variables[dep].n_levels
        y = self._codes[dep]
        W, ll, converged, iters, _ = self._kern.multinomial_fit(X, y, k)
        if not converged:
            W, ll, _, _, _ = self._kern.multinomial_fit(
                X, y, k, ridge=SEPARATION_RIDGE * X.shape[0]
            )
        return ll, converged

    def test(self, x: int, y: int, s, alpha: float) -> CiResult:
        """LRT of x independent of y given s, at level alpha."""
        if x == y or x in s or y in s:
            raise ValueError("x, y must be distinct and outside s")
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        metas = self.data.variables
        dof = metas[x].dof * metas[y].dof
        dep, other = (x, y) if choose_dependent(metas[x], metas[y]) == 0 else (y, x)

        s_sorted = sorted(s, key=lambda v: metas[v].name)
        n = self.data.n
        m_red = 1 + sum(self._widths[v] for v in s_sorted)
        m_full = m_red + self._widths[other]
        if n <= m_full or not self._all_levels_present[dep]:
            return CiResult(0.0, dof, 0.0, False, True)

        # The tested variable's block goes last so pruning decisions on the
        # shared prefix are identical in both fits and the models stay nested.
        X_full = np.empty((n, m_full))
        X_full[:, 0] = 1.0
        c = 1
        for v in s_sorted:
            c = self._fill_block(X_full, c, v)
        self._fill_block(X_full, c, other)
        X_red = np.ascontiguousarray(X_full[:, :m_red])

        ll_red, ok_red = self._loglik(dep, X_red)
        ll_full, ok_full = self._loglik(dep, X_full)
        stat = max(2.0 * (ll_full - ll_red), 0.0)
        if not (ok_red and ok_full):
            return CiResult(stat, dof, 0.0, False, True)
        p = chi_squared_sf(stat, dof)
        return CiResult(stat, dof, p, p > alpha, False)


def ci_test(
    data: MixedDataset, x: int, y: int, s, alpha: float, backend=None
) -> CiResult:
    """One-shot wrapper; build a :class:`CiTester` for repeated queries."""
    return CiTester(data, backend=backend).test(x, y, s, alpha)
