"""Numerical engines: linear and multinomial-logit fits, chi-squared tails.

Thin, validated wrappers over the kernel backends (compiled when available,
numpy fallback otherwise). All functions are pure; the search layer calls
them concurrently over shared immutable data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from . import _kernels
from .model import MixedDataset

__all__ = [
    "DesignMatrix",
    "FitResult",
    "RegressionError",
    "RankDeficient",
    "InsufficientSamples",
    "MissingLevel",
    "fit_linear",
    "fit_multinomial",
    "gaussian_loglik",
    "chi_squared_sf",
]

# Variance floor for the Gaussian likelihood; keeps perfect fits finite.
SIGMA2_FLOOR = 1e-12

# Ridge strength (times n) applied when a multinomial fit fails to converge.
SEPARATION_RIDGE = 1e-4


class RegressionError(Exception):
    """Base class for regression failures."""


class RankDeficient(RegressionError):
    """No usable columns remain after collinearity pruning."""


class InsufficientSamples(RegressionError):
    """Fewer samples than design columns."""


class MissingLevel(RegressionError):
    """A categorical response level has no observations."""


@dataclass(frozen=True)
class DesignMatrix:
    """Predictor matrix: intercept first, categoricals dummy-coded to k-1
    indicator columns (level 0 is the reference)."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_dataset(cls, data: MixedDataset, predictors) -> "DesignMatrix":
        """Intercept plus blocks for ``predictors`` in the given order."""
        width = 1 + sum(
            1 if data.variables[p].is_continuous else data.variables[p].n_levels - 1
            for p in predictors
        )
        X = np.empty((data.n, width))
        X[:, 0] = 1.0
        c = 1
        for p in predictors:
            v = data.variables[p]
            col = data.columns[p]
            if v.is_continuous:
                X[:, c] = col
                c += 1
            else:
                for lvl in range(1, v.n_levels):
                    X[:, c] = col == lvl
                    c += 1
        return cls(X)


@dataclass(frozen=True)
class FitResult:
    """Fitted coefficients and the log-likelihood at the optimum.

    ``coefficients`` follows the design-column layout (multinomial fits
    flatten the (k-1, columns) matrix row-major); dropped collinear columns
    keep coefficient 0 and are counted in ``n_dropped``.
    """

    coefficients: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int
    n_dropped: int


def gaussian_loglik(rss: float, n: int) -> float:
    """Gaussian log-likelihood at the MLE variance ``rss / n`` (floored)."""
    sigma2 = max(rss / n, SIGMA2_FLOOR)
    return -0.5 * n * (math.log(2.0 * math.pi * sigma2) + 1.0)


def fit_linear(y: np.ndarray, X: DesignMatrix, backend=None) -> FitResult:
    """Least squares of a continuous response on a design matrix."""
    kern = _kernels.get_backend(backend) if isinstance(backend, str) else (
        backend or _kernels
    )
    n, m = X.matrix.shape
    if n <= m:
        raise InsufficientSamples(f"n={n} samples for {m} columns")
    y = np.ascontiguousarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    coef, rss, n_dropped = kern.linear_fit(
        np.ascontiguousarray(X.matrix, dtype=np.float64), y
    )
    if n_dropped == m:
        raise RankDeficient("all design columns dropped")
    return FitResult(np.asarray(coef), gaussian_loglik(rss, n), True, 0, n_dropped)


def fit_multinomial(
    y: np.ndarray, n_levels: int, X: DesignMatrix, backend=None
) -> FitResult:
    """Multinomial-logit fit of categorical codes on a design matrix.

    Non-convergence (separation or iteration limit) triggers one ridge
    refit with penalty ``1e-4 * n`` on non-intercept coefficients; the
    result then carries ``converged=False``.
    """
    kern = _kernels.get_backend(backend) if isinstance(backend, str) else (
        backend or _kernels
    )
    n, m = X.matrix.shape
    if n <= m:
        raise InsufficientSamples(f"n={n} samples for {m} columns")
    y = np.ascontiguousarray(y, dtype=np.int32)
    counts = np.bincount(y, minlength=n_levels)
    if counts.min() == 0:
        raise MissingLevel(f"level {int(counts.argmin())} absent from response")
    Xc = np.ascontiguousarray(X.matrix, dtype=np.float64)
    W, ll, converged, iters, n_dropped = kern.multinomial_fit(Xc, y, n_levels)
    if n_dropped == m:
        raise RankDeficient("all design columns dropped")
    if not converged:
        W, ll, _, iters2, n_dropped = kern.multinomial_fit(
            Xc, y, n_levels, ridge=SEPARATION_RIDGE * n
        )
        return FitResult(np.asarray(W).ravel(), ll, False, iters + iters2, n_dropped)
    return FitResult(np.asarray(W).ravel(), ll, True, iters, n_dropped)


def chi_squared_sf(stat: float, dof: int) -> float:
    """Upper tail of chi-squared via the regularized incomplete gamma."""
    if stat < 0:
        raise ValueError("statistic must be non-negative")
    if dof < 1:
        raise ValueError("dof must be >= 1")
    return float(gammaincc(0.5 * dof, 0.5 * stat))
