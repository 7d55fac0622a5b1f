"""Pure-numpy regression kernels (fallback backend).

Same contract as the compiled backend in ``_core``: rank-revealing
modified Gram-Schmidt with in-order column dropping, least squares on the
kept columns, and damped Newton for the multinomial logit. The compiled
and fallback paths must stay numerically interchangeable; the test suite
compares them on random instances.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# Pivot tolerance for dropping collinear columns, relative to the largest
# original column norm.
PIVOT_RTOL = 1e-10


def _mgs(X: np.ndarray, tol: float):
    """Modified Gram-Schmidt keeping columns in order.

    Returns (Q, R, kept) where Q has one orthonormal column per kept input
    column and R is the corresponding upper-triangular factor.
    """
    n, m = X.shape
    Q = np.empty((n, m))
    R = np.zeros((m, m))
    kept: list[int] = []
    for j in range(m):
        v = X[:, j].copy()
        for idx, kcol in enumerate(kept):
            r = Q[:, idx] @ v
            R[idx, j] = r
            v -= r * Q[:, idx]
        norm = float(np.linalg.norm(v))
        if norm <= tol:
            continue
        R[len(kept), j] = norm
        Q[:, len(kept)] = v / norm
        kept.append(j)
    return Q[:, : len(kept)], R, kept


def linear_fit(X: np.ndarray, y: np.ndarray):
    """Least squares of y on X with collinear columns dropped in order.

    Returns (coef, rss, n_dropped); dropped columns get coefficient 0.
    """
    n, m = X.shape
    col_norms = np.linalg.norm(X, axis=0)
    tol = PIVOT_RTOL * float(col_norms.max(initial=0.0))
    Q, R, kept = _mgs(X, tol)
    r = len(kept)
    coef = np.zeros(m)
    if r > 0:
        z = Q.T @ y
        beta = np.zeros(r)
        for i in range(r - 1, -1, -1):
            acc = z[i]
            for jj in range(i + 1, r):
                acc -= R[i, kept[jj]] * beta[jj]
            beta[i] = acc / R[i, kept[i]]
        coef[kept] = beta
        resid = y - Q @ z
    else:
        resid = y.copy()
    rss = float(resid @ resid)
    return coef, rss, m - r


def _multinomial_probs(Xk, W):
    eta = Xk @ W.T
    full = np.concatenate([np.zeros((eta.shape[0], 1)), eta], axis=1)
    full -= full.max(axis=1, keepdims=True)
    P = np.exp(full)
    P /= P.sum(axis=1, keepdims=True)
    return P


def multinomial_fit(X, y, k, ridge=0.0, max_iter=100, tol=1e-8):
    """Multinomial logit MLE (reference level 0) by damped Newton.

    ``y`` holds level codes 0..k-1, all levels present. Returns
    (W, loglik, converged, iterations, n_dropped) with W of shape
    (k-1, m); the reported loglik never includes the ridge term.
    """
    n, m = X.shape
    col_norms = np.linalg.norm(X, axis=0)
    tolcol = PIVOT_RTOL * float(col_norms.max(initial=0.0))
    _, _, kept = _mgs(X, tolcol)
    Xk = np.ascontiguousarray(X[:, kept])
    mk = len(kept)
    W_full = np.zeros((k - 1, m))

    counts = np.bincount(y, minlength=k).astype(np.float64)
    if mk == 1 and kept[0] == 0:
        # Intercept-only model has the closed form: fitted probabilities are
        # the empirical level frequencies.
        w0 = np.log(counts[1:] / counts[0])
        W_full[:, kept[0]] = w0
        ll = float((counts * np.log(counts / n)).sum())
        return W_full, ll, True, 0, m - mk

    # Ridge (when nonzero) exempts the intercept column, which is column 0
    # of the design by construction; it must be among the kept columns.
    pen_mask = np.ones(mk)
    if kept and kept[0] == 0:
        pen_mask[0] = 0.0

    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0

    W = np.zeros((k - 1, mk))
    nll = _nll_masked(Xk, y, W, ridge, pen_mask)
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        P = _multinomial_probs(Xk, W)
        G = np.empty((k - 1, mk))
        for lvl in range(1, k):
            G[lvl - 1] = Xk.T @ (P[:, lvl] - onehot[:, lvl])
        if ridge > 0.0:
            G += ridge * W * pen_mask
        dim = (k - 1) * mk
        H = np.empty((dim, dim))
        for a in range(1, k):
            for b in range(a, k):
                wgt = P[:, a] * ((1.0 if a == b else 0.0) - P[:, b])
                blk = Xk.T @ (Xk * wgt[:, None])
                H[(a - 1) * mk : a * mk, (b - 1) * mk : b * mk] = blk
                if a != b:
                    H[(b - 1) * mk : b * mk, (a - 1) * mk : a * mk] = blk.T
        if ridge > 0.0:
            H[np.arange(dim), np.arange(dim)] += ridge * np.tile(pen_mask, k - 1)
        H[np.arange(dim), np.arange(dim)] += 1e-10
        try:
            step = np.linalg.solve(H, G.ravel()).reshape(k - 1, mk)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, G.ravel(), rcond=None)[0].reshape(k - 1, mk)
        t = 1.0
        improved = False
        for _ in range(60):
            W_try = W - t * step
            nll_try = _nll_masked(Xk, y, W_try, ridge, pen_mask)
            if nll_try <= nll:
                improved = True
                break
            t *= 0.5
        if not improved:
            converged = True
            break
        rel = abs(nll - nll_try) / (abs(nll) + 1e-10)
        W, nll = W_try, nll_try
        if rel < tol:
            converged = True
            break

    W_full[:, kept] = W
    ll = -_nll_masked(Xk, y, W, 0.0, pen_mask)
    return W_full, ll, converged, iterations, m - mk


def _nll_masked(Xk, y, W, ridge, pen_mask):
    n = Xk.shape[0]
    eta = Xk @ W.T
    m0 = np.maximum(eta.max(axis=1), 0.0)
    lse = m0 + np.log(np.exp(-m0) + np.exp(eta - m0[:, None]).sum(axis=1))
    rows = np.arange(n)
    picked = np.where(y > 0, eta[rows, np.maximum(y - 1, 0)], 0.0)
    nll = float(lse.sum() - picked.sum())
    if ridge > 0.0:
        nll += 0.5 * ridge * float(((W * pen_mask) ** 2).sum())
    return nll
