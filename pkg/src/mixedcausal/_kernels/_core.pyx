# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled regression kernels: the hot path of the independence tests.

Mirrors ``pyref`` exactly (same pruning rule, same Newton damping and
convergence semantics); loops release the GIL so the search layer can run
tests on a thread pool.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, sqrt

cnp.import_array()

BACKEND = "compiled"

PIVOT_RTOL = 1e-10
cdef double _PIVOT_RTOL = 1e-10


cdef int _mgs(const double[:, ::1] X, double[:, ::1] Q, double[:, ::1] R,
              int* kept, double tol) noexcept nogil:
    """In-order rank-revealing MGS; returns the number of kept columns."""
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t i, j, idx
    cdef double acc, norm
    cdef int nk = 0
    for j in range(m):
        for i in range(n):
            Q[i, nk] = X[i, j]
        for idx in range(nk):
            acc = 0.0
            for i in range(n):
                acc += Q[i, idx] * Q[i, nk]
            R[idx, j] = acc
            for i in range(n):
                Q[i, nk] -= acc * Q[i, idx]
        norm = 0.0
        for i in range(n):
            norm += Q[i, nk] * Q[i, nk]
        norm = sqrt(norm)
        if norm <= tol:
            continue
        R[nk, j] = norm
        for i in range(n):
            Q[i, nk] /= norm
        kept[nk] = <int>j
        nk += 1
    return nk


cdef double _max_col_norm(const double[:, ::1] X) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t i, j
    cdef double best = 0.0, acc
    for j in range(m):
        acc = 0.0
        for i in range(n):
            acc += X[i, j] * X[i, j]
        if acc > best:
            best = acc
    return sqrt(best)


def linear_fit(const double[:, ::1] X, const double[::1] y):
    """Least squares with in-order collinear-column dropping.

    Returns (coef, rss, n_dropped); dropped columns get coefficient 0.
    """
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    Q_arr = np.empty((n, max(m, 1)))
    R_arr = np.zeros((max(m, 1), max(m, 1)))
    kept_arr = np.zeros(max(m, 1), dtype=np.intc)
    coef_arr = np.zeros(m)
    z_arr = np.zeros(max(m, 1))
    beta_arr = np.zeros(max(m, 1))
    cdef double[:, ::1] Q = Q_arr
    cdef double[:, ::1] R = R_arr
    cdef int[::1] kept = kept_arr
    cdef double[::1] coef = coef_arr
    cdef double[::1] z = z_arr
    cdef double[::1] beta = beta_arr
    cdef double tol, acc, rss
    cdef Py_ssize_t i, jj, ii
    cdef int nk
    with nogil:
        tol = _PIVOT_RTOL * _max_col_norm(X)
        nk = _mgs(X, Q, R, &kept[0], tol)
        for ii in range(nk):
            acc = 0.0
            for i in range(n):
                acc += Q[i, ii] * y[i]
            z[ii] = acc
        for ii in range(nk - 1, -1, -1):
            acc = z[ii]
            for jj in range(ii + 1, nk):
                acc -= R[ii, kept[jj]] * beta[jj]
            beta[ii] = acc / R[ii, kept[ii]]
        for ii in range(nk):
            coef[kept[ii]] = beta[ii]
        rss = 0.0
        for i in range(n):
            acc = y[i]
            for ii in range(nk):
                acc -= Q[i, ii] * z[ii]
            rss += acc * acc
    return coef_arr, rss, <int>(m - nk)


cdef double _mn_nll(const double[:, ::1] Xk, const int[::1] y, const double[::1] W,
                    Py_ssize_t mk, int km1, double ridge, int pen_from,
                    double* eta) noexcept nogil:
    """Negative log-likelihood (plus optional ridge on columns >= pen_from)."""
    cdef Py_ssize_t n = Xk.shape[0]
    cdef Py_ssize_t i
    cdef int l, a
    cdef double e, mx, s, nll = 0.0
    for i in range(n):
        mx = 0.0
        for l in range(km1):
            e = 0.0
            for a in range(mk):
                e += Xk[i, a] * W[l * mk + a]
            eta[l] = e
            if e > mx:
                mx = e
        s = exp(-mx)
        for l in range(km1):
            s += exp(eta[l] - mx)
        nll += mx + log(s)
        if y[i] > 0:
            nll -= eta[y[i] - 1]
    if ridge > 0.0:
        for l in range(km1):
            for a in range(pen_from, <int>mk):
                nll += 0.5 * ridge * W[l * mk + a] * W[l * mk + a]
    return nll


cdef int _chol_solve(double[:, ::1] H, double[::1] g, double[::1] x,
                     Py_ssize_t dim) noexcept nogil:
    """Solve H x = g for SPD H by in-place Cholesky; 0 on success."""
    cdef Py_ssize_t i, j, r
    cdef double acc
    for j in range(dim):
        acc = H[j, j]
        for r in range(j):
            acc -= H[j, r] * H[j, r]
        if acc <= 0.0:
            return -1
        H[j, j] = sqrt(acc)
        for i in range(j + 1, dim):
            acc = H[i, j]
            for r in range(j):
                acc -= H[i, r] * H[j, r]
            H[i, j] = acc / H[j, j]
    for i in range(dim):
        acc = g[i]
        for r in range(i):
            acc -= H[i, r] * x[r]
        x[i] = acc / H[i, i]
    for i in range(dim - 1, -1, -1):
        acc = x[i]
        for r in range(i + 1, dim):
            acc -= H[r, i] * x[r]
        x[i] = acc / H[i, i]
    return 0


def multinomial_fit(const double[:, ::1] X, const int[::1] y, int k,
                    double ridge=0.0, int max_iter=100, double tol=1e-8):
    """Multinomial logit MLE (reference level 0) by damped Newton.

    Returns (W, loglik, converged, iterations, n_dropped); W has shape
    (k-1, m) with zeros at dropped columns, and the reported loglik never
    includes the ridge term.
    """
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef int km1 = k - 1
    Q_arr = np.empty((n, max(m, 1)))
    R_arr = np.zeros((max(m, 1), max(m, 1)))
    kept_arr = np.zeros(max(m, 1), dtype=np.intc)
    cdef double[:, ::1] Q = Q_arr
    cdef double[:, ::1] R = R_arr
    cdef int[::1] kept = kept_arr
    cdef double tolcol
    cdef int nk
    with nogil:
        tolcol = _PIVOT_RTOL * _max_col_norm(X)
        nk = _mgs(X, Q, R, &kept[0], tolcol)
    cdef Py_ssize_t mk = nk

    W_full = np.zeros((km1, m))
    counts = np.bincount(np.asarray(y), minlength=k).astype(np.float64)
    if mk == 1 and kept[0] == 0:
        # Intercept-only: fitted probabilities are the level frequencies.
        W_full[:, 0] = np.log(counts[1:] / counts[0])
        ll = float((counts * np.log(counts / n)).sum())
        return W_full, ll, True, 0, <int>(m - mk)

    Xk_arr = np.empty((n, mk))
    cdef double[:, ::1] Xk = Xk_arr
    cdef Py_ssize_t i, a
    for a in range(mk):
        for i in range(n):
            Xk[i, a] = X[i, kept[a]]

    # First penalized column: the intercept (design column 0, kept first
    # whenever present) is exempt from the ridge.
    cdef int pen_from = 1 if (mk > 0 and kept[0] == 0) else 0

    cdef Py_ssize_t dim = km1 * mk
    W_arr = np.zeros(dim)
    Wtry_arr = np.zeros(dim)
    G_arr = np.zeros(dim)
    H_arr = np.zeros((dim, dim))
    Hw_arr = np.zeros((dim, dim))
    step_arr = np.zeros(dim)
    eta_arr = np.zeros(km1)
    p_arr = np.zeros(k)
    cdef double[::1] W = W_arr
    cdef double[::1] Wtry = Wtry_arr
    cdef double[::1] G = G_arr
    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] Hw = Hw_arr
    cdef double[::1] step = step_arr
    cdef double[::1] eta = eta_arr
    cdef double[::1] p = p_arr

    cdef double nll, nll_try, rel, e, mx, s, wgt, xa, t, jitter
    cdef int it, l, l2, b, ok, converged = 0, iterations = 0, improved
    cdef int attempt
    cdef Py_ssize_t c1, c2

    with nogil:
        nll = _mn_nll(Xk, y, W, mk, km1, ridge, pen_from, &eta[0])
        for it in range(1, max_iter + 1):
            iterations = it
            for c1 in range(dim):
                G[c1] = 0.0
                for c2 in range(dim):
                    H[c1, c2] = 0.0
            for i in range(n):
                mx = 0.0
                for l in range(km1):
                    e = 0.0
                    for a in range(mk):
                        e += Xk[i, a] * W[l * mk + a]
                    eta[l] = e
                    if e > mx:
                        mx = e
                s = exp(-mx)
                for l in range(km1):
                    s += exp(eta[l] - mx)
                p[0] = exp(-mx) / s
                for l in range(km1):
                    p[l + 1] = exp(eta[l] - mx) / s
                for l in range(km1):
                    e = p[l + 1] - (1.0 if y[i] == l + 1 else 0.0)
                    for a in range(mk):
                        G[l * mk + a] += e * Xk[i, a]
                for l in range(km1):
                    for l2 in range(l, km1):
                        wgt = p[l + 1] * ((1.0 if l == l2 else 0.0) - p[l2 + 1])
                        for a in range(mk):
                            xa = Xk[i, a] * wgt
                            for b in range(mk):
                                H[l * mk + a, l2 * mk + b] += xa * Xk[i, b]
            for l in range(km1):
                for l2 in range(l + 1, km1):
                    for a in range(mk):
                        for b in range(mk):
                            H[l2 * mk + b, l * mk + a] = H[l * mk + a, l2 * mk + b]
            if ridge > 0.0:
                for l in range(km1):
                    for a in range(pen_from, <int>mk):
                        G[l * mk + a] += ridge * W[l * mk + a]
                        H[l * mk + a, l * mk + a] += ridge
            ok = -1
            jitter = 1e-10
            for attempt in range(4):
                for c1 in range(dim):
                    for c2 in range(dim):
                        Hw[c1, c2] = H[c1, c2]
                    Hw[c1, c1] += jitter
                ok = _chol_solve(Hw, G, step, dim)
                if ok == 0:
                    break
                jitter *= 1e4
            if ok != 0:
                break
            t = 1.0
            improved = 0
            for attempt in range(60):
                for c1 in range(dim):
                    Wtry[c1] = W[c1] - t * step[c1]
                nll_try = _mn_nll(Xk, y, Wtry, mk, km1, ridge, pen_from, &eta[0])
                if nll_try <= nll:
                    improved = 1
                    break
                t *= 0.5
            if improved == 0:
                converged = 1
                break
            rel = fabs(nll - nll_try) / (fabs(nll) + 1e-10)
            for c1 in range(dim):
                W[c1] = Wtry[c1]
            nll = nll_try
            if rel < tol:
                converged = 1
                break
        nll = _mn_nll(Xk, y, W, mk, km1, 0.0, pen_from, &eta[0])

    for l in range(km1):
        for a in range(mk):
            W_full[l, kept[a]] = W[l * mk + a]
    return W_full, -nll, bool(converged), iterations, <int>(m - mk)
