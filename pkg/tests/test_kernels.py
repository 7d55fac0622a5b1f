"""Compiled and fallback kernels must be numerically interchangeable."""

import numpy as np
import pytest

from mixedcausal._kernels import get_backend, pyref
from mixedcausal.simulate import make_rng

compiled = pytest.importorskip(
    "mixedcausal._kernels._core", reason="compiled extension not built"
)


def random_design(rng, n, m, collinear=False):
    X = np.column_stack([np.ones(n)] + [rng.normal(size=n) for _ in range(m - 1)])
    if collinear and m >= 3:
        X[:, -1] = X[:, 1] - 2.0 * X[:, 2] if m >= 4 else X[:, 1]
    return np.ascontiguousarray(X)


@pytest.mark.parametrize("collinear", [False, True])
def test_linear_fit_backends_agree(collinear):
    rng = make_rng(7)
    for trial in range(30):
        n = int(rng.integers(20, 200))
        m = int(rng.integers(2, min(10, n - 1)))
        X = random_design(rng, n, m, collinear=collinear)
        y = np.ascontiguousarray(rng.normal(size=n))
        c_py, rss_py, d_py = pyref.linear_fit(X, y)
        c_c, rss_c, d_c = compiled.linear_fit(X, y)
        assert d_py == d_c
        assert rss_c == pytest.approx(rss_py, rel=1e-10, abs=1e-12)
        np.testing.assert_allclose(c_c, c_py, rtol=1e-8, atol=1e-10)


def test_multinomial_backends_agree():
    rng = make_rng(8)
    for trial in range(20):
        n = int(rng.integers(60, 300))
        m = int(rng.integers(1, 6))
        k = int(rng.integers(2, 5))
        X = random_design(rng, n, m)
        W = rng.normal(scale=0.7, size=(k - 1, m))
        eta = X @ W.T
        P = np.exp(np.column_stack([np.zeros(n), eta]))
        P /= P.sum(axis=1, keepdims=True)
        y = np.array([rng.choice(k, p=p) for p in P], dtype=np.int32)
        if np.bincount(y, minlength=k).min() == 0:
            continue
        Wp, llp, cvp, itp, dp = pyref.multinomial_fit(X, y, k)
        Wc, llc, cvc, itc, dc = compiled.multinomial_fit(X, y, k)
        assert (cvp, dp) == (cvc, dc)
        assert llc == pytest.approx(llp, rel=1e-8, abs=1e-8)
        np.testing.assert_allclose(np.asarray(Wc), np.asarray(Wp), rtol=1e-5, atol=1e-6)


def test_multinomial_ridge_backends_agree():
    rng = make_rng(9)
    n = 80
    X = random_design(rng, n, 3)
    y = (X[:, 1] > 0).astype(np.int32)  # separation
    for ridge in (1e-4 * n, 1.0):
        Wp, llp, *_ = pyref.multinomial_fit(X, y, 2, ridge=ridge)
        Wc, llc, *_ = compiled.multinomial_fit(X, y, 2, ridge=ridge)
        assert llc == pytest.approx(llp, rel=1e-6, abs=1e-6)
        np.testing.assert_allclose(np.asarray(Wc), np.asarray(Wp), rtol=1e-4, atol=1e-5)


def test_active_backend_prefers_compiled():
    assert get_backend(None).BACKEND in ("compiled", "python")
    assert get_backend("compiled").BACKEND == "compiled"
    assert get_backend("python").BACKEND == "python"
