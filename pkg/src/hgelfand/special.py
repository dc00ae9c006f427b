"""Laguerre tables, flat cutoffs and quadrature helpers."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln


def _laguerre_rows(kmax: int, a: float, x: np.ndarray, seed: np.ndarray) -> np.ndarray:
    """Rows ``seed * L_k^{(a)}(x)`` by the recurrence on normalized differences.

    With ``P_k = L_k^{(a)} / C(k+a, k)`` and ``D_k = P_k - P_{k-1}`` the update
    ``D_{k+1} = (k D_k - x P_k) / (k + a + 1)`` keeps the rounding error at the
    level of a few ulps even for ``k`` in the tens of thousands, where the plain
    three-term form loses about ``k^2`` ulps near ``x = 0``.
    """
    out = np.empty((kmax + 1,) + x.shape)
    p = seed.astype(float, copy=True)
    out[0] = p
    d = -x / (a + 1) * p
    for k in range(1, kmax + 1):
        if k > 1:
            d = ((k - 1) * d - x * p) / (k + a)
        p = p + d
        out[k] = p
    if a != 0:
        ks = np.arange(kmax + 1, dtype=float)
        scale = np.exp(gammaln(ks + a + 1) - gammaln(ks + 1) - gammaln(a + 1))
        out *= scale.reshape((-1,) + (1,) * x.ndim)
    return out


def laguerre_table(kmax: int, a: float, x: np.ndarray) -> np.ndarray:
    """``L_k^{(a)}(x)`` for ``k = 0..kmax``.

    Returns an array of shape ``(kmax + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    return _laguerre_rows(kmax, a, x, np.ones_like(x))


def laguerre_function_table(kmax: int, a: float, x: np.ndarray) -> np.ndarray:
    """``exp(-x/2) L_k^{(a)}(x)`` for ``k = 0..kmax``.

    The exponential is applied to the seeds, so large ``x`` underflows
    gracefully instead of overflowing.
    """
    x = np.asarray(x, dtype=float)
    return _laguerre_rows(kmax, a, x, np.exp(-x / 2))


def laguerre(k: int, a: float, x):
    return laguerre_table(int(k), a, x)[int(k)]


def binom(n: int, k: int) -> int:
    return math.comb(int(n), int(k))


def log_binom(n, k):
    return gammaln(np.asarray(n) + 1) - gammaln(np.asarray(k) + 1) - gammaln(np.asarray(n) - np.asarray(k) + 1)


# ----------------------------------------------------------------------------
# flat cutoffs


def _flat(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s):
    """Smooth monotone step: 0 for ``s <= 0``, 1 for ``s >= 1``, flat at both ends."""
    a = _flat(s)
    b = _flat(1.0 - np.asarray(s, dtype=float))
    return a / (a + b)


def plateau(t, inner: float, outer: float):
    """Even smooth function equal to 1 on ``|t| <= inner`` and 0 on ``|t| >= outer``."""
    t = np.abs(np.asarray(t, dtype=float))
    return 1.0 - smooth_step((t - inner) / (outer - inner))


def eta_cutoff(t):
    """1 on ``|t| <= 1``, 0 on ``|t| >= 2``."""
    return plateau(t, 1.0, 2.0)


def phi_cutoff(t):
    """1 on ``|t| <= 1/2``, 0 on ``|t| >= 3/4``."""
    return plateau(t, 0.5, 0.75)


def psi_cutoff(t):
    """1 on ``[-2, 2]``, 0 outside ``[-3, 3]``."""
    return plateau(t, 2.0, 3.0)


# ----------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=64)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl(int(n))
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def composite_gauss_legendre(edges, n_per: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on consecutive panels ``[edges[i], edges[i+1]]``."""
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(a, b, n_per)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in ``C^n = R^{2n}``."""
    return 2 * math.pi ** n / math.gamma(n)
