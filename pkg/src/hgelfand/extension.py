"""Schwartz extension off the embedded spectrum.

Stages
------
1. :func:`change_of_generators_extend` moves a function between two
   generator coordinate systems related by polynomial maps.
2. :func:`schwarz_mather` extends a ``K``-invariant function ``g`` on ``C^n``
   to ``R^d`` with ``(E' g) o rho = g``.  The local extension is a Seeley
   reflection of ``U(s) = g(sqrt(s))`` across the orthant ``s >= 0`` (the
   Hilbert image is a linear image of that orthant for every supported action),
   glued over dyadic shells.
3. :func:`geller_jet` produces the Taylor data ``fhat_j^sharp`` of ``fhat`` at
   ``lambda = 0`` through the recursion ``f_{j+1} = (j+1) U h_j``.
4. :func:`jet_extend` realizes the jet by a Borel sum ``H``,
   :func:`interpolate_E` spreads a function on the principal curves to
   ``R^{d+1}``, and :func:`assemble_schwartz_extension` returns
   ``F = E(fhat - hhat) + H``.

Conventions
-----------
The recursion runs in the mixed domain ``(lambda, r)`` used by
:mod:`hgelfand.transform`.  There ``F_t(lambda) = int f exp(i lambda t) dt``, so
``f_1 = -i int_{-inf}^t h`` has ``F_t[f_1] = F_t[h] / lambda``.  Near
``lambda = 0`` every mixed quantity is carried by its Taylor coefficients in
``lambda``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma, j0, j1, jv

from .core import InvariantFunction
from .invariant import GeneratorSystem
from .special import eta_cutoff, gauss_legendre, phi_cutoff, plateau, psi_cutoff, smooth_step
from .spectrum import DEGREE_CAP, SpectrumModel, SpectrumPoint, SpectrumRangeError, enumerate_spectrum
from .transform import (QuadratureConfig, _radial_project, _sample_grid, forward_points,
                        laguerre_radial, radial_measure)

MAX_SEELEY_ORDER = 12
DEFAULT_SEELEY_ORDER = 4
MAX_JET_ORDER = 4


class ExtensionError(RuntimeError):
    pass


class MomentConditionError(ExtensionError):
    """The Taylor data of ``h_j`` at ``lambda = 0`` does not vanish."""


class MultipleSummandError(ExtensionError):
    """Two curve neighbourhoods of the interpolation operator overlap."""


class CompositionError(ValueError):
    """``Q o P`` is not the identity on the sampled set."""


# ----------------------------------------------------------------------------
# gauge


@dataclass(frozen=True)
class AnisotropicGauge:
    """``|y|_alpha = c sum_j |y_j|^{1/alpha_j}``, homogeneous of degree 1 under
    ``delta_r y = (r^{alpha_1} y_1, ..., r^{alpha_d} y_d)``.

    :meth:`smooth` is the equivalent gauge ``c (sum_j y_j^{2L/alpha_j})^{1/2L}``
    with ``L = lcm(alpha)``; it is smooth away from the origin and is the one
    used to build the dyadic partitions.
    """

    exponents: tuple[int, ...]
    c: float = 1.0

    def __post_init__(self):
        if not self.exponents or any(int(a) != a or a <= 0 for a in self.exponents):
            raise ValueError("gauge exponents must be positive integers")
        if self.c <= 0:
            raise ValueError("gauge scale must be positive")

    @property
    def d(self) -> int:
        return len(self.exponents)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        a = np.asarray(self.exponents, dtype=float)
        return self.c * np.sum(np.abs(y) ** (1.0 / a), axis=-1)

    @cached_property
    def _lcm(self) -> int:
        return math.lcm(*[int(a) for a in self.exponents])

    def smooth(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        L = self._lcm
        powers = np.array([2 * L // int(a) for a in self.exponents])
        return self.c * np.sum(y ** powers, axis=-1) ** (1.0 / (2 * L))

    def dilate(self, r: float, y) -> np.ndarray:
        return np.asarray(y, dtype=float) * r ** np.asarray(self.exponents, dtype=float)

    def with_scale(self, c: float) -> "AnisotropicGauge":
        return AnisotropicGauge(self.exponents, c)


# ----------------------------------------------------------------------------
# Seeley reflection


def seeley_coefficients(K: int) -> tuple[np.ndarray, np.ndarray]:
    """``(a, b)`` with ``b_k = 2^k`` and ``sum_k a_k (-b_k)^j = 1`` for ``j = 0..K``."""
    K = int(K)
    if K < 0:
        raise ValueError("order must be nonnegative")
    if K > MAX_SEELEY_ORDER:
        raise ValueError(f"Seeley order {K} exceeds the cap {MAX_SEELEY_ORDER}: "
                         "the Vandermonde system is too ill-conditioned")
    b = 2.0 ** np.arange(K + 1)
    V = np.vander(-b, K + 1, increasing=True).T  # V[j, k] = (-b_k)^j
    a = np.linalg.solve(V, np.ones(K + 1))
    return a, b


def _reflect(g: Callable, s: np.ndarray, axis: int, a, b, scale: float) -> np.ndarray:
    if axis < 0:
        return np.asarray(g(s), dtype=complex)
    out = np.zeros(len(s), dtype=complex)
    x = s[:, axis]
    pos = x >= 0
    if np.any(pos):
        out[pos] = _reflect(g, s[pos], axis - 1, a, b, scale)
    neg = ~pos
    if np.any(neg):
        sn = s[neg]
        acc = np.zeros(len(sn), dtype=complex)
        for ak, bk in zip(a, b):
            u = -bk * sn[:, axis]
            w = plateau(u / scale, 1.0, 2.0)
            live = w > 0
            if not np.any(live):
                continue
            sk = sn[live].copy()
            sk[:, axis] = u[live]
            acc[live] += ak * w[live] * _reflect(g, sk, axis - 1, a, b, scale)
        out[neg] = acc
    return out


def seeley_extend(g: Callable, d: int, K: int = DEFAULT_SEELEY_ORDER, scale: float = 1.0) -> Callable:
    """Extend ``g`` from the closed orthant ``[0, inf)^d`` to ``R^d``.

    In each coordinate, negative arguments are filled by
    ``sum_k a_k g(.., -b_k x, ..) chi(-b_k x / scale)`` with ``chi`` equal to 1 on
    ``[0, 1]`` and 0 beyond 2; coordinates are treated one after another.  The
    result matches ``g`` and its first ``K`` derivatives across each face.
    ``g`` receives arrays of shape ``(P, d)`` with nonnegative entries.
    """
    a, b = seeley_coefficients(K)

    def G(s):
        s = np.asarray(s, dtype=float)
        shape = s.shape[:-1]
        if s.shape[-1] != d:
            raise ValueError(f"expected points of R^{d}")
        flat = s.reshape(-1, d)
        return _reflect(g, flat, d - 1, a, b, scale).reshape(shape)

    return G


# ----------------------------------------------------------------------------
# K-invariant functions on C^n given by their reduced profile


def _eta_rows(action, w: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``eta(w rho)`` for radii ``w`` (P,) against nodes ``rho`` (Q,)."""
    x = np.outer(w, rho)
    if action.kind == "torus" or action.n == 1:
        return j0(x)
    n = action.n
    out = np.ones_like(x)
    nz = x > 1e-8
    bessel = j1(x[nz]) if n == 2 else jv(n - 1, x[nz])
    out[nz] = gamma(n) * (x[nz] / 2) ** (1 - n) * bessel
    out[~nz] = 1 - x[~nz] ** 2 / (4 * n)
    return out


@dataclass
class OrbitProfile:
    """A ``K``-invariant function on ``C^n``: ``u(|z|)`` or ``u(|z_1|, ..., |z_n|)``.

    ``u`` takes one array per reduced radius.  ``r_max`` bounds the region where
    the function is not negligible.
    """

    action: object
    u: Callable
    r_max: float = 8.0
    name: str = "g"

    @property
    def k(self) -> int:
        return self.action.n_reduced

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.action.kind == "unitary_full":
            return np.asarray(self.u(np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))), dtype=complex)
        return np.asarray(self.u(*[np.abs(z[..., h]) for h in range(self.action.n)]), dtype=complex)

    def of_squares(self, s) -> np.ndarray:
        """Values at orbit parameters ``s`` (``|z|^2`` resp. ``|z_j|^2``), shape ``(..., k)``."""
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        return np.asarray(self.u(*[np.sqrt(s[..., j]) for j in range(self.k)]), dtype=complex)

    @classmethod
    def from_callable(cls, action, g: Callable, rng: np.random.Generator | None = None,
                      r_max: float = 8.0, tol: float = 1e-10, name: str = "g") -> "OrbitProfile":
        """Wrap a function of ``z in C^n`` after checking its ``K``-invariance on samples."""
        rng = rng or np.random.default_rng(0)
        n = action.n
        z = rng.normal(size=(24, n)) + 1j * rng.normal(size=(24, n))
        kz = np.empty_like(z)
        for i in range(len(z)):
            if action.kind == "unitary_full":
                q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
                kz[i] = (q * (np.diag(r) / np.abs(np.diag(r)))) @ z[i]
            else:
                kz[i] = np.exp(1j * rng.uniform(0, 2 * np.pi, n)) * z[i]
        gz, gkz = np.asarray(g(z)), np.asarray(g(kz))
        if np.max(np.abs(gz - gkz)) > tol * max(1.0, float(np.max(np.abs(gz)))):
            raise ValueError(f"{name} is not invariant under the declared action {action.tag}")
        if action.kind == "unitary_full":
            def u(r):
                r = np.asarray(r, dtype=float)
                zz = np.zeros(r.shape + (n,), dtype=complex)
                zz[..., 0] = r
                return g(zz)
        else:
            def u(*r):
                return g(np.stack(np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in r]),
                                  axis=-1).astype(complex))
        return cls(action, u, r_max, name)


def fiber_profile(action, a: np.ndarray, r: np.ndarray, wr: np.ndarray, name: str = "ftilde",
                  r_max: float = 64.0) -> OrbitProfile:
    """``w -> int a(|z|) eta_w(z) dz`` for a reduced profile ``a`` sampled on Gauss nodes ``r``.

    This is the Euclidean Fourier transform at the ``lambda = 0`` fibre.
    ``a`` has shape ``(nr,)`` (unitary) or ``(nr,)*n`` (torus).
    """
    mu = wr * radial_measure(action, r)
    a = np.asarray(a, dtype=complex)

    if action.kind == "unitary_full":
        def u(w):
            w = np.asarray(w, dtype=float)
            flat = w.reshape(-1)
            return (_eta_rows(action, flat, r) * mu) @ a if flat.size else np.zeros(0, complex)
    else:
        n = action.n

        def u(*w):
            ws = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in w])
            shape = ws[0].shape
            rows = [(_eta_rows(action, x.reshape(-1), r) * mu) for x in ws]
            acc = np.tensordot(rows[0], a, axes=([1], [0]))  # (P, nr, ...)
            for j in range(1, n):
                # contract the next radial axis against row j, pointwise in P
                acc = np.einsum("pi,pi...->p...", rows[j], acc)
            return acc.reshape(shape)

    def wrapped(*w):
        ws = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in w])
        flat = [x.reshape(-1) for x in ws]
        out = np.empty(flat[0].shape, dtype=complex)
        chunk = 8192
        for start in range(0, len(out), chunk):
            sl = slice(start, start + chunk)
            out[sl] = u(*[x[sl] for x in flat])
        return out.reshape(ws[0].shape)

    return OrbitProfile(action, wrapped, r_max, name)


# ----------------------------------------------------------------------------
# grid Schwartz norms


def _derivative(values: np.ndarray, axes: Sequence[np.ndarray], multi: Sequence[int]) -> np.ndarray:
    out = values
    for ax, count in enumerate(multi):
        for _ in range(count):
            out = np.gradient(out, axes[ax], axis=ax, edge_order=2)
    return out


def grid_schwartz_norm(values: np.ndarray, axes: Sequence[np.ndarray], p: int,
                       weight: np.ndarray | None = None, multi_weights: Sequence[int] | None = None,
                       margin: int = 3) -> float:
    """Grid estimate of ``sup (1 + weight)^p |d^beta F|`` over multi-indices with
    ``sum_j beta_j w_j <= p`` (``w_j = 1`` for the Euclidean norm).

    Derivatives are second-order finite differences on the tensor grid
    ``axes``; ``margin`` boundary layers are discarded.
    """
    dim = len(axes)
    mw = list(multi_weights) if multi_weights is not None else [1] * dim
    if weight is None:
        mesh = np.meshgrid(*axes, indexing="ij")
        weight = np.sqrt(sum(m ** 2 for m in mesh))
    core = tuple(slice(margin, len(a) - margin) for a in axes)
    best = 0.0
    ranges = [range(p // w + 1) for w in mw]
    for multi in itertools.product(*ranges):
        if sum(b * w for b, w in zip(multi, mw)) > p:
            continue
        der = _derivative(values, axes, multi)
        best = max(best, float(np.max(((1 + weight) ** p * np.abs(der))[core])))
    return best


def euclidean_grid(extents: Sequence[float], points: Sequence[int] | int):
    """Symmetric tensor axes ``[-e, e]`` with the given sizes."""
    if isinstance(points, int):
        points = [points] * len(extents)
    return [np.linspace(-e, e, m) for e, m in zip(extents, points)]


# ----------------------------------------------------------------------------
# Schwarz-Mather extension


def _shell_cut(s, R: float):
    """Smooth ``theta``: 1 on ``[0, 1/R]``, 0 on ``[1, inf)``."""
    return 1.0 - smooth_step((np.asarray(s, dtype=float) - 1.0 / R) / (1.0 - 1.0 / R))


def _simplex_samples(k: int, m: int = 41) -> np.ndarray:
    if k == 1:
        return np.ones((1, 1))
    grid = np.array([c for c in itertools.product(range(m), repeat=k) if sum(c) == m - 1], dtype=float)
    return grid / (m - 1)


class SchwarzMather:
    """``E' g`` on ``R^d`` for a ``K``-invariant profile ``g``.

    With ``sigma = A^{-1} y`` (``A`` the linear Hilbert map in orbit parameters)
    the local extension of ``h`` is the Seeley reflection of
    ``s -> h(sqrt(s))`` evaluated at ``sigma``; at scale ``r`` the reflection
    cutoff is stretched by ``r^2``.  The pieces are glued by

        E' g = sum_j psi_j sum_{l=-2..1} E_{R^{j-l}}(phi_{j-l} g)

    where ``phi_j`` is a dyadic partition in ``|x|`` and ``psi_j`` one in the
    smooth gauge, both with ratio ``R``.
    """

    def __init__(self, g: OrbitProfile, gensys: GeneratorSystem, K: int = DEFAULT_SEELEY_ORDER,
                 gauge: AnisotropicGauge | None = None, levels: int | None = None):
        if g.action != gensys.action:
            raise ValueError("profile and generator system belong to different actions")
        seeley_coefficients(K)  # validates the order
        self.g = g
        self.gensys = gensys
        self.K = K
        self.A = gensys.rho_matrix
        self.Ainv = np.linalg.inv(self.A)
        expo = tuple(2 * int(m) for m in gensys.degrees)
        raw = AnisotropicGauge(expo, 1.0) if gauge is None else gauge.with_scale(1.0)
        # the unit sphere |x| = 1 maps to orbit parameters on the simplex sum(s) = 1
        vals = raw.smooth(_simplex_samples(g.k) @ self.A.T)
        lo, hi = float(np.min(vals)), float(np.max(vals))
        self.gauge = raw.with_scale(1.0 / lo)
        ratio = hi / lo
        self.R = float(2 ** max(1, math.ceil(math.log2(max(2.0, ratio)) - 1e-12)))
        if levels is None:
            levels = max(1, math.ceil(math.log(max(g.r_max, 1.0)) / math.log(self.R)) + 3)
        self.levels = int(levels)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    # partitions -------------------------------------------------------------
    def phi(self, i: int, radius) -> np.ndarray:
        R = self.R
        if i == 0:
            return _shell_cut(radius, R)
        return _shell_cut(radius / R ** i, R) - _shell_cut(radius / R ** (i - 1), R)

    def psi(self, j: int, y) -> np.ndarray:
        R = self.R
        v = self.gauge.smooth(y)
        if j == 0:
            return _shell_cut(v / R, R)
        return _shell_cut(v / R ** (j + 1), R) - _shell_cut(v / R ** j, R)

    def local(self, i: int, sigma: np.ndarray) -> np.ndarray:
        """``E_{R^i}(phi_i g)`` at orbit coordinates ``sigma`` of shape ``(P, k)``."""
        gprof = self.g

        def piece(s):
            return self.phi(i, np.sqrt(np.sum(s, axis=-1))) * gprof.of_squares(s)

        ext = seeley_extend(piece, self.g.k, self.K, scale=self.R ** (2 * i))
        return ext(sigma)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.d:
            raise ValueError(f"expected points of R^{self.d}")
        shape = y.shape[:-1]
        flat = y.reshape(-1, self.d)
        sigma = flat @ self.Ainv.T
        out = np.zeros(len(flat), dtype=complex)
        for j in range(self.levels + 3):
            w = self.psi(j, flat)
            live = np.abs(w) > 0
            if not np.any(live):
                continue
            inner = np.zeros(int(live.sum()), dtype=complex)
            for i in range(max(0, j - 1), j + 3):
                if i > self.levels + 2:
                    continue
                inner += self.local(i, sigma[live])
            out[live] += w[live] * inner
        return out.reshape(shape)

    def on_orbits(self, s) -> np.ndarray:
        """``(E' g)(rho)`` at orbit parameters ``s``; equals ``g`` there."""
        return self(np.asarray(s, dtype=float) @ self.A.T)


def schwarz_mather(g, gensys: GeneratorSystem, gauge: AnisotropicGauge | None = None,
                   K: int = DEFAULT_SEELEY_ORDER, rng: np.random.Generator | None = None) -> SchwarzMather:
    """Extension operator ``E'`` applied to ``g``.

    ``g`` is an :class:`OrbitProfile` or a callable on ``C^n`` (checked for
    ``K``-invariance on random samples).  The returned object is callable on
    ``R^d`` and satisfies ``(E' g) o rho = g``.
    """
    if not isinstance(g, OrbitProfile):
        g = OrbitProfile.from_callable(gensys.action, g, rng)
    return SchwarzMather(g, gensys, K, gauge)


# ----------------------------------------------------------------------------
# Geller recursion


def cutoff_Psi(lam, xi, degrees: Sequence[int]) -> np.ndarray:
    """``Psi(lambda, xi) = psi(lambda^2 + q) + psi(lambda^2 / q) (1 - psi(lambda^2 + q))`` with
    ``q = sum_j |xi_j|^{2/m_j}``; equal to 1 on a neighbourhood of the spectrum."""
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    m = np.asarray(degrees, dtype=float)
    q = np.sum(np.abs(xi) ** (2.0 / m), axis=-1)
    big = psi_cutoff(lam ** 2 + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0, lam ** 2 / np.where(q > 0, q, 1.0), np.where(lam == 0, 0.0, np.inf))
    cone = np.where(np.isfinite(ratio), psi_cutoff(np.where(np.isfinite(ratio), ratio, 0.0)), 0.0)
    return big + cone * (1 - big)


class FiberKernel:
    """The operator ``a -> M(lambda, .)`` sending a reduced profile ``a`` on the Gauss nodes to
    the mixed-domain kernel of the symbol ``U(s_alpha)``, ``U`` the fibre transform of ``a``.

    On the principal curves ``s_alpha = |lambda| (2 alpha + n)`` (unitary) or
    ``|lambda| (2 alpha_j + 1)`` (torus), so the kernel factorizes through one
    matrix per radial axis:

        K_lambda[r, rho] = (|lambda| / 2 pi)^n' sum_k l_k^{|lambda|}(r) eta(rho sqrt(s_k)) mu(rho)
    """

    def __init__(self, action, r: np.ndarray, wr: np.ndarray, s_max: float, max_labels: int = 40_000):
        self.action = action
        self.r = r
        self.mu = wr * radial_measure(action, r)
        self.s_max = float(s_max)
        self.max_labels = max_labels
        self._cache: dict[float, np.ndarray] = {}

    def matrix(self, lam: float) -> np.ndarray:
        lam = abs(float(lam))
        if lam in self._cache:
            return self._cache[lam]
        act = self.action
        unitary = act.kind == "unitary_full"
        shift = act.n if unitary else 1
        kmax = int(min(self.max_labels, max(1, math.ceil((self.s_max / lam - shift) / 2))))
        s = lam * (2 * np.arange(kmax + 1) + shift)
        ell = laguerre_radial(act, lam, kmax, self.r)  # (k, r)
        eta = _eta_rows(act, np.sqrt(s), self.r) * self.mu  # (k, rho)
        pref = (lam / (2 * math.pi)) ** (act.n if unitary else 1)
        K = pref * (ell.T @ eta)
        self._cache[lam] = K
        return K

    def apply(self, lam: float, a: np.ndarray) -> np.ndarray:
        K = self.matrix(lam)
        out = np.asarray(a, dtype=complex)
        if self.action.kind == "unitary_full":
            return K @ out
        for ax in range(self.action.n):
            out = np.moveaxis(np.tensordot(K, out, axes=([1], [ax])), 0, ax)
        return out


def _profile_scale(action, a: np.ndarray, r: np.ndarray, wr: np.ndarray) -> float:
    """Root mean square radius of ``|a|``; sets the lambda window of the Taylor fits."""
    w = wr * radial_measure(action, r)
    mag = np.abs(a)
    if action.kind == "unitary_full":
        tot = float(np.sum(mag * w))
        return math.sqrt(float(np.sum(mag * w * r ** 2)) / tot) if tot > 0 else 1.0
    tot, sec = mag, mag
    for ax in range(action.n):
        shape = [1] * action.n
        shape[ax] = -1
        wa = w.reshape(shape)
        tot = tot * wa
    total = float(np.sum(tot))
    if total <= 0:
        return 1.0
    rr = sum((r ** 2).reshape([-1 if i == ax else 1 for i in range(action.n)]) for ax in range(action.n))
    return math.sqrt(float(np.sum(tot * rr)) / total / action.n)


def _decay_bound(prof: OrbitProfile, k: int, tol: float = 1e-15, s_cap: float = 4000.0) -> float:
    """Orbit parameter beyond which the fibre transform is below ``tol`` relative (sampled along
    the coordinate axes and the diagonal)."""
    s = np.geomspace(1e-2, s_cap, 400)
    rows = []
    for ax in range(k):
        pts = np.zeros((len(s), k))
        pts[:, ax] = s
        rows.append(np.abs(prof.of_squares(pts)))
    rows.append(np.abs(prof.of_squares(np.repeat(s[:, None] / k, k, axis=1))))
    mag = np.max(np.stack(rows), axis=0)
    ref = max(float(np.max(mag)), 1e-300)
    above = np.nonzero(mag > tol * ref)[0]
    if len(above) == 0:
        return float(s[0])
    return float(min(s_cap, 1.25 * s[above[-1]]))


@dataclass
class TaylorFit:
    coeffs: np.ndarray  # (deg+1,) + grid shape: coefficients of lambda^{2i}
    window: tuple[float, float]
    residual: float


def fit_even_taylor(samples: Callable[[float], np.ndarray], window: tuple[float, float],
                    degree: int = 7, nodes: int = 32) -> TaylorFit:
    """Least-squares polynomial in ``lambda^2`` through ``samples(lambda)`` at Chebyshev nodes."""
    lo, hi = window
    x = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    lams = lo + (hi - lo) * (x + 1) / 2
    Y = np.array([samples(l) for l in lams])
    shape = Y.shape[1:]
    Y2 = Y.reshape(nodes, -1)
    V = np.vander(lams ** 2, degree + 1, increasing=True)
    c, *_ = np.linalg.lstsq(V, Y2, rcond=None)
    resid = float(np.max(np.abs(V @ c - Y2))) if Y2.size else 0.0
    return TaylorFit(c.reshape((degree + 1,) + shape), (lo, hi), resid)


@dataclass(frozen=True)
class SchwartzJet:
    """Taylor data of ``fhat`` at ``lambda = 0``.

    ``components[j]`` is ``fhat_j^sharp`` (a :class:`SchwarzMather` extension of
    the fibre profile ``fibers[j]``).  ``taylor[(j, i)]`` holds the
    ``lambda^i`` coefficient of ``F_t[f_j](lambda, r)`` on the radial nodes ``r``.
    """

    order: int
    components: tuple
    fibers: tuple
    taylor: dict
    r: np.ndarray
    wr: np.ndarray
    gensys: GeneratorSystem
    moment_defects: tuple = ()
    fit_residuals: tuple = ()
    source: InvariantFunction | None = None
    cfg: QuadratureConfig | None = None
    kernel: FiberKernel | None = None

    @property
    def action(self):
        return self.gensys.action

    def __call__(self, j: int, xi) -> np.ndarray:
        return self.components[j](xi)

    def on_curve(self, j: int, lam, labels) -> np.ndarray:
        """``fhat_j^sharp(xi(lambda, alpha))`` without the extension: the fibre profile at the
        orbit parameters of the curve point."""
        labels = np.atleast_2d(np.asarray(labels))
        shift = self.action.n if self.action.kind == "unitary_full" else 1
        s = abs(float(lam)) * (2 * labels + shift)
        return self.fibers[j].of_squares(s)


def _zeros_like_profile(action, r):
    k = action.n_reduced
    return np.zeros((len(r),) * k, dtype=complex)


def geller_jet(f: InvariantFunction, p: int, model: SpectrumModel | None = None,
               gensys: GeneratorSystem | None = None, cfg: QuadratureConfig | None = None,
               K: int = DEFAULT_SEELEY_ORDER, moment_tol: float = 1e-7,
               max_order: int = MAX_JET_ORDER) -> SchwartzJet:
    """The jet ``(fhat_j^sharp)_{j <= p}`` of Geller's development of ``fhat`` at ``lambda = 0``.

    ``f_0 = f``; ``h_j`` is ``f_j`` minus the kernel of the symbol
    ``fhat_j^sharp Psi``; ``f_{j+1} = -i (j+1) int_{-inf}^t h_j``.  In the
    mixed domain this is ``F_{j+1} = (j+1) (F_j - M_j) / lambda``, so the Taylor
    coefficients obey ``a_{j+1,i} = (j+1) (a_{j,i+1} - b_{j,i+1})``, where ``b_{j,i}``
    are those of the kernel ``M_j``.  The moment condition ``int h_j dt = 0`` is
    ``a_{j,0} = b_{j,0}``; a violation raises :class:`MomentConditionError`.
    """
    if p < 0:
        raise ValueError("order must be nonnegative")
    if p > max_order:
        raise ValueError(f"order {p} exceeds the working cap {max_order}")
    if gensys is None:
        if model is None:
            raise ValueError("need a model or a generator system")
        gensys = model.gensys
    cfg = cfg or QuadratureConfig()
    action = f.action
    t, wt, r, wr, vals = _sample_grid(f, cfg)
    taylor: dict[tuple[int, int], np.ndarray] = {}
    for i in range(p + 1):
        taylor[(0, i)] = np.tensordot((1j * t) ** i / math.factorial(i) * wt, vals, axes=(0, 0))

    scale_ref = max(float(np.max(np.abs(v))) for v in taylor.values()) or 1.0
    components, fibers, defects, residuals = [], [], [], []
    kernel = None
    for j in range(p + 1):
        a = taylor[(j, 0)]
        if float(np.max(np.abs(a))) <= 1e-14 * scale_ref:
            a = taylor[(j, 0)] = np.zeros_like(a)
        prof = fiber_profile(action, a, r, wr, name=f"ftilde_{j}")
        fibers.append(prof)
        components.append(SchwarzMather(prof, gensys, K))
        if j == p:
            break
        if not np.any(a):
            b = {}
            defects.append(0.0)
            residuals.append(0.0)
        else:
            kernel = FiberKernel(action, r, wr, max(_decay_bound(prof, action.n_reduced), 50.0))
            window = (0.15 / _profile_scale(action, a, r, wr) ** 2, 1.2 / _profile_scale(action, a, r, wr) ** 2)
            fit = fit_even_taylor(lambda l: kernel.apply(l, a), window)
            b = {2 * i: fit.coeffs[i] for i in range(len(fit.coeffs))}
            defect = float(np.max(np.abs(b[0] - a))) / scale_ref
            defects.append(defect)
            residuals.append(fit.residual / scale_ref)
            if defect > moment_tol:
                raise MomentConditionError(
                    f"moment of h_{j} is {defect:.3e} (relative), above {moment_tol:.1e}; "
                    "the radial grid or the spectral window is too small")
        for i in range(p - j):
            bi = b.get(i + 1, 0.0)
            taylor[(j + 1, i)] = (j + 1) * (taylor[(j, i + 1)] - bi)
    return SchwartzJet(p, tuple(components), tuple(fibers), taylor, r, wr, gensys,
                       tuple(defects), tuple(residuals), f, cfg, kernel)


def _mixed_on_grid(action, lam: float, labels: np.ndarray, vals: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``(|lambda| / 2 pi)^n sum_alpha vals_alpha l_alpha(r)`` on the tensor grid of nodes ``r``."""
    n = action.n
    lam = abs(float(lam))
    pref = (lam / (2 * math.pi)) ** n
    if len(labels) == 0:
        return np.zeros((len(r),) * action.n_reduced, dtype=complex)
    if action.kind == "unitary_full":
        tab = laguerre_radial(action, lam, int(labels.max()), r)
        return pref * (np.asarray(vals, dtype=complex) @ tab[labels[:, 0]])
    box = labels.max(axis=0) + 1
    dense = np.zeros(tuple(box), dtype=complex)
    dense[tuple(labels.T)] = vals
    out = dense
    for ax in range(n):
        tab = laguerre_radial(action, lam, int(box[ax]) - 1, r)  # (k, r)
        out = np.moveaxis(np.tensordot(tab, out, axes=([0], [ax])), 0, ax)
    return pref * out


@dataclass
class GellerDevelopment:
    """``fhat = sum_{j<=p} lambda^j / j! fhat_j^sharp + lambda^{p+1}/(p+1)! fhat_{p+1}`` at
    principal points; ``mixed[j][i]`` is ``F_t[f_j](lam[i], r)`` for ``j <= p + 1``."""

    jet: SchwartzJet
    lam: np.ndarray
    labels: list
    fhat: list
    terms: list  # terms[i][j] = fhat_j^sharp(xi) at the labels of lam[i]
    remainder: list
    mixed: list

    def reconstruction(self, i: int) -> np.ndarray:
        p = self.jet.order
        lam = float(self.lam[i])
        acc = sum(lam ** j / math.factorial(j) * self.terms[i][j] for j in range(p + 1))
        return acc + lam ** (p + 1) / math.factorial(p + 1) * self.remainder[i]

    def identity_error(self) -> float:
        worst = 0.0
        for i in range(len(self.lam)):
            if len(self.labels[i]):
                worst = max(worst, float(np.max(np.abs(self.fhat[i] - self.reconstruction(i)))))
        return worst


def geller_development(jet: SchwartzJet, model: SpectrumModel, lams: Sequence[float]) -> GellerDevelopment:
    """Run the recursion at the principal ``lambda`` values ``lams`` with the labels of ``model``.

    ``M_j`` is the mixed-domain kernel of the symbol ``fhat_j^sharp(xi) Psi(lambda, xi)`` on the
    principal curves, ``F_{j+1} = (j+1) (F_j - M_j) / lambda`` and
    ``fhat_{p+1} = F_{p+1}`` projected on the Laguerre functions.
    """
    if jet.source is None:
        raise ValueError("jet carries no source function")
    f, cfg = jet.source, jet.cfg
    action = f.action
    p = jet.order
    lams = np.asarray([l for l in lams if l != 0], dtype=float)
    t, wt, r, wr, vals = _sample_grid(f, cfg)
    kernel = np.exp(1j * np.outer(lams, t)) * wt
    F0 = np.tensordot(kernel, vals, axes=(1, 0))
    out_labels, fh, terms, rem, mixed = [], [], [], [], []
    degrees = model.gensys.degrees
    for i, lam in enumerate(lams):
        labs = model.labels_for(lam)
        xis = model.xi(lam, labs)
        Fj = F0[i]
        stack = [Fj]
        tj = []
        for j in range(p + 1):
            sharp = jet.components[j](xis)
            sym = sharp * cutoff_Psi(lam, xis, degrees)
            tj.append(sharp)
            Mj = _mixed_on_grid(action, lam, labs, sym, r)
            Fj = (j + 1) * (Fj - Mj) / lam
            stack.append(Fj)
        out_labels.append(labs)
        fh.append(_radial_project(action, F0[i], abs(lam), labs, r, wr))
        terms.append(tj)
        rem.append(_radial_project(action, Fj, abs(lam), labs, r, wr))
        mixed.append(stack)
    return GellerDevelopment(jet, lams, out_labels, fh, terms, rem, mixed)


# ----------------------------------------------------------------------------
# transforms at arbitrary (lambda, alpha)


class TransformEvaluator:
    """``(lambda, labels) -> fhat(lambda, alpha)`` at arbitrary ``lambda``, sampling ``f`` once."""

    def __init__(self, f: InvariantFunction, cfg: QuadratureConfig | None = None):
        self.f = f
        self.cfg = cfg or QuadratureConfig()
        self.t, self.wt, self.r, self.wr, self.vals = _sample_grid(f, self.cfg)
        self.mu = self.wr * radial_measure(f.action, self.r)

    @property
    def action(self):
        return self.f.action

    def mixed(self, lam: float) -> np.ndarray:
        ker = np.exp(1j * lam * self.t) * self.wt
        return np.tensordot(ker, self.vals, axes=(0, 0))

    def __call__(self, lam: float, labels) -> np.ndarray:
        labels = np.atleast_2d(np.asarray(labels, dtype=int))
        if len(labels) == 0:
            return np.zeros(0, dtype=complex)
        if lam == 0:
            raise ValueError("principal labels need lambda != 0")
        if int(labels.max()) > DEGREE_CAP:
            raise SpectrumRangeError(
                f"label {int(labels.max())} at lambda={lam:.3e} exceeds the degree cap {DEGREE_CAP}")
        F = self.mixed(lam)
        act = self.action
        if act.kind == "unitary_full" or act.n != 2:
            return _radial_project(act, F, abs(lam), labels, self.r, self.wr)
        kmax = int(labels.max())
        tab = laguerre_radial(act, abs(lam), kmax, self.r) * self.mu  # (k, r)
        G = tab @ F  # (k, r2)
        return np.einsum("li,li->l", G[labels[:, 0]], tab[labels[:, 1]])


# ----------------------------------------------------------------------------
# jet extension


def _unique_rows(xi: np.ndarray):
    flat = xi.reshape(-1, xi.shape[-1])
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    return uniq, inv.reshape(-1)


def sharp_norm_box(jet: SchwartzJet, j: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """A box ``[lo, hi]`` in ``R^d`` outside which ``fhat_j^sharp`` is negligible."""
    gs = jet.gensys
    s_max = _decay_bound(jet.fibers[j], gs.action.n_reduced, tol=1e-12)
    hi = gs.rho_matrix @ np.full(gs.action.n_reduced, s_max)
    return -0.25 * hi, hi


class JetExtension:
    """``H(lambda, xi) = sum_j lambda^j / j! fhat_j^sharp(xi) eta(c_j lambda)``.

    ``c_j = 2^j max(1, N_j)`` with ``N_j`` a grid estimate of the order-``j``
    Schwartz norm of ``fhat_j^sharp``, measured in the dilation-adapted norm
    ``||.||'_(j)`` of ``R^d`` (gauge weight, derivative ``d_l`` counted with
    weight ``alpha_l``).  ``eta`` is 1 on ``[-1, 1]`` so the terms are exact
    polynomials in ``lambda`` for ``|lambda| <= 1 / max c_j``.
    """

    def __init__(self, jet: SchwartzJet, norm_points: int | None = None, norms: Sequence[float] | None = None):
        self.jet = jet
        self.order = jet.order
        if norms is None:
            norms = [self._estimate_norm(j, norm_points) for j in range(self.order + 1)]
        self.norms = tuple(float(x) for x in norms)
        self.c = tuple(2.0 ** j * max(1.0, nj) for j, nj in enumerate(self.norms))

    def _estimate_norm(self, j: int, points: int | None) -> float:
        d = self.jet.gensys.d
        pts = points or {1: 801, 2: 61, 3: 21}.get(d, 15)
        lo, hi = sharp_norm_box(self.jet, 0)
        axes = [np.linspace(a, b, pts) for a, b in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        comp = self.jet.components[j]
        vals = comp(mesh)
        gauge = comp.gauge
        return grid_schwartz_norm(vals, axes, j, weight=gauge(mesh), multi_weights=gauge.exponents,
                                  margin=1)

    @property
    def flat_radius(self) -> float:
        """``H`` is a polynomial of degree ``p`` in ``lambda`` on ``|lambda| <= flat_radius``."""
        return 1.0 / max(self.c)

    def sharp(self, xi) -> list[np.ndarray]:
        xi = np.asarray(xi, dtype=float)
        uniq, inv = _unique_rows(xi)
        return [self.jet.components[j](uniq)[inv].reshape(xi.shape[:-1]) for j in range(self.order + 1)]

    def __call__(self, lam, xi) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(lam.shape, xi.shape[:-1])
        lam = np.broadcast_to(lam, shape)
        xi = np.broadcast_to(xi, shape + (xi.shape[-1],))
        out = np.zeros(shape, dtype=complex)
        for j, val in enumerate(self.sharp(xi)):
            out += lam ** j / math.factorial(j) * val * eta_cutoff(self.c[j] * lam)
        return out


def jet_extend(jet: SchwartzJet, **kwargs) -> JetExtension:
    return JetExtension(jet, **kwargs)


# ----------------------------------------------------------------------------
# interpolation operator


class InterpolationE:
    """``E h(lambda, xi) = sum_alpha h(lambda, alpha) prod_l phi(xi_l / |lambda|^{m_l} - Vhat_l(alpha))``.

    ``h`` is a callable ``(lambda, labels) -> values`` (for instance a
    :class:`TransformEvaluator`) or a :class:`~hgelfand.transform.GelfandTable`,
    in which case only the table's ``lambda`` nodes can be evaluated.
    ``E h = 0`` on ``lambda = 0``.
    """

    def __init__(self, h, gensys: GeneratorSystem, cutoff: Callable = phi_cutoff, support: float = 0.75):
        from .transform import GelfandTable

        if isinstance(h, GelfandTable):
            h = _table_lookup(h)
        self.h = h
        self.gensys = gensys
        self.cutoff = cutoff
        self.support = support
        c, B = gensys.affine
        if B.shape[0] != B.shape[1] or abs(np.linalg.det(B)) < 0.5:
            raise ValueError("eigentable map alpha -> Vhat(alpha) is not injective")
        if not (np.allclose(c, np.round(c)) and np.allclose(B, np.round(B))):
            raise ValueError("eigentable values are not integer vectors")
        self.c, self.B = c, B
        self.Binv = np.linalg.inv(B)
        self.degrees = np.asarray(gensys.degrees, dtype=float)
        r = B.shape[1]
        self.offsets = np.array(list(itertools.product(range(-1, 3), repeat=r)), dtype=int)

    def active(self, lam, xi):
        """Labels and cutoff weights of the active summand at each point.

        Returns ``(labels (P, r), weights (P,))``; weight 0 means no summand.
        Raises :class:`MultipleSummandError` when two summands are active.
        """
        lam = np.asarray(lam, dtype=float).reshape(-1)
        xi = np.asarray(xi, dtype=float).reshape(len(lam), -1)
        P = len(lam)
        r = self.B.shape[1]
        labels = np.zeros((P, r), dtype=int)
        weights = np.zeros(P)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            u_all = np.abs(xi) / np.abs(lam)[:, None] ** self.degrees
        # beyond 2^40 adjacent curves are no longer resolved in double precision; those
        # points are treated as lying on lambda = 0, where E vanishes
        nz = (lam != 0) & np.all(u_all < 2.0 ** 40, axis=1)
        if not np.any(nz):
            return labels, weights
        u = xi[nz] / np.abs(lam[nz])[:, None] ** self.degrees
        guess = (u - self.c) @ self.Binv.T
        base = np.floor(guess).astype(int)
        cand = base[:, None, :] + self.offsets[None, :, :]  # (P', C, r)
        vhat = self.c + cand @ self.B.T
        w = np.prod(self.cutoff(u[:, None, :] - vhat), axis=-1)
        w = np.where(np.all(cand >= 0, axis=-1), w, 0.0)
        live = w > 0
        count = live.sum(axis=1)
        if np.any(count > 1):
            bad = int(np.nonzero(count > 1)[0][0])
            raise MultipleSummandError(
                f"{int(count[bad])} summands active at lambda={lam[nz][bad]}, xi={xi[nz][bad]}")
        pick = np.argmax(w, axis=1)
        idx = np.nonzero(nz)[0]
        labels[idx] = cand[np.arange(len(idx)), pick]
        weights[idx] = w[np.arange(len(idx)), pick]
        return labels, weights

    def __call__(self, lam, xi) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(lam.shape, xi.shape[:-1])
        lam = np.broadcast_to(lam, shape).reshape(-1)
        xi = np.broadcast_to(xi, shape + (xi.shape[-1],)).reshape(len(lam), -1)
        labels, weights = self.active(lam, xi)
        out = np.zeros(len(lam), dtype=complex)
        live = weights > 0
        for l in np.unique(lam[live]):
            sel = np.nonzero(live & (lam == l))[0]
            labs, inv = np.unique(labels[sel], axis=0, return_inverse=True)
            vals = np.asarray(self.h(float(l), labs), dtype=complex)
            out[sel] = vals[inv.reshape(-1)] * weights[sel]
        return out.reshape(shape)


def _table_lookup(table):
    index = {}
    for i, lam in enumerate(table.lam):
        index[float(lam)] = {tuple(int(x) for x in a): v for a, v in zip(table.labels[i], table.values[i])}

    def h(lam, labels):
        if lam not in index:
            raise KeyError(f"lambda={lam} is not a node of the table")
        row = index[lam]
        return np.array([row.get(tuple(int(x) for x in a), 0.0) for a in np.atleast_2d(labels)], dtype=complex)

    return h


def interpolate_E(table, gensys: GeneratorSystem, cutoff: Callable = phi_cutoff) -> InterpolationE:
    return InterpolationE(table, gensys, cutoff)


# ----------------------------------------------------------------------------
# finite differences in lambda


def fd_weights(offsets: Sequence[float], order: int) -> np.ndarray:
    """Weights ``w`` with ``sum_k w_k q(offset_k) = q^{(order)}(0)`` for polynomials ``q`` of degree
    below ``len(offsets)`` (unit step)."""
    x = np.asarray(offsets, dtype=float)
    m = len(x)
    if order >= m:
        raise ValueError("stencil too short for the derivative order")
    V = np.vander(x, m, increasing=True).T  # V[i, k] = x_k^i
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def lambda_derivatives(F: Callable, xi: np.ndarray, orders: Sequence[int], step: float,
                       side: str = "central", width: int = 3) -> dict[int, np.ndarray]:
    """Finite-difference ``d^s/d lambda^s F(0, xi)`` for each ``s`` in ``orders``.

    ``side`` is ``"central"`` (stencil ``-width..width``), ``"right"`` (``0..2 width``) or
    ``"left"`` (``-2 width..0``).
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if side == "central":
        offs = np.arange(-width, width + 1)
    elif side == "right":
        offs = np.arange(0, 2 * width + 1)
    elif side == "left":
        offs = np.arange(-2 * width, 1)
    else:
        raise ValueError(f"unknown side {side!r}")
    lam = np.repeat(offs * step, len(xi))
    pts = np.tile(xi, (len(offs), 1))
    vals = np.asarray(F(lam, pts)).reshape(len(offs), len(xi))
    out = {}
    for s in orders:
        w = fd_weights(offs, s)
        out[s] = (w @ vals) / step ** s
    return out


# ----------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class NormBox:
    """Tensor grid on ``R^{d+1}`` used for Schwartz-norm estimates."""

    lam_max: float
    xi_lo: tuple
    xi_hi: tuple
    points: tuple

    def axes(self) -> list[np.ndarray]:
        ax = [np.linspace(-self.lam_max, self.lam_max, self.points[0])]
        for lo, hi, m in zip(self.xi_lo, self.xi_hi, self.points[1:]):
            ax.append(np.linspace(lo, hi, m))
        return ax


@dataclass(frozen=True)
class ExtensionResult:
    """``F = E(fhat - hhat) + H`` with its diagnostics.

    ``norm_report[r]`` is the grid estimate of ``||F||_(r)``; ``grid`` caches
    the sampled values used for it.
    """

    F: Callable
    achieved_order: int
    norm_report: dict
    restriction_error: float
    jet_error: float
    jump_error: float
    jet: SchwartzJet | None = None
    H: JetExtension | None = None
    E: InterpolationE | None = None
    grid: dict = field(default_factory=dict)

    def __call__(self, lam, xi) -> np.ndarray:
        return self.F(lam, xi)

    def summary(self) -> dict:
        return {
            "order": self.achieved_order,
            "norms": {str(k): v for k, v in sorted(self.norm_report.items())},
            "restriction_error": self.restriction_error,
            "jet_error": self.jet_error,
            "jump_error": self.jump_error,
        }


class _Assembled:
    """Callable ``F(lam, xi)``; ``hhat`` is ``H`` restricted to the principal curves."""

    def __init__(self, evaluator: TransformEvaluator, H: JetExtension, gensys: GeneratorSystem):
        self.fhat = evaluator
        self.H = H
        self.gensys = gensys
        self.E = InterpolationE(self.gap, gensys)

    def gap(self, lam: float, labels) -> np.ndarray:
        labels = np.atleast_2d(np.asarray(labels, dtype=int))
        xi = self.gensys.eigenvalue_array(labels) * abs(lam) ** np.asarray(self.gensys.degrees, dtype=float)
        return self.fhat(lam, labels) - self.H(np.full(len(labels), lam), xi)

    def __call__(self, lam, xi) -> np.ndarray:
        return self.E(lam, xi) + self.H(lam, xi)


def _default_box(jet: SchwartzJet, f: InvariantFunction, d: int) -> NormBox:
    lo, hi = sharp_norm_box(jet, 0)
    lam_max = float(min(40.0, 2.0 * math.sqrt(40.0) / max(1e-3, 1.0 / max(f.t_max, 1.0)) / 8.0))
    pts = {1: (161, 321), 2: (61, 41, 41)}.get(d, (31,) + (17,) * d)
    return NormBox(lam_max, tuple(lo), tuple(hi), pts)


def assemble_schwartz_extension(f: InvariantFunction, p: int, model: SpectrumModel,
                                cfg: QuadratureConfig | None = None, box: NormBox | None = None,
                                jet_samples: int = 5, fd_step: float | None = None,
                                norms: bool = True) -> ExtensionResult:
    """``F = E(fhat - hhat) + H`` for the jet of order ``p``.

    Diagnostics: ``restriction_error`` is ``max |F - fhat|`` over the enumerated
    points of ``model`` (``fhat`` computed independently of the pipeline);
    ``jet_error`` compares central differences of ``F`` at ``lambda = 0`` with
    ``fhat_j^sharp`` for ``j <= min(p, 3)``; ``jump_error`` compares one-sided
    differences from both sides.
    """
    cfg = cfg or QuadratureConfig()
    gs = model.gensys
    jet = geller_jet(f, p, gensys=gs, cfg=cfg)
    H = JetExtension(jet)
    ev = TransformEvaluator(f, cfg)
    Fa = _Assembled(ev, H, gs)

    points = enumerate_spectrum(model)
    want = forward_points(f, points, cfg)
    coords = np.array([q.coords for q in points])
    got = Fa(coords[:, 0], coords[:, 1:])
    restriction = float(np.max(np.abs(got - want))) if len(points) else 0.0

    # jet match and continuity across lambda = 0 on the degenerate samples, plus off-cone samples
    s_axis = np.linspace(0.0, 0.5 * model.orbit_max, jet_samples)
    s_pts = np.array(list(itertools.product(s_axis, repeat=gs.action.n_reduced)))
    xi_samples = np.concatenate([gs.rho_from_squares(s_pts), -0.05 * gs.rho_from_squares(s_pts[1:])])
    step = fd_step or min(0.01, 0.3 * H.flat_radius)
    orders = list(range(min(p, 3) + 1))
    central = lambda_derivatives(Fa, xi_samples, orders, step, "central", 3)
    sharp = H.sharp(xi_samples)
    jet_err = max(float(np.max(np.abs(central[j] - sharp[j]))) for j in orders)
    # one-sided stencils span twice as many steps; halve the step to stay inside the flat window
    right = lambda_derivatives(Fa, xi_samples, orders, step / 2, "right", 3)
    left = lambda_derivatives(Fa, xi_samples, orders, step / 2, "left", 3)
    jump = max(float(np.max(np.abs(right[j] - left[j]))) for j in orders)

    report, grid = {}, {}
    if norms:
        box = box or _default_box(jet, f, gs.d)
        axes = box.axes()
        mesh = np.meshgrid(*axes, indexing="ij")
        lam = mesh[0]
        xi = np.stack(mesh[1:], axis=-1)
        vals = Fa(lam, xi)
        grid = {"axes": axes, "values": vals}
        for order in range(p + 1):
            report[order] = grid_schwartz_norm(vals, axes, order)
    return ExtensionResult(Fa, p, report, restriction, jet_err, jump, jet, H, Fa.E, grid)


# ----------------------------------------------------------------------------
# change of generators


def change_of_generators_extend(f: Callable, P: Callable, Q: Callable, samples=None,
                                cutoff: Callable | None = None, tol: float = 1e-12) -> Callable:
    """``x -> Psi(x - Q(P(x))) f(P(x))``.

    ``P`` and ``Q`` are polynomial maps acting on arrays of shape ``(..., n)``
    resp. ``(..., m)``; ``samples`` are points of ``E = P^{-1}(F)`` on which
    ``Q o P = id`` is verified.  The default cutoff is 1 on ``|x| <= 1`` and 0
    for ``|x| >= 2``.
    """
    cut = cutoff or (lambda v: plateau(np.linalg.norm(v, axis=-1), 1.0, 2.0))
    if samples is not None:
        x = np.asarray(samples, dtype=float)
        dev = float(np.max(np.abs(np.asarray(Q(P(x))) - x))) if len(x) else 0.0
        if dev > tol * max(1.0, float(np.max(np.abs(x)))):
            raise CompositionError(f"Q o P differs from the identity by {dev:.3e} on the samples")

    def extended(x):
        x = np.asarray(x, dtype=float)
        y = np.asarray(P(x))
        return cut(x - np.asarray(Q(y))) * np.asarray(f(y))

    return extended


def affine_map(M, c=None) -> Callable:
    """``x -> x @ M.T + c``, a polynomial map of degree 1."""
    M = np.asarray(M, dtype=float)
    c = np.zeros(M.shape[0]) if c is None else np.asarray(c, dtype=float)
    return lambda x: np.asarray(x, dtype=float) @ M.T + c
