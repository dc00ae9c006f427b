"""Forward and inverse spherical transforms, Plancherel inversion and spectral multipliers.

Everything is organised through the mixed domain ``(lambda, r)``:

    F_t(lambda, r) = int f(t, r) exp(i lambda t) dt

is computed by Gauss-Legendre quadrature in ``t``, after which

    fhat(lambda, alpha) = int F_t(lambda, r) l_alpha^{|lambda|}(r) dmu(r) / dim(P_alpha)

with ``l_k^{lam}(r) = exp(-x/2) L_k^{(a)}(x)``, ``x = lam r^2 / 2``.  The inverse
runs the same two steps backwards::

    F(lambda, r) = (|lambda| / 2 pi)^n sum_alpha fhat(lambda, alpha) l_alpha^{|lambda|}(r)
    f(t, r)      = (1 / 2 pi) int exp(-i lambda t) F(lambda, r) dlambda

which is the Plancherel inversion ``c_n int sum fhat conj(phi) dim |lambda|^n``
with ``c_n = (2 pi)^{-(n+1)}``.  The constant is checked against a delta-test
calibration (:func:`calibrate_plancherel`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .core import InvariantFunction, apply_operator, AnalyticFunction
from .invariant import ActionDescriptor, WordSum
from .special import gauss_legendre, laguerre_function_table, sphere_area
from .spectrum import SpectrumModel, SpectrumPoint


class TruncationWarning(UserWarning):
    pass


class IntegrabilityError(ValueError):
    pass


def plancherel_constant(n: int) -> float:
    """Frozen inversion constant ``c_n = (2 pi)^{-(n+1)}`` (see :func:`calibrate_plancherel`)."""
    return (2 * math.pi) ** (-(n + 1))


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature sizes: ``nt`` nodes in ``t``, ``nr`` per radial axis, ``n_lambda`` per
    ``lambda`` half-interval.  ``t_max``/``r_max`` default to the function's extents."""

    nt: int = 160
    nr: int = 160
    n_lambda: int = 64
    t_max: float | None = None
    r_max: float | None = None
    tail_tol: float = 1e-6

    def __post_init__(self):
        for name in ("nt", "nr", "n_lambda"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")


# ----------------------------------------------------------------------------
# building blocks


def lambda_nodes(lambda_range: tuple[float, float], n_lambda: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on the lambda range, split at 0 when it is interior."""
    lo, hi = lambda_range
    if lo < 0 < hi:
        a, wa = gauss_legendre(lo, 0.0, n_lambda)
        b, wb = gauss_legendre(0.0, hi, n_lambda)
        return np.concatenate([a, b]), np.concatenate([wa, wb])
    return gauss_legendre(lo, hi, n_lambda)


def radial_measure(action: ActionDescriptor, r: np.ndarray) -> np.ndarray:
    """Density of ``dz`` in the reduced radius (per axis for the torus)."""
    if action.kind == "unitary_full":
        return sphere_area(action.n) * r ** (2 * action.n - 1)
    return 2 * math.pi * r


def laguerre_radial(action: ActionDescriptor, lam_abs: float, kmax: int, r: np.ndarray) -> np.ndarray:
    """``l_k^{|lambda|}(r)`` for ``k <= kmax`` (order ``n-1`` unitary, ``0`` per torus axis)."""
    a = action.n - 1 if action.kind == "unitary_full" else 0
    return laguerre_function_table(kmax, a, lam_abs * np.asarray(r) ** 2 / 2)


def _extents(f: InvariantFunction, cfg: QuadratureConfig) -> tuple[float, float]:
    return (cfg.t_max if cfg.t_max is not None else f.t_max,
            cfg.r_max if cfg.r_max is not None else f.r_max)


def _sample_grid(f: InvariantFunction, cfg: QuadratureConfig):
    """Profile samples on the tensor quadrature grid: ``(t, wt, r, wr, values)``."""
    if f.decay_class == "polynomial_growth":
        raise IntegrabilityError("polynomially growing functions are not integrable")
    t_max, r_max = _extents(f, cfg)
    t, wt = gauss_legendre(-t_max, t_max, cfg.nt)
    r, wr = gauss_legendre(0.0, r_max, cfg.nr)
    k = f.action.n_reduced
    mesh = np.meshgrid(t, *([r] * k), indexing="ij")
    vals = np.asarray(f.profile(*mesh), dtype=complex)
    vals = np.broadcast_to(vals, mesh[0].shape)
    return t, wt, r, wr, vals


def t_fourier(f: InvariantFunction, lams: np.ndarray, cfg: QuadratureConfig):
    """``F_t(lambda_i, r)`` on the radial nodes; returns ``(F, r, wr)`` with ``F`` of shape
    ``(L,) + (nr,)*k``."""
    t, wt, r, wr, vals = _sample_grid(f, cfg)
    kernel = np.exp(1j * np.outer(lams, t)) * wt
    F = np.tensordot(kernel, vals, axes=(1, 0))
    return F, r, wr


def _radial_project(action, F_lr: np.ndarray, lam_abs: float, labels: np.ndarray,
                    r: np.ndarray, wr: np.ndarray) -> np.ndarray:
    """``int F(r) l_alpha(r) dmu(r) / dim`` for each label."""
    kmax = int(labels.max()) if labels.size else 0
    table = laguerre_radial(action, lam_abs, kmax, r)
    M = table * (wr * radial_measure(action, r))
    if action.kind == "unitary_full":
        out = M @ F_lr
        return out[labels[:, 0]] / action.dims(labels)
    coeffs = F_lr
    for _ in range(action.n):
        # contract the leading radial axis with M, moving the label axis to the end
        coeffs = np.tensordot(coeffs, M, axes=([0], [1]))
    return coeffs[tuple(labels.T)]


def forward_at(f: InvariantFunction, lam: float, labels, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """``fhat(lambda, alpha)`` for a single ``lambda`` and an array of labels."""
    cfg = cfg or QuadratureConfig()
    labels = np.atleast_2d(np.asarray(labels, dtype=int))
    if labels.shape[1] != f.action.n_reduced:
        labels = labels.T
    F, r, wr = t_fourier(f, np.array([lam]), cfg)
    return _radial_project(f.action, F[0], abs(lam), labels, r, wr)


def forward_points(f: InvariantFunction, points: Sequence[SpectrumPoint],
                   cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Transform at arbitrary spectrum points (principal and degenerate), sampling ``f`` once."""
    cfg = cfg or QuadratureConfig()
    out = np.zeros(len(points), dtype=complex)
    by_lam: dict[float, list[int]] = {}
    for i, p in enumerate(points):
        by_lam.setdefault(p.lam, []).append(i)
    lams = np.array(sorted(by_lam))
    F, r, wr = t_fourier(f, lams, cfg)
    for li, lam in enumerate(lams):
        idx = by_lam[lam]
        if lam == 0:
            for i in idx:
                out[i] = _degenerate_project(f.action, F[li], points[i].orbit, r, wr)
            continue
        labels = np.array([points[i].alpha for i in idx], dtype=int)
        out[idx] = _radial_project(f.action, F[li], abs(lam), labels, r, wr)
    return out


def _degenerate_project(action: ActionDescriptor, F, orbit_s, r, wr) -> complex:
    from scipy.special import jv, gamma

    s = np.atleast_1d(np.asarray(orbit_s, dtype=float))
    if action.kind == "unitary_full":
        n = action.n
        arg = r * math.sqrt(s[0])
        eta = np.ones_like(arg)
        nz = arg > 1e-8
        eta[nz] = gamma(n) * (arg[nz] / 2) ** (1 - n) * jv(n - 1, arg[nz])
        return complex(np.sum(F * eta * wr * radial_measure(action, r)))
    coeffs = F
    for j in range(action.n):
        v = jv(0, r * math.sqrt(s[j])) * wr * radial_measure(action, r)
        coeffs = np.tensordot(coeffs, v, axes=([0], [0]))
    return complex(coeffs)


def forward_degenerate(f: InvariantFunction, orbit_s, cfg: QuadratureConfig | None = None) -> complex:
    """``int f eta_w`` with orbit parameters ``s`` (``|w|^2`` or ``|w_j|^2``)."""
    cfg = cfg or QuadratureConfig()
    F, r, wr = t_fourier(f, np.array([0.0]), cfg)
    return _degenerate_project(f.action, F[0], orbit_s, r, wr)


# ----------------------------------------------------------------------------
# tables


@dataclass
class GelfandTable:
    """Transform values at the ``lambda`` quadrature nodes of a model.

    ``labels[i]`` (shape ``(K_i, r)``) and ``values[i]`` hold the labels used at
    ``lam[i]`` and the corresponding transform values.
    """

    model: SpectrumModel
    lam: np.ndarray
    weights: np.ndarray
    labels: list
    values: list
    t_max: float = 12.0
    r_max: float = 8.0
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)

    @property
    def action(self) -> ActionDescriptor:
        return self.model.action

    def xi(self, i: int) -> np.ndarray:
        return self.model.xi(self.lam[i], self.labels[i])

    def points(self) -> list[SpectrumPoint]:
        out = []
        for i, lam in enumerate(self.lam):
            for a, x in zip(self.labels[i], self.xi(i)):
                out.append(SpectrumPoint(float(lam), tuple(float(v) for v in x), "principal",
                                         tuple(int(v) for v in a)))
        return out

    def flat_values(self) -> np.ndarray:
        return np.concatenate(self.values) if self.values else np.zeros(0, dtype=complex)

    def with_values(self, values: list) -> "GelfandTable":
        return replace(self, values=[np.asarray(v, dtype=complex) for v in values])

    def map(self, fn: Callable[[float, np.ndarray, np.ndarray], np.ndarray]) -> "GelfandTable":
        """New table with values ``fn(lam, xi, old_values)``."""
        return self.with_values([fn(l, self.xi(i), self.values[i]) for i, l in enumerate(self.lam)])

    def __add__(self, other: "GelfandTable") -> "GelfandTable":
        return self.with_values([a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other: "GelfandTable") -> "GelfandTable":
        return self.with_values([a - b for a, b in zip(self.values, other.values)])

    def scale(self, c) -> "GelfandTable":
        return self.with_values([c * a for a in self.values])

    def tail_estimate(self) -> float:
        """Crude truncation estimate: Plancherel-weighted size of the outermost labels plus the
        size of the table at the ends of the lambda range."""
        n = self.action.n
        worst = 0.0
        for i, lam in enumerate(self.lam):
            labs, vals = self.labels[i], self.values[i]
            if len(vals) == 0:
                continue
            deg = labs.sum(axis=1)
            edge = deg == deg.max()
            w = self.model.dims(labs[edge]) * abs(lam) ** n
            worst = max(worst, float(np.max(np.abs(vals[edge]) * w)) * plancherel_constant(n) * 2 * math.pi)
        end = [np.max(np.abs(v)) for v in (self.values[0], self.values[-1]) if len(v)]
        return max(worst, max(end, default=0.0))


def gelfand_forward(f: InvariantFunction, model: SpectrumModel,
                    cfg: QuadratureConfig | None = None) -> GelfandTable:
    """Transform of ``f`` at every label of the model on the lambda quadrature nodes."""
    cfg = cfg or QuadratureConfig()
    lams, wl = lambda_nodes(model.lambda_range, cfg.n_lambda)
    F, r, wr = t_fourier(f, lams, cfg)
    labels, values = [], []
    for i, lam in enumerate(lams):
        labs = model.labels_for(lam)
        labels.append(labs)
        values.append(_radial_project(f.action, F[i], abs(lam), labs, r, wr))
    t_max, r_max = _extents(f, cfg)
    return GelfandTable(model, lams, wl, labels, values, t_max, r_max, cfg)


def zero_table(model: SpectrumModel, cfg: QuadratureConfig | None = None) -> GelfandTable:
    cfg = cfg or QuadratureConfig()
    lams, wl = lambda_nodes(model.lambda_range, cfg.n_lambda)
    labels = [model.labels_for(l) for l in lams]
    return GelfandTable(model, lams, wl, labels, [np.zeros(len(l), dtype=complex) for l in labels],
                        cfg.t_max or 12.0, cfg.r_max or 8.0, cfg)


def mixed_inverse(table: GelfandTable, r_points: np.ndarray) -> np.ndarray:
    """``F(lambda_i, r_p)`` at reduced radii ``r_points`` of shape ``(P,)`` or ``(P, n)``."""
    action = table.action
    n = action.n
    r_points = np.asarray(r_points, dtype=float)
    out = np.zeros((len(table.lam), len(r_points)), dtype=complex)
    for i, lam in enumerate(table.lam):
        labs, vals = table.labels[i], table.values[i]
        if len(vals) == 0:
            continue
        kmax = int(labs.max())
        pref = (abs(lam) / (2 * math.pi)) ** n
        if action.kind == "unitary_full":
            tab = laguerre_radial(action, abs(lam), kmax, r_points.reshape(-1))
            out[i] = pref * (vals @ tab[labs[:, 0]])
        else:
            prod = np.ones((len(labs), len(r_points)))
            for j in range(n):
                tab = laguerre_radial(action, abs(lam), int(labs[:, j].max()), r_points[:, j])
                prod = prod * tab[labs[:, j]]
            out[i] = pref * (vals @ prod)
    return out


def synthesize(table: GelfandTable, t, r_list) -> np.ndarray:
    """Evaluate the inverse transform at points ``(t, r_1, ...)`` (arrays broadcast)."""
    arrays = np.broadcast_arrays(np.asarray(t, dtype=float), *[np.asarray(x, dtype=float) for x in r_list])
    shape = arrays[0].shape
    tt = arrays[0].reshape(-1)
    rr = np.stack([a.reshape(-1) for a in arrays[1:]], axis=-1)
    uniq, inv = np.unique(rr, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    Fm = mixed_inverse(table, uniq[:, 0] if table.action.kind == "unitary_full" else uniq)
    out = np.empty(tt.shape, dtype=complex)
    # (1/2pi) sum_i w_i exp(-i lam_i t) F(lam_i, r)
    chunk = 4096
    for s in range(0, len(tt), chunk):
        sl = slice(s, s + chunk)
        ph = np.exp(-1j * np.outer(tt[sl], table.lam)) * table.weights
        out[sl] = np.einsum("pl,lp->p", ph, Fm[:, inv[sl]]) / (2 * math.pi)
    return out.reshape(shape)


def gelfand_inverse(table: GelfandTable, warn: bool = True, name: str = "inverse") -> InvariantFunction:
    """Plancherel inversion of a table, as an invariant function (profile evaluated on demand)."""
    if warn:
        tail = table.tail_estimate()
        if tail > table.cfg.tail_tol:
            warnings.warn(f"truncation may dominate: estimated tail {tail:.2e}", TruncationWarning, stacklevel=2)

    def profile(t, *r):
        return synthesize(table, t, r)

    return InvariantFunction(table.action, profile, "schwartz", None, name, table.t_max, table.r_max)


# ----------------------------------------------------------------------------
# calibration


def calibrate_plancherel(action: ActionDescriptor, cfg: QuadratureConfig | None = None,
                         lam_max: float = 14.0, xi_cut: float = 600.0) -> float:
    """Delta-test calibration: the constant making ``inverse(forward(g))(0, 0) = g(0, 0) = 1``
    for ``g = gaussian(1, 1)``, measured with the unnormalised synthesis

        int sum_alpha fhat(lambda, alpha) dim(P_alpha) |lambda|^n dlambda
    """
    from .core import gaussian
    from .invariant import generator_system

    cfg = cfg or QuadratureConfig(n_lambda=96)
    n = action.n
    # the torus label sum factorizes for the product Gaussian: sum_alpha fhat = G^{1-n} S_1^n
    base = ActionDescriptor("torus", 1) if action.kind == "torus" else action
    g = gaussian(base, 1.0, 1.0)
    model = SpectrumModel(generator_system(base, 6), alpha_cut=8, lambda_range=(-lam_max, lam_max),
                          xi_cut=xi_cut)
    table = gelfand_forward(g, model, cfg)
    tq, wq = gauss_legendre(-g.t_max, g.t_max, cfg.nt)
    total = 0.0
    for i, lam in enumerate(table.lam):
        labs = table.labels[i]
        s1 = np.sum(table.values[i] * model.dims(labs))
        if base is not action:
            G = np.sum(wq * np.exp(-tq ** 2 + 1j * lam * tq))
            s1 = G ** (1 - n) * s1 ** n
        total += table.weights[i] * abs(lam) ** n * s1.real
    return 1.0 / total


# ----------------------------------------------------------------------------
# multipliers


@dataclass(frozen=True)
class MultiplierSymbol:
    """A symbol ``m(lambda, xi)`` with the extents of its kernel (used for later quadratures)."""

    m: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "m"
    t_max: float = 12.0
    r_max: float = 8.0
    decay_class: str = "schwartz"


def gaussian_symbol() -> MultiplierSymbol:
    """``exp(-lambda^2 - |xi|^2)``."""
    return MultiplierSymbol(lambda lam, xi: np.exp(-np.asarray(lam) ** 2 - np.sum(np.asarray(xi) ** 2, axis=-1)),
                            "exp(-lam^2-|xi|^2)", t_max=16.0, r_max=12.0)


def symbol_table(m: MultiplierSymbol, model: SpectrumModel, cfg: QuadratureConfig | None = None) -> GelfandTable:
    cfg = cfg or QuadratureConfig()
    table = zero_table(model, cfg)
    table = table.map(lambda lam, xi, _: np.asarray(m.m(np.full(len(xi), lam), xi), dtype=complex))
    table.t_max, table.r_max = m.t_max, m.r_max
    return table


def multiplier_kernel(m: MultiplierSymbol, model: SpectrumModel,
                      cfg: QuadratureConfig | None = None) -> InvariantFunction:
    """Kernel ``M`` with ``Mhat = m`` on the spectrum (inverse transform of the symbol)."""
    return gelfand_inverse(symbol_table(m, model, cfg), name=f"kernel[{m.name}]")


def apply_multiplier(table: GelfandTable, m: MultiplierSymbol) -> GelfandTable:
    """Diagonal action ``fhat -> fhat * m``."""
    return table.map(lambda lam, xi, v: v * np.asarray(m.m(np.full(len(xi), lam), xi)))


def operator_image(D: WordSum, f: InvariantFunction, name: str | None = None) -> InvariantFunction:
    """``D f`` for an analytic invariant ``f`` (exact derivatives), as an invariant function."""
    if f.analytic is None:
        raise ValueError("operator_image needs an analytic function")
    action = f.action
    n = action.n

    def profile(t, *r):
        arrays = np.broadcast_arrays(np.asarray(t, dtype=float), *[np.asarray(x, dtype=float) for x in r])
        t = arrays[0]
        if action.kind == "unitary_full":
            z = np.zeros(t.shape + (n,), dtype=complex)
            z[..., 0] = arrays[1]
        else:
            z = np.stack(arrays[1:], axis=-1).astype(complex)
        return apply_operator(D, f.analytic, t, z)

    return InvariantFunction(action, profile, f.decay_class, None, name or f"D[{f.name}]",
                             f.t_max, f.r_max)


# ----------------------------------------------------------------------------
# convolution


def convolve_at(f: InvariantFunction, kernel_grid: Callable, t0: float, z0: np.ndarray,
                nt: int = 48, nr: int = 40, nth: int = 48) -> complex:
    """``(f * M)(x) = int f(y) M(y^{-1} x) dy`` at ``x = (t0, z0)`` for ``n = 1``.

    ``kernel_grid(t, r)`` evaluates ``M``.  Polar coordinates in ``z``, Gauss-Legendre
    in ``t`` and ``r``, trapezoid in the angle.
    """
    if f.n != 1:
        raise NotImplementedError("direct convolution quadrature implemented for n = 1")
    z0 = complex(np.asarray(z0).reshape(-1)[0])
    t, wt = gauss_legendre(-f.t_max, f.t_max, nt)
    r, wr = gauss_legendre(0.0, f.r_max, nr)
    th = 2 * math.pi * np.arange(nth) / nth
    T, R, TH = np.meshgrid(t, r, th, indexing="ij")
    W = wt[:, None, None] * (wr * r)[None, :, None] * (2 * math.pi / nth)
    w = R * np.exp(1j * TH)
    fy = f.profile(T, R)
    # y^{-1} x = (t0 - t + Im(z0 conj(-w)) / 2, z0 - w)
    s = t0 - T + 0.5 * np.imag(z0 * np.conj(-w))
    u = np.abs(z0 - w)
    return complex(np.sum(W * fy * kernel_grid(s, u)))


def tabulate_kernel(M: InvariantFunction, t_max: float, r_max: float, nt: int = 161, nr: int = 121):
    """Cubic spline of a radial kernel on a ``(t, r)`` grid: returns ``kernel(t, r)`` (complex)."""
    tg = np.linspace(-t_max, t_max, nt)
    rg = np.linspace(0.0, r_max, nr)
    T, R = np.meshgrid(tg, rg, indexing="ij")
    vals = M.profile(T, R)
    re = RectBivariateSpline(tg, rg, vals.real, kx=3, ky=3)
    im = RectBivariateSpline(tg, rg, vals.imag, kx=3, ky=3)

    def kernel(t, r):
        t = np.asarray(t)
        r = np.asarray(r)
        inside = (np.abs(t) <= t_max) & (r <= r_max)
        out = re.ev(np.clip(t, -t_max, t_max), np.clip(r, 0, r_max)) + 1j * im.ev(
            np.clip(t, -t_max, t_max), np.clip(r, 0, r_max))
        return np.where(inside, out, 0.0)

    return kernel
