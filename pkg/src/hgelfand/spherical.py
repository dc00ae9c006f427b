"""Bounded spherical functions: principal ``phi_{lambda,alpha}`` and degenerate ``eta_{Kw}``.

Closed forms
------------
unitary group, ``x = |lambda| |z|^2 / 2``::

    phi_{lambda,k}(t, z) = exp(i lambda t) exp(-x/2) L_k^{(n-1)}(x) / C(k+n-1, n-1)

torus, ``x_j = |lambda| |z_j|^2 / 2``::

    phi_{lambda,alpha}(t, z) = exp(i lambda t) prod_j exp(-x_j/2) L_{alpha_j}(x_j)

degenerate, ``s = |z| |w|`` (unitary) or ``s_j = |z_j| |w_j|`` (torus)::

    eta_w = Gamma(n) (s/2)^{1-n} J_{n-1}(s)      resp.    prod_j J_0(s_j)

Each closed form ships with an independent oracle: a Fock-space matrix
coefficient average for ``phi`` and an orbit quadrature for ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from scipy.special import gamma, jv

from .invariant import ActionDescriptor
from .special import gauss_legendre, laguerre_function_table

__all__ = [
    "SphericalFunction", "eval_principal", "eval_degenerate", "principal_profile_z",
    "matrix_coefficient_oracle", "orbit_oracle",
]


def _labels_tuple(label) -> tuple[int, ...]:
    return tuple(int(x) for x in np.atleast_1d(label))


def principal_profile_z(action: ActionDescriptor, label, lam_abs, *r):
    """The ``z``-part of ``phi_{lambda,alpha}`` as a function of reduced radii."""
    label = _labels_tuple(label)
    n = action.n
    if action.kind == "unitary_full":
        (k,) = label
        x = lam_abs * np.asarray(r[0], dtype=float) ** 2 / 2
        return laguerre_function_table(k, n - 1, x)[k] / math.comb(k + n - 1, n - 1)
    out = 1.0
    for a, rj in zip(label, r):
        x = lam_abs * np.asarray(rj, dtype=float) ** 2 / 2
        out = out * laguerre_function_table(a, 0, x)[a]
    return out


def principal_z_expr(action: ActionDescriptor, label, xs, ys, lam_abs=1):
    """Sympy form of :func:`principal_profile_z`."""
    label = _labels_tuple(label)
    n = action.n
    lam_abs = sp.nsimplify(lam_abs, rational=True)
    if action.kind == "unitary_full":
        (k,) = label
        X = lam_abs * sum(x ** 2 + y ** 2 for x, y in zip(xs, ys)) / 2
        return sp.exp(-X / 2) * sp.assoc_laguerre(k, n - 1, X) / math.comb(k + n - 1, n - 1)
    out = sp.Integer(1)
    for a, x, y in zip(label, xs, ys):
        X = lam_abs * (x ** 2 + y ** 2) / 2
        out = out * sp.exp(-X / 2) * sp.laguerre(a, X)
    return out


def _reduced(action: ActionDescriptor, z):
    z = np.asarray(z, dtype=complex)
    if action.kind == "unitary_full":
        return [np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))]
    return [np.abs(z[..., h]) for h in range(action.n)]


def eval_principal(action: ActionDescriptor, lam: float, label, t, z):
    """``phi_{lambda,alpha}(t, z)`` (vectorized over points)."""
    if lam == 0:
        raise ValueError("lambda = 0 has no principal spherical function; use eval_degenerate")
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != action.n:
        raise ValueError("z has the wrong length")
    zpart = principal_profile_z(action, label, abs(lam), *_reduced(action, z))
    return np.exp(1j * lam * np.asarray(t, dtype=float)) * zpart


def eval_degenerate(action: ActionDescriptor, w, t, z):
    """``eta_{Kw}(t, z)``; independent of ``t``."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    shape = np.broadcast(np.asarray(t, dtype=float), z[..., 0]).shape
    n = action.n
    if action.kind == "unitary_full":
        s = np.sqrt(np.sum(np.abs(z) ** 2, axis=-1)) * np.sqrt(np.sum(np.abs(w) ** 2))
        s = np.asarray(s, dtype=float)
        out = np.ones_like(s)
        nz = s > 1e-8
        out[nz] = gamma(n) * (s[nz] / 2) ** (1 - n) * jv(n - 1, s[nz])
        small = ~nz
        # series 1 - s^2 / (4 n) for tiny arguments
        out[small] = 1 - s[small] ** 2 / (4 * n)
        return np.broadcast_to(out.astype(complex), shape).copy()
    out = np.ones(z.shape[:-1])
    for h in range(n):
        out = out * jv(0, np.abs(z[..., h]) * abs(w[h]))
    return np.broadcast_to(out.astype(complex), shape).copy()


# ----------------------------------------------------------------------------
# symbolic forms (exact derivatives for eigenfunction checks)


def principal_expr(action: ActionDescriptor, lam: float, label):
    from .core import heisenberg_symbols

    t, xs, ys = heisenberg_symbols(action.n)
    lam_s = sp.nsimplify(lam, rational=True)
    return sp.exp(sp.I * lam_s * t) * principal_z_expr(action, label, xs, ys, abs(lam_s))


def degenerate_expr(action: ActionDescriptor, w):
    from .core import heisenberg_symbols

    t, xs, ys = heisenberg_symbols(action.n)
    n = action.n
    w = np.asarray(w, dtype=complex)
    if action.kind == "unitary_full":
        W = sp.nsimplify(float(np.sqrt(np.sum(np.abs(w) ** 2))), rational=True)
        s = W * sp.sqrt(sum(x ** 2 + y ** 2 for x, y in zip(xs, ys)))
        return sp.gamma(n) * (s / 2) ** (1 - n) * sp.besselj(n - 1, s)
    out = sp.Integer(1)
    for h in range(n):
        W = sp.nsimplify(float(abs(w[h])), rational=True)
        out = out * sp.besselj(0, W * sp.sqrt(xs[h] ** 2 + ys[h] ** 2))
    return out


@dataclass
class SphericalFunction:
    """A bounded spherical function with its label.

    ``kind`` is ``"principal"`` (``lam != 0``, ``alpha``) or ``"degenerate"`` (orbit ``w``).
    """

    action: ActionDescriptor
    kind: str
    lam: float = 0.0
    alpha: tuple[int, ...] | None = None
    w: tuple[complex, ...] | None = None
    evaluator: Callable | None = None

    @classmethod
    def principal(cls, action, lam, alpha) -> "SphericalFunction":
        if lam == 0:
            raise ValueError("lambda = 0 has no principal spherical function")
        a = _labels_tuple(alpha)
        return cls(action, "principal", float(lam), a, None,
                   lambda t, z: eval_principal(action, lam, a, t, z))

    @classmethod
    def degenerate(cls, action, w) -> "SphericalFunction":
        w = tuple(complex(x) for x in np.atleast_1d(w))
        return cls(action, "degenerate", 0.0, None, w,
                   lambda t, z: eval_degenerate(action, w, t, z))

    def __call__(self, t, z):
        return self.evaluator(t, z)

    def analytic(self):
        from .core import AnalyticFunction

        if self.kind == "principal":
            return AnalyticFunction(principal_expr(self.action, self.lam, self.alpha), self.action.n)
        return AnalyticFunction(degenerate_expr(self.action, self.w), self.action.n)


# ----------------------------------------------------------------------------
# oracles


def _coefficient_1d(d: int, z: np.ndarray) -> np.ndarray:
    """Coefficient of ``w^d`` in ``exp(-w conj(z)/2) (w + z)^d``, by the binomial sum."""
    zb = np.conj(z)
    out = np.zeros(np.shape(z), dtype=complex)
    for i in range(d + 1):  # pick w^i from (w+z)^d, w^(d-i) from the exponential
        e = d - i
        out = out + math.comb(d, i) * z ** e * (-zb / 2) ** e / math.factorial(e)
    return out


def matrix_coefficient_oracle(action: ActionDescriptor, label, t, z):
    """``phi_{1,alpha}`` as the average of ``<pi_1(t,z) v, v>`` over monomials ``v`` of ``P_alpha``.

    ``pi_1(t, z) F(w) = exp(i t - |z|^2/4 - w.conj(z)/2) F(w + z)`` and the
    monomials are orthogonal, so each diagonal coefficient is a finite sum.
    """
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    block = action.block(_labels_tuple(label))
    acc = np.zeros(z.shape[:-1], dtype=complex)
    for dvec in block:
        term = np.ones(z.shape[:-1], dtype=complex)
        for h, dh in enumerate(dvec):
            term = term * _coefficient_1d(dh, z[..., h])
        acc = acc + term
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    return np.exp(1j * t - r2 / 4) * acc / len(block)


def orbit_oracle(action: ActionDescriptor, w, z, n_angle: int = 64, n_polar: int = 48):
    """``eta_{Kw}(z) = mean over k of exp(i Re <z, k w>)`` by product quadrature on the orbit."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    w = np.asarray(w, dtype=complex)
    n = action.n
    theta = 2 * np.pi * np.arange(n_angle) / n_angle
    if action.kind == "torus" or n == 1:
        out = np.ones(z.shape[0], dtype=complex)
        for h in range(n):
            orbit = np.exp(1j * theta) * w[h]
            out = out * np.mean(np.exp(1j * np.real(z[:, h, None] * np.conj(orbit)[None, :])), axis=1)
        return out
    if n == 2:
        R = np.sqrt(np.sum(np.abs(w) ** 2))
        a, wa = gauss_legendre(0.0, np.pi / 2, n_polar)
        wa = wa * np.sin(a) * np.cos(a) * 2  # normalized: int_0^{pi/2} 2 sin cos = 1
        T1, T2 = np.meshgrid(theta, theta, indexing="ij")
        out = np.zeros(z.shape[0], dtype=complex)
        for ai, wi in zip(a, wa):
            u1 = R * np.cos(ai) * np.exp(1j * T1)
            u2 = R * np.sin(ai) * np.exp(1j * T2)
            phase = np.real(z[:, 0, None, None] * np.conj(u1) + z[:, 1, None, None] * np.conj(u2))
            out = out + wi * np.mean(np.exp(1j * phase), axis=(1, 2))
        return out
    raise NotImplementedError("orbit oracle implemented for n <= 2")
