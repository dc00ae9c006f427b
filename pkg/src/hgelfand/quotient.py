"""Finite quotients ``F = K / K_0`` for ``K = T^n x| S_n``.

``F = S_n`` permutes the coordinates of ``C^n``, hence the generators
``V_1..V_n`` of the torus system.  The Hilbert map of ``F`` on the generator
span is taken to be the elementary symmetric polynomials::

    rho_F(x) = (e_1(x), ..., e_n(x)),     W_k = e_k(V_1, ..., V_n)

Quotient spectrum points are merged by exact integer comparison of
``rho_F(Vhat(alpha))`` at ``lambda = 1`` and then scaled: ``e_k`` is
homogeneous of degree ``k``, so ``W``-coordinates at ``lambda`` are
``|lambda|^k e_k(Vhat(alpha))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .core import InvariantFunction, heisenberg_symbols
from .invariant import GeneratorSystem, LemmaViolation, WordSum
from .spectrum import SpectrumModel, enumerate_spectrum
from .spherical import SphericalFunction, principal_expr

__all__ = [
    "FiniteQuotient", "QuotientPoint", "symmetric_quotient", "elementary_symmetric",
    "quotient_spectrum", "average_spherical", "quotient_extend", "multiset_count",
    "push_to_quotient",
]


def elementary_symmetric(x) -> np.ndarray:
    """``(e_1(x), ..., e_n(x))`` over the last axis, from ``prod_j (1 + x_j s)``.

    Integer input stays integer (object arrays for Python ints keep it exact).
    """
    x = np.asarray(x)
    n = x.shape[-1]
    coeffs = [np.ones(x.shape[:-1], dtype=x.dtype)] + [np.zeros(x.shape[:-1], dtype=x.dtype)] * n
    for j in range(n):
        xj = x[..., j]
        coeffs = [coeffs[0]] + [coeffs[k] + xj * coeffs[k - 1] for k in range(1, n + 1)]
    return np.stack(coeffs[1:], axis=-1)


def _e_exact(values: Sequence[int]) -> tuple[int, ...]:
    c = [1] + [0] * len(values)
    for v in values:
        c = [c[0]] + [c[k] + v * c[k - 1] for k in range(1, len(c))]
    return tuple(int(x) for x in c[1:])


@dataclass(frozen=True)
class FiniteQuotient:
    """``S_n`` acting on the torus generator system by coordinate permutations.

    ``group_elements[w]`` is a permutation tuple ``p``; it acts on vectors by
    ``(w . x)_i = x_{p[i]}`` and on ``H_n`` by ``z -> (z_{p[0]}, ..., z_{p[n-1]})``.
    """

    base: GeneratorSystem
    group_elements: tuple[tuple[int, ...], ...]
    name: str = "sym"

    def __post_init__(self):
        if self.base.action.kind != "torus":
            raise ValueError("the symmetric quotient is defined over a torus generator system")
        n = self.base.action.n
        for p in self.group_elements:
            if sorted(p) != list(range(n)):
                raise ValueError(f"{p} is not a permutation of range({n})")

    @property
    def n(self) -> int:
        return self.base.action.n

    @property
    def order(self) -> int:
        return len(self.group_elements)

    @property
    def degrees(self) -> tuple[int, ...]:
        """Homogeneity of ``W_k`` under the dilations: ``k``."""
        return tuple(range(1, self.n + 1))

    def act(self, p: Sequence[int], x) -> np.ndarray:
        return np.asarray(x)[..., list(p)]

    def hilbert_map(self, x) -> np.ndarray:
        return elementary_symmetric(np.asarray(x, dtype=float))

    def hilbert_map_exact(self, values: Sequence[int]) -> tuple[int, ...]:
        return _e_exact(values)

    def operators(self) -> tuple[WordSum, ...]:
        """``W_k = e_k(V_1, ..., V_n)`` as word sums (the ``V_j`` commute)."""
        V = self.base.operators
        out = []
        for k in range(1, self.n + 1):
            acc = WordSum()
            for sub in itertools.combinations(range(self.n), k):
                acc = acc + reduce(lambda a, b: a @ b, [V[j] for j in sub])
            out.append(acc)
        return tuple(out)

    def check(self, m_max: int = 6) -> None:
        """Exact checks on the eigentable: ``rho_F`` is ``F``-invariant and the ``F``-action
        permutes the table, ``Vhat_{p(j)}(phi_{p . alpha}) = Vhat_j(phi_alpha)``."""
        gs = self.base
        for alpha in gs.action.labels_upto(m_max):
            v = gs.eigenvalues(alpha)
            e0 = _e_exact(v)
            for p in self.group_elements:
                moved = tuple(alpha[i] for i in p)
                vm = gs.eigenvalues(moved)
                if tuple(v[i] for i in p) != vm:
                    raise LemmaViolation(f"F-action does not permute the eigentable at {alpha}, {p}")
                if _e_exact(vm) != e0:
                    raise LemmaViolation(f"rho_F is not F-invariant at {alpha}")

    def eigentable(self, m_max: int | None = None) -> dict[tuple[int, ...], tuple[int, ...]]:
        """``W``-eigenvalues on the orbit classes (sorted labels), exact integers."""
        gs = self.base
        m_max = gs.m_max if m_max is None else m_max
        out = {}
        for alpha in gs.action.labels_upto(m_max):
            key = tuple(sorted(alpha, reverse=True))
            out.setdefault(key, _e_exact(gs.eigenvalues(alpha)))
        return out


def symmetric_quotient(base: GeneratorSystem) -> FiniteQuotient:
    n = base.action.n
    return FiniteQuotient(base, tuple(itertools.permutations(range(n))))


@dataclass
class QuotientPoint:
    """A merged point ``(lambda, W-coordinates)`` with its source labels (or orbit parameters)."""

    lam: float
    coords: tuple[float, ...]
    kind: str
    sources: list = field(default_factory=list)
    key: tuple | None = None

    @property
    def multiplicity(self) -> int:
        return len(self.sources)


def quotient_spectrum(q: FiniteQuotient, model: SpectrumModel, lambda_samples: int | None = None,
                      orbit_samples: int = 0) -> list[QuotientPoint]:
    """Image of the enumerated base spectrum under ``(lambda, xi) -> (lambda, rho_F(xi))``.

    Principal points are merged on the exact key ``(lambda, rho_F(Vhat(alpha)))``;
    degenerate ones on the sorted orbit parameters.  The order follows the
    first occurrence in :func:`~hgelfand.spectrum.enumerate_spectrum`.
    """
    if model.gensys is not q.base and model.gensys.action != q.base.action:
        raise ValueError("model is not built on the quotient's base system")
    merged: dict[tuple, QuotientPoint] = {}
    deg = np.array(q.degrees, dtype=float)
    for p in enumerate_spectrum(model, lambda_samples, orbit_samples):
        if p.kind == "principal":
            e = _e_exact(q.base.eigenvalues(p.alpha))
            key = ("principal", p.lam, e)
            coords = tuple(float(x) for x in abs(p.lam) ** deg * np.array(e, dtype=float))
            src = p.alpha
        else:
            key = ("degenerate", tuple(sorted(p.orbit)))
            coords = tuple(float(x) for x in q.hilbert_map(np.array(p.xi)))
            src = p.orbit
        if key not in merged:
            merged[key] = QuotientPoint(p.lam, coords, p.kind, [], key)
        merged[key].sources.append(src)
    return list(merged.values())


def multiset_count(n: int, m: int) -> int:
    """Number of multisets ``{alpha_1..alpha_n}`` of nonnegative integers with sum ``<= m``,
    i.e. partitions of ``0..m`` into at most ``n`` parts."""
    # p[k][j]: partitions of k into parts of size <= j  (conjugate: at most j parts)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for j in range(n + 1):
        table[0][j] = 1
    for k in range(1, m + 1):
        for j in range(1, n + 1):
            table[k][j] = table[k][j - 1] + (table[k - j][j] if k >= j else 0)
    return sum(table[k][n] for k in range(m + 1))


class AveragedSpherical(SphericalFunction):
    """``psi = (1/|F|) sum_w phi o w`` for a principal torus spherical function."""

    def __init__(self, q: FiniteQuotient, phi: SphericalFunction):
        if phi.kind != "principal":
            raise ValueError("averaging is implemented for principal spherical functions")
        self.q = q
        self.base_function = phi
        perms = q.group_elements

        def evaluator(t, z):
            z = np.asarray(z, dtype=complex)
            return sum(phi(t, z[..., list(p)]) for p in perms) / len(perms)

        super().__init__(phi.action, "principal", phi.lam, phi.alpha, None, evaluator)

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        """``rho_F(Vhat(phi))`` with ``Vhat_j(phi_{lambda, alpha}) = |lambda| Vhat_j(alpha)``."""
        v = np.array(self.q.base.eigenvalues(self.alpha), dtype=float) * abs(self.lam)
        return tuple(float(x) for x in self.q.hilbert_map(v))

    def analytic(self):
        from .core import AnalyticFunction

        n = self.action.n
        t, xs, ys = heisenberg_symbols(n)
        expr = principal_expr(self.action, self.lam, self.alpha)
        terms = []
        for p in self.q.group_elements:
            sub = {xs[i]: xs[p[i]] for i in range(n)}
            sub.update({ys[i]: ys[p[i]] for i in range(n)})
            terms.append(expr.xreplace(sub))
        return AnalyticFunction(sp.Add(*terms) / len(terms), n)


def average_spherical(q: FiniteQuotient, phi: SphericalFunction) -> AveragedSpherical:
    return AveragedSpherical(q, phi)


def push_to_quotient(q: FiniteQuotient, labels: np.ndarray, values: np.ndarray, tol: float = 0.0):
    """Values of an ``F``-invariant table on the orbit classes ``sorted(alpha)``.

    Raises ``ValueError`` when two labels of one orbit carry different values
    (beyond ``tol``).
    """
    out: dict[tuple[int, ...], complex] = {}
    for a, v in zip(np.atleast_2d(labels), np.asarray(values)):
        key = tuple(sorted((int(x) for x in a), reverse=True))
        if key in out and abs(out[key] - v) > tol:
            raise ValueError(f"table is not F-invariant on the orbit of {key}")
        out.setdefault(key, complex(v))
    return out


def quotient_extend(g: Callable, q: FiniteQuotient) -> Callable:
    """``(lambda, xi) -> g(lambda, rho_F(xi))`` on the base spectrum; ``F``-invariant."""

    def pulled(lam, xi):
        return g(lam, q.hilbert_map(xi))

    return pulled
