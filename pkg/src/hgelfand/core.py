"""Heisenberg group arithmetic, left-invariant fields and invariant functions.

Coordinates are ``(t, z)`` with ``t`` real and ``z`` in ``C^n``; the group law is

    (t, z) (u, w) = (t + u + Im(w . conj(z)) / 2, z + w).

The left-invariant fields are ``T = d/dt`` and

    Z_j    = d/dz_j    - (i/4) conj(z_j) d/dt,
    Zbar_j = d/dzbar_j + (i/4) z_j       d/dt.

Functions handed to :func:`apply_field` are either analytic (a sympy
expression in ``t, x_1..x_n, y_1..y_n`` with ``z_j = x_j + i y_j``, giving exact
derivatives) or plain callables ``f(t, z)`` differentiated by centered finite
differences.
"""

from __future__ import annotations

import csv
import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import sympy as sp

from .invariant import ZBAR, ActionDescriptor, WordSum

FD_STEP = 1e-4
DECAY_CLASSES = ("schwartz", "compactly_supported", "polynomial_growth")


class DimensionMismatch(ValueError):
    pass


class DifferentiabilityError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# group points


@dataclass(frozen=True)
class GroupPoint:
    t: float
    z: tuple[complex, ...]

    def __init__(self, t, z=()):
        object.__setattr__(self, "t", float(t))
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        if zz.ndim != 1:
            raise ValueError("z must be a vector")
        object.__setattr__(self, "z", tuple(complex(v) for v in zz))
        if len(self.z) < 1:
            raise ValueError("n must be >= 1")

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def zvec(self) -> np.ndarray:
        return np.array(self.z, dtype=complex)

    @classmethod
    def identity(cls, n: int) -> "GroupPoint":
        return cls(0.0, np.zeros(n))

    def __mul__(self, other: "GroupPoint") -> "GroupPoint":
        return group_multiply(self, other)


def group_multiply(a: GroupPoint, b: GroupPoint) -> GroupPoint:
    if a.n != b.n:
        raise DimensionMismatch(f"incompatible points: n={a.n} and n={b.n}")
    za, zb = a.zvec, b.zvec
    return GroupPoint(a.t + b.t + 0.5 * np.imag(np.dot(zb, np.conj(za))), za + zb)


def group_inverse(a: GroupPoint) -> GroupPoint:
    return GroupPoint(-a.t, -a.zvec)


def multiply_arrays(ta, za, tb, zb):
    """Vectorized group law on arrays ``t`` of shape ``S`` and ``z`` of shape ``S + (n,)``."""
    za = np.asarray(za, dtype=complex)
    zb = np.asarray(zb, dtype=complex)
    return (np.asarray(ta) + np.asarray(tb) + 0.5 * np.imag(np.sum(zb * np.conj(za), axis=-1)),
            za + zb)


def heisenberg_gauge(t, z) -> np.ndarray:
    """Homogeneous gauge ``(|z|^4 + t^2)^(1/4)``."""
    z = np.asarray(z, dtype=complex)
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    return (r2 ** 2 + np.asarray(t, dtype=float) ** 2) ** 0.25


# ----------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class Field:
    """``kind`` in ``{"Z", "Zbar", "T"}``; ``j`` is 1-based (ignored for ``T``)."""

    kind: str
    j: int = 1

    def __post_init__(self):
        if self.kind not in ("Z", "Zbar", "T"):
            raise ValueError(f"unknown field {self.kind!r}")

    @classmethod
    def parse(cls, s: str) -> "Field":
        m = re.fullmatch(r"(Zbar|Zb|Z|T)(\d*)", s.strip())
        if not m:
            raise ValueError(f"bad field {s!r}")
        kind = "Zbar" if m.group(1) in ("Zbar", "Zb") else m.group(1)
        return cls(kind, int(m.group(2) or 1))

    @classmethod
    def from_letter(cls, letter) -> "Field":
        kind, h = letter
        return cls("Zbar" if kind == ZBAR else "Z", h + 1)

    def check(self, n: int):
        if self.kind != "T" and not 1 <= self.j <= n:
            raise IndexError(f"field index {self.j} out of range [1, {n}]")


def heisenberg_symbols(n: int):
    t = sp.Symbol("t", real=True)
    xs = sp.symbols(f"x1:{n + 1}", real=True)
    ys = sp.symbols(f"y1:{n + 1}", real=True)
    return t, xs, ys


@dataclass
class AnalyticFunction:
    """A function on ``H_n`` given by a sympy expression (exact derivatives)."""

    expr: sp.Expr
    n: int

    @cached_property
    def symbols(self):
        return heisenberg_symbols(self.n)

    @cached_property
    def _numeric(self):
        t, xs, ys = self.symbols
        return sp.lambdify((t, *xs, *ys), self.expr, modules=["scipy", "numpy"])

    def __call__(self, t, z):
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        t, z = np.broadcast_arrays(t[..., None], z)
        t = t[..., 0]
        args = [t] + [z[..., h].real for h in range(self.n)] + [z[..., h].imag for h in range(self.n)]
        out = self._numeric(*args)
        return np.broadcast_to(np.asarray(out, dtype=complex), t.shape).copy()

    def derivative(self, fld: Field) -> "AnalyticFunction":
        fld.check(self.n)
        return AnalyticFunction(field_expr(fld, self.expr, self.n), self.n)


def field_expr(fld: Field, expr, n: int):
    """Exact symbolic application of a field."""
    t, xs, ys = heisenberg_symbols(n)
    if fld.kind == "T":
        return sp.diff(expr, t)
    h = fld.j - 1
    x, y = xs[h], ys[h]
    ft = sp.diff(expr, t)
    fx, fy = sp.diff(expr, x), sp.diff(expr, y)
    if fld.kind == "Z":
        return (fx - sp.I * fy) / 2 - sp.I / 4 * (x - sp.I * y) * ft
    return (fx + sp.I * fy) / 2 + sp.I / 4 * (x + sp.I * y) * ft


def _fd_field(fld: Field, g: Callable, t, z, n: int, step: float = FD_STEP):
    """Centered finite-difference application of one field to a callable ``g(t, z)``."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=complex)
    ht = step * (1 + np.abs(t))

    def dt(tt, zz):
        return (g(tt + ht, zz) - g(tt - ht, zz)) / (2 * ht)

    if fld.kind == "T":
        return dt(t, z)
    h = fld.j - 1
    e = np.zeros(n)
    e[h] = 1.0
    hx = step * (1 + np.abs(z[..., h].real))
    hy = step * (1 + np.abs(z[..., h].imag))
    fx = (g(t, z + hx[..., None] * e) - g(t, z - hx[..., None] * e)) / (2 * hx)
    fy = (g(t, z + 1j * hy[..., None] * e) - g(t, z - 1j * hy[..., None] * e)) / (2 * hy)
    zh = z[..., h]
    if fld.kind == "Z":
        return 0.5 * (fx - 1j * fy) - 0.25j * np.conj(zh) * dt(t, z)
    return 0.5 * (fx + 1j * fy) + 0.25j * zh * dt(t, z)


def _as_handle(f, n: int | None = None):
    if isinstance(f, InvariantFunction):
        return f.analytic if f.analytic is not None else f
    return f


def apply_field(fld: Field | str, f, p: GroupPoint) -> complex:
    """``(X f)(p)`` for one of the fields ``Z_j``, ``Zbar_j``, ``T``."""
    if isinstance(fld, str):
        fld = Field.parse(fld)
    fld.check(p.n)
    return complex(apply_word([fld], f, np.array(p.t), p.zvec))


def apply_word(word: Sequence, f, t, z):
    """Apply a word of fields (rightmost first) to ``f`` at points ``(t, z)``.

    ``word`` entries may be :class:`Field` objects, strings such as ``"Zbar2"``
    or ``(kind, index)`` letters from :mod:`hgelfand.invariant`.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    fields = []
    for w in word:
        if isinstance(w, Field):
            fields.append(w)
        elif isinstance(w, str):
            fields.append(Field.parse(w))
        else:
            fields.append(Field.from_letter(w))
    for fl in fields:
        fl.check(n)
    g = _as_handle(f, n)
    if isinstance(g, AnalyticFunction):
        return _derived(g, tuple(fields))(t, z)
    if len(fields) > 2:
        raise DifferentiabilityError(
            f"finite differences limited to order 2, requested order {len(fields)}")
    out = g
    for fl in reversed(fields):
        out = (lambda gg, ff: (lambda tt, zz: _fd_field(ff, gg, tt, zz, n)))(out, fl)
    return out(t, z)


_DERIVED_CACHE: dict = {}


def _derived(g: AnalyticFunction, fields: tuple) -> AnalyticFunction:
    key = (id(g), fields)
    if key in _DERIVED_CACHE:
        return _DERIVED_CACHE[key][1]
    if not fields:
        res = g
    else:
        inner = _derived(g, fields[1:])
        res = inner.derivative(fields[0])
    _DERIVED_CACHE[key] = (g, res)  # keep g alive so id() stays unique
    return res


def apply_operator(D: WordSum, f, t, z):
    """Apply a word sum (from :mod:`hgelfand.invariant`) to ``f``."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(np.shape(t) if np.ndim(t) else z.shape[:-1], dtype=complex)
    for w, c in D.terms.items():
        out = out + float(c) * apply_word(w, f, t, z)
    return out


def minus_i_T(f, t, z):
    return -1j * apply_word([Field("T")], f, t, z)


# ----------------------------------------------------------------------------
# invariant functions


@dataclass
class InvariantFunction:
    """A ``K``-invariant function given by its reduced profile.

    ``profile(t, r)`` for ``unitary_full`` (``r = |z|``) and
    ``profile(t, r_1, ..., r_n)`` for ``torus``; arrays broadcast.
    ``analytic`` optionally carries a sympy form for exact derivatives.
    ``t_max`` and ``r_max`` bound the region outside which the function is
    negligible at double precision; quadratures use them.
    """

    action: ActionDescriptor
    profile: Callable
    decay_class: str = "schwartz"
    analytic: AnalyticFunction | None = None
    name: str = "f"
    t_max: float = 12.0
    r_max: float = 8.0
    even_in_t: bool = False
    real: bool = False

    def __post_init__(self):
        if self.decay_class not in DECAY_CLASSES:
            raise ValueError(f"unknown decay class {self.decay_class!r}")

    @property
    def n(self) -> int:
        return self.action.n

    def reduced(self, z) -> list[np.ndarray]:
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise DimensionMismatch("z has the wrong length")
        if self.action.kind == "unitary_full":
            return [np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))]
        return [np.abs(z[..., h]) for h in range(self.n)]

    def __call__(self, t, z):
        return np.asarray(self.profile(np.asarray(t, dtype=float), *self.reduced(z)), dtype=complex)

    def at(self, p: GroupPoint) -> complex:
        return complex(self(np.array(p.t), p.zvec))

    def permuted(self, perm: Sequence[int]) -> "InvariantFunction":
        """``f o w`` where ``w`` permutes the ``z`` coordinates: ``(f o w)(z) = f(z_perm)``."""
        perm = tuple(perm)
        prof = self.profile
        analytic = None
        if self.analytic is not None:
            t, xs, ys = heisenberg_symbols(self.n)
            sub = {xs[i]: xs[perm[i]] for i in range(self.n)}
            sub.update({ys[i]: ys[perm[i]] for i in range(self.n)})
            analytic = AnalyticFunction(self.analytic.expr.xreplace(sub), self.n)
        if self.action.kind == "unitary_full":
            newprof = prof
        else:
            def newprof(t, *r):
                return prof(t, *[r[perm[i]] for i in range(len(r))])
        return InvariantFunction(self.action, newprof, self.decay_class, analytic,
                                 f"{self.name}o{perm}", self.t_max, self.r_max, self.even_in_t, self.real)

    def scaled(self, factor: float) -> "InvariantFunction":
        """Multiply by a constant."""
        prof = self.profile
        analytic = None if self.analytic is None else AnalyticFunction(factor * self.analytic.expr, self.n)
        return InvariantFunction(self.action, lambda t, *r: factor * prof(t, *r), self.decay_class,
                                 analytic, f"{factor}*{self.name}", self.t_max, self.r_max,
                                 self.even_in_t, self.real and np.isreal(factor))

    def dilated(self, r0: float) -> "InvariantFunction":
        """``f_r(t, z) = f(r^2 t, r z)``."""
        prof = self.profile
        analytic = None
        if self.analytic is not None:
            t, xs, ys = heisenberg_symbols(self.n)
            sub = {t: r0 ** 2 * t, **{x: r0 * x for x in xs}, **{y: r0 * y for y in ys}}
            analytic = AnalyticFunction(self.analytic.expr.xreplace(sub), self.n)
        return InvariantFunction(self.action, lambda t, *r: prof(r0 ** 2 * t, *[r0 * x for x in r]),
                                 self.decay_class, analytic, f"{self.name}_r{r0}",
                                 self.t_max / r0 ** 2, self.r_max / r0, self.even_in_t, self.real)


def check_invariance(f: InvariantFunction, rng: np.random.Generator, samples: int = 20) -> float:
    """Max deviation ``|f(t, k z) - f(t, z)|`` over random ``k in K``, using the analytic form
    when available (the profile form is invariant by construction)."""
    n = f.n
    g = f.analytic if f.analytic is not None else f
    t = rng.normal(size=samples)
    z = rng.normal(size=(samples, n)) + 1j * rng.normal(size=(samples, n))
    kz = np.empty_like(z)
    for i in range(samples):
        if f.action.kind == "unitary_full":
            q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
            q = q * (np.diag(r) / np.abs(np.diag(r)))
            kz[i] = q @ z[i]
        else:
            kz[i] = np.exp(1j * rng.uniform(0, 2 * np.pi, n)) * z[i]
    return float(np.max(np.abs(g(t, kz) - g(t, z))))


# families -----------------------------------------------------------------


def _radius_sq_expr(xs, ys):
    return sum(x ** 2 + y ** 2 for x, y in zip(xs, ys))


def gaussian(action: ActionDescriptor, a: float = 1.0, b: float = 1.0) -> InvariantFunction:
    """``exp(-a t^2) exp(-b |z|^2)``."""
    return hermite_gaussian(action, 0, a, b)


def hermite_gaussian(action: ActionDescriptor, k: int, a: float = 1.0, b: float = 1.0) -> InvariantFunction:
    """``t^k exp(-a t^2) exp(-b |z|^2)``."""
    if a <= 0 or b <= 0:
        raise ValueError("gaussian parameters must be positive")
    n = action.n
    t, xs, ys = heisenberg_symbols(n)
    expr = t ** k * sp.exp(-sp.nsimplify(a) * t ** 2 - sp.nsimplify(b) * _radius_sq_expr(xs, ys))

    def profile(tt, *r):
        r2 = sum(np.asarray(x) ** 2 for x in r)
        return tt ** k * np.exp(-a * tt ** 2 - b * r2)

    t_max = math.sqrt((40 + k * 3) / a) + 1
    r_max = math.sqrt(40 / b) + 1
    return InvariantFunction(action, profile, "schwartz", AnalyticFunction(expr, n),
                             f"hermite-gaussian({k},{a},{b})" if k else f"gaussian({a},{b})",
                             t_max, r_max, even_in_t=(k % 2 == 0), real=True)


LAGUERRE_MODE_T_WIDTH = 16.0


def laguerre_mode(action: ActionDescriptor, label: Sequence[int]) -> InvariantFunction:
    """Matrix-coefficient profile of ``phi_{1,alpha}`` in ``z`` times a Gaussian window in ``t``.

    ``exp(-i t) exp(-t^2/16) q(z)`` where ``q`` is the ``z``-part of
    ``phi_{1,alpha}``; its transform concentrates near ``lambda = 1`` on the
    curve of ``alpha``.
    """
    from .spherical import principal_z_expr, principal_profile_z

    label = tuple(int(x) for x in label)
    n = action.n
    t, xs, ys = heisenberg_symbols(n)
    expr = sp.exp(-sp.I * t - t ** 2 / LAGUERRE_MODE_T_WIDTH) * principal_z_expr(action, label, xs, ys)

    def profile(tt, *r):
        return np.exp(-1j * tt - tt ** 2 / LAGUERRE_MODE_T_WIDTH) * principal_profile_z(action, label, 1.0, *r)

    deg = sum(label)
    return InvariantFunction(action, profile, "schwartz", AnalyticFunction(expr, n),
                             f"laguerre-mode({','.join(map(str, label))})",
                             t_max=math.sqrt(40 * LAGUERRE_MODE_T_WIDTH), r_max=math.sqrt(160 + 8 * deg) + 2,
                             even_in_t=False, real=False)


def zero_function(action: ActionDescriptor) -> InvariantFunction:
    t, xs, ys = heisenberg_symbols(action.n)
    return InvariantFunction(action, lambda tt, *r: np.zeros(np.broadcast(tt, *r).shape),
                             "compactly_supported", AnalyticFunction(sp.Integer(0), action.n),
                             "zero", 1.0, 1.0, even_in_t=True, real=True)


def from_samples(action: ActionDescriptor, path: str) -> InvariantFunction:
    """Sampled profile from a CSV with columns ``t, r_1..r_k, value`` on a tensor grid."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                continue  # header
    data = np.array(rows)
    k = action.n_reduced
    if data.ndim != 2 or data.shape[1] != k + 2:
        raise ValueError(f"expected {k + 2} columns")
    axes = [np.unique(data[:, i]) for i in range(k + 1)]
    shape = tuple(len(a) for a in axes)
    if np.prod(shape) != len(data):
        raise ValueError("samples do not form a tensor grid")
    order = np.lexsort(tuple(data[:, i] for i in reversed(range(k + 1))))
    values = data[order, -1].reshape(shape)
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator(axes, values, method="cubic", bounds_error=False, fill_value=0.0)

    def profile(tt, *r):
        pts = np.stack(np.broadcast_arrays(tt, *r), axis=-1)
        return interp(pts)

    return InvariantFunction(action, profile, "compactly_supported", None, f"samples({path})",
                             float(np.max(np.abs(axes[0]))), float(max(a.max() for a in axes[1:])))


_FAMILY = re.compile(r"\s*([a-z\-]+)\s*\(([^)]*)\)\s*$")


def parse_function(spec: str, action: ActionDescriptor) -> InvariantFunction:
    """Parse the function mini-language (``gaussian(a,b)``, ``hermite-gaussian(k,a,b)``,
    ``laguerre-mode(k)``, ``csv:path``)."""
    if spec.startswith("csv:"):
        return from_samples(action, spec[4:])
    if spec.strip() == "zero":
        return zero_function(action)
    m = _FAMILY.match(spec)
    if not m:
        raise ValueError(f"cannot parse function {spec!r}")
    name, args = m.group(1), [a for a in m.group(2).split(",") if a.strip()]
    if name == "gaussian":
        vals = [float(a) for a in args] or [1.0, 1.0]
        return gaussian(action, *vals)
    if name == "hermite-gaussian":
        k = int(args[0])
        return hermite_gaussian(action, k, *[float(a) for a in args[1:]])
    if name == "laguerre-mode":
        ks = [int(a) for a in args]
        if action.kind == "unitary_full":
            if len(ks) != 1:
                raise ValueError("laguerre-mode takes one index for the unitary group")
            return laguerre_mode(action, ks)
        if len(ks) == 1:
            ks = ks + [0] * (action.n - 1)
        if len(ks) != action.n:
            raise ValueError("laguerre-mode needs n indices for the torus")
        return laguerre_mode(action, ks)
    raise ValueError(f"unknown function family {name!r}")


# ----------------------------------------------------------------------------
# Schwartz norms


@dataclass(frozen=True)
class NormGrid:
    """Sampling grid for :func:`schwartz_norm` (real nonnegative ``z_j`` by phase invariance)."""

    t_max: float = 12.0
    r_max: float = 8.0
    points: int = 256
    radial_points: int | None = None

    def axes(self, n: int):
        rp = self.radial_points or (self.points if n == 1 else 24)
        t = np.linspace(-self.t_max, self.t_max, self.points)
        r = np.linspace(0.0, self.r_max, rp)
        return t, [r] * n


def pbw_monomials(n: int, p: int) -> list[tuple[Field, ...]]:
    """Ordered monomials ``Z^a Zbar^b T^c`` of weighted degree ``|a|+|b|+2c <= p``."""
    out = []
    letters = [Field("Z", j) for j in range(1, n + 1)] + [Field("Zbar", j) for j in range(1, n + 1)]
    for c in range(p // 2 + 1):
        rest = p - 2 * c
        for total in range(rest + 1):
            for combo in itertools.combinations_with_replacement(range(2 * n), total):
                out.append(tuple(letters[i] for i in combo) + (Field("T"),) * c)
    return out


def schwartz_norm(f, p: int, grid: NormGrid | None = None) -> float:
    """Grid supremum of ``(1+|x|)^p |X^I f(x)|`` over monomials of weighted degree ``<= p``."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    grid = grid or NormGrid()
    n = f.n
    tax, raxes = grid.axes(n)
    mesh = np.meshgrid(tax, *raxes, indexing="ij")
    t = mesh[0]
    z = np.stack(mesh[1:], axis=-1).astype(complex)
    weight = (1 + heisenberg_gauge(t, z)) ** p
    handle = _as_handle(f)
    if not isinstance(handle, AnalyticFunction) and p > 2:
        raise DifferentiabilityError(
            f"sampled function: weighted derivative order {p} exceeds finite-difference order 2")
    best = 0.0
    for mono in pbw_monomials(n, p):
        vals = apply_word(mono, f, t, z)
        best = max(best, float(np.max(weight * np.abs(vals))))
    return best
