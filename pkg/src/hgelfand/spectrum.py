"""The embedded spectrum: principal curves ``Gamma_alpha`` and the degenerate piece ``Sigma_0``.

A principal point is ``(lambda, xi)`` with ``xi_j = |lambda|^{m_j} Vhat_j(alpha)``;
a degenerate point is ``(0, rho(w))``.  All supported actions have a linear
Hilbert map in the orbit parameters ``s`` (``|w|^2`` or ``|w_j|^2``), so
``Sigma_0`` is the cone ``{A s : s >= 0}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from .invariant import GeneratorSystem

DEGREE_CAP = 400_000


class SpectrumRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumPoint:
    lam: float
    xi: tuple[float, ...]
    kind: str  # "principal" | "degenerate"
    alpha: tuple[int, ...] | None = None
    orbit: tuple[float, ...] | None = None  # orbit parameters s for degenerate points

    def __post_init__(self):
        if self.kind == "principal" and self.lam == 0:
            raise ValueError("principal points need lambda != 0")
        if self.kind == "degenerate" and self.lam != 0:
            raise ValueError("degenerate points lie on lambda = 0")

    @property
    def coords(self) -> np.ndarray:
        return np.array((self.lam,) + tuple(self.xi))


@dataclass(frozen=True)
class SpectrumModel:
    """Finite truncation of the spectrum.

    A label ``alpha`` is used at ``lambda`` when ``|alpha| <= alpha_cut`` or, if
    ``xi_cut`` is set, when ``max_j xi_j(lambda, alpha) <= xi_cut``.  The second
    rule keeps a fixed spectral window as ``lambda -> 0``.
    """

    gensys: GeneratorSystem
    alpha_cut: int = 32
    lambda_range: tuple[float, float] = (-4.0, 4.0)
    xi_cut: float | None = None
    orbit_max: float = 16.0
    degree_cap: int = DEGREE_CAP
    lambda_samples: int = 9
    label_cap: int = 1_000_000

    def __post_init__(self):
        lo, hi = self.lambda_range
        if not lo < hi:
            raise ValueError("empty lambda range")
        if self.alpha_cut < 0:
            raise ValueError("alpha_cut must be >= 0")

    @property
    def action(self):
        return self.gensys.action

    @property
    def d(self) -> int:
        return self.gensys.d

    @property
    def degrees(self) -> np.ndarray:
        return np.array(self.gensys.degrees, dtype=float)

    def xi(self, lam, labels) -> np.ndarray:
        """``xi(lambda, alpha)``; ``lam`` broadcasts against the leading axes of ``labels``."""
        base = self.gensys.eigenvalue_array(labels)
        lam = np.abs(np.asarray(lam, dtype=float))[..., None]
        return lam ** self.degrees * base

    def max_degree(self, lam: float) -> int:
        deg = self.alpha_cut
        if self.xi_cut is not None and lam != 0:
            c, B = self.gensys.affine
            scale = abs(lam) ** self.degrees
            # smallest growth rate per unit degree across generators
            rate = np.min(B, axis=1)
            bound = np.min((self.xi_cut / scale - c) / np.maximum(rate, 1e-300))
            deg = max(deg, int(np.floor(bound)) if np.isfinite(bound) else deg)
        return int(min(deg, self.degree_cap))

    def labels_for(self, lam: float) -> np.ndarray:
        """Integer label array of shape ``(L, r)`` used at ``lam``, ordered by ``(|alpha|, alpha)``
        with larger leading entries first inside a degree."""
        kmax = self.max_degree(lam)
        if self.action.kind == "unitary_full":
            return np.arange(kmax + 1)[:, None]
        n = self.action.n
        box = self.alpha_cut
        if self.xi_cut is not None and lam != 0:
            c, B = self.gensys.affine
            per_axis = (self.xi_cut / abs(lam) - c) / np.diag(B)
            box = max(box, int(np.floor(np.min(per_axis))))
        box = min(box, int(round(self.label_cap ** (1.0 / n))) - 1, self.degree_cap)
        labs = np.indices((box + 1,) * n).reshape(n, -1).T
        keep = labs.sum(axis=1) <= self.alpha_cut
        if self.xi_cut is not None and lam != 0:
            keep |= np.all(self.xi(lam, labs) <= self.xi_cut, axis=1)
        labs = labs[keep]
        order = np.lexsort(tuple(-labs[:, j] for j in reversed(range(n))) + (labs.sum(axis=1),))
        return labs[order]

    def dims(self, labels: np.ndarray) -> np.ndarray:
        return self.action.dims(labels)

    def rho_orbit(self, s) -> np.ndarray:
        return self.gensys.rho_from_squares(s)


def enumerate_spectrum(model: SpectrumModel, lambda_samples: int | None = None,
                       orbit_samples: int = 9) -> list[SpectrumPoint]:
    """Principal points on the curves at sampled ``lambda`` plus degenerate samples of ``Sigma_0``.

    Order: degenerate points (orbit parameters ascending), then principal
    points by ``(|alpha|, alpha, lambda)``.
    """
    lo, hi = model.lambda_range
    lams = np.linspace(lo, hi, lambda_samples or model.lambda_samples)
    out: list[SpectrumPoint] = []
    if lo <= 0 <= hi and orbit_samples > 0:
        axis = np.linspace(0.0, model.orbit_max, orbit_samples)
        for s in itertools.product(axis, repeat=model.action.n_reduced):
            xi = model.rho_orbit(np.array(s))
            out.append(SpectrumPoint(0.0, tuple(float(x) for x in xi), "degenerate", None,
                                    tuple(float(x) for x in s)))
    principal = []
    for lam in lams:
        if lam == 0:
            continue
        labs = model.labels_for(lam)
        xis = model.xi(lam, labs)
        for a, x in zip(labs, xis):
            principal.append(SpectrumPoint(float(lam), tuple(float(v) for v in x), "principal",
                                           tuple(int(v) for v in a)))
    principal.sort(key=lambda p: (sum(p.alpha), p.alpha, p.lam))
    return out + principal


def dilate(p: SpectrumPoint, r: float, degrees: Sequence[int] | None = None) -> SpectrumPoint:
    """``(r lambda, r^{m_1} xi_1, ..., r^{m_d} xi_d)``.

    Principal points keep their label.  Degenerate orbit parameters
    ``s = |w|^2`` scale by ``r`` (``w -> sqrt(r) w``), which is consistent when
    every ``m_j = 1`` (the default, true for all supported actions).
    """
    if r <= 0:
        raise ValueError("dilation factor must be positive")
    degrees = [1] * len(p.xi) if degrees is None else list(degrees)
    xi = tuple(float(x) * r ** m for x, m in zip(p.xi, degrees))
    if p.kind == "principal":
        return SpectrumPoint(p.lam * r, xi, "principal", p.alpha)
    orbit = None if p.orbit is None else tuple(float(s) * r for s in p.orbit)
    return SpectrumPoint(0.0, xi, "degenerate", None, orbit)


def _project_degenerate(model: SpectrumModel, xi: np.ndarray):
    A = model.gensys.rho_matrix
    s, resid = nnls(A, xi)
    return s, float(resid)


def project_to_spectrum(model: SpectrumModel, q: Sequence[float]) -> tuple[SpectrumPoint, float]:
    """Nearest enumerated spectrum point (Euclidean) and its distance.

    Principal candidates are the enumerated points at the model's sampled
    ``lambda`` values; the degenerate piece is the exact cone ``rho(C^n)``.
    Ties go to the degenerate piece, then to the smallest ``|alpha|``, then
    the smallest ``lambda``.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (model.d + 1,):
        raise ValueError(f"expected a point of R^{model.d + 1}")
    lo, hi = model.lambda_range
    if not lo <= q[0] <= hi:
        raise SpectrumRangeError(
            f"lambda={q[0]} outside the enumerated range {model.lambda_range}; "
            f"extend lambda_range to include it")
    s, resid = _project_degenerate(model, q[1:])
    d_deg = float(np.hypot(q[0], resid))
    best = None
    top = -np.inf
    for lam in np.linspace(lo, hi, model.lambda_samples):
        if lam == 0:
            continue
        labs = model.labels_for(lam)
        xis = model.xi(lam, labs)
        top = max(top, float(np.max(xis)))
        dist = np.hypot(lam - q[0], np.linalg.norm(xis - q[1:], axis=1))
        i = int(np.argmin(dist))
        key = (round(float(dist[i]), 12), int(labs[i].sum()), float(lam))
        if best is None or key < best[0]:
            best = (key, float(dist[i]), float(lam), xis[i], tuple(int(x) for x in labs[i]))
    if best is None or d_deg <= best[1] + 1e-12:
        xi = model.rho_orbit(s)
        return SpectrumPoint(0.0, tuple(float(x) for x in xi), "degenerate", None,
                             tuple(float(x) for x in s)), d_deg
    if np.any(q[1:] > top):
        raise SpectrumRangeError(
            f"point lies beyond the label truncation; increase alpha_cut above {model.alpha_cut}")
    _, dmin, lam_b, xi_b, alpha = best
    return SpectrumPoint(lam_b, tuple(float(x) for x in xi_b), "principal", alpha), dmin


def density_epsilon(gensys: GeneratorSystem, alpha_cut: int, lam_min: float, bound: float,
                    samples: int = 401) -> float:
    """Largest distance from a degenerate point with ``|xi| <= bound`` to the principal points
    ``(lam_min, xi(lam_min, alpha))`` with ``|alpha| <= alpha_cut``."""
    model = SpectrumModel(gensys, alpha_cut, (-1.0, 1.0))
    labels = np.array(gensys.action.labels_upto(alpha_cut), dtype=int)
    prin = np.concatenate([np.full((len(labels), 1), lam_min), model.xi(lam_min, labels)], axis=1)
    r = gensys.action.n_reduced
    smax = bound / np.min(np.linalg.norm(gensys.rho_matrix, axis=0))
    per_axis = samples if r == 1 else max(9, int(round(samples ** (1.0 / r))))
    axis = np.linspace(0.0, smax, per_axis)
    grid = np.array(list(itertools.product(axis, repeat=r)))
    xis = gensys.rho_from_squares(grid)
    xis = xis[np.linalg.norm(xis, axis=1) <= bound * (1 + 1e-12)]
    worst = 0.0
    for xi in xis:
        p = np.concatenate([[0.0], xi])
        worst = max(worst, float(np.min(np.linalg.norm(prin - p, axis=1))))
    return worst


def fan_rows(points: Iterable[SpectrumPoint], d: int) -> list[list]:
    """CSV rows ``lambda, xi_1..xi_d, label_kind, alpha-or-orbit``."""
    rows = []
    for p in points:
        tag = [str(int(a)) for a in p.alpha] if p.kind == "principal" else [repr(float(s)) for s in p.orbit]
        rows.append([p.lam, *p.xi, p.kind, " ".join(tag)])
    return rows


def fan_header(d: int) -> list[str]:
    return ["lambda"] + [f"xi_{j + 1}" for j in range(d)] + ["label_kind", "alpha"]
