"""Invariant polynomials, symmetrization and exact Fock-space eigenvalues.

Polynomials in ``z, conj(z)`` are dictionaries ``{(a, b): Fraction}`` where ``a``
and ``b`` are exponent tuples for ``z`` and ``conj(z)``.  Differential operators
in the left-invariant fields are :class:`WordSum` objects: linear combinations
of words in the letters ``Z_h`` and ``Zbar_h``.  A word is applied right to
left, i.e. ``(Zbar, Z)`` means "apply ``Z`` first, then ``Zbar``".

Everything here is exact (``fractions.Fraction``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np
from sympy.utilities.iterables import multiset_permutations

Z, ZBAR = 0, 1
Letter = tuple[int, int]
Word = tuple[Letter, ...]
Exponent = tuple[int, ...]
Poly = dict[tuple[Exponent, Exponent], Fraction]

SUPPORTED_KINDS = ("unitary_full", "torus")
MAX_FOCK_DIM = 10_000


class UnsupportedActionError(ValueError):
    pass


class FockDimensionError(RuntimeError):
    pass


class LemmaViolation(RuntimeError):
    """Raised when an integrality, sign or block-scalar assertion fails."""


# ----------------------------------------------------------------------------
# actions and labels


@dataclass(frozen=True)
class ActionDescriptor:
    """A supported multiplicity-free action of ``K`` on ``C^n``.

    Irreducible labels are tuples: ``(k,)`` for ``unitary_full`` and a
    multi-index ``alpha`` for ``torus``.
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise UnsupportedActionError(f"unsupported action kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @classmethod
    def parse(cls, spec: str) -> "ActionDescriptor":
        """Parse ``un:2`` / ``tn:3`` style group specs."""
        try:
            kind, n = spec.split(":")
            n = int(n)
        except ValueError as exc:
            raise UnsupportedActionError(f"bad group spec {spec!r}") from exc
        kinds = {"un": "unitary_full", "u": "unitary_full", "tn": "torus", "t": "torus"}
        if kind.lower() not in kinds:
            raise UnsupportedActionError(f"unknown group {kind!r}")
        return cls(kinds[kind.lower()], n)

    @property
    def tag(self) -> str:
        return f"{'un' if self.kind == 'unitary_full' else 'tn'}:{self.n}"

    @property
    def d(self) -> int:
        """Number of non-central generators."""
        return 1 if self.kind == "unitary_full" else self.n

    @property
    def n_reduced(self) -> int:
        """Number of reduced radial coordinates."""
        return 1 if self.kind == "unitary_full" else self.n

    def labels(self, degree: int) -> list[tuple[int, ...]]:
        if self.kind == "unitary_full":
            return [(degree,)]
        return monomials(self.n, degree)

    def labels_upto(self, degree: int) -> list[tuple[int, ...]]:
        return [a for m in range(degree + 1) for a in self.labels(m)]

    def total_degree(self, label: Sequence[int]) -> int:
        return int(sum(label))

    def block(self, label: Sequence[int]) -> list[Exponent]:
        """Monomial exponents spanning ``P_alpha``."""
        if self.kind == "unitary_full":
            return monomials(self.n, label[0])
        return [tuple(label)]

    def representative(self, label: Sequence[int]) -> Exponent:
        return self.block(label)[0]

    def dim(self, label: Sequence[int]) -> int:
        if self.kind == "unitary_full":
            return math.comb(label[0] + self.n - 1, self.n - 1)
        return 1

    def dims(self, labels: np.ndarray) -> np.ndarray:
        labels = np.asarray(labels)
        if self.kind == "unitary_full":
            k = labels[..., 0]
            return np.array([math.comb(int(x) + self.n - 1, self.n - 1) for x in k.ravel()],
                            dtype=float).reshape(k.shape)
        return np.ones(labels.shape[:-1])


def monomials(n: int, m: int) -> list[Exponent]:
    """Exponent vectors of degree ``m`` in graded lexicographic (descending) order."""
    if n == 1:
        return [(m,)]
    out = []
    for first in range(m, -1, -1):
        for rest in monomials(n - 1, m - first):
            out.append((first,) + rest)
    return out


# ----------------------------------------------------------------------------
# polynomials in z, zbar


def poly_add(*polys: Mapping) -> Poly:
    out: Poly = {}
    for p in polys:
        for key, c in p.items():
            out[key] = out.get(key, Fraction(0)) + c
    return {k: v for k, v in out.items() if v != 0}


def poly_scale(p: Mapping, c) -> Poly:
    c = Fraction(c)
    return {k: v * c for k, v in p.items() if v * c != 0}


def poly_mul(p: Mapping, q: Mapping) -> Poly:
    out: Poly = {}
    for (a1, b1), c1 in p.items():
        for (a2, b2), c2 in q.items():
            key = (tuple(x + y for x, y in zip(a1, a2)), tuple(x + y for x, y in zip(b1, b2)))
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def poly_pow(p: Mapping, e: int, n: int) -> Poly:
    one = {((0,) * n, (0,) * n): Fraction(1)}
    return reduce(poly_mul, [p] * e, one)


def norm_squared_poly(n: int) -> Poly:
    """``|z|^2`` as a polynomial."""
    out = {}
    for h in range(n):
        e = tuple(int(i == h) for i in range(n))
        out[(e, e)] = Fraction(1)
    return out


def poly_eval(p: Mapping, w: np.ndarray) -> np.ndarray:
    """Evaluate at complex points ``w`` of shape ``(..., n)``."""
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape[:-1], dtype=complex)
    for (a, b), c in p.items():
        term = np.full(w.shape[:-1], float(c), dtype=complex)
        for h, (ah, bh) in enumerate(zip(a, b)):
            if ah:
                term = term * w[..., h] ** ah
            if bh:
                term = term * np.conj(w[..., h]) ** bh
        out = out + term
    return out


def is_bihomogeneous(p: Mapping) -> bool:
    degs = {(sum(a), sum(b)) for a, b in p}
    return len(degs) <= 1 and all(x == y for x, y in degs)


def poly_to_json(p: Mapping) -> list:
    return [{"z": list(a), "zbar": list(b), "coeff": [c.numerator, c.denominator]}
            for (a, b), c in sorted(p.items(), reverse=True)]


# ----------------------------------------------------------------------------
# word sums (noncommutative polynomials in Z, Zbar)


@dataclass(frozen=True)
class WordSum:
    terms: Mapping[Word, Fraction] = field(default_factory=dict)

    @classmethod
    def letter(cls, kind: int, h: int) -> "WordSum":
        return cls({((kind, h),): Fraction(1)})

    @classmethod
    def identity(cls) -> "WordSum":
        return cls({(): Fraction(1)})

    def _clean(self, d) -> "WordSum":
        return WordSum({k: v for k, v in d.items() if v != 0})

    def __add__(self, other: "WordSum") -> "WordSum":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return self._clean(out)

    def __sub__(self, other: "WordSum") -> "WordSum":
        return self + other.scale(-1)

    def scale(self, c) -> "WordSum":
        c = Fraction(c)
        return self._clean({k: v * c for k, v in self.terms.items()})

    def __matmul__(self, other: "WordSum") -> "WordSum":
        """Operator composition: ``(A @ B) f = A(B f)``."""
        out: dict[Word, Fraction] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, Fraction(0)) + c1 * c2
        return self._clean(out)

    def power(self, e: int) -> "WordSum":
        return reduce(lambda a, b: a @ b, [self] * e, WordSum.identity())

    def __eq__(self, other) -> bool:
        if not isinstance(other, WordSum):
            return NotImplemented
        return dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @property
    def degree_shift(self) -> int:
        """Change of polynomial degree under ``dpi_1`` (Zbar raises, Z lowers)."""
        shifts = {sum(1 if kind == ZBAR else -1 for kind, _ in w) for w in self.terms}
        if len(shifts) > 1:
            raise ValueError("word sum is not homogeneous in the Fock grading")
        return shifts.pop() if shifts else 0

    def __repr__(self) -> str:
        def word_str(w):
            return "".join(("Z" if k == Z else "Zb") + str(h + 1) for k, h in w) or "1"
        return " + ".join(f"({c})*{word_str(w)}" for w, c in sorted(self.terms.items()))


def sublaplacian(n: int) -> WordSum:
    """``-2 sum_j (Z_j Zbar_j + Zbar_j Z_j)``."""
    out = WordSum()
    for h in range(n):
        out = out + WordSum({((Z, h), (ZBAR, h)): Fraction(1), ((ZBAR, h), (Z, h)): Fraction(1)})
    return out.scale(-2)


CONVENTIONS = ("average", "sum", "real")


def symmetrize(poly: Mapping, convention: str = "average") -> WordSum:
    """Map ``z^a conj(z)^b`` onto the symmetrized word sum in ``Z``, ``Zbar``.

    ``average`` divides by the number of distinct orderings, ``sum`` does not,
    and ``real`` is the average scaled by ``2**degree`` (the symmetrization
    induced by the real coordinates ``x_j, y_j`` of ``C^n``).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown symmetrization convention {convention!r}")
    out: dict[Word, Fraction] = {}
    for (a, b), c in poly.items():
        letters = [(Z, h) for h, e in enumerate(a) for _ in range(e)]
        letters += [(ZBAR, h) for h, e in enumerate(b) for _ in range(e)]
        words = [tuple(w) for w in multiset_permutations(letters)] if letters else [()]
        if convention == "average":
            weight = Fraction(c) / len(words)
        elif convention == "sum":
            weight = Fraction(c)
        else:
            weight = Fraction(c) * 2 ** len(letters) / len(words)
        for w in words:
            out[w] = out.get(w, Fraction(0)) + weight
    return WordSum({k: v for k, v in out.items() if v != 0})


# ----------------------------------------------------------------------------
# Fock representation


def apply_word_fock(word: Word, poly: Mapping[Exponent, Fraction]) -> dict[Exponent, Fraction]:
    """Apply ``dpi_1(word)`` to a holomorphic polynomial ``{exponent: coeff}``."""
    cur = dict(poly)
    for kind, h in reversed(word):
        nxt: dict[Exponent, Fraction] = {}
        for e, c in cur.items():
            if kind == Z:
                if e[h] == 0:
                    continue
                ne = e[:h] + (e[h] - 1,) + e[h + 1:]
                val = c * e[h]
            else:
                ne = e[:h] + (e[h] + 1,) + e[h + 1:]
                val = -c / 2
            nxt[ne] = nxt.get(ne, Fraction(0)) + val
        cur = {k: v for k, v in nxt.items() if v != 0}
    return cur


def apply_fock(D: WordSum, poly: Mapping[Exponent, Fraction]) -> dict[Exponent, Fraction]:
    out: dict[Exponent, Fraction] = {}
    for w, c in D.terms.items():
        for e, v in apply_word_fock(w, poly).items():
            out[e] = out.get(e, Fraction(0)) + c * v
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True)
class FockMatrix:
    """Exact matrix of ``dpi_1(D)`` from ``P_m`` to ``P_{m+shift}``."""

    m: int
    n: int
    entries: tuple[tuple[Fraction, ...], ...]
    row_basis: tuple[Exponent, ...]
    col_basis: tuple[Exponent, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_basis), len(self.col_basis)

    def __matmul__(self, other: "FockMatrix") -> "FockMatrix":
        if self.col_basis != other.row_basis:
            raise ValueError("incompatible Fock matrices")
        rows = tuple(
            tuple(sum((self.entries[i][k] * other.entries[k][j] for k in range(len(self.col_basis))),
                      Fraction(0)) for j in range(len(other.col_basis)))
            for i in range(len(self.row_basis)))
        return FockMatrix(other.m, self.n, rows, self.row_basis, other.col_basis)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])

    def block_scalar(self, block: Sequence[Exponent]) -> Fraction:
        """Scalar of the restriction to ``span(block)``; raises if not scalar there."""
        idx = {e: i for i, e in enumerate(self.col_basis)}
        ridx = {e: i for i, e in enumerate(self.row_basis)}
        cols = [idx[e] for e in block]
        value = None
        for e in block:
            j = idx[e]
            for i, r in enumerate(self.row_basis):
                x = self.entries[i][j]
                if r == e:
                    if value is None:
                        value = x
                    elif x != value:
                        raise LemmaViolation(f"block {block} not scalar at m={self.m}")
                elif x != 0:
                    raise LemmaViolation(f"block {block} not invariant at m={self.m}")
            # rows of this block must vanish outside the block columns
            if e in ridx:
                i = ridx[e]
                for jj in range(len(self.col_basis)):
                    if jj not in cols and self.entries[i][jj] != 0:
                        raise LemmaViolation(f"block {block} not invariant at m={self.m}")
        return value if value is not None else Fraction(0)


def fock_matrix(D: WordSum, m: int, n: int, max_dim: int = MAX_FOCK_DIM) -> FockMatrix:
    """Matrix of ``dpi_1(D)`` on the monomial basis of ``P_m(C^n)``."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    dim = math.comb(m + n - 1, n - 1)
    if dim > max_dim:
        raise FockDimensionError(f"Fock block dimension {dim} exceeds cap {max_dim}")
    target = m + D.degree_shift
    cols = tuple(monomials(n, m))
    rows = tuple(monomials(n, target)) if target >= 0 else ()
    ridx = {e: i for i, e in enumerate(rows)}
    mat = [[Fraction(0)] * len(cols) for _ in rows]
    for j, e in enumerate(cols):
        for r, v in apply_fock(D, {e: Fraction(1)}).items():
            mat[ridx[r]][j] = v
    return FockMatrix(m, n, tuple(tuple(r) for r in mat), rows, cols)


# ----------------------------------------------------------------------------
# Hilbert bases and the privileged generator system


@dataclass(frozen=True)
class HilbertBasis:
    action: ActionDescriptor
    generators: tuple[Poly, ...]
    degrees: tuple[int, ...]
    labels: tuple[tuple[int, ...], ...]

    def evaluate(self, w: np.ndarray) -> np.ndarray:
        return np.stack([poly_eval(g, w).real for g in self.generators], axis=-1)


def invariant_p_alpha(action: ActionDescriptor, label: Sequence[int]) -> Poly:
    """``sum_h |v_h|^2`` over an ``F_1``-orthonormal monomial basis of ``P_alpha``.

    ``||w^d||^2 = 2^|d| d!`` in ``F_1``.
    """
    out: Poly = {}
    for d in action.block(label):
        norm = 2 ** sum(d) * math.prod(math.factorial(x) for x in d)
        out[(tuple(d), tuple(d))] = Fraction(1, norm)
    return out


def hilbert_basis(action: ActionDescriptor) -> HilbertBasis:
    if action.kind == "unitary_full":
        labels = [(1,)]
    elif action.kind == "torus":
        labels = [tuple(int(i == j) for i in range(action.n)) for j in range(action.n)]
    else:  # pragma: no cover - guarded by ActionDescriptor
        raise UnsupportedActionError(action.kind)
    gens = tuple(invariant_p_alpha(action, lab) for lab in labels)
    return HilbertBasis(action, gens, tuple(sum(l) for l in labels), tuple(labels))


def normalization_test(basis: HilbertBasis, convention: str) -> bool:
    """``sum_{m_j=1} L_gamma_j == sum_h (Z_h Zbar_h + Zbar_h Z_h)``."""
    lhs = WordSum()
    for g, m in zip(basis.generators, basis.degrees):
        if m == 1:
            lhs = lhs + symmetrize(g, convention)
    return lhs == sublaplacian(basis.action.n).scale(Fraction(-1, 2))


def choose_convention(basis: HilbertBasis) -> str:
    for conv in CONVENTIONS:
        if normalization_test(basis, conv):
            return conv
    raise LemmaViolation("no symmetrization convention passes the normalization test")


@dataclass
class GeneratorSystem:
    """The generators ``V_0 = -iT, V_1, ..., V_d`` with exact eigenvalue tables."""

    action: ActionDescriptor
    basis: HilbertBasis
    convention: str
    normalization: int
    L_gamma: tuple[WordSum, ...]
    operators: tuple[WordSum, ...]
    m_max: int
    eigentable: dict[tuple[int, tuple[int, ...]], int]
    prenormalized: dict[tuple[int, tuple[int, ...]], Fraction]
    rho_polys: tuple[Poly, ...]

    @property
    def d(self) -> int:
        return len(self.operators)

    @property
    def degrees(self) -> tuple[int, ...]:
        return self.basis.degrees

    @property
    def n(self) -> int:
        return self.action.n

    def eigenvalue(self, j: int, label: Sequence[int]) -> int:
        """Exact ``V_j``-eigenvalue on ``phi_alpha`` (any degree, via a representative)."""
        label = tuple(int(x) for x in label)
        key = (j, label)
        if key in self.eigentable:
            return self.eigentable[key]
        e = self.action.representative(label)
        out = apply_fock(self.operators[j], {e: Fraction(1)})
        val = out.get(e, Fraction(0))
        if val.denominator != 1 or val <= 0:
            raise LemmaViolation(f"eigenvalue {val} of V_{j + 1} at {label} not a positive integer")
        return int(val)

    def eigenvalues(self, label: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.eigenvalue(j, label) for j in range(self.d))

    @cached_property
    def affine(self) -> tuple[np.ndarray, np.ndarray]:
        """``(c, B)`` with ``Vhat(alpha) = c + B @ alpha`` (checked on the exact table)."""
        r = self.action.n_reduced
        zero = (0,) * r
        c = np.array(self.eigenvalues(zero), dtype=float)
        cols = []
        for i in range(r):
            e = tuple(int(i == k) for k in range(r))
            cols.append(np.array(self.eigenvalues(e), dtype=float) - c)
        B = np.stack(cols, axis=1)
        for label in self.action.labels_upto(min(self.m_max, 6)):
            pred = c + B @ np.array(label, dtype=float)
            if not np.array_equal(pred, np.array(self.eigenvalues(label), dtype=float)):
                raise LemmaViolation("eigentable is not affine in the label")
        return c, B

    def eigenvalue_array(self, labels: np.ndarray) -> np.ndarray:
        """Vectorized ``Vhat`` for integer label arrays of shape ``(..., r)``."""
        c, B = self.affine
        return c + np.asarray(labels, dtype=float) @ B.T

    def labels_near(self, u: np.ndarray, radius: float = 0.75) -> list[tuple[int, ...]]:
        """All labels whose eigenvalue vector lies within ``radius`` (sup norm) of ``u``."""
        c, B = self.affine
        u = np.asarray(u, dtype=float)
        guess = np.linalg.solve(B, u - c) if B.shape[0] == B.shape[1] else np.linalg.lstsq(B, u - c, rcond=None)[0]
        base = np.floor(guess).astype(int)
        out = []
        for off in product(range(-1, 3), repeat=len(base)):
            lab = base + np.array(off)
            if np.any(lab < 0):
                continue
            if np.all(np.abs(c + B @ lab - u) < radius):
                out.append(tuple(int(x) for x in lab))
        return out

    def rho(self, w: np.ndarray) -> np.ndarray:
        """Degenerate eigenvalues ``rho_j(w)``; ``w`` complex of shape ``(..., n)``."""
        return np.stack([poly_eval(p, w).real for p in self.rho_polys], axis=-1)

    def rho_from_squares(self, s: np.ndarray) -> np.ndarray:
        """``rho`` as a linear map of the orbit parameters ``s``.

        ``s = |w|^2`` (unitary) or ``s_j = |w_j|^2`` (torus); both Hilbert maps
        are linear in these for the supported actions.
        """
        return np.asarray(s, dtype=float) @ self.rho_matrix.T

    @cached_property
    def rho_matrix(self) -> np.ndarray:
        r = self.action.n_reduced
        A = np.zeros((self.d, r))
        for j, p in enumerate(self.rho_polys):
            for (a, b), c in p.items():
                if a != b or sum(a) != 1:
                    raise LemmaViolation("rho is not linear in the orbit parameters")
                h = a.index(1)
                if self.action.kind == "unitary_full":
                    if h == 0:
                        A[j, 0] += float(c)
                else:
                    A[j, h] += float(c)
        return A

    def squares_from_rho(self, xi: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`rho_from_squares` (linear, defined on all of ``R^d``)."""
        A = self.rho_matrix
        return np.linalg.solve(A, np.moveaxis(np.asarray(xi, dtype=float), -1, 0).reshape(A.shape[0], -1)).T.reshape(np.shape(xi)[:-1] + (A.shape[1],))

    def table_labels(self) -> list[tuple[int, ...]]:
        return self.action.labels_upto(self.m_max)

    def to_json(self) -> dict:
        return {
            "action": self.action.kind,
            "n": self.action.n,
            "N": self.normalization,
            "convention": self.convention,
            "generators": [{"j": j + 1, "m_j": m, "gamma_coeffs": poly_to_json(g)}
                           for j, (g, m) in enumerate(zip(self.basis.generators, self.degrees))],
            "table": [{"alpha": list(lab), "values": list(self.eigenvalues(lab))}
                      for lab in self.table_labels()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def build_generator_system(action: ActionDescriptor, m_max: int = 12) -> GeneratorSystem:
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    basis = hilbert_basis(action)
    conv = choose_convention(basis)
    n = action.n
    lap = sublaplacian(n)
    L_gamma = tuple(symmetrize(g, conv) for g in basis.generators)

    pre: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    for j, L in enumerate(L_gamma):
        mj = basis.degrees[j]
        for m in range(m_max + 1):
            M = fock_matrix(L, m, n)
            for label in action.labels(m):
                val = M.block_scalar(action.block(label))
                if val == 0 or (val > 0) != (mj % 2 == 0):
                    raise LemmaViolation(f"sign of L_gamma_{j + 1} eigenvalue {val} at {label}")
                pre[(j, label)] = val
    N = 1
    for v in pre.values():
        N = N * v.denominator // math.gcd(N, v.denominator)

    ops = tuple(L.scale(N * (-1) ** m) + lap.power(m) for L, m in zip(L_gamma, basis.degrees))
    table: dict[tuple[int, tuple[int, ...]], int] = {}
    for j, V in enumerate(ops):
        for m in range(m_max + 1):
            M = fock_matrix(V, m, n)
            for label in action.labels(m):
                val = M.block_scalar(action.block(label))
                if val.denominator != 1 or val <= 0:
                    raise LemmaViolation(f"V_{j + 1} eigenvalue {val} at {label} not a positive integer")
                table[(j, label)] = int(val)

    normsq = norm_squared_poly(n)
    rho = tuple(poly_add(poly_scale(g, N), poly_pow(normsq, m, n))
                for g, m in zip(basis.generators, basis.degrees))
    return GeneratorSystem(action, basis, conv, N, L_gamma, ops, m_max, table, pre, rho)


_CACHE: dict[tuple[str, int, int], GeneratorSystem] = {}


def generator_system(action: ActionDescriptor, m_max: int = 12) -> GeneratorSystem:
    """Memoized :func:`build_generator_system`."""
    key = (action.kind, action.n, m_max)
    if key not in _CACHE:
        _CACHE[key] = build_generator_system(action, m_max)
    return _CACHE[key]
