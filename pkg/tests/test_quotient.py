import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hgelfand.core import apply_operator
from hgelfand.invariant import ActionDescriptor, generator_system
from hgelfand.quotient import (FiniteQuotient, average_spherical, elementary_symmetric, multiset_count,
                               push_to_quotient, quotient_extend, quotient_spectrum, symmetric_quotient)
from hgelfand.spectrum import SpectrumModel
from hgelfand.spherical import SphericalFunction


@pytest.fixture(scope="module")
def q2():
    return symmetric_quotient(generator_system(ActionDescriptor.parse("tn:2")))


@pytest.fixture(scope="module")
def q3():
    return symmetric_quotient(generator_system(ActionDescriptor.parse("tn:3")))


@given(st.lists(st.integers(-20, 20), min_size=3, max_size=3))
def test_elementary_symmetric(x):
    a, b, c = x
    assert elementary_symmetric(np.array(x)).tolist() == [a + b + c, a * b + a * c + b * c, a * b * c]


@pytest.mark.parametrize("n, m", [(1, 5), (2, 3), (2, 8), (3, 4), (3, 8)])
def test_multiset_count_brute_force(n, m):
    brute = {tuple(sorted(a)) for a in itertools.product(range(m + 1), repeat=n) if sum(a) <= m}
    assert multiset_count(n, m) == len(brute)


def test_eigentable_is_exact_and_invariant(q2, q3):
    q2.check(6)
    q3.check(4)
    # Vhat(2, 1) = (11, 13): e_1 = 24, e_2 = 143
    assert q2.eigentable(4)[(2, 1)] == (24, 143)
    assert all(isinstance(v, int) for vals in q3.eigentable(4).values() for v in vals)


def test_orbit_merge_counts(q2):
    model = SpectrumModel(q2.base, 5, (1.0, 2.0), lambda_samples=2)
    pts = [p for p in quotient_spectrum(q2, model) if p.lam == 1.0]
    assert len(pts) == multiset_count(2, 5)
    for p in pts:
        assert p.multiplicity == len(set(itertools.permutations(p.sources[0])))
        assert p.coords == tuple(float(v) for v in p.key[2])


def test_degenerate_points_merge_by_sorted_orbit(q2):
    model = SpectrumModel(q2.base, 1, (-1.0, 1.0), lambda_samples=3)
    deg = [p for p in quotient_spectrum(q2, model, orbit_samples=3) if p.kind == "degenerate"]
    assert len(deg) == 6  # unordered pairs, with repetition, from 3 orbit values
    assert sorted(p.multiplicity for p in deg) == [1, 1, 1, 2, 2, 2]


def test_averaged_spherical_eigenvalue(q2, rng):
    act = q2.base.action
    phi = SphericalFunction.principal(act, 0.8, (2, 0))
    psi = average_spherical(q2, phi)
    W1 = q2.operators()[0]
    t = rng.uniform(-1, 1, 4)
    z = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    g = psi.analytic()
    assert np.allclose(psi(t, z), g(t, z), atol=1e-14)
    assert np.allclose(apply_operator(W1, g, t, z), psi.eigenvalues[0] * g(t, z), rtol=1e-10)
    assert np.allclose(psi(t, z[:, ::-1]), psi(t, z))


def test_push_to_quotient(q2):
    labs = np.array([[0, 1], [1, 0], [2, 2]])
    out = push_to_quotient(q2, labs, np.array([1.0, 1.0, 5.0]))
    assert out == {(1, 0): 1.0, (2, 2): 5.0}
    with pytest.raises(ValueError):
        push_to_quotient(q2, labs, np.array([1.0, 2.0, 5.0]))


def test_quotient_extension_is_invariant(q2, rng):
    g = quotient_extend(lambda lam, w: np.exp(-lam ** 2 - w[..., 0] ** 2 / 10) * np.cos(w[..., 1]), q2)
    xi = rng.normal(size=(10, 2))
    lam = rng.normal(size=10)
    assert np.allclose(g(lam, xi), g(lam, xi[:, ::-1]))


def test_rejects_non_torus_and_bad_permutations():
    with pytest.raises(ValueError):
        symmetric_quotient(generator_system(ActionDescriptor.parse("un:2")))
    with pytest.raises(ValueError):
        FiniteQuotient(generator_system(ActionDescriptor.parse("tn:2")), ((0, 0),))
