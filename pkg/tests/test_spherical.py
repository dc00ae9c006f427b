import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_laguerre, j0

from hgelfand.core import apply_operator
from hgelfand.invariant import ActionDescriptor, generator_system
from hgelfand.spherical import (SphericalFunction, eval_degenerate, eval_principal,
                                matrix_coefficient_oracle, orbit_oracle)


def sample(rng, n, m=12, scale=0.8):
    t = rng.uniform(-2, 2, m)
    z = (rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))) * scale
    return t, z


@pytest.mark.parametrize("tag", ["un:1", "un:2", "un:3", "tn:1", "tn:2", "tn:3"])
def test_principal_matches_matrix_coefficients(tag, rng):
    act = ActionDescriptor.parse(tag)
    t, z = sample(rng, act.n)
    for label in act.labels_upto(5):
        got = eval_principal(act, 1.0, label, t, z)
        assert np.max(np.abs(got - matrix_coefficient_oracle(act, label, t, z))) < 1e-10


@pytest.mark.parametrize("tag", ["un:1", "un:2", "tn:2"])
def test_degenerate_matches_orbit_average(tag, rng):
    act = ActionDescriptor.parse(tag)
    _, z = sample(rng, act.n)
    w = rng.normal(size=act.n) + 1j * rng.normal(size=act.n)
    got = eval_degenerate(act, w, np.zeros(len(z)), z)
    assert np.max(np.abs(got - orbit_oracle(act, w, z))) < 1e-8


def test_unitary_one_closed_form(rng):
    act = ActionDescriptor.parse("un:1")
    t, z = sample(rng, 1)
    lam, k = -1.7, 4
    x = abs(lam) * np.abs(z[:, 0]) ** 2 / 2
    want = np.exp(1j * lam * t) * np.exp(-x / 2) * eval_laguerre(k, x)
    assert np.allclose(eval_principal(act, lam, (k,), t, z), want, atol=1e-13)


def test_torus_degenerate_closed_form(rng):
    act = ActionDescriptor.parse("tn:2")
    _, z = sample(rng, 2)
    w = np.array([0.5 + 1j, -2.0])
    want = j0(np.abs(z[:, 0]) * abs(w[0])) * j0(np.abs(z[:, 1]) * abs(w[1]))
    assert np.allclose(eval_degenerate(act, w, np.zeros(len(z)), z), want, atol=1e-14)


@given(st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3), st.integers(0, 6))
@settings(max_examples=25)
def test_positive_definite_normalization(lam, k):
    act = ActionDescriptor.parse("un:2")
    # phi(e) = 1 and |phi| <= 1
    assert eval_principal(act, lam, (k,), np.array([0.0]), np.zeros((1, 2)))[0] == pytest.approx(1.0)
    rng = np.random.default_rng(k)
    t, z = sample(rng, 2, 30, 2.0)
    assert np.max(np.abs(eval_principal(act, lam, (k,), t, z))) <= 1 + 1e-12


@pytest.mark.parametrize("tag, label", [("un:1", (2,)), ("un:2", (1,)), ("tn:2", (1, 0))])
@pytest.mark.parametrize("lam", [1.0, -0.5])
def test_principal_eigenvalues(tag, label, lam, rng):
    act = ActionDescriptor.parse(tag)
    gs = generator_system(act)
    phi = SphericalFunction.principal(act, lam, label).analytic()
    t, z = sample(rng, act.n, 5)
    v = phi(t, z)
    for D, want in zip(gs.operators, gs.eigenvalues(label)):
        got = apply_operator(D, phi, t, z)
        assert np.allclose(got, abs(lam) * want * v, rtol=1e-9, atol=1e-12)


def test_degenerate_eigenvalues(rng):
    act = ActionDescriptor.parse("tn:2")
    gs = generator_system(act)
    w = np.array([0.7, 0.4j])
    eta = SphericalFunction.degenerate(act, w).analytic()
    t, z = sample(rng, 2, 5)
    v = eta(t, z)
    for D, want in zip(gs.operators, gs.rho(w)):
        assert np.allclose(apply_operator(D, eta, t, z), want * v, rtol=1e-8, atol=1e-12)


def test_zero_lambda_principal_rejected():
    with pytest.raises(ValueError):
        SphericalFunction.principal(ActionDescriptor.parse("un:1"), 0.0, (1,))
