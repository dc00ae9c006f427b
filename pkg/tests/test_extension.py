import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from hgelfand.core import gaussian
from hgelfand.invariant import ActionDescriptor, generator_system
from hgelfand.special import plateau
from hgelfand.spectrum import SpectrumModel, enumerate_spectrum
from hgelfand.extension import (AnisotropicGauge, CompositionError, InterpolationE, JetExtension,
                                MomentConditionError, MultipleSummandError, OrbitProfile, affine_map,
                                change_of_generators_extend, cutoff_Psi, fd_weights, geller_development,
                                geller_jet, grid_schwartz_norm, lambda_derivatives, schwarz_mather,
                                seeley_coefficients, seeley_extend)

UN1 = ActionDescriptor.parse("un:1")


@pytest.fixture(scope="module")
def un1_jet():
    gs = generator_system(UN1)
    return gs, geller_jet(gaussian(UN1), 2, gensys=gs)


@pytest.mark.parametrize("K", [0, 1, 4, 8])
def test_seeley_moments(K):
    a, b = seeley_coefficients(K)
    for j in range(K + 1):
        # the geometric nodes 2^k make the system ill-conditioned for larger K
        assert np.sum(a * (-b) ** j) == pytest.approx(1.0, abs=1e-12 * 10 ** K)


def test_seeley_order_cap():
    with pytest.raises(ValueError):
        seeley_coefficients(13)


def test_seeley_extension_is_smooth_across_the_face():
    G = seeley_extend(lambda s: np.exp(s[:, 0]), 1, K=4, scale=10.0)
    x = np.linspace(-0.3, 0.3, 7)[:, None]
    assert np.allclose(G(x[3:]), np.exp(x[3:, 0]))
    h = 1e-2
    for order in (0, 1, 2):
        w = fd_weights(np.arange(-3, 4), order)
        right = fd_weights(np.arange(0, 7), order) @ G((h * np.arange(0, 7))[:, None]) / h ** order
        left = fd_weights(np.arange(-6, 1), order) @ G((h * np.arange(-6, 1))[:, None]) / h ** order
        assert abs(right - left) < 1e-4 * (10 ** order)
        assert abs(w @ G((h * np.arange(-3, 4))[:, None]) / h ** order - 1.0) < 1e-3


@given(st.floats(0.1, 10), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_gauge_is_homogeneous(r, y):
    g = AnisotropicGauge((2, 4), 1.5)
    y = np.array(y)
    assert g(g.dilate(r, y)) == pytest.approx(r * g(y), rel=1e-9, abs=1e-12)
    assert g.smooth(g.dilate(r, y)) == pytest.approx(r * g.smooth(y), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("tag", ["un:1", "un:2", "tn:2"])
def test_schwarz_mather_restricts_to_g(tag, rng):
    act = ActionDescriptor.parse(tag)
    gs = generator_system(act)
    E = schwarz_mather(lambda z: np.exp(-np.sum(np.abs(z) ** 2, axis=-1)) * (1 + np.abs(z[..., 0]) ** 2), gs) \
        if act.kind == "torus" else schwarz_mather(lambda z: np.exp(-np.sum(np.abs(z) ** 2, axis=-1)), gs)
    s = rng.uniform(0, 6, (40, act.n_reduced))
    want = E.g.of_squares(s)
    assert np.max(np.abs(E.on_orbits(s) - want)) < 1e-12
    assert np.all(np.isfinite(E(rng.normal(size=(40, gs.d)) * 5)))


def test_schwarz_mather_rejects_non_invariant():
    gs = generator_system(ActionDescriptor.parse("tn:2"))
    with pytest.raises(ValueError):
        schwarz_mather(lambda z: np.exp(-np.abs(z[..., 0] - 0.5) ** 2), gs)


def gaussian_jet_oracle(j):
    """j! times the coefficient of lambda^j of the U(1) Gaussian transform along a fixed xi."""
    lam, xi = sp.symbols("lam xi", positive=True)
    u = lam / 4
    k = xi / (4 * lam) - sp.Rational(1, 2)
    fh = sp.pi ** sp.Rational(3, 2) * sp.exp(-lam ** 2 / 4) * sp.exp(k * sp.log((1 - u) / (1 + u))) / (1 + u)
    coeff = sp.series(fh, lam, 0, j + 1).removeO().coeff(lam, j)
    return sp.lambdify(xi, sp.factorial(j) * coeff)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_jet_matches_series(un1_jet, j):
    _, jet = un1_jet
    x = np.array([0.0, 1.0, 5.0, 20.0])
    want = np.broadcast_to(gaussian_jet_oracle(j)(x), x.shape)
    assert np.max(np.abs(jet.components[j](x[:, None]) - want)) < 1e-11


def test_jet_order_zero_closed_form(un1_jet):
    _, jet = un1_jet
    x = np.linspace(0, 30, 7)
    assert np.allclose(jet(0, x[:, None]), math.pi ** 1.5 * np.exp(-x / 8), atol=1e-12)


def test_development_identity(un1_jet):
    gs, jet = un1_jet
    # the xi window keeps every label the kernels need as lambda shrinks
    dev = geller_development(jet, SpectrumModel(gs, 16, (-2.0, 2.0), xi_cut=300.0), [-2.0, -0.5, 0.25, 1.5])
    assert dev.identity_error() < 1e-12


def test_moment_condition_is_enforced():
    gs = generator_system(UN1)
    with pytest.raises(MomentConditionError):
        geller_jet(gaussian(UN1), 1, gensys=gs, moment_tol=1e-300)


def test_jet_order_cap():
    with pytest.raises(ValueError):
        geller_jet(gaussian(UN1), 5, gensys=generator_system(UN1))


def test_jet_extension_is_polynomial_near_zero(un1_jet):
    _, jet = un1_jet
    H = JetExtension(jet)
    xi = np.array([[3.0]])
    lam = 0.5 * H.flat_radius
    poly = sum(lam ** j / math.factorial(j) * jet(j, xi) for j in range(3))
    assert np.allclose(H(np.array([lam]), xi), poly, atol=1e-15)
    assert H.c[0] == pytest.approx(max(1.0, H.norms[0]))


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.integers(0, 3))
@settings(max_examples=30)
def test_fd_weights_exact_on_polynomials(coeffs, order):
    offs = np.arange(-3, 4)
    w = fd_weights(offs, order)
    q = np.polynomial.Polynomial(coeffs)
    assert w @ q(offs) == pytest.approx(q.deriv(order)(0.0) if order else q(0.0), abs=1e-8)


def test_lambda_derivatives_of_a_polynomial():
    F = lambda lam, xi: lam ** 3 + 2 * lam * xi[:, 0]
    d = lambda_derivatives(F, np.array([[1.0], [2.0]]), [0, 1, 3], 0.1)
    assert np.allclose(d[0], 0, atol=1e-12) and np.allclose(d[1], [2, 4]) and np.allclose(d[3], 6)


def _table(lam, labels):
    return (1.0 + labels[:, 0]) * np.exp(-abs(lam))


def test_interpolation_exact_on_curves_and_zero_at_the_fibre():
    gs = generator_system(UN1)
    E = InterpolationE(_table, gs)
    labs = np.arange(10)[:, None]
    for lam in (-1.3, 0.2, 2.0):
        xi = abs(lam) * (4 * labs + 2.0)
        assert np.array_equal(E(np.full(10, lam), xi), _table(lam, labs).astype(complex))
    assert np.all(E(np.zeros(3), np.array([[0.0], [2.0], [7.0]])) == 0)
    # between two curves no summand is active
    assert E(np.array([1.0]), np.array([[4.0]]))[0] == 0


def test_interpolation_detects_overlapping_summands():
    gs = generator_system(UN1)
    E = InterpolationE(_table, gs, cutoff=lambda u: plateau(u, 2.5, 3.0))
    with pytest.raises(MultipleSummandError):
        E(np.array([1.0]), np.array([[4.0]]))


def test_cutoff_equals_one_on_the_spectrum():
    gs = generator_system(ActionDescriptor.parse("tn:2"))
    pts = enumerate_spectrum(SpectrumModel(gs, 6, (-3.0, 3.0)), 7, 4)
    X = np.array([p.coords for p in pts])
    assert np.allclose(cutoff_Psi(X[:, 0], X[:, 1:], gs.degrees), 1.0)


def test_change_of_generators():
    P = affine_map(np.array([[1.0, 0.0], [1.0, 2.0]]))
    Q = affine_map(np.array([[1.0, 0.0], [-0.5, 0.5]]))
    f = lambda y: np.exp(-np.sum(np.asarray(y) ** 2, axis=-1))
    X = np.random.default_rng(0).normal(size=(20, 2))
    ext = change_of_generators_extend(f, P, Q, samples=X)
    assert np.array_equal(ext(X), f(P(X)))
    with pytest.raises(CompositionError):
        change_of_generators_extend(f, P, affine_map(np.eye(2)), samples=X)


def test_grid_norm_of_gaussian():
    ax = [np.linspace(-6, 6, 601)]
    vals = np.exp(-ax[0] ** 2)
    assert grid_schwartz_norm(vals, ax, 0) == pytest.approx(1.0)
    # sup (1+|x|) |2x exp(-x^2)| is attained near x = 0.9
    x = ax[0]
    assert grid_schwartz_norm(vals, ax, 1) == pytest.approx(np.max((1 + np.abs(x)) * np.maximum(
        np.exp(-x ** 2), 2 * np.abs(x) * np.exp(-x ** 2))), rel=1e-3)
