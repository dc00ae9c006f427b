import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hgelfand.core import InvariantFunction, gaussian, parse_function
from hgelfand.invariant import ActionDescriptor, generator_system
from hgelfand.spectrum import SpectrumModel
from hgelfand.transform import (IntegrabilityError, QuadratureConfig, TruncationWarning, apply_multiplier,
                                calibrate_plancherel, forward_at, forward_degenerate, gaussian_symbol,
                                gelfand_forward, gelfand_inverse, lambda_nodes, operator_image,
                                plancherel_constant, symbol_table)

UN1 = ActionDescriptor.parse("un:1")
TN2 = ActionDescriptor.parse("tn:2")
CFG = QuadratureConfig(nt=120, nr=120)


def gaussian_hat(lam, k):
    """Transform of exp(-t^2 - |z|^2) on U(1), worked out by hand."""
    u = abs(lam) / 4
    return math.pi ** 1.5 * np.exp(-lam ** 2 / 4) * (1 - u) ** k / (1 + u) ** (k + 1)


@pytest.mark.parametrize("lam", [-3.5, -0.2, 0.05, 1.0, 4.0])
def test_gaussian_transform_closed_form(lam):
    k = np.arange(12)
    got = forward_at(gaussian(UN1), lam, k[:, None], CFG)
    assert np.max(np.abs(got - gaussian_hat(lam, k))) < 1e-13


@pytest.mark.parametrize("s", [0.0, 0.5, 3.0, 10.0])
def test_gaussian_degenerate_closed_form(s):
    # xi = 2 s on the degenerate piece, and the transform is pi^(3/2) exp(-xi / 8)
    got = forward_degenerate(gaussian(UN1), [s], CFG)
    assert abs(got - math.pi ** 1.5 * np.exp(-2 * s / 8)) < 1e-13


def test_torus_transform_factorizes():
    lam = 0.7
    labs = np.array([[0, 0], [2, 1], [3, 0]])
    got = forward_at(gaussian(TN2), lam, labs, CFG)
    one_axis = gaussian_hat(lam, labs) / (math.sqrt(math.pi) * np.exp(-lam ** 2 / 4))
    want = math.sqrt(math.pi) * np.exp(-lam ** 2 / 4) * one_axis.prod(axis=1)
    assert np.allclose(got, want, atol=1e-13)


def test_permutation_equivariance():
    f = parse_function("laguerre-mode(2,0)", TN2)
    labs = np.array([[0, 1], [2, 0], [1, 3]])
    a = forward_at(f.permuted((1, 0)), 0.9, labs, CFG)
    b = forward_at(f, 0.9, labs[:, ::-1], CFG)
    assert np.allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("tag", ["un:1", "un:2", "tn:2"])
def test_plancherel_calibration(tag):
    act = ActionDescriptor.parse(tag)
    assert calibrate_plancherel(act) == pytest.approx(plancherel_constant(act.n), rel=1e-8)


def test_invariant_operator_acts_by_eigenvalue():
    gs = generator_system(UN1)
    f = gaussian(UN1)
    g = operator_image(gs.operators[0], f)
    k = np.arange(5)[:, None]
    for lam in (0.5, -2.0):
        ratio = forward_at(g, lam, k, CFG) / forward_at(f, lam, k, CFG)
        assert np.allclose(ratio, abs(lam) * (4 * k[:, 0] + 2), rtol=1e-10)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3))
@settings(max_examples=15)
def test_forward_is_linear(a, b, lam):
    f, g = parse_function("gaussian(1,1)", UN1), parse_function("hermite-gaussian(1,0.5,2)", UN1)
    h = InvariantFunction(UN1, lambda t, r: a * f.profile(t, r) + b * g.profile(t, r), t_max=f.t_max + 6)
    cfg = QuadratureConfig(nt=160, nr=120, t_max=18.0, r_max=8.0)
    k = np.arange(4)[:, None]
    lin = a * forward_at(f, lam, k, cfg) + b * forward_at(g, lam, k, cfg)
    assert np.allclose(forward_at(h, lam, k, cfg), lin, atol=1e-12)


def test_round_trip_on_adequate_window():
    gs = generator_system(UN1)
    f = gaussian(UN1)
    model = SpectrumModel(gs, 32, (-11.0, 11.0), xi_cut=300.0)
    inv = gelfand_inverse(gelfand_forward(f, model, QuadratureConfig(n_lambda=96)))
    t = np.array([0.0, 0.4, -1.3, 2.0])
    z = np.array([[0.0], [0.5j], [1.1], [0.3 - 0.3j]])
    assert np.max(np.abs(inv(t, z) - f(t, z))) < 1e-10


def test_narrow_window_warns():
    gs = generator_system(UN1)
    table = gelfand_forward(gaussian(UN1), SpectrumModel(gs, 32, (-1.0, 1.0)), QuadratureConfig(n_lambda=16))
    with pytest.warns(TruncationWarning):
        gelfand_inverse(table)


def test_polynomial_growth_rejected():
    f = InvariantFunction(UN1, lambda t, r: 1 + t ** 2, decay_class="polynomial_growth")
    with pytest.raises(IntegrabilityError):
        forward_at(f, 1.0, [[0]])


def test_multiplier_is_diagonal():
    gs = generator_system(UN1)
    model = SpectrumModel(gs, 8, (-2.0, 2.0))
    cfg = QuadratureConfig(nt=80, nr=80, n_lambda=8)
    m = gaussian_symbol()
    table = gelfand_forward(gaussian(UN1), model, cfg)
    out = apply_multiplier(table, m)
    sym = symbol_table(m, model, cfg)
    assert np.allclose(out.flat_values(), table.flat_values() * sym.flat_values())


def test_lambda_nodes_split_at_zero():
    x, w = lambda_nodes((-2.0, 3.0), 8)
    assert len(x) == 16 and np.all(x != 0)
    assert w.sum() == pytest.approx(5.0)
    assert np.sum(w * x ** 3) == pytest.approx((3.0 ** 4 - 2.0 ** 4) / 4)
