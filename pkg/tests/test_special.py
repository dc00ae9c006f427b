import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_genlaguerre

from hgelfand.special import (eta_cutoff, gauss_legendre, laguerre_function_table, laguerre_table,
                              phi_cutoff, plateau, psi_cutoff, smooth_step)


@pytest.mark.parametrize("a", [0, 1, 2])
def test_laguerre_table_matches_scipy(a):
    x = np.array([0.0, 1e-3, 0.4, 2.5, 11.0, 60.0])
    tab = laguerre_table(40, a, x)
    for k in (0, 1, 7, 40):
        ref = eval_genlaguerre(k, a, x)
        np.testing.assert_allclose(tab[k], ref, rtol=1e-11, atol=1e-12)


def test_laguerre_functions_stay_accurate_at_large_degree():
    # near x = 0 the plain three-term recurrence loses ~k^2 ulps; the difference form must not
    k = 40000
    x = np.array([4.0 / k, 100.0 / k])
    got = laguerre_function_table(k, 0, x)[k]
    ref = np.exp(-x / 2) * eval_genlaguerre(k, 0, x)
    assert np.max(np.abs(got - ref)) < 1e-13


def test_laguerre_function_underflows_without_overflow():
    x = np.array([900.0])
    tab = laguerre_function_table(30, 1, x)
    assert np.all(np.isfinite(tab))


@given(st.floats(-5, 5))
def test_cutoffs_bounded_and_even(t):
    for cut in (eta_cutoff, phi_cutoff, psi_cutoff):
        v = float(cut(t))
        assert 0.0 <= v <= 1.0
        assert v == float(cut(-t))


@pytest.mark.parametrize("cut,inner,outer", [(eta_cutoff, 1.0, 2.0), (phi_cutoff, 0.5, 0.75),
                                             (psi_cutoff, 2.0, 3.0)])
def test_cutoff_plateau_and_support(cut, inner, outer):
    t = np.linspace(0, inner, 50)
    assert np.all(cut(t) == 1.0)
    t = np.linspace(outer, outer + 3, 50)
    assert np.all(cut(t) == 0.0)


def test_smooth_step_is_flat_at_the_ends():
    h = 1e-3
    assert smooth_step(h) < 1e-200
    assert 1 - smooth_step(1 - h) < 1e-200
    assert abs(smooth_step(0.5) - 0.5) < 1e-15


def test_plateau_monotone_between():
    t = np.linspace(1, 2, 200)
    v = plateau(t, 1.0, 2.0)
    assert np.all(np.diff(v) <= 0)


@pytest.mark.parametrize("n", [3, 10, 40])
def test_gauss_legendre_integrates_polynomials(n):
    x, w = gauss_legendre(-1.0, 3.0, n)
    deg = 2 * n - 1
    assert np.isclose(np.sum(w * x ** deg), (3.0 ** (deg + 1) - 1.0) / (deg + 1), rtol=1e-12)
