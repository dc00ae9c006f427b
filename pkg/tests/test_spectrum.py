import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hgelfand.invariant import ActionDescriptor, generator_system
from hgelfand.spectrum import (SpectrumModel, SpectrumPoint, SpectrumRangeError, density_epsilon, dilate,
                               enumerate_spectrum, fan_header, fan_rows, project_to_spectrum)


@pytest.fixture(scope="module")
def un1():
    return SpectrumModel(generator_system(ActionDescriptor.parse("un:1")), 3, (-1.0, 1.0), lambda_samples=3)


@pytest.fixture(scope="module")
def tn2():
    return SpectrumModel(generator_system(ActionDescriptor.parse("tn:2")), 4, (-2.0, 2.0), lambda_samples=5)


def test_enumeration_order_and_values(un1):
    pts = enumerate_spectrum(un1, orbit_samples=2)
    assert [p.kind for p in pts[:2]] == ["degenerate"] * 2
    assert pts[0].xi == (0.0,) and pts[1].orbit == (16.0,) and pts[1].xi == (32.0,)
    prin = pts[2:]
    assert [(p.alpha[0], p.lam) for p in prin] == [(k, s) for k in range(4) for s in (-1.0, 1.0)]
    assert [p.xi[0] for p in prin[::2]] == [2.0, 6.0, 10.0, 14.0]


def test_labels_sorted_within_degree(tn2):
    labs = tn2.labels_for(1.0)
    assert [tuple(a) for a in labs[:6]] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert labs.sum(axis=1).max() == 4


def test_xi_cut_widens_window_at_small_lambda():
    gs = generator_system(ActionDescriptor.parse("un:1"))
    model = SpectrumModel(gs, 3, (-1.0, 1.0), xi_cut=100.0)
    lam = 0.25
    labs = model.labels_for(lam)
    # 0.25 (4k + 2) <= 100  <=>  k <= 99
    assert labs[-1, 0] == 99 and len(labs) == 100


@given(st.floats(0.1, 10.0), st.integers(0, 6), st.floats(-3, 3).filter(lambda x: abs(x) > 1e-2))
@settings(max_examples=30)
def test_dilation_preserves_curves(r, k, lam):
    gs = generator_system(ActionDescriptor.parse("un:1"))
    model = SpectrumModel(gs, 6, (-30.0, 30.0))
    p = SpectrumPoint(lam, tuple(model.xi(lam, np.array([[k]]))[0]), "principal", (k,))
    q = dilate(p, r)
    assert q.alpha == p.alpha
    assert np.allclose(q.xi, model.xi(q.lam, np.array([[k]]))[0])


def test_dilation_of_degenerate_point(tn2):
    s = np.array([1.0, 0.5])
    p = SpectrumPoint(0.0, tuple(tn2.rho_orbit(s)), "degenerate", None, tuple(s))
    q = dilate(p, 3.0)
    assert np.allclose(q.xi, tn2.rho_orbit(3 * s))


def test_projection_recovers_enumerated_points(tn2):
    for p in enumerate_spectrum(tn2, orbit_samples=0)[::7]:
        got, dist = project_to_spectrum(tn2, p.coords)
        assert dist < 1e-12 and got.alpha == p.alpha and got.lam == p.lam


def test_projection_onto_degenerate_cone(tn2):
    q = np.array([0.0, 4.0, 5.0])
    got, dist = project_to_spectrum(tn2, q)
    assert got.kind == "degenerate"
    assert dist < 1e-12
    assert np.allclose(tn2.rho_orbit(got.orbit), q[1:])


def test_projection_out_of_range(tn2):
    with pytest.raises(SpectrumRangeError):
        project_to_spectrum(tn2, [5.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        project_to_spectrum(tn2, [0.0, 1.0])


def test_degenerate_piece_is_a_limit_of_principal_points():
    gs = generator_system(ActionDescriptor.parse("un:1"))
    eps = [density_epsilon(gs, 400, lam, 10.0) for lam in (0.5, 0.1, 0.02)]
    assert eps[0] > eps[1] > eps[2]
    assert eps[2] < 0.05


def test_fan_rows_are_plain(un1):
    rows = fan_rows(enumerate_spectrum(un1, orbit_samples=2), 1)
    assert fan_header(1) == ["lambda", "xi_1", "label_kind", "alpha"]
    assert rows[1][-1] == "16.0"
    assert rows[2][-1] == "0"


def test_invalid_models():
    gs = generator_system(ActionDescriptor.parse("un:1"))
    with pytest.raises(ValueError):
        SpectrumModel(gs, 3, (1.0, -1.0))
    with pytest.raises(ValueError):
        SpectrumPoint(0.0, (1.0,), "principal", (0,))
