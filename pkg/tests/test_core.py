import numpy as np
import pytest
from hypothesis import given, strategies as st

from hgelfand.core import (DifferentiabilityError, DimensionMismatch, Field, GroupPoint,
                           apply_field, apply_word, check_invariance, group_inverse, group_multiply,
                           heisenberg_gauge, multiply_arrays, parse_function, pbw_monomials,
                           schwartz_norm, NormGrid)
from hgelfand.invariant import ActionDescriptor

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def points(n):
    return st.builds(lambda t, re, im: GroupPoint(t, np.array(re) + 1j * np.array(im)),
                     finite, st.lists(finite, min_size=n, max_size=n), st.lists(finite, min_size=n, max_size=n))


def close(a: GroupPoint, b: GroupPoint, tol=1e-9):
    return abs(a.t - b.t) <= tol * (1 + abs(a.t)) and np.allclose(a.zvec, b.zvec, atol=tol)


@given(points(2), points(2), points(2))
def test_group_law_is_associative(a, b, c):
    assert close((a * b) * c, a * (b * c))


@given(points(3))
def test_inverse_and_identity(a):
    e = GroupPoint.identity(3)
    assert close(a * group_inverse(a), e)
    assert close(group_inverse(a) * a, e)
    assert close(a * e, a)


def test_group_law_values():
    p = group_multiply(GroupPoint(1.0, [1.0]), GroupPoint(2.0, [1j]))
    # Im(w conj z) / 2 with z = 1, w = i
    assert p.t == pytest.approx(3.5)
    assert p.z == (1 + 1j,)


def test_center_commutes_and_commutator_is_central():
    a, b = GroupPoint(0.3, [1.0, 2j]), GroupPoint(-1.2, [0.5 - 1j, 0.25])
    ab, ba = a * b, b * a
    assert np.allclose(ab.zvec, ba.zvec)
    assert ab.t - ba.t == pytest.approx(np.imag(np.dot(b.zvec, np.conj(a.zvec))))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        GroupPoint(0, [1]) * GroupPoint(0, [1, 2])


def test_vectorized_law_matches_scalar(rng):
    ta, tb = rng.normal(size=5), rng.normal(size=5)
    za = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    zb = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    t, z = multiply_arrays(ta, za, tb, zb)
    for i in range(5):
        p = GroupPoint(ta[i], za[i]) * GroupPoint(tb[i], zb[i])
        assert t[i] == pytest.approx(p.t) and np.allclose(z[i], p.zvec)


def test_gauge_is_homogeneous():
    t, z = 0.7, np.array([1.0 - 0.5j, 0.3j])
    assert heisenberg_gauge(4 * t, 2 * z) == pytest.approx(2 * heisenberg_gauge(t, z))


@pytest.mark.parametrize("name", ["Z1", "Zbar1", "Zb2", "T", "Z2"])
def test_fields_analytic_agree_with_finite_differences(name):
    f = parse_function("gaussian(0.5,0.7)", ActionDescriptor.parse("un:2"))
    p = GroupPoint(0.4, [0.3 + 0.2j, -0.6 + 0.1j])
    exact = apply_field(name, f, p)
    fd = apply_field(name, lambda t, z: f.analytic(t, z), p)
    assert abs(exact - fd) < 1e-7


@pytest.mark.parametrize("name", ["Z1", "Zbar2", "T"])
def test_fields_are_left_invariant(name):
    f = parse_function("hermite-gaussian(1,0.5,0.4)", ActionDescriptor.parse("tn:2"))
    g = GroupPoint(0.8, [0.5 - 0.3j, 0.2 + 0.9j])
    p = GroupPoint(-0.2, [0.1 + 0.4j, -0.7j])

    def left_translate(t, z):
        tt, zz = multiply_arrays(g.t, g.zvec, t, z)
        return f.analytic(tt, zz)

    assert abs(apply_field(name, left_translate, p) - apply_field(name, f, g * p)) < 1e-7


def test_bracket_of_holomorphic_and_antiholomorphic_fields():
    f = parse_function("hermite-gaussian(1,0.5,0.4)", ActionDescriptor.parse("un:1"))
    t, z = np.array(0.3), np.array([0.4 - 0.2j])
    bracket = apply_word(["Z1", "Zbar1"], f, t, z) - apply_word(["Zbar1", "Z1"], f, t, z)
    assert abs(bracket - 0.5j * apply_word(["T"], f, t, z)) < 1e-12


def test_finite_differences_limited_to_order_two():
    def g(t, z):
        return np.exp(-t ** 2 - np.sum(np.abs(z) ** 2, axis=-1))

    with pytest.raises(DifferentiabilityError):
        apply_word(["T", "T", "T"], g, np.array(0.0), np.array([0.1]))


def test_field_index_checked():
    f = parse_function("gaussian(1,1)", ActionDescriptor.parse("un:1"))
    with pytest.raises(IndexError):
        apply_field("Z2", f, GroupPoint(0, [0.1]))


@pytest.mark.parametrize("spec, name", [
    ("gaussian(1,1)", "gaussian(1.0,1.0)"),
    ("hermite-gaussian(2,1,0.5)", "hermite-gaussian(2,1.0,0.5)"),
    ("laguerre-mode(1)", "laguerre-mode(1,0)"),
    ("zero", "zero"),
])
def test_parse_function(spec, name):
    f = parse_function(spec, ActionDescriptor.parse("tn:2"))
    assert f.name == name


@pytest.mark.parametrize("spec", ["gauss(1)", "gaussian(-1,1)", "laguerre-mode(1,2,3)", "nonsense"])
def test_parse_function_rejects(spec):
    with pytest.raises(ValueError):
        parse_function(spec, ActionDescriptor.parse("tn:2"))


@pytest.mark.parametrize("spec", ["gaussian(1,1)", "hermite-gaussian(1,1,2)", "laguerre-mode(2)"])
@pytest.mark.parametrize("tag", ["un:2", "tn:2"])
def test_families_are_invariant(spec, tag, rng):
    assert check_invariance(parse_function(spec, ActionDescriptor.parse(tag)), rng) < 1e-12


def test_profile_matches_analytic(rng):
    f = parse_function("laguerre-mode(1,2)", ActionDescriptor.parse("tn:2"))
    t = rng.normal(size=7)
    z = rng.normal(size=(7, 2)) + 1j * rng.normal(size=(7, 2))
    assert np.allclose(f(t, z), f.analytic(t, z), atol=1e-13)


def test_dilation_and_permutation():
    f = parse_function("hermite-gaussian(1,1,0.5)", ActionDescriptor.parse("tn:2"))
    t, z = np.array(0.3), np.array([0.2 + 0.1j, 1.0])
    assert f.dilated(2.0)(t, z) == pytest.approx(f(4 * t, 2 * z))
    assert f.permuted((1, 0))(t, z) == pytest.approx(f(t, z[::-1]))
    assert f.permuted((1, 0)).analytic(t, z) == pytest.approx(f(t, z[::-1]))


def test_pbw_monomial_count():
    # n = 1, weighted degree <= 2: 1, Z, Zb, ZZ, ZZb, ZbZb, T
    assert len(pbw_monomials(1, 2)) == 7


def test_schwartz_norm_of_gaussian_order_zero():
    f = parse_function("gaussian(1,1)", ActionDescriptor.parse("un:1"))
    assert schwartz_norm(f, 0, NormGrid(points=65)) == pytest.approx(1.0)
    assert schwartz_norm(f, 2, NormGrid(points=65)) > 1.0
