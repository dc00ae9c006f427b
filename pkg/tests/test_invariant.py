import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hgelfand.invariant import (ActionDescriptor, LemmaViolation, UnsupportedActionError, WordSum,
                                apply_fock, build_generator_system, fock_matrix, generator_system,
                                monomials, sublaplacian)

# closed forms of the normalized eigenvalues (label -> Vhat), frozen from the exact tables
EIGEN = {
    "un:1": lambda a: (4 * a[0] + 2,),
    "un:2": lambda a: (3 * (a[0] + 1),),
    "un:3": lambda a: (4 * a[0] + 6,),
    "tn:1": lambda a: (4 * a[0] + 2,),
    "tn:2": lambda a: tuple(2 * x + 2 * sum(a) + 3 for x in a),
    "tn:3": lambda a: tuple(2 * x + 2 * sum(a) + 4 for x in a),
}
NORMALIZATION = {"un:1": 2, "un:2": 1, "un:3": 2, "tn:1": 2, "tn:2": 2, "tn:3": 2}


@pytest.mark.parametrize("tag", sorted(EIGEN))
def test_eigentable_closed_form(tag):
    gs = generator_system(ActionDescriptor.parse(tag))
    for label in gs.action.labels_upto(8):
        vals = gs.eigenvalues(label)
        assert vals == EIGEN[tag](label)
        assert all(isinstance(v, int) and v > 0 for v in vals)


@pytest.mark.parametrize("tag", sorted(NORMALIZATION))
def test_normalization_and_convention(tag):
    gs = generator_system(ActionDescriptor.parse(tag))
    assert gs.normalization == NORMALIZATION[tag]
    assert gs.convention == "real"


@pytest.mark.parametrize("tag", ["un:2", "tn:2"])
def test_prenormalized_signs(tag):
    gs = generator_system(ActionDescriptor.parse(tag))
    for (j, _), val in gs.prenormalized.items():
        assert val != 0
        assert (val > 0) == (gs.degrees[j] % 2 == 0)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [0, 1, 4])
def test_sublaplacian_is_scalar_on_each_degree(n, m):
    M = fock_matrix(sublaplacian(n), m, n)
    for i, row in enumerate(M.entries):
        for j, x in enumerate(row):
            assert x == (Fraction(2 * m + n) if i == j else 0)


def test_rho_matrix_values():
    assert np.allclose(generator_system(ActionDescriptor.parse("un:1")).rho_matrix, [[2.0]])
    assert np.allclose(generator_system(ActionDescriptor.parse("un:2")).rho_matrix, [[1.5]])
    assert np.allclose(generator_system(ActionDescriptor.parse("tn:2")).rho_matrix, [[2, 1], [1, 2]])


@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=2))
def test_rho_is_linear_in_orbit_parameters(w):
    gs = generator_system(ActionDescriptor.parse("tn:2"))
    w = np.array(w)
    lhs = gs.rho(w)
    rhs = gs.rho_from_squares(np.abs(w) ** 2)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_squares_from_rho_inverts():
    gs = generator_system(ActionDescriptor.parse("tn:3"))
    s = np.array([[0.5, 1.0, 2.0], [0.0, 3.0, 0.1]])
    assert np.allclose(gs.squares_from_rho(gs.rho_from_squares(s)), s)


def test_affine_eigentable():
    gs = generator_system(ActionDescriptor.parse("tn:2"))
    c, B = gs.affine
    assert np.array_equal(c, [3.0, 3.0])
    assert np.array_equal(B, [[4.0, 2.0], [2.0, 4.0]])


def test_word_sum_algebra():
    a = WordSum.letter(0, 0)
    b = WordSum.letter(1, 0)
    assert (a + b) - b == a
    assert (a @ b).terms == {((0, 0), (1, 0)): Fraction(1)}
    assert a.power(0) == WordSum.identity()


def test_operators_commute_on_fock_space():
    gs = generator_system(ActionDescriptor.parse("tn:2"))
    V1, V2 = gs.operators
    poly = {((2, 1), ()): Fraction(1)}
    for e in monomials(2, 3):
        p = {e: Fraction(1)}
        assert apply_fock(V1 @ V2, p) == apply_fock(V2 @ V1, p)


def test_eigentable_json_is_exact():
    gs = build_generator_system(ActionDescriptor.parse("un:1"), 4)
    data = json.loads(gs.dumps())
    assert data["N"] == 2
    assert [row["values"] for row in data["table"]] == [[2], [6], [10], [14], [18]]
    for g in data["generators"]:
        for term in g["gamma_coeffs"]:
            assert all(isinstance(x, int) for x in term["coeff"])


@pytest.mark.parametrize("spec", ["sp:2", "un", "un:x", "xx:1"])
def test_bad_group_specs(spec):
    with pytest.raises(UnsupportedActionError):
        ActionDescriptor.parse(spec)


def test_unitary_block_dimensions():
    act = ActionDescriptor.parse("un:3")
    assert [act.dim((k,)) for k in range(4)] == [1, 3, 6, 10]
