import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import central_difference
from hktlab.errors import JetDomainError, SingularPointError, UnsupportedOrderError
from hktlab.jets import (
    Jet,
    ScalarField,
    contract,
    coordinate_jet,
    inverse,
    jet_arith,
    jet_func,
    jet_lift,
    sample_points,
)

coords = arrays(np.float64, 4, elements=st.floats(0.3, 1.7)).map(lambda a: a * np.array([1, -1, 1, -1]))


def composite(X: Jet) -> Jet:
    r2 = contract("a,a->", X, X)
    return (X[0] * X[1]).exp() * r2.log() / (1.0 + X[2] * X[2]).sqrt() + X[3] ** 3 * r2.recip()


def composite_value(x: np.ndarray) -> float:
    r2 = x @ x
    return np.exp(x[0] * x[1]) * np.log(r2) / np.sqrt(1 + x[2] ** 2) + x[3] ** 3 / r2


@given(coords)
def test_derivatives_match_finite_differences(x):
    j = composite(coordinate_jet(x, 3))
    assert j.value == pytest.approx(composite_value(x), rel=1e-12)
    grad = central_difference(composite_value, x)
    np.testing.assert_allclose(j.grad, grad, rtol=1e-6, atol=1e-7)
    hess = central_difference(lambda y: composite(coordinate_jet(y, 1)).grad, x)
    np.testing.assert_allclose(j.hess, hess, rtol=1e-6, atol=1e-7)
    third = central_difference(lambda y: composite(coordinate_jet(y, 2)).hess, x)
    np.testing.assert_allclose(j.third, third, rtol=1e-6, atol=1e-6)


@given(coords)
def test_derivative_slots_are_symmetric(x):
    j = composite(coordinate_jet(x, 3))
    np.testing.assert_allclose(j.hess, j.hess.T, atol=1e-12)
    for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
        np.testing.assert_allclose(j.third, j.third.transpose(perm), atol=1e-11)


@given(coords, st.integers(0, 2))
def test_truncation_commutes_with_evaluation(x, p):
    high = composite(coordinate_jet(x, 3)).truncate(p)
    low = composite(coordinate_jet(x, p))
    for a, b in zip(high.coeffs, low.coeffs):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


@given(coords)
def test_matrix_inverse_jet(x):
    X = coordinate_jet(x, 3)
    r2 = contract("a,a->", X, X)
    g = contract("ab,->ab", np.eye(4), r2) + contract("a,b->ab", X, X)
    h = inverse(g)
    prod = contract("ab,bc->ac", g, h)
    np.testing.assert_allclose(prod.value, np.eye(4), atol=1e-12)
    for c in prod.coeffs[1:]:
        np.testing.assert_allclose(c, 0, atol=1e-10)


def test_d_lowers_order_and_moves_slot():
    X = coordinate_jet(np.array([1.0, 2.0, 3.0, 4.0]), 2)
    f = X[0] * X[1] * X[1]
    df = f.d()
    assert df.order == 1
    np.testing.assert_allclose(df.value, [4.0, 4.0, 0.0, 0.0])


def test_jet_lift_picks_one_coordinate():
    x = np.array([0.5, -1.0, 2.0, 3.0])
    j = jet_lift(x, 2, 2)
    assert j.value == 2.0
    np.testing.assert_array_equal(j.grad, [0, 0, 1, 0])
    with pytest.raises(IndexError):
        jet_lift(x, 4, 1)


def test_arith_and_func_dispatch():
    X = coordinate_jet(np.array([1.0, 2.0, 0.5, 1.5]), 2)
    a, b = X[0], X[1]
    assert jet_arith(a, b, "div").value == 0.5
    assert jet_func(b, "pow", 3).value == 8.0
    with pytest.raises(ValueError):
        jet_arith(a, b, "mod")
    with pytest.raises(ValueError):
        jet_func(a, "tan")


def test_domain_errors():
    X = coordinate_jet(np.array([0.0, -1.0, 1.0, 1.0]), 2)
    with pytest.raises(SingularPointError):
        X[0].recip()
    with pytest.raises(JetDomainError):
        X[1].log()
    with pytest.raises(JetDomainError):
        X[1].sqrt()
    with pytest.raises(UnsupportedOrderError):
        coordinate_jet(np.zeros(4), 4)
    with pytest.raises(UnsupportedOrderError):
        X.truncate(3)


def test_complex_scalar_field():
    f = ScalarField(lambda X: (X[0] + 1j * X[1]) ** 2, is_complex=True)
    j = f.at([1.0, 2.0, 0.0, 0.0], 1)
    assert j.value == pytest.approx((1 + 2j) ** 2)
    assert j.grad[1] == pytest.approx(2j * (1 + 2j))


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_sample_points_deterministic_and_in_box(seed, n):
    a = sample_points(4 * n, 7, seed)
    b = sample_points(4 * n, 7, seed)
    np.testing.assert_array_equal(a, b)
    assert np.all((np.abs(a) >= 0.5) & (np.abs(a) <= 1.5))


def test_sample_points_rejects_bad_box():
    with pytest.raises(ValueError):
        sample_points(4, 3, box=(0.0, 1.0))
