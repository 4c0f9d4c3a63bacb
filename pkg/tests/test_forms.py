import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hktlab.forms import (
    FormField,
    FormValue,
    exterior_d,
    flat,
    form_norm_sq,
    interior,
    lie_form,
    lie_tensor,
    bracket,
    norm_sq,
    sharp,
    wedge,
    wedge_values,
)
from hktlab.jets import Jet, contract, coordinate_jet

DIM = 4
seeds = st.integers(0, 2**32 - 1)
points = arrays(np.float64, DIM, elements=st.floats(0.4, 1.4))


def perm_sign(p) -> int:
    return -1 if sum(p[i] > p[j] for i in range(len(p)) for j in range(i + 1, len(p))) % 2 else 1


def random_form(rng, k: int, dim: int = DIM) -> np.ndarray:
    t = rng.normal(size=(dim,) * k)
    out = np.zeros_like(t)
    for p in itertools.permutations(range(k)):
        out += perm_sign(p) * t.transpose(p)
    return out / math.factorial(k)


def shuffle_wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Brute-force determinant-convention wedge: sum over all permutations of slots."""
    k, l = a.ndim, b.ndim
    out = np.zeros((a.shape[0],) * (k + l))
    for idx in itertools.product(range(a.shape[0]), repeat=k + l):
        acc = 0.0
        for p in itertools.permutations(range(k + l)):
            j = [idx[i] for i in p]
            acc += perm_sign(p) * a[tuple(j[:k])] * b[tuple(j[k:])]
        out[idx] = acc / (math.factorial(k) * math.factorial(l))
    return out


def const(a: np.ndarray) -> Jet:
    return Jet.constant(a, DIM, 0)


@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_wedge_matches_shuffle_oracle(seed, k, l):
    rng = np.random.default_rng(seed)
    a, b = random_form(rng, k), random_form(rng, l)
    np.testing.assert_allclose(wedge(const(a), const(b)).value, shuffle_wedge(a, b), atol=1e-12)


@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_wedge_graded_commutative(seed, k, l):
    rng = np.random.default_rng(seed)
    a, b = const(random_form(rng, k)), const(random_form(rng, l))
    np.testing.assert_allclose(wedge(a, b).value, (-1) ** (k * l) * wedge(b, a).value, atol=1e-12)


@given(seeds)
def test_wedge_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (const(random_form(rng, 1)) for _ in range(3))
    np.testing.assert_allclose(wedge(wedge(a, b), c).value, wedge(a, wedge(b, c)).value, atol=1e-12)


def test_one_form_wedge_is_determinant():
    e = np.eye(DIM)
    w = wedge(const(e[0]), const(e[1])).value
    assert w[0, 1] == 1.0 and w[1, 0] == -1.0


# a 2-form field with nonlinear coefficients, in jet and plain numpy versions
K = np.array([[0.0, 1.0, 0.5, 0.0], [0.0, 0.0, 2.0, -1.0], [1.0, 0.0, 0.0, 1.0], [0.3, 0.0, 0.0, 0.0]])
M = np.array([[0.0, 1.0, -2.0, 0.5], [-1.0, 0.0, 0.0, 1.5], [2.0, 0.0, 0.0, 1.0], [-0.5, -1.5, -1.0, 0.0]])


def two_form(X: Jet) -> Jet:
    KX = contract("ab,b->a", K, X)
    return contract("ab,->ab", M, (X[0] * X[1]).exp()) + wedge(X, KX) * contract("a,a->", X, X).recip()


def two_form_np(x: np.ndarray) -> np.ndarray:
    kx = K @ x
    return M * np.exp(x[0] * x[1]) + (np.outer(x, kx) - np.outer(kx, x)) / (x @ x)


def one_form(X: Jet) -> Jet:
    return contract("ab,b->a", K, X) * (X[2] * X[3]).exp()


@given(points)
def test_two_form_field_value(x):
    np.testing.assert_allclose(two_form(coordinate_jet(x, 0)).value, two_form_np(x), atol=1e-12)


@given(points)
def test_d_squared_vanishes(x):
    X = coordinate_jet(x, 3)
    for omega in (one_form(X), two_form(X)):
        np.testing.assert_allclose(exterior_d(exterior_d(omega)).value, 0, atol=1e-10)


@given(points)
def test_leibniz_rule(x):
    X = coordinate_jet(x, 2)
    a, b = one_form(X), two_form(X)
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b.truncate(1)) - wedge(a.truncate(1), exterior_d(b))
    np.testing.assert_allclose(lhs.value, rhs.value, atol=1e-10)


@given(points)
def test_exterior_d_of_differential_is_zero(x):
    X = coordinate_jet(x, 2)
    f = (X[0] * X[3]).exp() + X[1] * X[2] * X[2]
    np.testing.assert_allclose(exterior_d(f.d()).value, 0, atol=1e-12)


# linear vector field V(x) = A x with explicit flow expm(tA)
A = np.array([[0.1, -0.7, 0.2, 0.0], [0.7, 0.0, 0.0, 0.3], [0.0, 0.4, -0.2, 0.0], [-0.3, 0.0, 0.5, 0.1]])


def expm(B: np.ndarray) -> np.ndarray:
    out, term = np.eye(len(B)), np.eye(len(B))
    for k in range(1, 30):
        term = term @ B / k
        out = out + term
    return out


def flow_derivative(pullback, x, h=1e-4):
    return (pullback(x, expm(h * A)) - pullback(x, expm(-h * A))) / (2 * h)


def V_jet(X: Jet) -> Jet:
    return contract("ab,b->a", A, X)


@given(points)
def test_cartan_formula_matches_flow(x):
    X = coordinate_jet(x, 1)
    jet = lie_form(V_jet(X), two_form(X)).value
    pull = lambda y, P: P.T @ two_form_np(P @ y) @ P
    np.testing.assert_allclose(jet, flow_derivative(pull, x), rtol=1e-6, atol=1e-7)


def metric_np(x):
    return np.eye(DIM) * (1 + x @ x) + np.outer(x, x)


def metric_jet(X: Jet) -> Jet:
    return contract("ab,->ab", np.eye(DIM), 1.0 + contract("a,a->", X, X)) + contract("a,b->ab", X, X)


@given(points)
def test_lie_derivative_of_metric_matches_flow(x):
    X = coordinate_jet(x, 1)
    jet = lie_tensor(V_jet(X), metric_jet(X), "metric").value
    pull = lambda y, P: P.T @ metric_np(P @ y) @ P
    np.testing.assert_allclose(jet, flow_derivative(pull, x), rtol=1e-6, atol=1e-7)


@given(points)
def test_lie_derivative_of_endomorphism_matches_flow(x):
    X = coordinate_jet(x, 1)
    T = lambda y: np.outer(y, K @ y) + np.diag(y)
    T_jet = contract("a,b->ab", X, contract("ab,b->a", K, X)) + contract("ab,b->ab", np.eye(DIM), X)
    jet = lie_tensor(V_jet(X), T_jet, "endomorphism").value
    pull = lambda y, P: np.linalg.solve(P, T(P @ y) @ P)
    np.testing.assert_allclose(jet, flow_derivative(pull, x), rtol=1e-6, atol=1e-7)


@given(points)
def test_bracket_antisymmetric_and_jacobi(x):
    X = coordinate_jet(x, 2)
    U = V_jet(X)
    W = contract("a,->a", X, X[0] * X[1])
    Z = one_form(X)
    np.testing.assert_allclose(bracket(U, W).value, -bracket(W, U).value, atol=1e-12)
    jac = bracket(bracket(U, W), Z) + bracket(bracket(W, Z), U) + bracket(bracket(Z, U), W)
    np.testing.assert_allclose(jac.value, 0, atol=1e-10)


@given(points)
def test_interior_is_antiderivation(x):
    X = coordinate_jet(x, 0)
    V = V_jet(X)
    a, b = one_form(X), two_form(X)
    lhs = interior(V, wedge(a, b))
    rhs = interior(V, a) * b - wedge(a, interior(V, b))
    np.testing.assert_allclose(lhs.value, rhs.value, atol=1e-12)


@given(seeds)
def test_sharp_flat_inverse(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(DIM, DIM))
    g = B @ B.T + DIM * np.eye(DIM)
    v = rng.normal(size=DIM)
    np.testing.assert_allclose(sharp(g, flat(g, v)), v, rtol=1e-10)
    assert norm_sq(g, v) == pytest.approx(norm_sq(g, flat(g, v), covector=True), rel=1e-10)


def test_form_norm_of_orthonormal_wedge_is_one():
    e = np.eye(DIM)
    w = wedge(wedge(const(e[0]), const(e[1])), const(e[2])).value
    assert form_norm_sq(np.eye(DIM), w) == pytest.approx(1.0)


@given(seeds, st.integers(1, 3))
def test_form_value_roundtrip(seed, k):
    dense = random_form(np.random.default_rng(seed), k)
    fv = FormValue.from_dense(dense)
    np.testing.assert_allclose(fv.dense, dense, atol=1e-14)
    vs = np.eye(DIM)[:k]
    assert fv(*vs) == pytest.approx(dense[tuple(range(k))])


def test_wedge_values_and_errors():
    e = np.eye(DIM)
    w = wedge_values(FormValue.from_dense(e[0]), FormValue.from_dense(e[1]))
    assert w[0, 1] == 1.0
    with pytest.raises(ValueError):
        FormValue(2, 4, np.zeros(5))
    with pytest.raises(ValueError):
        wedge(const(random_form(np.random.default_rng(0), 3)), const(random_form(np.random.default_rng(1), 2)))
    assert isinstance(FormField(2, two_form).at(np.ones(4), 1), Jet)
