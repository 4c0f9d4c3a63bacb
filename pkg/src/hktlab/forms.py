"""Alternating forms, tensor fields and their calculus on a coordinate chart.

Forms are carried as jets whose component axes are all of length ``dim`` and
fully antisymmetric; ``omega.coeffs[0][i1, ..., ik]`` is ``omega(e_i1, ..., e_ik)``.
Wedge products follow the determinant convention

    (a1 ^ ... ^ ak)(X1, ..., Xk) = det(a_i(X_j)),

so for 1-forms ``a ^ b = a (x) b - b (x) a`` with no factorial normalisation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DegenerateMetricError
from .jets import LETTERS, Jet, as_point, contract, coordinate_jet, inverse

MAX_DEGREE = 4


# -- point values -------------------------------------------------------------------


class FormValue:
    """A k-form at a point, stored by its values on sorted basis tuples."""

    __slots__ = ("degree", "dim", "coeffs")

    def __init__(self, degree: int, dim: int, coeffs):
        self.degree = int(degree)
        self.dim = int(dim)
        coeffs = np.asarray(coeffs)
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        if coeffs.shape != (math.comb(dim, degree),):
            raise ValueError(f"expected {math.comb(dim, degree)} coefficients, got {coeffs.shape}")
        self.coeffs = coeffs

    @classmethod
    def from_dense(cls, dense) -> "FormValue":
        dense = np.asarray(dense)
        k = dense.ndim
        dim = dense.shape[0] if k else 0
        idx = multi_indices(dim, k)
        if k == 0:
            return cls(0, 0, dense.reshape(1))
        return cls(k, dim, dense[tuple(idx.T)])

    @classmethod
    def from_jet(cls, jet: Jet) -> "FormValue":
        form = cls.from_dense(jet.value)
        if form.degree == 0:
            form.dim = jet.dim
        return form

    @property
    def dense(self) -> np.ndarray:
        k, d = self.degree, self.dim
        if k == 0:
            return self.coeffs.reshape(())
        out = np.zeros((d,) * k, dtype=self.coeffs.dtype)
        for row, val in zip(multi_indices(d, k), self.coeffs):
            for perm, sign in _kernels.signed_permutations(k):
                out[tuple(row[list(perm)])] = sign * val
        return out

    def as_jet(self) -> Jet:
        return Jet.constant(self.dense, self.dim, 0)

    def __call__(self, *vectors) -> complex | float:
        if len(vectors) != self.degree:
            raise ValueError(f"{self.degree}-form evaluated on {len(vectors)} vectors")
        out = self.dense
        for v in vectors:
            out = np.tensordot(np.asarray(v), out, axes=([0], [0]))
        return out[()]

    def __getitem__(self, index) -> float:
        """Component on an arbitrary (unsorted) index tuple."""
        index = tuple(index) if np.ndim(index) else (index,)
        return self.dense[index]

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def _binary(self, other, op):
        if not isinstance(other, FormValue) or (other.degree, other.dim) != (self.degree, self.dim):
            raise ValueError("forms of different degree or dimension")
        return FormValue(self.degree, self.dim, op(self.coeffs, other.coeffs))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return FormValue(self.degree, self.dim, -self.coeffs)

    def __mul__(self, s):
        return FormValue(self.degree, self.dim, self.coeffs * s)

    __rmul__ = __mul__

    def __repr__(self):
        return f"FormValue(degree={self.degree}, dim={self.dim}, coeffs={self.coeffs!r})"


def multi_indices(dim: int, k: int) -> np.ndarray:
    """Strictly increasing index tuples in lexicographic order, shape (C(dim,k), k)."""
    rows = list(itertools.combinations(range(dim), k))
    return np.array(rows, dtype=np.int64).reshape(len(rows), k)


@dataclass(frozen=True)
class TensorFieldValue:
    """Dense tensor at a point; ``kind`` fixes covariant/contravariant ranks."""

    kind: str
    coeffs: np.ndarray

    RANKS = {"scalar": (0, 0), "covector": (1, 0), "metric": (2, 0), "endomorphism": (1, 1), "vector": (0, 1)}

    @property
    def ranks(self) -> tuple[int, int]:
        return self.RANKS[self.kind]


# -- fields ------------------------------------------------------------------------------


@dataclass(frozen=True)
class FormField:
    degree: int
    fn: Callable[[Jet], Jet]

    def __call__(self, X: Jet) -> Jet:
        return self.fn(X)

    def at(self, x, order: int = 0) -> Jet:
        return self.fn(coordinate_jet(as_point(x), order))


@dataclass(frozen=True)
class TensorField:
    """Tensor field of a given role: metric (0,2), endomorphism (1,1), vector, covector."""

    kind: str
    fn: Callable[[Jet], Jet]

    def __call__(self, X: Jet) -> Jet:
        return self.fn(X)

    def at(self, x, order: int = 0) -> Jet:
        return self.fn(coordinate_jet(as_point(x), order))


def VectorField(fn: Callable[[Jet], Jet]) -> TensorField:
    return TensorField("vector", fn)


def constant_tensor(kind: str, value) -> TensorField:
    value = np.asarray(value, dtype=float)
    return TensorField(kind, lambda X: Jet.constant(value, X.dim, X.order))


def zero_form(degree: int) -> FormField:
    return FormField(degree, lambda X: Jet.constant(np.zeros((X.dim,) * degree), X.dim, X.order))


# -- jet-level exterior calculus ---------------------------------------------------------


def _letters(k: int, start: int = 0) -> str:
    return LETTERS[start : start + k]


def wedge(a: Jet, b: Jet) -> Jet:
    """Wedge product of two form jets (determinant convention)."""
    k, l = a.ndim, b.ndim
    if k + l > a.dim:
        raise ValueError(f"wedge of degrees {k}+{l} exceeds dimension {a.dim}")
    if k == 0 or l == 0:
        return a * b if k == 0 else b * a
    sa, sb = _letters(k), _letters(l, k)
    prod = contract(f"{sa},{sb}->{sa}{sb}", a, b)
    return _alternate(prod, k + l, math.factorial(k) * math.factorial(l))


def wedge_all(*forms: Jet) -> Jet:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def _alternate(t: Jet, k: int, divisor: int) -> Jet:
    return Jet([_kernels.alt_sum(c, k) / divisor for c in t.coeffs], t.dim)


def exterior_d(omega: Jet) -> Jet:
    """Exterior derivative of a form jet; the result has one order less."""
    k = omega.ndim
    if k + 1 > MAX_DEGREE + 1:
        raise ValueError("degree exceeds supported range")
    grad = omega.d()  # component axes (form..., deriv)
    moved = grad.transpose((k,) + tuple(range(k)))
    return _alternate(moved, k + 1, math.factorial(k))


def interior(V: Jet, omega: Jet) -> Jet:
    """Contraction of a vector jet into the first slot of a form jet."""
    k = omega.ndim
    if k == 0:
        raise ValueError("interior product of a 0-form")
    rest = _letters(k - 1, 1)
    return contract(f"a,a{rest}->{rest}", V, omega)


def insert(omega: Jet, *vectors: Jet | np.ndarray) -> Jet:
    """Evaluate a form (or any covariant tensor) jet on vectors, slot by slot."""
    out = omega
    for v in vectors:
        k = out.ndim
        rest = _letters(k - 1, 1)
        out = contract(f"a,a{rest}->{rest}", v, out) if isinstance(v, Jet) else contract(f"a{rest},a->{rest}", out, v)
    return out


def lie_form(V: Jet, omega: Jet) -> Jet:
    """Lie derivative of a form by Cartan's formula ``i_V d omega + d i_V omega``."""
    if omega.ndim == 0:
        return contract("a,a->", V, omega.d())
    return interior(V, exterior_d(omega)) + exterior_d(interior(V, omega))


def lie_tensor(V: Jet, T: Jet, kind: str) -> Jet:
    """Coordinate Lie derivative ``L_V T`` for the supported tensor roles."""
    dV = V.d()  # dV[a, c] = d_c V^a
    dT = T.d()
    if kind == "scalar":
        return contract("c,c->", V, dT)
    if kind == "covector":
        return contract("c,ac->a", V, dT) + contract("c,ca->a", T, dV)
    if kind == "metric":
        return contract("c,abc->ab", V, dT) + contract("cb,ca->ab", T, dV) + contract("ac,cb->ab", T, dV)
    if kind == "endomorphism":
        return contract("c,abc->ab", V, dT) - contract("cb,ac->ab", T, dV) + contract("ac,cb->ab", T, dV)
    if kind == "vector":
        return contract("c,ac->a", V, dT) - contract("c,ac->a", T, dV)
    raise NotImplementedError(f"Lie derivative of a {kind!r} tensor")


def bracket(V: Jet, W: Jet) -> Jet:
    return lie_tensor(V, W, "vector")


def raise_index(ginv: Jet | np.ndarray, alpha: Jet) -> Jet:
    return contract("ab,b->a", ginv, alpha)


def lower_index(g: Jet | np.ndarray, V: Jet) -> Jet:
    return contract("ab,b->a", g, V)


def form_norm_sq(ginv: np.ndarray, omega: np.ndarray) -> float:
    """``|omega|^2 = (1/k!) omega_{a..} omega_{b..} g^{ab}...`` at a point."""
    k = omega.ndim
    raised = omega
    for slot in range(k):
        raised = np.moveaxis(np.tensordot(ginv, raised, axes=([1], [slot])), 0, slot)
    return float(np.real(np.sum(np.conj(omega) * raised))) / math.factorial(k)


# -- point-level operations ---------------------------------------------------------------


def _jet_of(x) -> Jet:
    if isinstance(x, FormValue):
        return x.as_jet()
    if isinstance(x, Jet):
        return x
    arr = np.asarray(x)
    return Jet.constant(arr, arr.shape[0] if arr.ndim else 0, 0)


def wedge_values(a: FormValue, b: FormValue) -> FormValue:
    if a.dim != b.dim and a.degree and b.degree:
        raise ValueError("dimension mismatch")
    return FormValue.from_jet(wedge(_jet_of(a), _jet_of(b)))


def interior_product(V, omega: FormValue) -> FormValue:
    if omega.degree == 0:
        raise ValueError("interior product of a 0-form")
    V = np.asarray(V)
    out = interior(Jet.constant(V, omega.dim, 0), omega.as_jet())
    form = FormValue.from_jet(out)
    form.dim = omega.dim
    return form


def exterior_derivative(omega: FormField, x) -> FormValue:
    x = as_point(x)
    out = FormValue.from_jet(exterior_d(omega(coordinate_jet(x, 1))))
    return out


def lie_derivative_form(V: TensorField, omega: FormField, x) -> FormValue:
    X = coordinate_jet(as_point(x), 1)
    out = FormValue.from_jet(lie_form(V(X), omega(X)))
    out.dim = X.dim
    return out


def lie_derivative_tensor(V: TensorField, T: TensorField, x) -> TensorFieldValue:
    X = coordinate_jet(as_point(x), 1)
    return TensorFieldValue(T.kind, lie_tensor(V(X), T(X), T.kind).value)


def _metric_inverse(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    return inverse(Jet.constant(g, g.shape[0], 0)).value


def sharp(g, alpha) -> np.ndarray:
    alpha = alpha.dense if isinstance(alpha, FormValue) else np.asarray(alpha)
    return _metric_inverse(g) @ alpha


def flat(g, V) -> np.ndarray:
    return np.asarray(g) @ np.asarray(V)


def norm_sq(g, obj, *, covector: bool | None = None) -> float:
    """Squared length of a 1-form (``FormValue``) or a vector (plain array).

    For a raw array pass ``covector=True`` to treat it as a 1-form.
    """
    if isinstance(obj, FormValue):
        a = obj.dense
        return float(a @ sharp(g, a))
    v = np.asarray(obj)
    if covector:
        return float(v @ sharp(g, v))
    return float(v @ np.asarray(g) @ v)


def check_metric(g: np.ndarray, *, tol: float = 1e-10) -> None:
    if not np.allclose(g, g.T, atol=tol):
        raise DegenerateMetricError("metric is not symmetric")
    _metric_inverse(g)
