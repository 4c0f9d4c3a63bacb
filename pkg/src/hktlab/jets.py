"""Dense forward-mode jets: truncated Taylor data of tensor-valued fields.

A :class:`Jet` of order ``p`` over ``dim`` variables stores the value of a
tensor field at a point together with all of its partial derivatives up to
order ``p``.  Coefficient ``k`` has shape ``component_shape + (dim,) * k``;
the trailing ``k`` axes are derivative slots and are symmetric.

Fields are plain callables taking the *coordinate jet* ``X`` (see
:func:`coordinate_jet`) and returning a jet built from it by arithmetic.
Evaluating a field on a coordinate jet of order ``p`` therefore yields its
exact derivatives to order ``p``.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegenerateMetricError,
    JetDomainError,
    SingularPointError,
    UnsupportedOrderError,
)

MAX_ORDER = 3
# einsum letters reserved for derivative slots; component subscripts use lowercase
_DSLOTS = "UVW"
DEFAULT_BOX = (0.5, 1.5)


class Jet:
    """Truncated Taylor data ``(value, grad, hess, third)`` of a tensor field."""

    __slots__ = ("coeffs", "dim")
    __array_priority__ = 100

    def __init__(self, coeffs: Sequence[np.ndarray], dim: int):
        coeffs = tuple(np.asarray(c) for c in coeffs)
        if not 1 <= len(coeffs) <= MAX_ORDER + 1:
            raise UnsupportedOrderError(f"jet order {len(coeffs) - 1} not in 0..{MAX_ORDER}")
        self.coeffs = coeffs
        self.dim = int(dim)

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, dim: int, order: int) -> "Jet":
        _check_order(order)
        value = np.asarray(value)
        if value.dtype.kind not in "fc":
            value = value.astype(float)
        coeffs = [value] + [np.zeros(value.shape + (dim,) * k, dtype=value.dtype) for k in range(1, order + 1)]
        return cls(coeffs, dim)

    @classmethod
    def stack(cls, jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        jets = [_promote(j) for j in jets]
        order = min(j.order for j in jets)
        dim = jets[0].dim
        return cls([np.stack([j.coeffs[k] for j in jets], axis=axis) for k in range(order + 1)], dim)

    @classmethod
    def concatenate(cls, jets: Sequence["Jet"]) -> "Jet":
        """Concatenate along the first component axis."""
        order = min(j.order for j in jets)
        return cls([np.concatenate([j.coeffs[k] for j in jets], axis=0) for k in range(order + 1)], jets[0].dim)

    @classmethod
    def block_diag(cls, a: "Jet", b: "Jet") -> "Jet":
        """Block-diagonal assembly of two rank-2 component jets."""
        order = min(a.order, b.order)
        (m1, n1), (m2, n2) = a.shape, b.shape
        dtype = np.result_type(a.dtype, b.dtype)
        out = []
        for k in range(order + 1):
            c = np.zeros((m1 + m2, n1 + n2) + (a.dim,) * k, dtype=dtype)
            c[:m1, :n1] = a.coeffs[k]
            c[m1:, n1:] = b.coeffs[k]
            out.append(c)
        return cls(out, a.dim)

    # -- introspection --------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def shape(self) -> tuple:
        return self.coeffs[0].shape

    @property
    def ndim(self) -> int:
        return self.coeffs[0].ndim

    @property
    def dtype(self):
        return self.coeffs[0].dtype

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def grad(self) -> np.ndarray:
        return self.coeffs[1]

    @property
    def hess(self) -> np.ndarray:
        return self.coeffs[2]

    @property
    def third(self) -> np.ndarray:
        return self.coeffs[3]

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order}, dim={self.dim}, dtype={self.dtype})"

    # -- structural -----------------------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise UnsupportedOrderError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.coeffs[: order + 1], self.dim)

    def d(self) -> "Jet":
        """Jet of the partial derivatives, one order lower.

        The new component axis (appended last) indexes the differentiation
        variable.
        """
        if self.order == 0:
            raise UnsupportedOrderError("order-0 jet carries no derivative data")
        return Jet(self.coeffs[1:], self.dim)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("ellipsis indexing is ambiguous on jets")
        return Jet([c[idx] for c in self.coeffs], self.dim)

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        n = self.ndim
        axes = axes or tuple(reversed(range(n)))
        return Jet([c.transpose(tuple(axes) + tuple(range(n, n + k))) for k, c in enumerate(self.coeffs)], self.dim)

    def sum(self, axis: int = 0) -> "Jet":
        if axis < 0:
            axis += self.ndim
        return Jet([c.sum(axis=axis) for c in self.coeffs], self.dim)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet([c.reshape(tuple(shape) + (self.dim,) * k) for k, c in enumerate(self.coeffs)], self.dim)

    @property
    def real(self) -> "Jet":
        return Jet([c.real for c in self.coeffs], self.dim)

    @property
    def imag(self) -> "Jet":
        return Jet([c.imag for c in self.coeffs], self.dim)

    def conj(self) -> "Jet":
        return Jet([np.conj(c) for c in self.coeffs], self.dim)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(c)) for c in self.coeffs)

    # -- arithmetic -------------------------------------------------------------
    def __neg__(self):
        return Jet([-c for c in self.coeffs], self.dim)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            _check_dims(self, other)
            order = min(self.order, other.order)
            return Jet([self.coeffs[k] + other.coeffs[k] for k in range(order + 1)], self.dim)
        other = np.asarray(other)
        coeffs = list(self.coeffs)
        coeffs[0] = coeffs[0] + other
        shape = coeffs[0].shape
        return Jet([coeffs[0]] + [np.broadcast_to(c, shape + c.shape[self.ndim:]) for c in coeffs[1:]], self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return contract("...,...->...", self, other)
        other = np.asarray(other)
        return Jet([_scale(c, other, self.ndim) for c in self.coeffs], self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.recip()
        other = np.asarray(other)
        if np.any(other == 0):
            raise SingularPointError("division of a jet by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.recip() * other

    def __pow__(self, k):
        return power(self, k)

    # -- elementwise functions --------------------------------------------------
    def recip(self) -> "Jet":
        return recip(self)

    def exp(self) -> "Jet":
        return exp(self)

    def log(self) -> "Jet":
        return log(self)

    def sqrt(self) -> "Jet":
        return sqrt(self)


def _check_order(order: int) -> None:
    if not 0 <= order <= MAX_ORDER:
        raise UnsupportedOrderError(f"jet order {order} not in 0..{MAX_ORDER}")


def _check_dims(a: Jet, b: Jet) -> None:
    if a.dim != b.dim:
        raise ValueError(f"jets over different variable counts ({a.dim} vs {b.dim})")


def _promote(j) -> Jet:
    if not isinstance(j, Jet):
        raise TypeError(f"expected Jet, got {type(j).__name__}")
    return j


def _scale(c: np.ndarray, s: np.ndarray, ncomp: int) -> np.ndarray:
    # broadcast a component-shaped constant over trailing derivative axes
    if s.ndim == 0:
        return c * s
    extra = c.ndim - ncomp
    return c * s.reshape(s.shape + (1,) * extra)


# -- multilinear products ---------------------------------------------------------


def contract(spec: str, a, b=None) -> Jet:
    """einsum over component axes, propagating derivatives by the Leibniz rule.

    ``spec`` uses lowercase letters (or ``...``) for component axes only;
    derivative slots are appended automatically.  At most two operands may be
    jets; plain arrays are treated as constants.
    """
    ins, out = spec.replace(" ", "").split("->")
    if b is None:
        (sa,) = ins.split(",")
        return _linear(sa, out, a)
    sa, sb = ins.split(",")
    a_jet, b_jet = isinstance(a, Jet), isinstance(b, Jet)
    if a_jet and b_jet:
        _check_dims(a, b)
        return _leibniz(sa, sb, out, a, b)
    if a_jet:
        const = np.asarray(b)
        return Jet([np.einsum(f"{sa}{_DSLOTS[:k]},{sb}->{out}{_DSLOTS[:k]}", c, const) for k, c in enumerate(a.coeffs)], a.dim)
    if b_jet:
        const = np.asarray(a)
        return Jet([np.einsum(f"{sa},{sb}{_DSLOTS[:k]}->{out}{_DSLOTS[:k]}", const, c) for k, c in enumerate(b.coeffs)], b.dim)
    return np.einsum(spec, a, b)


def _linear(sa: str, out: str, a: Jet) -> Jet:
    return Jet([np.einsum(f"{sa}{_DSLOTS[:k]}->{out}{_DSLOTS[:k]}", c) for k, c in enumerate(a.coeffs)], a.dim)


def _leibniz(sa: str, sb: str, out: str, a: Jet, b: Jet) -> Jet:
    order = min(a.order, b.order)
    coeffs = []
    for k in range(order + 1):
        slots = _DSLOTS[:k]
        acc = None
        for mask in range(1 << k):
            la = "".join(slots[i] for i in range(k) if mask >> i & 1)
            lb = "".join(slots[i] for i in range(k) if not mask >> i & 1)
            term = np.einsum(f"{sa}{la},{sb}{lb}->{out}{slots}", a.coeffs[len(la)], b.coeffs[len(lb)])
            acc = term if acc is None else acc + term
        coeffs.append(acc)
    return Jet(coeffs, a.dim)


# -- composition with scalar functions ----------------------------------------------


def compose(a: Jet, derivs: Sequence[np.ndarray]) -> Jet:
    """Elementwise composition ``phi(a)`` given ``phi^(j)(a.value)`` for j <= order.

    Faa di Bruno through third order.
    """
    p = a.order
    f = a.coeffs
    coeffs = [np.asarray(derivs[0])]
    if p >= 1:
        coeffs.append(_scale(f[1], derivs[1], a.ndim))
    if p >= 2:
        outer = _kernels.outer2(f[1])
        coeffs.append(_scale(outer, derivs[2], a.ndim) + _scale(f[2], derivs[1], a.ndim))
    if p >= 3:
        t1 = _kernels.outer3(f[1])
        t2 = _kernels.hess_grad_sym(f[2], f[1])
        coeffs.append(_scale(t1, derivs[3], a.ndim) + _scale(t2, derivs[2], a.ndim) + _scale(f[3], derivs[1], a.ndim))
    return Jet(coeffs, a.dim)


def _ensure_nonzero(v: np.ndarray, what: str) -> None:
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        raise SingularPointError(f"{what} of a jet whose value is zero or non-finite")


def recip(a: Jet) -> Jet:
    v = a.value
    _ensure_nonzero(v, "reciprocal")
    inv = 1.0 / v
    return compose(a, [inv, -inv**2, 2 * inv**3, -6 * inv**4][: a.order + 1])


def exp(a: Jet) -> Jet:
    e = np.exp(a.value)
    return compose(a, [e] * (a.order + 1))


def log(a: Jet) -> Jet:
    v = a.value
    if np.iscomplexobj(v):
        _ensure_nonzero(v, "log")
    elif np.any(v <= 0):
        raise JetDomainError("log of a jet with nonpositive value")
    inv = 1.0 / v
    return compose(a, [np.log(v), inv, -inv**2, 2 * inv**3][: a.order + 1])


def sqrt(a: Jet) -> Jet:
    return power(a, 0.5)


def power(a: Jet, k) -> Jet:
    v = a.value
    integral = float(k).is_integer()
    if integral and k >= 0:
        k = int(k)
    elif integral:
        _ensure_nonzero(v, "negative power")
    else:
        if np.iscomplexobj(v) or np.any(v <= 0):
            raise JetDomainError("fractional power of a jet with nonpositive value")
    derivs = []
    coef = 1.0
    for j in range(a.order + 1):
        e = k - j
        if coef == 0:
            derivs.append(np.zeros_like(v, dtype=np.result_type(v, float)))
        elif isinstance(e, int) and e >= 0:
            derivs.append(coef * v**e)
        else:
            derivs.append(coef * np.asarray(v, dtype=np.result_type(v, float)) ** e)
        coef *= e
    return compose(a, derivs)


def inverse(g: Jet) -> Jet:
    """Matrix inverse of a square rank-2 jet: from G H = Id by the Leibniz rule."""
    g0 = g.value
    if g0.ndim != 2 or g0.shape[0] != g0.shape[1]:
        raise ValueError("inverse needs a square rank-2 jet")
    if not np.all(np.isfinite(g0)):
        raise DegenerateMetricError("non-finite matrix")
    cond = np.linalg.cond(g0)
    if not np.isfinite(cond) or cond > 1e13:
        raise DegenerateMetricError(f"matrix is singular (cond={cond:.3g})")
    h0 = np.linalg.inv(g0)
    h = [h0]
    for k in range(1, g.order + 1):
        slots = _DSLOTS[:k]
        acc = None
        for mask in range(1, 1 << k):
            lg = "".join(slots[i] for i in range(k) if mask >> i & 1)
            lh = "".join(slots[i] for i in range(k) if not mask >> i & 1)
            term = np.einsum(f"ab{lg},bc{lh}->ac{slots}", g.coeffs[len(lg)], h[len(lh)])
            acc = term if acc is None else acc + term
        h.append(-np.einsum(f"ab,bc{slots}->ac{slots}", h0, acc))
    return Jet(h, g.dim)


# -- points, coordinate jets, fields ------------------------------------------------


def as_point(coords) -> np.ndarray:
    """Validate chart coordinates: finite, length a positive multiple of 4."""
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size == 0 or x.size % 4:
        raise ValueError(f"point must have a positive multiple of 4 coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return x


def coordinate_jet(x, order: int) -> Jet:
    """Jet of the identity map ``x -> x`` (all coordinates at once)."""
    _check_order(order)
    x = np.asarray(x, dtype=float)
    d = x.size
    coeffs = [x.copy()]
    if order >= 1:
        coeffs.append(np.eye(d))
    for k in range(2, order + 1):
        coeffs.append(np.zeros((d,) * (k + 1)))
    return Jet(coeffs, d)


def jet_lift(x, index: int, order: int) -> Jet:
    """Jet of the single coordinate function ``x -> x[index]``."""
    x = np.asarray(x, dtype=float)
    if not 0 <= index < x.size:
        raise IndexError(f"variable index {index} out of range for dim {x.size}")
    return coordinate_jet(x, order)[index]


_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}

_FUNCS = {"exp": exp, "log": log, "sqrt": sqrt, "recip": recip}


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    try:
        return _ARITH[op](a, b)
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None


def jet_func(a: Jet, f: str, k=None) -> Jet:
    if f == "pow":
        return power(a, k)
    try:
        return _FUNCS[f](a)
    except KeyError:
        raise ValueError(f"unknown jet function {f!r}") from None


@dataclass(frozen=True)
class ScalarField:
    """Scalar field given as an evaluation rule on the coordinate jet."""

    fn: Callable[[Jet], Jet]
    is_complex: bool = False

    def __call__(self, X: Jet) -> Jet:
        return self.fn(X)

    def at(self, x, order: int = 0) -> Jet:
        return self.fn(coordinate_jet(as_point(x), order))


def sample_points(dim: int, count: int, seed: int = 42, box: tuple = DEFAULT_BOX) -> np.ndarray:
    """i.i.d. coordinates uniform in ``[-hi,-lo] U [lo,hi]``; deterministic in ``seed``."""
    lo, hi = box
    if not 0 < lo < hi:
        raise ValueError(f"sampling box must satisfy 0 < lo < hi, got {box}")
    if count < 1:
        raise ValueError("need at least one sample point")
    rng = np.random.default_rng(seed)
    mag = rng.uniform(lo, hi, size=(count, dim))
    sign = np.where(rng.random((count, dim)) < 0.5, -1.0, 1.0)
    return mag * sign


def factorial(k: int) -> int:
    return math.factorial(k)


# lowercase letters usable for component subscripts, in order
LETTERS = string.ascii_lowercase
