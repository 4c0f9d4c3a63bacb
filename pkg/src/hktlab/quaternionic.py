"""Hyperhermitian structures: complex operators, connections and torsion.

Conventions
-----------
* ``I_r`` acts on vectors by matrix multiplication, ``(I X)^a = I[a, b] X^b``,
  and satisfies ``I_r^2 = -Id``, ``I_1 I_2 = I_3``.
* On a k-form, ``(I omega)(X_1..X_k) = (-1)^k omega(I X_1, .., I X_k)``.
* ``F_r(X, Y) = g(I_r X, Y)``.
* ``d_r = (-1)^k I_r d I_r``, ``del_r = (d + i d_r)/2``, ``delbar_r = (d - i d_r)/2``.
* Bismut/HKT connection: ``g(D_X Y, Z) = g(nabla_X Y, Z) + c(X, Y, Z)/2`` so that
  ``g(T^D(X, Y), Z) = c(X, Y, Z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DegenerateMetricError, NotHKTError, NotLCHKError, PreconditionError
from .forms import (
    FormField,
    FormValue,
    TensorField,
    exterior_d,
    interior,
    lie_tensor,
    multi_indices,
    wedge,
)
from .jets import LETTERS, Jet, ScalarField, as_point, contract, coordinate_jet, inverse, sample_points

HKT_TOL = 1e-8
LCHK_TOL = 1e-8
LEE_AGREEMENT_TOL = 1e-6

# EPS[r, s, t] for 0-based r, s, t
EPS = np.zeros((3, 3, 3))
for _r, _s, _t in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[_r, _s, _t] = 1.0
    EPS[_r, _t, _s] = -1.0


def epsilon(r: int, s: int, t: int) -> int:
    """Levi-Civita symbol on {1, 2, 3} with epsilon(1, 2, 3) = 1."""
    return int(EPS[r - 1, s - 1, t - 1])


def cyclic(r: int) -> tuple[int, int, int]:
    """(r, s, t) cyclic permutation of (1, 2, 3) starting at r."""
    return r, r % 3 + 1, (r + 1) % 3 + 1


# -- geometry container -------------------------------------------------------------------


@dataclass(frozen=True)
class HypercomplexGeometry:
    """A chart of dimension ``4n`` with metric, hypercomplex structure and named 1-forms.

    ``symmetry_form`` is the 1-form dual to a D(2,1;-1) symmetry field (the
    normalised torsion 1-form) when the geometry is HKT; ``lee_form`` is the
    Lee form when it is locally conformally hyperkaehler.
    """

    n: int
    metric: TensorField
    structures: tuple
    label: str = ""
    kind: str = "hyperhermitian"
    lee_form: FormField | None = None
    symmetry_form: FormField | None = None
    potential_form: FormField | None = None
    potential: ScalarField | None = None
    deck_invariant: bool = False
    parent: "HypercomplexGeometry | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("quaternionic dimension must be >= 1")
        if len(self.structures) != 3:
            raise ValueError("need exactly three complex structures")

    @property
    def dim(self) -> int:
        return 4 * self.n

    def at(self, x) -> "GeometryAt":
        return GeometryAt(self, x)

    def structure(self, r: int) -> TensorField:
        return self.structures[r - 1]


class GeometryAt:
    """Memoised jets of a geometry's tensors at one point.

    Every accessor takes the jet ``order`` wanted for its *output*.
    """

    def __init__(self, geom: HypercomplexGeometry, x):
        self.geom = geom
        self.x = as_point(x)
        if self.x.size != geom.dim:
            raise ValueError(f"point has {self.x.size} coordinates, geometry has dimension {geom.dim}")
        self._cache: dict = {}

    def _memo(self, key, fn: Callable):
        try:
            return self._cache[key]
        except KeyError:
            val = self._cache[key] = fn()
            return val

    @property
    def dim(self) -> int:
        return self.geom.dim

    def X(self, order: int) -> Jet:
        return self._memo(("X", order), lambda: coordinate_jet(self.x, order))

    def metric(self, order: int = 0) -> Jet:
        return self._memo(("g", order), lambda: self.geom.metric(self.X(order)))

    def metric_inv(self, order: int = 0) -> Jet:
        return self._memo(("ginv", order), lambda: inverse(self.metric(order)))

    def I(self, r: int, order: int = 0) -> Jet:
        return self._memo(("I", r, order), lambda: self.geom.structures[r - 1](self.X(order)))

    def rotate(self, r: int, omega: Jet) -> Jet:
        """``I_r`` acting on a form jet (structure evaluated at matching order)."""
        return act(self.I(r, omega.order), omega)

    def F(self, r: int, order: int = 0) -> Jet:
        return self._memo(("F", r, order), lambda: fundamental_jet(self.metric(order), self.I(r, order)))

    def dF(self, r: int, order: int = 0) -> Jet:
        return self._memo(("dF", r, order), lambda: exterior_d(self.F(r, order + 1)))

    def d_r(self, r: int, omega: Jet) -> Jet:
        return d_op(self.I(r, omega.order), omega)

    def _named(self, name: str, order: int) -> Jet:
        fld = getattr(self.geom, name)
        if fld is None:
            raise PreconditionError(f"geometry {self.geom.label!r} carries no {name}")
        return self._memo((name, order), lambda: fld(self.X(order)))

    def lee(self, order: int = 0) -> Jet:
        return self._named("lee_form", order)

    def theta_hat(self, order: int = 0) -> Jet:
        return self._named("symmetry_form", order)

    def potential_form(self, order: int = 0) -> Jet:
        return self._named("potential_form", order)

    def mu(self, order: int = 0) -> Jet:
        return self._named("potential", order)

    def quaternionic_forms(self, base: Jet) -> list[Jet]:
        """``[base, I_1 base, I_2 base, I_3 base]``."""
        return [base] + [self.rotate(r, base) for r in (1, 2, 3)]

    def sym_field(self, order: int = 0) -> Jet:
        """V = metric dual of the symmetry form."""
        return self._memo(("V", order), lambda: contract("ab,b->a", self.metric_inv(order), self.theta_hat(order)))

    def lee_field(self, order: int = 0) -> Jet:
        return self._memo(("Vlee", order), lambda: contract("ab,b->a", self.metric_inv(order), self.lee(order)))

    def rotated_field(self, r: int, V: Jet) -> Jet:
        return contract("ab,b->a", self.I(r, V.order), V)

    # -- HKT data --------------------------------------------------------------------
    def hkt_residual(self) -> float:
        vals = [self.d_r(r, self.F(r, 1)).value for r in (1, 2, 3)]
        return max(_maxabs(vals[i] - vals[0]) for i in (1, 2))

    def torsion(self, order: int = 0, *, tol: float = HKT_TOL) -> Jet:
        def build():
            res = self._memo(("hktres",), self.hkt_residual)
            if res > tol:
                raise NotHKTError(f"d_rF_r disagree by {res:.3g} > {tol:g} at {self.x.tolist()}")
            return -act(self.I(1, order), self.dF(1, order))

        return self._memo(("c", order), build)

    def christoffel(self, order: int = 0) -> Jet:
        return self._memo(("Gamma", order), lambda: christoffel_jet(self.metric(order + 1), self.metric_inv(order)))

    def bismut(self, order: int = 0) -> Jet:
        return self._memo(
            ("D", order),
            lambda: self.christoffel(order) + 0.5 * contract("kl,ijl->kij", self.metric_inv(order), self.torsion(order)),
        )


def _maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# -- algebraic operators ----------------------------------------------------------------------


def act(I: Jet, omega: Jet) -> Jet:
    """``(I omega)(X_1..X_k) = (-1)^k omega(I X_1, .., I X_k)`` on form jets."""
    k = omega.ndim
    out = omega
    letters = LETTERS[:k]
    for slot in range(k):
        new = letters[:slot] + "z" + letters[slot + 1 :]
        out = contract(f"{letters},{letters[slot]}z->{new}", out, I)
    return -out if k % 2 else out


def d_op(I: Jet, omega: Jet) -> Jet:
    """``d_r omega = (-1)^k I_r d I_r omega``."""
    k = omega.ndim
    out = act(I, exterior_d(act(I, omega)))
    return -out if k % 2 else out


def del_op(I: Jet, omega: Jet) -> Jet:
    return 0.5 * (exterior_d(omega) + 1j * d_op(I, omega))


def delbar_op(I: Jet, omega: Jet) -> Jet:
    return 0.5 * (exterior_d(omega) - 1j * d_op(I, omega))


def fundamental_jet(g: Jet, I: Jet) -> Jet:
    """``F(X, Y) = g(I X, Y)``: ``F[b, c] = g[a, c] I[a, b]``."""
    return contract("ac,ab->bc", g, I)


def act_on_form(I, omega: FormValue) -> FormValue:
    I = np.asarray(I)
    if I.shape != (omega.dim, omega.dim) and omega.degree:
        raise ValueError("endomorphism and form dimensions differ")
    out = FormValue.from_jet(act(Jet.constant(I, I.shape[0], 0), omega.as_jet()))
    out.dim = omega.dim
    return out


def _field_op(geom: HypercomplexGeometry, omega, x, r: int, op) -> FormValue:
    at = geom.at(x)
    om = omega(at.X(1)) if callable(omega) else omega
    return FormValue.from_jet(op(at.I(r, om.order), om))


def d_r(geom: HypercomplexGeometry, omega: FormField, x, r: int) -> FormValue:
    return _field_op(geom, omega, x, r, d_op)


def del_r(geom: HypercomplexGeometry, omega: FormField, x, r: int) -> FormValue:
    return _field_op(geom, omega, x, r, del_op)


def delbar_r(geom: HypercomplexGeometry, omega: FormField, x, r: int) -> FormValue:
    return _field_op(geom, omega, x, r, delbar_op)


def fundamental_form(geom: HypercomplexGeometry, r: int) -> FormField:
    g, I = geom.metric, geom.structures[r - 1]
    return FormField(2, lambda X: fundamental_jet(g(X), I(X)))


def structure_residual(geom: HypercomplexGeometry, x) -> dict:
    """Quaternion relations, hermitian compatibility and F_r antisymmetry at x."""
    at = geom.at(x)
    g = at.metric().value
    Is = [at.I(r).value for r in (1, 2, 3)]
    eye = np.eye(geom.dim)
    out = {
        "square": max(_maxabs(I @ I + eye) for I in Is),
        "product": max(_maxabs(Is[0] @ Is[1] - Is[2]), _maxabs(Is[1] @ Is[0] + Is[2])),
        "hermitian": max(_maxabs(I.T @ g @ I - g) for I in Is),
        "antisymmetry": max(_maxabs(F + F.T) for F in (I.T @ g for I in Is)),
    }
    return out


# -- Lee form -----------------------------------------------------------------------------------


def lee_form_extract(geom: HypercomplexGeometry, x, *, tol: float = LCHK_TOL) -> tuple[FormValue, float]:
    """Solve ``dF_r = theta ^ F_r`` for theta by least squares over all r.

    Returns the 1-form and the residual; raises :class:`NotLCHKError` when no
    theta fits within ``tol`` or the per-r solutions disagree.
    """
    at = geom.at(x)
    d = geom.dim
    basis = np.eye(d)
    idx = tuple(multi_indices(d, 3).T)
    blocks, rhs, per_r = [], [], []
    for r in (1, 2, 3):
        F = at.F(r).value
        Fj = Jet.constant(F, d, 0)
        cols = np.stack([wedge(Jet.constant(basis[a], d, 0), Fj).value[idx] for a in range(d)], axis=1)
        b = at.dF(r).value[idx]
        blocks.append(cols)
        rhs.append(b)
        sol = np.linalg.lstsq(cols, b, rcond=None)[0]
        per_r.append(sol)
    A, b = np.concatenate(blocks), np.concatenate(rhs)
    theta, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < d:
        raise DegenerateMetricError(f"theta ^ F_r is not injective (rank {rank} < {d})")
    residual = _maxabs(A @ theta - b)
    if residual > tol:
        raise NotLCHKError(f"dF_r = theta ^ F_r fails by {residual:.3g} at {at.x.tolist()}")
    spread = max(_maxabs(s - theta) for s in per_r)
    if spread > LEE_AGREEMENT_TOL:
        raise NotLCHKError(f"per-r Lee forms disagree by {spread:.3g}")
    return FormValue(1, d, theta), residual


# -- connections ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectionCoefficients:
    """``coeffs[k, i, j]`` with ``D_{e_i} e_j = coeffs[k, i, j] e_k``."""

    coeffs: np.ndarray
    flavor: str = "levi-civita"

    def torsion(self) -> np.ndarray:
        """``T[k, i, j]`` of ``T(e_i, e_j)`` in a coordinate frame."""
        return self.coeffs - self.coeffs.transpose(0, 2, 1)


def christoffel_jet(g: Jet, ginv: Jet) -> Jet:
    """``Gamma[k,i,j] = 1/2 g^{kl}(d_i g_jl + d_j g_il - d_l g_ij)``; needs g one order higher."""
    dg = g.d()  # dg[a, b, c] = d_c g_ab
    t = dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg
    return 0.5 * contract("kl,ijl->kij", ginv, t)


def covariant_derivative(conn: Jet, T: Jet, kind: str) -> Jet:
    """``nabla T`` with the derivative slot first, e.g. ``(nabla V)[i, k] = (nabla_i V)^k``."""
    dT = T.d()
    if kind == "vector":
        return dT.transpose(1, 0) + contract("kij,j->ik", conn, T)
    if kind == "covector":
        return dT.transpose(1, 0) - contract("kij,k->ij", conn, T)
    if kind == "endomorphism":
        return dT.transpose(2, 0, 1) + contract("aic,cb->iab", conn, T) - contract("cib,ac->iab", conn, T)
    if kind == "metric":
        return dT.transpose(2, 0, 1) - contract("cia,cb->iab", conn, T) - contract("cib,ac->iab", conn, T)
    raise NotImplementedError(f"covariant derivative of a {kind!r} tensor")


def levi_civita(geom: HypercomplexGeometry, x) -> ConnectionCoefficients:
    return ConnectionCoefficients(geom.at(x).christoffel(0).value, "levi-civita")


def cov_deriv(conn: ConnectionCoefficients, V: TensorField, X, x) -> np.ndarray:
    """``nabla_X V`` at x for a vector field V and a tangent vector X."""
    Vj = V(coordinate_jet(as_point(x), 1))
    dV = Vj.d().value  # [k, i]
    return np.asarray(X) @ (dV.T + np.einsum("kij,j->ik", conn.coeffs, Vj.value))


def bismut_connection(geom: HypercomplexGeometry, x) -> ConnectionCoefficients:
    return ConnectionCoefficients(geom.at(x).bismut(0).value, "bismut")


def bismut_torsion_form(geom: HypercomplexGeometry, r: int, x, *, tol: float = HKT_TOL) -> FormValue:
    """``c = -d_r F_r = -I_r dF_r``, gated on the HKT condition.

    All three r are computed; a disagreement beyond ``tol`` raises
    :class:`NotHKTError`.
    """
    at = geom.at(x)
    c_all = [-act(at.I(s), at.dF(s)).value for s in (1, 2, 3)]
    spread = max(_maxabs(c_all[i] - c_all[0]) for i in (1, 2))
    if spread > tol or at.hkt_residual() > tol:
        raise NotHKTError(f"torsion forms for r=1,2,3 disagree by {spread:.3g} at {at.x.tolist()}")
    c = c_all[r - 1]
    if _maxabs(c + c.transpose(1, 0, 2)) > tol:
        raise NotHKTError("torsion is not totally antisymmetric")
    return FormValue.from_dense(c)


def bismut_cov_deriv(geom: HypercomplexGeometry, V: TensorField, X, x) -> np.ndarray:
    conn = bismut_connection(geom, x)
    return cov_deriv(conn, V, X, x)


# -- torsion 1-form and cubic normalisation -----------------------------------------------------


def orthonormal_frame(g: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Gram-Schmidt (modified, fixed order) of ``basis`` columns against ``g``.

    Returns a matrix whose columns are g-orthonormal.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    B = np.eye(d) if basis is None else np.array(basis, dtype=float)
    E = np.zeros_like(B)
    for i in range(d):
        v = B[:, i].copy()
        for j in range(i):
            v -= (E[:, j] @ g @ v) * E[:, j]
        nsq = v @ g @ v
        if not nsq > 1e-14:
            raise DegenerateMetricError("frame construction failed: dependent vectors or singular metric")
        E[:, i] = v / np.sqrt(nsq)
    return E


def torsion_one_form(c, I, frame: np.ndarray) -> np.ndarray:
    """``tau(X) = 1/2 sum_i c(I X, e_i, I e_i)`` for an orthonormal frame ``e_i``."""
    c = c.dense if isinstance(c, FormValue) else np.asarray(c)
    I = np.asarray(I)
    return 0.5 * np.einsum("bcd,ba,ci,di->a", c, I, frame, I @ frame)


def torsion_one_form_at(geom: HypercomplexGeometry, x, r: int = 1, frame: np.ndarray | None = None) -> np.ndarray:
    at = geom.at(x)
    E = orthonormal_frame(at.metric().value) if frame is None else frame
    return torsion_one_form(at.torsion(0).value, at.I(r).value, E)


def normalized_lambda(m: int, tau_norm_sq: float = 1.0) -> float:
    """Positive root of ``lam (2m - 1 + lam^2 |tau|^2) = 1``.

    With ``|tau| = 1`` this is the cubic ``lam^3 + (2m-1) lam - 1 = 0``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not tau_norm_sq > 0:
        raise ValueError("torsion 1-form must be nonzero")
    p, q = (2 * m - 1) / tau_norm_sq, -1.0 / tau_norm_sq
    # Cardano for the depressed cubic lam^3 + p lam + q = 0 with p > 0: single real root
    disc = np.sqrt(q * q / 4 + p**3 / 27)
    lam = float(np.cbrt(-q / 2 + disc) + np.cbrt(-q / 2 - disc))
    for _ in range(3):
        lam -= (lam**3 + p * lam + q) / (3 * lam**2 + p)
    return lam


def cubic_torsion_jet(at: GeometryAt, order: int = 0) -> Jet:
    """``-(sum_r th_r ^ F_r - 2 th_1 ^ th_2 ^ th_3)`` in the symmetry form ``th``."""
    th = at.theta_hat(order)
    ths = [at.rotate(r, th) for r in (1, 2, 3)]
    acc = wedge(ths[0], at.F(1, order)) + wedge(ths[1], at.F(2, order)) + wedge(ths[2], at.F(3, order))
    acc = acc - 2.0 * wedge(wedge(ths[0], ths[1]), ths[2])
    return -acc


def cubic_torsion_expected(geom: HypercomplexGeometry, theta_hat: FormField | None, x) -> FormValue:
    if theta_hat is not None and theta_hat is not geom.symmetry_form:
        geom = replace(geom, symmetry_form=theta_hat)
    return FormValue.from_jet(cubic_torsion_jet(geom.at(x)))


def dc_expected_jet(at: GeometryAt, order: int = 0) -> Jet:
    """``1/2 sum_(rst cyclic) (F_r - th ^ th_r - th_s ^ th_t)^2`` for an lcHK geometry."""
    th = at.lee(order)
    rot = [th] + [at.rotate(r, th) for r in (1, 2, 3)]
    acc = None
    for r in (1, 2, 3):
        _, s, t = cyclic(r)
        B = at.F(r, order) - wedge(rot[0], rot[r]) - wedge(rot[s], rot[t])
        sq = wedge(B, B)
        acc = sq if acc is None else acc + sq
    return 0.5 * acc


def dc_expected(geom: HypercomplexGeometry, x) -> FormValue:
    return FormValue.from_jet(dc_expected_jet(geom.at(x)))


# -- metric transformations -----------------------------------------------------------------------


def _span_metric(theta: FormField, structures) -> Callable[[Jet], Jet]:
    """X -> sum over {theta, I_1 theta, I_2 theta, I_3 theta} of a (x) a."""

    def fn(X: Jet) -> Jet:
        th = theta(X)
        acc = contract("a,b->ab", th, th)
        for I in structures:
            tr = act(I(X), th)
            acc = acc + contract("a,b->ab", tr, tr)
        return acc

    return fn


def probe_points(dim: int, count: int = 3) -> np.ndarray:
    return sample_points(dim, count, seed=7)


def lchk_residuals(geom: HypercomplexGeometry, x) -> dict:
    """Residuals of ``dF_r = theta ^ F_r``, ``d theta = 0`` and ``|theta| = 1``."""
    at = geom.at(x)
    th = at.lee(1)
    dF = max(_maxabs(at.dF(r).value - wedge(th.truncate(0), at.F(r)).value) for r in (1, 2, 3))
    closed = _maxabs(exterior_d(th).value)
    norm_sq = float(th.value @ at.metric_inv().value @ th.value)
    return {"dF": dF, "closed": closed, "norm_sq": norm_sq}


def hkt_from_lchk(
    geom: HypercomplexGeometry, *, potential: ScalarField | None = None, check: bool = True, tol: float = LCHK_TOL
) -> HypercomplexGeometry:
    """HKT metric ``g - 1/2 (th (x) th + sum_r th_r (x) th_r)`` from an lcHK metric with unit parallel Lee form.

    The potential 1-form is recorded as ``-th`` (= ``-2 th_hat``); SYM-05
    confirms this sign numerically.
    """
    theta = geom.lee_form
    if theta is None:
        raise PreconditionError("geometry carries no Lee form")
    if check:
        for x in probe_points(geom.dim):
            res = lchk_residuals(geom, x)
            if res["norm_sq"] < 1e-12:
                raise PreconditionError("Lee form vanishes; unit-length hypothesis fails")
            if res["dF"] > tol or res["closed"] > tol:
                raise PreconditionError(f"not locally conformally hyperkaehler at probe point: {res}")
            if abs(res["norm_sq"] - 1) > tol:
                raise PreconditionError(f"Lee form is not of unit length (|theta|^2 = {res['norm_sq']:.6g})")

    g, span = geom.metric, _span_metric(theta, geom.structures)
    metric = TensorField("metric", lambda X: g(X) - 0.5 * span(X))
    sym = FormField(1, lambda X: 0.5 * theta(X))
    pot = FormField(1, lambda X: -theta(X))
    out = HypercomplexGeometry(
        n=geom.n,
        metric=metric,
        structures=geom.structures,
        label=f"hkt({geom.label})",
        kind="hkt",
        symmetry_form=sym,
        potential_form=pot,
        potential=potential,
        deck_invariant=geom.deck_invariant,
        parent=geom,
    )
    if check:
        for x in probe_points(geom.dim):
            if np.linalg.eigvalsh(out.at(x).metric().value).min() <= 0:
                raise DegenerateMetricError("transformed metric is not positive definite")
    return out


def d21_residuals(geom: HypercomplexGeometry, x) -> dict:
    """Residuals of the D(2,1;-1) symmetry conditions for V dual to the symmetry form."""
    at = geom.at(x)
    th = at.theta_hat(1)
    V = at.sym_field(1)
    g = at.metric(1)
    IV = [at.rotated_field(r, V) for r in (1, 2, 3)]
    out = {
        "closed": _maxabs(exterior_d(th).value),
        "killing_V": _maxabs(lie_tensor(V, g, "metric").value),
        "killing_IV": max(_maxabs(lie_tensor(W, g, "metric").value) for W in IV),
        "lie_V_I": max(_maxabs(lie_tensor(V, at.I(r, 1), "endomorphism").value) for r in (1, 2, 3)),
    }
    rot = 0.0
    for r in (1, 2, 3):
        for s in (1, 2, 3):
            expected = sum(EPS[r - 1, s - 1, t - 1] * at.I(t).value for t in (1, 2, 3))
            rot = max(rot, _maxabs(lie_tensor(IV[r - 1], at.I(s, 1), "endomorphism").value - expected))
    out["lie_IV_I"] = rot
    return out


def lchk_from_hkt(
    geom: HypercomplexGeometry, theta_hat: FormField | None = None, *, check: bool = True, tol: float = 1e-8
) -> HypercomplexGeometry:
    """``g = g_hat + 2 (th (x) th + sum_r th_r (x) th_r)`` with Lee form ``2 th``.

    Whether the output is lcHK is left to the verifier.
    """
    th = theta_hat if theta_hat is not None else geom.symmetry_form
    if th is None:
        raise PreconditionError("no normalised torsion 1-form supplied")
    if theta_hat is not None and theta_hat is not geom.symmetry_form:
        geom = replace(geom, symmetry_form=theta_hat)
    if check:
        for x in probe_points(geom.dim):
            res = d21_residuals(geom, x)
            bad = {k: v for k, v in res.items() if v > tol}
            if bad:
                raise PreconditionError(f"dual field is not a closed D(2,1;-1) symmetry: {bad}")
    ghat, span = geom.metric, _span_metric(th, geom.structures)
    metric = TensorField("metric", lambda X: ghat(X) + 2.0 * span(X))
    lee = FormField(1, lambda X: 2.0 * th(X))
    return HypercomplexGeometry(
        n=geom.n,
        metric=metric,
        structures=geom.structures,
        label=f"lchk({geom.label})",
        kind="lchk-candidate",
        lee_form=lee,
        deck_invariant=geom.deck_invariant,
        parent=geom,
    )
