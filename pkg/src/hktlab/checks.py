"""Registry of named checks.

Each check evaluates a dictionary of named residual components at a sample
point.  The point residual is the maximum over components whose names do not
start with ``_``; underscore components are informational and only reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import HKTLabError, NotHKTError, PreconditionError, UnknownCheckError
from .forms import bracket, exterior_d, form_norm_sq, interior, lie_tensor, wedge
from .jets import Jet, contract
from .quaternionic import (
    EPS,
    GeometryAt,
    HypercomplexGeometry,
    act,
    covariant_derivative,
    cubic_torsion_jet,
    cyclic,
    del_op,
    delbar_op,
    dc_expected_jet,
    hkt_from_lchk,
    lchk_from_hkt,
    normalized_lambda,
    orthonormal_frame,
    probe_points,
    structure_residual,
    torsion_one_form,
)
from .zoo import deck_invariance_residual

DEFAULT_TOL = 1e-8

# Lower bound for the ghat-norm of dc on the HKT Hopf cover of real dimension 8;
# the measured norm is 3.0 at every sampled point.
NONSTRONG_FLOOR = 1.5


def _m(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True)
class Anchor:
    citation: str
    quote: str

    def __str__(self) -> str:
        return f'{self.citation}: "{self.quote}"'


@dataclass
class PointContext:
    """Per-point cache of evaluated geometries, owned by one worker."""

    index: int
    x: np.ndarray
    _ats: dict = field(default_factory=dict)

    def at(self, geom: HypercomplexGeometry) -> GeometryAt:
        key = id(geom)
        if key not in self._ats:
            self._ats[key] = geom.at(self.x)
        return self._ats[key]


Components = dict


@dataclass(frozen=True)
class CheckSpec:
    """A named residual computation bound to one identity.

    ``prepare(geom)`` builds derived data once per run and raises
    :class:`PreconditionError` when the check does not apply; ``evaluate``
    returns residual components at one point; the optional ``finalize`` maps
    all per-point components to per-point residuals, extra details and an
    optional verdict.
    """

    id: str
    suite: str
    anchor: Anchor
    evaluate: Callable[[PointContext, HypercomplexGeometry, dict], Components]
    preconditions: str = "none"
    prepare: Callable[[HypercomplexGeometry], dict] | None = None
    finalize: Callable | None = None
    tolerance: float = DEFAULT_TOL
    order: int = 2


REGISTRY: dict[str, CheckSpec] = {}

SUITES = ("hyperhermitian", "hkt", "symmetry", "lchk", "cubic", "inverse")
ALL_SUITES = SUITES + ("paper-all",)


def register(spec: CheckSpec) -> CheckSpec:
    if spec.id in REGISTRY:
        raise ValueError(f"duplicate check id {spec.id}")
    if spec.suite not in SUITES:
        raise ValueError(f"unknown suite {spec.suite}")
    if not spec.anchor.quote:
        raise ValueError(f"check {spec.id} lacks a quote anchor")
    REGISTRY[spec.id] = spec
    return spec


def get_check(check_id: str) -> CheckSpec:
    try:
        return REGISTRY[check_id.upper()]
    except KeyError:
        raise UnknownCheckError(f"unknown check id {check_id!r}") from None


def suite_checks(suite: str) -> list[CheckSpec]:
    if suite not in ALL_SUITES:
        raise UnknownCheckError(f"unknown suite {suite!r}; expected one of {', '.join(ALL_SUITES)}")
    return [c for c in REGISTRY.values() if suite == "paper-all" or c.suite == suite]


# -- preconditions -----------------------------------------------------------------------------------


def _probe_all(geom: HypercomplexGeometry, fn) -> list:
    return [fn(geom.at(x)) for x in probe_points(geom.dim)]


def _need_hkt(geom: HypercomplexGeometry) -> dict:
    try:
        _probe_all(geom, lambda at: at.torsion(0))
    except NotHKTError:
        worst = max(_probe_all(geom, lambda at: at.hkt_residual()))
        raise PreconditionError(f"geometry is not HKT (d_rF_r differ by {worst:.3g} at a probe point)") from None
    return {}


def _need_field(name: str, nonzero: bool):
    def check(geom: HypercomplexGeometry) -> None:
        fld = getattr(geom, name)
        if fld is None:
            raise PreconditionError(f"geometry carries no {name.replace('_', ' ')}")
        if nonzero and max(_probe_all(geom, lambda at: _m(getattr(at, _ACCESSOR[name])(0).value))) < 1e-12:
            raise PreconditionError(f"{name.replace('_', ' ')} vanishes")

    return check


_ACCESSOR = {"lee_form": "lee", "symmetry_form": "theta_hat", "potential_form": "potential_form", "potential": "mu"}


def _prep(*steps):
    def prepare(geom: HypercomplexGeometry) -> dict:
        ctx: dict = {}
        for step in steps:
            out = step(geom)
            if out:
                ctx.update(out)
        return ctx

    return prepare


# -- hyperhermitian ---------------------------------------------------------------------------------


def _hh01(pc, geom, ctx):
    return structure_residual(geom, pc.x)


def _hh02(pc, geom, ctx):
    return {"deck": deck_invariance_residual(geom, pc.x)}


def _need_deck(geom):
    if not geom.deck_invariant:
        raise PreconditionError("geometry is not a Hopf-family cover")


register(CheckSpec(
    "HH-01", "hyperhermitian",
    Anchor("Definition of hyperhermitian manifold", "If each complex structure $I_r$ with the metric $\\hat{g}$ forms a Hermitian structure"),
    _hh01, tolerance=1e-10, order=0,
))
register(CheckSpec(
    "HH-02", "hyperhermitian",
    Anchor("Hopf manifold example", "is invariant to the action of $\\Gamma_2$"),
    _hh02, preconditions="Hopf-family geometry", prepare=_prep(_need_deck), tolerance=1e-9, order=0,
))

# -- HKT -------------------------------------------------------------------------------------------


def _hkt01(pc, geom, ctx):
    at = pc.at(geom)
    vals = [at.d_r(r, at.F(r, 1)).value for r in (1, 2, 3)]
    F23 = at.F(2, 1) + 1j * at.F(3, 1)
    return {
        "d1F1-d2F2": _m(vals[0] - vals[1]),
        "d2F2-d3F3": _m(vals[1] - vals[2]),
        "del1(F2+iF3)": _m(del_op(at.I(1, 1), F23).value),
    }


def _hkt02(pc, geom, ctx):
    at = pc.at(geom)
    mu = at.mu(2)
    out = {}
    for r in (1, 2, 3):
        _, s, t = cyclic(r)
        rhs = 0.5 * (exterior_d(at.d_r(r, mu)) + at.d_r(s, at.d_r(t, mu)))
        out[f"F{r}"] = _m(at.F(r).value - rhs.value)
    inner = act(at.I(2, 1), delbar_op(at.I(1, 2), mu))
    rhs = 2.0 * del_op(at.I(1, 1), inner)
    out["F2+iF3"] = _m(at.F(2).value + 1j * at.F(3).value - rhs.value)
    return out


def potential_form_residuals(at: GeometryAt, omega: Jet) -> Components:
    """Residuals of the potential 1-form identities for ``omega`` (order 2) and the torsion display."""
    om_r = {r: at.rotate(r, omega) for r in (1, 2, 3)}
    out = {}
    for r in (1, 2, 3):
        _, s, t = cyclic(r)
        rhs = 0.5 * (exterior_d(om_r[r].truncate(1)) + at.d_r(s, om_r[t].truncate(1)))
        out[f"F{r}"] = _m(at.F(r).value - rhs.value)
    c = at.torsion(0).value
    for r in (1, 2, 3):
        _, s, t = cyclic(r)
        disp = -0.5 * at.d_r(r, at.d_r(s, om_r[t]))
        out[f"c=-1/2 d{r}d{s}w{t}"] = _m(c - disp.value)
    return out


def _hkt03(pc, geom, ctx):
    at = pc.at(geom)
    return potential_form_residuals(at, at.potential_form(2))


def _hkt04(pc, geom, ctx):
    at = pc.at(geom)
    c = at.torsion(0).value
    out = {
        "antisymmetry": max(_m(c + c.transpose(1, 0, 2)), _m(c + c.transpose(0, 2, 1)), _m(c + c.transpose(2, 1, 0)))
    }
    for r in (1, 2, 3):
        I = at.I(r).value
        cI = np.einsum("zxy,xa,yb->zab", c, I, I) + np.einsum("zxy,za,yb->axb", c, I, I) + np.einsum("zxy,za,xb->aby", c, I, I)
        out[f"type I{r}"] = _m(c - cI)
    return out


register(CheckSpec(
    "HKT-01", "hkt",
    Anchor("Proposition (df)", "(i) $d_1{\\hat F}_1=d_2{\\hat F}_2=d_3{\\hat F}_3.$ (ii) $\\partial_1({\\hat F}_2+i{\\hat F}_3)=0.$"),
    _hkt01, order=1,
))
register(CheckSpec(
    "HKT-02", "hkt",
    Anchor("Eqs. (pot), (pott)", "{\\hat F}_1=\\frac{1}{2}(dd_1+d_2d_3)\\mu ... {\\hat F}_2+i{\\hat F}_3=2\\partial_1I_2\\overline{\\partial}_1\\mu"),
    _hkt02, preconditions="potential function present", prepare=_prep(_need_field("potential", False)),
))
register(CheckSpec(
    "HKT-03", "hkt",
    Anchor("Definition (potential form) and torsion display", "{\\hat F}_1=\\frac{1}{2}(d\\omega_1+d_2\\omega_3) ... c=-\\frac12d_1d_2\\omega_3=-\\frac12d_2d_3\\omega_1=-\\frac12d_3d_1\\omega_2"),
    _hkt03, preconditions="HKT; potential 1-form present",
    prepare=_prep(_need_hkt, _need_field("potential_form", False)),
))
register(CheckSpec(
    "HKT-04", "hkt",
    Anchor("Eq. (type)", "c(Z, X, Y)=c(Z, I_rX, I_rY)+c(I_rZ, X, I_rY)+c(I_rZ, I_rX, Y)"),
    _hkt04, preconditions="HKT", prepare=_prep(_need_hkt), order=1,
))

# -- symmetry ----------------------------------------------------------------------------------------

_need_sym = _need_field("symmetry_form", True)


def _sym_fields(at: GeometryAt) -> tuple[Jet, list[Jet]]:
    V = at.sym_field(1)
    return V, [at.rotated_field(r, V) for r in (1, 2, 3)]


def _sym01(pc, geom, ctx):
    at = pc.at(geom)
    D = at.bismut(0)
    V, IV = _sym_fields(at)
    g = at.metric(1)
    parallel_V = _m(covariant_derivative(D, V, "vector").value)
    parallel_IV = max(_m(covariant_derivative(D, W, "vector").value) for W in IV)
    killing = max(_m(lie_tensor(W, g, "metric").value) for W in [V] + IV)
    legs = (parallel_V, parallel_IV, killing)
    small = [leg <= ctx["tol"] for leg in legs]
    return {
        "DV": parallel_V,
        "D(I_rV)": parallel_IV,
        "Killing": killing,
        "_legs_coherent": float(all(small) or not any(small)),
    }


def _sym02(pc, geom, ctx):
    at = pc.at(geom)
    th = at.theta_hat(1)
    V, IV = _sym_fields(at)
    c = at.torsion(0)
    V0 = V.truncate(0)
    out = {"dth-i_Vc": _m(exterior_d(th).value - interior(V0, c).value)}
    for r in (1, 2, 3):
        out[f"dth{r}-i_(I{r}V)c"] = _m(exterior_d(at.rotate(r, th)).value - interior(IV[r - 1].truncate(0), c).value)
    return out


def _sym03(pc, geom, ctx):
    at = pc.at(geom)
    V = at.sym_field(1)
    g = at.metric(0)
    c = at.torsion(0)
    nabla_V = covariant_derivative(at.christoffel(0), V, "vector")  # [i, k]
    lowered = contract("ik,kj->ij", nabla_V, g).value
    iota = interior(V.truncate(0), c).value
    return {
        "identity": _m(lowered - 0.5 * iota),
        "_|nablaV|": _m(lowered),
        "_|i_Vc|": _m(iota),
    }


def _sym04(pc, geom, ctx):
    at = pc.at(geom)
    th = at.theta_hat(1)
    V, IV = _sym_fields(at)
    g = at.metric(1)
    out = {
        "dth": _m(exterior_d(th).value),
        "L_V g": _m(lie_tensor(V, g, "metric").value),
        "L_(I_rV) g": max(_m(lie_tensor(W, g, "metric").value) for W in IV),
        "L_V I_r": max(_m(lie_tensor(V, at.I(r, 1), "endomorphism").value) for r in (1, 2, 3)),
    }
    rot = 0.0
    for r in (1, 2, 3):
        for s in (1, 2, 3):
            expected = sum(EPS[r - 1, s - 1, t - 1] * at.I(t).value for t in (1, 2, 3))
            rot = max(rot, _m(lie_tensor(IV[r - 1], at.I(s, 1), "endomorphism").value - expected))
    out["L_(I_rV) I_s"] = rot
    return out


def _sym05(pc, geom, ctx):
    at = pc.at(geom)
    th = at.theta_hat(2)
    return {
        "minus": max(potential_form_residuals(at, -2.0 * th).values()),
        "plus": max(potential_form_residuals(at, 2.0 * th).values()),
    }


def _sym05_finalize(comps: list[Components], tol: float):
    minus = max(c["minus"] for c in comps)
    plus = max(c["plus"] for c in comps)
    passing = [s for s, v in (("-", minus), ("+", plus)) if v <= tol]
    winner = passing[0] if len(passing) == 1 else min((("-", minus), ("+", plus)), key=lambda p: p[1])[0]
    key = "minus" if winner == "-" else "plus"
    residuals = [c[key] for c in comps]
    details = {"winning_sign": winner if len(passing) == 1 else None, "residual_minus": minus, "residual_plus": plus}
    verdict = "pass" if len(passing) == 1 else "fail"
    return residuals, details, verdict


def _sym06(pc, geom, ctx):
    at = pc.at(geom)
    V, IV = _sym_fields(at)
    out = {}
    for r in (1, 2, 3):
        out[f"[V,I{r}V]"] = bracket(V, IV[r - 1]).value
    for r in (1, 2, 3):
        for s in (1, 2, 3):
            if r < s:
                t = 6 - r - s
                out[f"[I{r}V,I{s}V]"] = bracket(IV[r - 1], IV[s - 1]).value
                out[f"eps I{t}V {r}{s}"] = EPS[r - 1, s - 1, t - 1] * IV[t - 1].value
    return out


def _sym06_finalize(comps: list[Components], tol: float):
    pairs = [(1, 2), (1, 3), (2, 3)]
    A = np.concatenate([c[f"eps I{6 - r - s}V {r}{s}"] for c in comps for r, s in pairs])
    b = np.concatenate([c[f"[I{r}V,I{s}V]"] for c in comps for r, s in pairs])
    const = float(A @ b / (A @ A))
    residuals = []
    central = 0.0
    for c in comps:
        res = max(_m(c[f"[I{r}V,I{s}V]"] - const * c[f"eps I{6 - r - s}V {r}{s}"]) for r, s in pairs)
        cen = max(_m(c[f"[V,I{r}V]"]) for r in (1, 2, 3))
        central = max(central, cen)
        residuals.append(max(res, cen))
    return residuals, {"structure_constant": const, "central": central}, None


register(CheckSpec(
    "SYM-01", "symmetry",
    Anchor("Lemma (parallelism)", "$V, I_1V, I_2V, I_3V$ are Killing vector fields with respect to the HKT-metric"),
    _sym01, preconditions="HKT; nonzero symmetry form", prepare=_prep(_need_hkt, _need_sym), order=1,
))
register(CheckSpec(
    "SYM-02", "symmetry",
    Anchor("Lemma (diff)", "d{\\hat\\theta}=\\iota_Vc, \\qquad d{\\hat\\theta}_r=\\iota_{I_rV}c."),
    _sym02, preconditions="HKT; nonzero symmetry form", prepare=_prep(_need_hkt, _need_sym), order=1,
))
register(CheckSpec(
    "SYM-03", "symmetry",
    Anchor("Lemma (contraction)", "It is parallel with respect to the Levi-Civita connection $\\hat\\nabla$ of the metric $\\hat g$ if and only if $\\iota_Vc=0$."),
    _sym03, preconditions="HKT; nonzero symmetry form", prepare=_prep(_need_hkt, _need_sym), order=1,
))
register(CheckSpec(
    "SYM-04", "symmetry",
    Anchor("Corollary (d21), Definition (def-d21), Lemma (rotating)", "{\\mathcal L}_V{\\hat{g}}=0, {\\mathcal L}_{I_rV}{\\hat{g}}=0, {\\mathcal L}_{I_rV}I_s=\\epsilon^{rst}I_t ... ${\\mathcal L}_VI_r=0$"),
    _sym04, preconditions="nonzero symmetry form", prepare=_prep(_need_sym), order=1,
))
register(CheckSpec(
    "SYM-05", "symmetry",
    Anchor("Corollary (main corollary) vs Theorem (main)", "Suppose that $-2\\hat\\theta$ is a closed potential 1-form ... Moreover, $\\theta$ is a closed potential 1-form for $\\h{g}$."),
    _sym05, preconditions="HKT; nonzero symmetry form", prepare=_prep(_need_hkt, _need_sym),
    finalize=_sym05_finalize,
))
register(CheckSpec(
    "SYM-06", "symmetry",
    Anchor("Proposition (symmetry)", "the algebra $\\{V\\}\\oplus\\{I_1V, I_2V, I_3V\\}$ is isomorphic to $\\lie{u}(1)\\oplus\\lie{su}(2)$"),
    _sym06, preconditions="nonzero symmetry form", prepare=_prep(_need_sym), finalize=_sym06_finalize,
    tolerance=1e-6, order=1,
))

# -- lcHK ------------------------------------------------------------------------------------------------

_need_lee = _need_field("lee_form", False)
_need_lee_nonzero = _need_field("lee_form", True)


def _lee_rot(at: GeometryAt, order: int) -> list[Jet]:
    return at.quaternionic_forms(at.lee(order))


def _lchk01(pc, geom, ctx):
    at = pc.at(geom)
    th = at.lee(1)
    out = {"dth": _m(exterior_d(th).value)}
    for r in (1, 2, 3):
        out[f"dF{r}-th^F{r}"] = _m(at.dF(r).value - wedge(th.truncate(0), at.F(r)).value)
    return out


def _lchk02(pc, geom, ctx):
    at = pc.at(geom)
    th = _lee_rot(at, 1)
    t0 = [t.truncate(0) for t in th]
    out = {}
    for r in (1, 2, 3):
        dthr = exterior_d(th[r])
        out[f"trei {r}"] = _m(dthr.value - (wedge(t0[0], t0[r]) - at.F(r)).value)
        out[f"I{r}dth{r}=dth{r}"] = _m(at.rotate(r, dthr).value - dthr.value)
        out[f"I{r}dF{r}=th{r}^F{r}"] = _m(at.rotate(r, at.dF(r)).value - wedge(t0[r], at.F(r)).value)
    return out


def _lchk03(pc, geom, ctx):
    at = pc.at(geom)
    th = at.lee(1)
    nabla = covariant_derivative(at.christoffel(0), th, "covector")
    ginv = at.metric_inv().value
    return {"nabla th": _m(nabla.value), "|th|^2-1": abs(float(th.value @ ginv @ th.value) - 1.0)}


def _prep_hat(geom):
    try:
        return {"hat": hkt_from_lchk(geom)}
    except HKTLabError as exc:
        raise PreconditionError(f"HKT transform does not apply: {exc}") from None


def _lchk04(pc, geom, ctx):
    at, hat = pc.at(geom), pc.at(ctx["hat"])
    th = [t.truncate(0) for t in _lee_rot(at, 0)]
    out = {}
    for r in (1, 2, 3):
        _, s, t = cyclic(r)
        expected = at.F(r) - 0.5 * (wedge(th[0], th[r]) + wedge(th[s], th[t]))
        out[f"hat-F{r}"] = _m(hat.F(r).value - expected.value)
        dF_hat = 0.5 * (
            wedge(th[0], at.F(r)) - 2.0 * wedge(wedge(th[0], th[s]), th[t]) + wedge(th[t], at.F(s)) - wedge(th[s], at.F(t))
        )
        out[f"dF-hat {r}"] = _m(hat.dF(r).value - dF_hat.value)
    cubic = 0.5 * (
        wedge(th[1], at.F(1)) + wedge(th[2], at.F(2)) + wedge(th[3], at.F(3)) - 2.0 * wedge(wedge(th[1], th[2]), th[3])
    )
    for r in (1, 2, 3):
        out[f"I{r}dF-hat{r}"] = _m(act(hat.I(r), hat.dF(r)).value - cubic.value)
    return out


def _lchk05(pc, geom, ctx):
    at = pc.at(geom)
    th = _lee_rot(at, 1)
    V = at.lee_field(1)
    IV = [at.rotated_field(r, V) for r in (1, 2, 3)]
    out = {
        "L_V th": _m(lie_tensor(V, th[0], "covector").value),
        "L_V th_r": max(_m(lie_tensor(V, th[r], "covector").value) for r in (1, 2, 3)),
        "L_(I_rV) th": max(_m(lie_tensor(W, th[0], "covector").value) for W in IV),
    }
    rot = 0.0
    for r in (1, 2, 3):
        for s in (1, 2, 3):
            expected = sum(EPS[r - 1, s - 1, t - 1] * th[t].value for t in (1, 2, 3))
            rot = max(rot, _m(lie_tensor(IV[r - 1], th[s], "covector").value - expected))
    out["L_(I_rV) th_s"] = rot
    return out


register(CheckSpec(
    "LCHK-01", "lchk",
    Anchor("Eq. (dFr)", "dF_r=\\theta\\wedge F_r, \\quad r=1,2,3."),
    _lchk01, preconditions="Lee form present", prepare=_prep(_need_lee), order=1,
))
register(CheckSpec(
    "LCHK-02", "lchk",
    Anchor("Eq. (trei) and the two following displays", "d\\theta_r=\\theta\\wedge\\theta_r-F_r ... =d\\theta_r ... I_rdF_r=I_r\\theta\\wedge I_rF_r=\\theta_r\\wedge F_r"),
    _lchk02, preconditions="nonzero Lee form", prepare=_prep(_need_lee_nonzero), order=1,
))
register(CheckSpec(
    "LCHK-03", "lchk",
    Anchor("Hopf manifold example and Lemma (trei) hypotheses", "having the Lee form parallel with respect to the Levi-Civita connection ... Assume that $\\theta$ has unit length."),
    _lchk03, preconditions="nonzero Lee form", prepare=_prep(_need_lee_nonzero), order=1,
))
register(CheckSpec(
    "LCHK-04", "lchk",
    Anchor("Eqs. (hat-F), (dF-hat), (c-theta-F)", "\\h{F}_1=F_1-\\frac{1}{2}\\{\\theta\\wedge\\theta_1+\\theta_2\\wedge\\theta_3\\} ... \\frac{1}{2}\\{\\theta_1\\wedge F_1+\\theta_2\\wedge F_2+\\theta_3\\wedge F_3-2\\theta_1\\wedge \\theta_2\\wedge\\theta_3\\}"),
    _lchk04, preconditions="lcHK with unit parallel Lee form", prepare=_prep(_need_lee_nonzero, _prep_hat), order=1,
))
register(CheckSpec(
    "LCHK-05", "lchk",
    Anchor("Lemma on the Lee field", "{\\mathcal L}_V\\theta=0, \\quad {\\mathcal L}_V\\theta_r=0, \\quad {\\mathcal L}_{I_rV}\\theta=0, \\quad {\\mathcal L}_{I_rV}\\theta_s=\\epsilon^{rst}\\theta_t."),
    _lchk05, preconditions="nonzero Lee form", prepare=_prep(_need_lee_nonzero), order=1,
))

# -- cubic torsion ----------------------------------------------------------------------------------------

_need_sym_any = _need_field("symmetry_form", False)


def _cubic01(pc, geom, ctx):
    at = pc.at(geom)
    return {"c-cubic": _m(at.torsion(0).value - cubic_torsion_jet(at).value)}


def _tau(at: GeometryAt, r: int = 1) -> np.ndarray:
    g = at.metric().value
    return torsion_one_form(at.torsion(0).value, at.I(r).value, orthonormal_frame(g))


def _cubic02(pc, geom, ctx):
    at = pc.at(geom)
    th = at.theta_hat().value
    ginv = at.metric_inv().value
    norm_sq = float(th @ ginv @ th)
    tau = _tau(at)
    coeff = 2 * geom.n - 1 + norm_sq
    out = {"tau-(2m-1+|th|^2)th": _m(tau - coeff * th)}
    if _m(th) > 1e-12:
        out["_measured_coefficient"] = float(tau @ ginv @ th / norm_sq)
    out["r-independence"] = max(_m(_tau(at, r) - tau) for r in (2, 3))
    return out


def _cubic03(pc, geom, ctx):
    at = pc.at(geom)
    th = at.theta_hat().value
    ginv = at.metric_inv().value
    tau = _tau(at)
    tau_sq = float(tau @ ginv @ tau)
    m = geom.n
    # with tau = 0 any lambda satisfies th = lambda tau; fall back to the unit-norm cubic
    scale = tau_sq if tau_sq > 1e-24 else 1.0
    lam = normalized_lambda(m, scale)
    return {
        "lambda relation": abs(lam * (2 * m - 1 + lam * lam * scale) - 1.0),
        "th-lambda tau": _m(th - lam * tau),
        "_lambda": lam,
    }


def _cubic04(pc, geom, ctx):
    at = pc.at(geom)
    V = at.sym_field(0).value
    g = at.metric().value
    return {"g(V,V)-1/2": abs(float(V @ g @ V) - 0.5), "th(V)-1/2": abs(float(at.theta_hat().value @ V) - 0.5)}


def _cubic05(pc, geom, ctx):
    at = pc.at(geom)
    return {"D th": _m(covariant_derivative(at.bismut(0), at.theta_hat(1), "covector").value)}


_hkt_sym_prep = _prep(_need_hkt, _need_sym_any)

register(CheckSpec(
    "CUBIC-01", "cubic",
    Anchor("Lemma (cubic form), Eq. (c-hat)", "c = -(\\hat\\theta_1\\wedge \\hat F_1 + \\hat\\theta_2\\wedge \\hat F_2 + \\hat\\theta_3\\wedge \\hat F_3 - 2\\hat\\theta_1\\wedge\\hat\\theta_2\\wedge\\hat\\theta_3)"),
    _cubic01, preconditions="HKT; symmetry form present", prepare=_hkt_sym_prep, order=1,
))
register(CheckSpec(
    "CUBIC-02", "cubic",
    Anchor("Eq. (htheta-tau)", "\\tau(X)=(2m-1+\\norm{\\hat\\theta}^2){\\hat\\theta}(X)"),
    _cubic02, preconditions="HKT; symmetry form present", prepare=_hkt_sym_prep, order=1,
))
register(CheckSpec(
    "CUBIC-03", "cubic",
    Anchor("Normalised torsion one-form", "Thus \\( {\\hat\\theta} = \\lambda\\tau \\), where \\( \\lambda \\) is the unique real (and positive) solution to the cubic equation \\lambda(2m-1+\\lambda^2) = 1."),
    _cubic03, preconditions="HKT; symmetry form present", prepare=_hkt_sym_prep, order=1,
))
register(CheckSpec(
    "CUBIC-04", "cubic",
    Anchor("Eq. (length)", "\\hat g(V,V)=\\frac12,\\quad\\mbox{or equivalently},\\quad {\\hat\\theta}(V)=\\frac12."),
    _cubic04, preconditions="nonzero symmetry form", prepare=_prep(_need_sym), order=0,
))
register(CheckSpec(
    "CUBIC-05", "cubic",
    Anchor("Theorem (D-parallel)", "The potential 1-form for the HKT-metric ${\\hat g}$ is parallel."),
    _cubic05, preconditions="HKT; symmetry form present", prepare=_hkt_sym_prep, order=1,
))

# -- inverse construction ---------------------------------------------------------------------------------


def _prep_inverse(geom):
    _need_hkt(geom)
    _need_sym(geom)
    try:
        return {"lchk": lchk_from_hkt(geom)}
    except HKTLabError as exc:
        raise PreconditionError(f"inverse transform does not apply: {exc}") from None


def _inv01(pc, geom, ctx):
    out = {f"LCHK-01 {k}": v for k, v in _lchk01(pc, ctx["lchk"], ctx).items()}
    out.update({f"LCHK-03 {k}": v for k, v in _lchk03(pc, ctx["lchk"], ctx).items()})
    return out


def criterion_residuals(at: GeometryAt) -> Components:
    """``I_s B_r + B_r`` for s != r and ``I_r B_r - B_r`` with ``B_r = d th_r - th ^ th_r``."""
    th = _lee_rot(at, 1)
    t0 = th[0].truncate(0)
    out = {}
    for r in (1, 2, 3):
        B = exterior_d(th[r]) - wedge(t0, th[r].truncate(0))
        for s in (1, 2, 3):
            IB = at.rotate(s, B).value
            if s == r:
                out[f"I{s}B{r}-B{r}"] = _m(IB - B.value)
            else:
                out[f"I{s}B{r}+B{r}"] = _m(IB + B.value)
    return out


def _inv02(pc, geom, ctx):
    return criterion_residuals(pc.at(ctx["lchk"]))


def _prep_inv03(geom):
    ctx = _prep_inverse(geom)
    lchk = ctx["lchk"]
    for x in probe_points(geom.dim):
        res = max(_lchk01(PointContext(0, x), lchk, {}).values())
        if res > 1e-8:
            raise PreconditionError(f"inverse transform is not lcHK (residual {res:.3g})")
    return ctx


def _inv03(pc, geom, ctx):
    at, lat = pc.at(geom), pc.at(ctx["lchk"])
    dc = exterior_d(at.torsion(1))
    V = at.sym_field(0)
    span = [V] + [at.rotated_field(r, V) for r in (1, 2, 3)]
    restricted = dc
    for W in span:
        restricted = interior(W, restricted)
    norm = np.sqrt(form_norm_sq(at.metric_inv().value, dc.value))
    out = {
        "dc-expected": _m(dc.value - dc_expected_jet(lat).value),
        "dc on span(V)": abs(float(restricted.value)),
        "_|dc|": float(norm),
    }
    if geom.dim >= 8:
        out["non-strong deficit"] = max(0.0, NONSTRONG_FLOOR - norm)
    return out


register(CheckSpec(
    "INV-01", "inverse",
    Anchor("Theorem (inverse)", "is locally conformally hyperk\\\"ahler with parallel Lee form."),
    _inv01, preconditions="HKT; nonzero D(2,1;-1) symmetry form", prepare=_prep_inverse, order=1,
))
register(CheckSpec(
    "INV-02", "inverse",
    Anchor("Proposition (lcHK criterion)", "if and only if for all $s\\neq r$, $I_s(d\\theta_r-\\theta\\wedge\\theta_r)=-(d\\theta_r-\\theta\\wedge\\theta_r).$"),
    _inv02, preconditions="HKT; nonzero D(2,1;-1) symmetry form", prepare=_prep_inverse, order=1,
))
register(CheckSpec(
    "INV-03", "inverse",
    Anchor("Remark and Proposition on strongness", "the restriction of $dc$ on the quaternionic span of $V$ is equal to zero ... the associated HKT-structure $\\hat g$ is never strong."),
    _inv03, preconditions="inverse transform yields lcHK", prepare=_prep_inv03,
))
