"""Concrete geometries on global charts, and the geometry spec grammar."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import PreconditionError, SpecSyntaxError
from .forms import FormField, TensorField, constant_tensor, zero_form
from .jets import Jet, ScalarField, as_point, contract, coordinate_jet
from .quaternionic import HypercomplexGeometry, hkt_from_lchk, probe_points

KINDS = ("flat", "hopf-lchk", "hopf-hkt", "product")

# quaternion units 1, i, j, k as indices 0..3; _MUL[a][b] = (sign, index) of e_a e_b
_MUL = [
    [(1, 0), (1, 1), (1, 2), (1, 3)],
    [(1, 1), (-1, 0), (1, 3), (-1, 2)],
    [(1, 2), (-1, 3), (-1, 0), (1, 1)],
    [(1, 3), (1, 2), (-1, 1), (-1, 0)],
]


def quaternion_matrix(unit: int, side: str = "left") -> np.ndarray:
    """Real 4x4 matrix of ``q -> u q`` (left) or ``q -> q u`` (right), u in {1, i, j, k}."""
    M = np.zeros((4, 4))
    for b in range(4):
        sign, idx = _MUL[unit][b] if side == "left" else _MUL[b][unit]
        M[idx, b] = sign
    return M


def quaternion_structures(n: int, side: str = "auto") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Block-diagonal ``I_1, I_2, I_3`` on R^{4n} satisfying ``I_1 I_2 = I_3``.

    ``side="auto"`` tries left multiplication first and falls back to right
    multiplication if the composition order produces ``-I_3``.
    """
    sides = ("left", "right") if side == "auto" else (side,)
    for s in sides:
        blocks = [quaternion_matrix(u, s) for u in (1, 2, 3)]
        if np.array_equal(blocks[0] @ blocks[1], blocks[2]):
            eye = np.eye(n)
            return tuple(np.kron(eye, B) for B in blocks)
    raise PreconditionError(f"quaternion action side {side!r} gives I_1 I_2 = -I_3")


def _constant_structures(n: int, side: str = "auto") -> tuple[TensorField, ...]:
    return tuple(constant_tensor("endomorphism", M) for M in quaternion_structures(n, side))


def _radius_sq(X: Jet) -> Jet:
    return contract("a,a->", X, X)


# -- constructors -----------------------------------------------------------------------------

# F_1 = 1/2 (d d_1 + d_2 d_3) mu for mu = FLAT_POTENTIAL_SCALE |x|^2 on flat space
FLAT_POTENTIAL_SCALE = 0.25
# the same identity holds for mu = HOPF_POTENTIAL_SCALE log r^2 on the HKT Hopf cover
HOPF_POTENTIAL_SCALE = 1.0


def flat_hyperkahler(n: int, *, side: str = "auto") -> HypercomplexGeometry:
    """Euclidean R^{4n} with constant quaternionic structures and zero Lee form."""
    if n < 1:
        raise ValueError("n must be >= 1")
    d = 4 * n
    mu = ScalarField(lambda X: FLAT_POTENTIAL_SCALE * _radius_sq(X))
    return HypercomplexGeometry(
        n=n,
        metric=constant_tensor("metric", np.eye(d)),
        structures=_constant_structures(n, side),
        label=f"flat:n={n}",
        kind="flat",
        lee_form=zero_form(1),
        symmetry_form=zero_form(1),
        potential_form=FormField(1, lambda X: 2.0 * FLAT_POTENTIAL_SCALE * X),
        potential=mu,
    )


def _hopf_fields(kappa: float):
    def metric(X: Jet) -> Jet:
        d = X.shape[0]
        return Jet.constant(kappa * np.eye(d), X.dim, X.order) * _radius_sq(X).recip()

    def lee(X: Jet) -> Jet:
        # -d log r^2 written out so the jet keeps its order
        return -2.0 * X * _radius_sq(X).recip()

    return metric, lee


def hopf_homothety(n: int) -> float:
    """Constant kappa with ``|d log r^2|`` of unit length for ``kappa r^-2 g_flat``; measured, not assumed."""
    metric, lee = _hopf_fields(1.0)
    vals = []
    for x in probe_points(4 * n):
        X = coordinate_jet(x, 0)
        th = lee(coordinate_jet(x, 1)).value
        vals.append(th @ np.linalg.solve(metric(X).value, th))
    vals = np.array(vals)
    if np.ptp(vals) > 1e-12 * vals.max():
        raise PreconditionError("norm of the Lee form is not constant on the unscaled cover")
    return float(vals.mean())


def hopf_lchk_cover(n: int, *, side: str = "auto", kappa: float | None = None) -> HypercomplexGeometry:
    """Cover R^{4n} \\ 0 of the quaternionic Hopf manifold with its lcHK metric."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kappa = hopf_homothety(n) if kappa is None else float(kappa)
    metric, lee = _hopf_fields(kappa)
    return HypercomplexGeometry(
        n=n,
        metric=TensorField("metric", metric),
        structures=_constant_structures(n, side),
        label=f"hopf-lchk:n={n}",
        kind="lchk",
        lee_form=FormField(1, lee),
        deck_invariant=True,
    )


def hopf_hkt(n: int, *, side: str = "auto") -> HypercomplexGeometry:
    src = hopf_lchk_cover(n, side=side)
    mu = ScalarField(lambda X: HOPF_POTENTIAL_SCALE * _radius_sq(X).log())
    out = hkt_from_lchk(src, potential=mu)
    return replace(out, label=f"hopf-hkt:n={n}")


def product_hkt(a: HypercomplexGeometry, b: HypercomplexGeometry) -> HypercomplexGeometry:
    """``1/2 (g_a + g_b)`` on the concatenated chart with ``th = 1/2 (th_a, th_b)``."""
    for f in (a, b):
        if f.symmetry_form is None or f.kind not in ("hkt", "product"):
            raise PreconditionError(f"factor {f.label!r} is not HKT with a symmetry field")
    da = a.dim

    def split(X: Jet) -> tuple[Jet, Jet]:
        return X[:da], X[da:]

    def metric(X: Jet) -> Jet:
        xa, xb = split(X)
        return 0.5 * Jet.block_diag(a.metric(xa), b.metric(xb))

    def structure(r: int) -> TensorField:
        Ia, Ib = a.structures[r], b.structures[r]
        return TensorField("endomorphism", lambda X: Jet.block_diag(Ia(split(X)[0]), Ib(split(X)[1])))

    def half_concat(fa: FormField, fb: FormField) -> FormField:
        return FormField(1, lambda X: 0.5 * Jet.concatenate([fa(split(X)[0]), fb(split(X)[1])]))

    potential = None
    if a.potential is not None and b.potential is not None:
        potential = ScalarField(lambda X: 0.5 * (a.potential(split(X)[0]) + b.potential(split(X)[1])))
    pot_form = None
    if a.potential_form is not None and b.potential_form is not None:
        pot_form = half_concat(a.potential_form, b.potential_form)
    return HypercomplexGeometry(
        n=a.n + b.n,
        metric=TensorField("metric", metric),
        structures=tuple(structure(r) for r in range(3)),
        label=f"product:{a.label},{b.label}",
        kind="product",
        symmetry_form=half_concat(a.symmetry_form, b.symmetry_form),
        potential_form=pot_form,
        potential=potential,
        deck_invariant=a.deck_invariant and b.deck_invariant,
    )


# -- deck transformation --------------------------------------------------------------------------


@dataclass(frozen=True)
class DeckTransformation:
    """Linear map ``q -> factor * q`` on every quaternionic coordinate."""

    factor: float = 2.0

    def __call__(self, x) -> np.ndarray:
        return self.factor * np.asarray(x, dtype=float)


def deck_invariance_residual(geom: HypercomplexGeometry, x, deck: DeckTransformation = DeckTransformation()) -> float:
    """max-abs of (pullback - value) over metric, Lee/symmetry forms and structures."""
    x = as_point(x)
    if not np.any(x):
        raise ValueError("deck invariance is evaluated away from the origin")
    s = deck.factor
    X0, X1 = coordinate_jet(x, 0), coordinate_jet(deck(x), 0)
    res = float(np.max(np.abs(s * s * geom.metric(X1).value - geom.metric(X0).value)))
    for I in geom.structures:
        res = max(res, float(np.max(np.abs(I(X1).value - I(X0).value))))
    for fld in (geom.lee_form, geom.symmetry_form):
        if fld is not None:
            res = max(res, float(np.max(np.abs(s * fld(X1).value - fld(X0).value))))
    return res


# -- spec grammar -------------------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometrySpec:
    kind: str
    n: int = 1
    factors: tuple = ()
    side: str = "auto"
    homothety: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecSyntaxError(f"unknown geometry kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind == "product":
            if len(self.factors) != 2:
                raise SpecSyntaxError("product takes exactly two factors")
            if any(f.kind == "product" for f in self.factors):
                raise SpecSyntaxError("nested products are not supported")
        elif self.n < 1:
            raise SpecSyntaxError("n must be >= 1")

    def __str__(self) -> str:
        if self.kind == "product":
            return "product:" + ",".join(str(f) for f in self.factors)
        return f"{self.kind}:n={self.n}"


_SIMPLE = re.compile(r"^(flat|hopf-lchk|hopf-hkt):n=([1-9][0-9]*)$")


def parse_geometry_spec(text: str) -> GeometrySpec:
    """Parse ``flat:n=1``, ``hopf-lchk:n=2``, ``hopf-hkt:n=1`` or ``product:<spec>,<spec>``."""
    text = text.strip().replace(" ", "")
    if text.startswith("product:"):
        parts = text[len("product:") :].split(",")
        if len(parts) != 2:
            raise SpecSyntaxError(f"product expects two comma-separated factors, got {text!r}")
        return GeometrySpec("product", factors=tuple(parse_geometry_spec(p) for p in parts))
    m = _SIMPLE.match(text)
    if not m:
        raise SpecSyntaxError(f"cannot parse geometry spec {text!r}")
    return GeometrySpec(m.group(1), int(m.group(2)))


def build_geometry(spec: GeometrySpec | str) -> HypercomplexGeometry:
    if isinstance(spec, str):
        spec = parse_geometry_spec(spec)
    if spec.kind == "flat":
        return flat_hyperkahler(spec.n, side=spec.side)
    if spec.kind == "hopf-lchk":
        return hopf_lchk_cover(spec.n, side=spec.side, kappa=spec.homothety)
    if spec.kind == "hopf-hkt":
        return hopf_hkt(spec.n, side=spec.side)
    return product_hkt(*(build_geometry(f) for f in spec.factors))
