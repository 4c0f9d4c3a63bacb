"""Sampling, parallel evaluation and report assembly."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .checks import CheckSpec, PointContext, get_check, suite_checks
from .errors import HKTLabError, PreconditionError
from .jets import DEFAULT_BOX, MAX_ORDER, sample_points
from .quaternionic import HypercomplexGeometry


@dataclass(frozen=True)
class SampleConfig:
    points: int = 100
    seed: int = 42
    box: tuple = DEFAULT_BOX
    tol: float | None = None
    jet_order: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("point count must be >= 1")
        lo, hi = self.box
        if not 0 < lo < hi:
            raise ValueError(f"box must satisfy 0 < lo < hi, got {self.box}")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.jet_order is not None and not 0 <= self.jet_order <= MAX_ORDER:
            raise ValueError(f"jet order must lie in 0..{MAX_ORDER}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def echo(self) -> dict:
        """Configuration as reported; worker count is excluded so reports do not depend on it."""
        return {"points": self.points, "seed": self.seed, "box": list(self.box), "tol": self.tol, "jet_order": self.jet_order}


@dataclass
class CheckResult:
    id: str
    anchor: str
    verdict: str
    max_residual: float | None
    mean_residual: float | None
    worst_point: list | None
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass
class VerificationReport:
    geometry: str
    config: dict
    checks: list[CheckResult]
    wall_ms: float = 0.0

    @property
    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if c.verdict == "fail"]

    @property
    def all_passed(self) -> bool:
        return not self.failed

    def by_id(self, check_id: str) -> CheckResult:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    def to_dict(self, *, wall: bool = True) -> dict:
        out = {"geometry": self.geometry, "config": self.config, "checks": [asdict(c) for c in self.checks]}
        if wall:
            out["wall_ms"] = self.wall_ms
        return _sanitize(out)

    def to_json(self, *, wall: bool = True, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(wall=wall), indent=indent, allow_nan=False)

    def to_text(self) -> str:
        rows = [("check", "verdict", "max residual", "tolerance", "anchor")]
        for c in self.checks:
            res = "-" if c.max_residual is None else f"{c.max_residual:.3e}"
            note = c.details.get("reason", c.anchor.split(":")[0]) if c.verdict == "skipped" else c.anchor.split(":")[0]
            rows.append((c.id, c.verdict, res, f"{c.tolerance:.0e}", note))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = [f"geometry: {self.geometry}"]
        for r in rows:
            lines.append("  ".join(r[i].ljust(widths[i]) for i in range(4)) + "  " + r[4])
        n_pass = sum(c.verdict == "pass" for c in self.checks)
        n_skip = sum(c.verdict == "skipped" for c in self.checks)
        lines.append(f"{n_pass} passed, {len(self.failed)} failed, {n_skip} skipped in {self.wall_ms:.0f} ms")
        return "\n".join(lines)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# -- evaluation --------------------------------------------------------------------------------


def _scalar_items(comps: dict):
    for k, v in comps.items():
        if isinstance(v, (float, int, np.floating)) and not isinstance(v, bool):
            yield k, float(v)


def _point_residual(comps: dict) -> float:
    vals = [v for k, v in _scalar_items(comps) if not k.startswith("_")]
    return max(vals) if vals else 0.0


def _skipped(spec: CheckSpec, tol: float, reason: str) -> CheckResult:
    return CheckResult(spec.id, str(spec.anchor), "skipped", None, None, None, tol, {"reason": f"precondition: {reason}"})


def _aggregate(spec: CheckSpec, comps: list[dict], errors: list, points: np.ndarray, tol: float) -> CheckResult:
    verdict = None
    extra: dict = {}
    if any(errors):
        residuals = [math.inf if err else _point_residual(c) for c, err in zip(comps, errors)]
    elif spec.finalize is not None:
        residuals, extra, verdict = spec.finalize(comps, tol)
    else:
        residuals = [_point_residual(c) for c in comps]
    res = np.asarray(residuals, dtype=float)
    worst = int(np.argmax(res))
    max_res = float(res[worst])
    if verdict is None:
        verdict = "pass" if max_res <= tol else "fail"
    components: dict = {}
    info: dict = {}
    for c in comps:
        for k, v in _scalar_items(c):
            if k.startswith("_"):
                lo, hi = info.get(k[1:], (v, v))
                info[k[1:]] = (min(lo, v), max(hi, v))
            else:
                components[k] = max(components.get(k, v), v)
    details = {"components": components}
    if info:
        details["info"] = {k: {"min": lo, "max": hi} for k, (lo, hi) in info.items()}
    details.update(extra)
    bad = [(i, e) for i, e in enumerate(errors) if e]
    if bad:
        details["errors"] = {"count": len(bad), "first_point": bad[0][0], "message": bad[0][1]}
    return CheckResult(
        spec.id,
        str(spec.anchor),
        verdict,
        max_res,
        float(res.mean()),
        points[worst].tolist(),
        tol,
        details,
    )


def evaluate_checks(geom: HypercomplexGeometry, specs: list[CheckSpec], cfg: SampleConfig, label: str | None = None) -> VerificationReport:
    start = time.perf_counter()
    points = sample_points(geom.dim, cfg.points, cfg.seed, tuple(cfg.box))
    results: dict[str, CheckResult] = {}
    active: list[tuple[CheckSpec, dict, float]] = []
    for spec in specs:
        tol = cfg.tol if cfg.tol is not None else spec.tolerance
        if cfg.jet_order is not None and cfg.jet_order < spec.order:
            results[spec.id] = _skipped(spec, tol, f"needs jet order {spec.order}")
            continue
        try:
            ctx = spec.prepare(geom) if spec.prepare else {}
        except PreconditionError as exc:
            results[spec.id] = _skipped(spec, tol, str(exc))
            continue
        ctx["tol"] = tol
        active.append((spec, ctx, tol))

    def work(item):
        index, x = item
        pc = PointContext(index, x)
        row = []
        for spec, ctx, _ in active:
            try:
                row.append((spec.evaluate(pc, geom, ctx), None))
            except (HKTLabError, ArithmeticError) as exc:
                row.append(({}, f"{type(exc).__name__}: {exc}"))
        return row

    if cfg.workers == 1:
        rows = [work(item) for item in enumerate(points)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(work, enumerate(points)))

    for j, (spec, _, tol) in enumerate(active):
        comps = [row[j][0] for row in rows]
        errors = [row[j][1] for row in rows]
        results[spec.id] = _aggregate(spec, comps, errors, points, tol)

    ordered = [results[s.id] for s in specs]
    wall = (time.perf_counter() - start) * 1e3
    return VerificationReport(label or geom.label, cfg.echo(), ordered, wall)


def run_check(geom: HypercomplexGeometry, check_id: str, cfg: SampleConfig | None = None, *, label: str | None = None) -> VerificationReport:
    return evaluate_checks(geom, [get_check(check_id)], cfg or SampleConfig(), label)


def run_suite(geom: HypercomplexGeometry, suite: str, cfg: SampleConfig | None = None, *, label: str | None = None) -> VerificationReport:
    return evaluate_checks(geom, suite_checks(suite), cfg or SampleConfig(), label)
