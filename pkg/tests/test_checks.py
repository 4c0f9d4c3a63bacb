import json

import numpy as np
import pytest

from hktlab.checks import (
    ALL_SUITES,
    REGISTRY,
    Anchor,
    CheckSpec,
    get_check,
    register,
    suite_checks,
)
from hktlab.errors import SingularPointError, UnknownCheckError
from hktlab.runner import SampleConfig, evaluate_checks, run_check, run_suite
from hktlab.zoo import build_geometry

EXPECTED_IDS = (
    ["HH-01", "HH-02"]
    + [f"HKT-0{i}" for i in range(1, 5)]
    + [f"SYM-0{i}" for i in range(1, 7)]
    + [f"LCHK-0{i}" for i in range(1, 6)]
    + [f"CUBIC-0{i}" for i in range(1, 6)]
    + [f"INV-0{i}" for i in range(1, 4)]
)
QUICK = SampleConfig(points=6, seed=3)


def test_registry_ids_and_anchors():
    assert sorted(REGISTRY) == sorted(EXPECTED_IDS)
    for spec in REGISTRY.values():
        assert spec.anchor.citation and spec.anchor.quote
        assert spec.tolerance > 0
    assert [s.id for s in suite_checks("paper-all")] == list(REGISTRY)
    covered = [s.id for suite in ALL_SUITES[:-1] for s in suite_checks(suite)]
    assert sorted(covered) == sorted(REGISTRY)


def test_lookup():
    assert get_check("hkt-01").id == "HKT-01"
    with pytest.raises(UnknownCheckError):
        get_check("HKT-99")
    with pytest.raises(KeyError):
        get_check("nope")
    with pytest.raises(UnknownCheckError):
        suite_checks("everything")


def test_register_rejects_duplicates_and_missing_quotes():
    spec = REGISTRY["HKT-01"]
    with pytest.raises(ValueError):
        register(spec)
    with pytest.raises(ValueError):
        register(CheckSpec("X-01", "hkt", Anchor("somewhere", ""), spec.evaluate))


def test_tolerance_monotone():
    geom = build_geometry("hopf-lchk:n=2")
    base = run_check(geom, "HKT-01", QUICK).checks[0]
    assert base.max_residual > 0.1
    for factor, verdict in ((0.5, "fail"), (0.999, "fail"), (1.001, "pass"), (10.0, "pass")):
        cfg = SampleConfig(points=6, seed=3, tol=base.max_residual * factor)
        row = run_check(geom, "HKT-01", cfg).checks[0]
        assert row.verdict == verdict
        assert row.max_residual == base.max_residual


def test_not_hkt_skips_dependent_checks():
    rep = run_suite(build_geometry("hopf-lchk:n=2"), "cubic", QUICK)
    for row in rep.checks:
        assert row.verdict == "skipped"
        assert row.details["reason"].startswith("precondition: ")
        assert row.max_residual is None


def test_flat_lee_form_checks_skip():
    rep = run_suite(build_geometry("flat:n=1"), "lchk", QUICK)
    assert {r.verdict for r in rep.checks} <= {"skipped", "pass"}
    assert rep.by_id("LCHK-03").verdict == "skipped"


def test_jet_order_override_skips():
    rep = run_check(build_geometry("flat:n=1"), "HKT-02", SampleConfig(points=2, jet_order=0))
    row = rep.checks[0]
    assert row.verdict == "skipped" and "jet order" in row.details["reason"]


def test_sym05_picks_minus_sign():
    row = run_check(build_geometry("hopf-hkt:n=1"), "SYM-05", QUICK).checks[0]
    assert row.verdict == "pass"
    assert row.details["winning_sign"] == "-"
    assert row.details["residual_minus"] < 1e-10
    assert row.details["residual_plus"] > 0.5


def test_sym06_structure_constant():
    row = run_check(build_geometry("hopf-hkt:n=2"), "SYM-06", QUICK).checks[0]
    assert row.passed
    assert row.details["structure_constant"] == pytest.approx(1.0, abs=1e-9)
    assert row.details["central"] < 1e-10


def test_point_errors_fail_the_check():
    def evaluate(pc, geom, ctx):
        if pc.index % 2:
            raise SingularPointError("synthetic")
        return {"zero": 0.0, "_info": 5.0}

    spec = CheckSpec("T-01", "hkt", Anchor("test", "synthetic"), evaluate)
    rep = evaluate_checks(build_geometry("flat:n=1"), [spec], SampleConfig(points=4))
    row = rep.checks[0]
    assert row.verdict == "fail"
    assert row.details["errors"]["count"] == 2
    assert row.details["errors"]["first_point"] == 1
    json.loads(rep.to_json())


def test_informational_components_do_not_count():
    spec = CheckSpec("T-02", "hkt", Anchor("test", "synthetic"), lambda pc, g, c: {"a": 1e-12, "_big": 7.0})
    row = evaluate_checks(build_geometry("flat:n=1"), [spec], SampleConfig(points=3)).checks[0]
    assert row.passed
    assert row.details["info"]["big"] == {"min": 7.0, "max": 7.0}


def test_report_rendering():
    rep = run_suite(build_geometry("hopf-hkt:n=1"), "hkt", QUICK)
    data = json.loads(rep.to_json())
    assert data["geometry"] == "hopf-hkt:n=1"
    assert data["config"] == {"points": 6, "seed": 3, "box": [0.5, 1.5], "tol": None, "jet_order": None}
    assert "wall_ms" in data and "wall_ms" not in rep.to_dict(wall=False)
    text = rep.to_text()
    assert "HKT-01" in text and text.splitlines()[-1].startswith("4 passed, 0 failed")


def test_workers_do_not_change_results():
    geom = build_geometry("hopf-hkt:n=1")
    a = run_suite(geom, "symmetry", QUICK).to_json(wall=False)
    b = run_suite(geom, "symmetry", SampleConfig(points=6, seed=3, workers=4)).to_json(wall=False)
    assert a == b


@pytest.mark.parametrize(
    "kwargs", [{"points": 0}, {"box": (0.0, 1.0)}, {"tol": -1.0}, {"jet_order": 4}, {"workers": 0}]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SampleConfig(**kwargs)


def test_seed_changes_points():
    geom = build_geometry("hopf-hkt:n=1")
    a = run_check(geom, "HKT-01", SampleConfig(points=3, seed=1)).checks[0]
    b = run_check(geom, "HKT-01", SampleConfig(points=3, seed=2)).checks[0]
    assert not np.allclose(a.worst_point, b.worst_point)
