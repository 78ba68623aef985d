import os
from dataclasses import replace

import numpy as np
import pytest

from core.errors import SolverError, SweepPointError, ValidationError
from studies import check_report, run_study, validate_config
from studies.runner import create_study

CONFIGS_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def _config(name):
    return validate_config(os.path.join(CONFIGS_DIR, f"{name}.toml"))


def _summary(report, model=None):
    return [row for row in report.summary if model is None or row.model == model]


def _write(tmp_path, text):
    path = tmp_path / "study.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_verify_annulus_converges_at_rate_four():
    report = run_study(_config("verify_annulus"), jobs=1)
    (row,) = report.summary
    assert row.oracle_re == pytest.approx(np.pi)
    assert row.missed == 0
    assert row.slope == pytest.approx(4.0, abs=0.5)
    assert row.r_squared >= 0.98
    assert row.value <= 1e-6
    assert len(report.rows) == 4
    assert all(check.passed for check in check_report(_config("verify_annulus"), report))


def test_rows_are_sorted():
    report = run_study(_config("verify_annulus"), jobs=1)
    keys = [row.sort_key() for row in report.rows]
    assert keys == sorted(keys)


def test_coercivity_marks_essential_line(tmp_path):
    path = _write(tmp_path, """
[study]
type = "coercivity"
modes = [0]

[profile]
kind = "affine"
alpha0 = 1.0

[domain]
r_b = 1.0
R = 4.0

[sweep]
elements = [12]

[coercivity]
refine = false
omegas = [[1.0, 0.0], [0.7071067811865476, -0.7071067811865476]]
""")
    report = run_study(validate_config(path), jobs=1)
    statuses = [row.status for row in report.summary]
    assert statuses == ["pass", "domain-error"]
    assert report.summary[0].tracked.startswith("lower:")
    assert report.summary[0].value > -1e-8


def test_point_failure_names_the_point(monkeypatch):
    def broken(*args, **kwargs):
        raise SolverError("QZ не сошёлся")

    monkeypatch.setattr("studies.base.resonances", broken)
    cfg = _config("verify_annulus")
    with pytest.raises(SweepPointError) as info:
        run_study(cfg, jobs=1)
    assert info.value.study == cfg.name
    assert info.value.n == 0
    assert info.value.param_name == "h"
    assert isinstance(info.value.cause, SolverError)


def test_unknown_study_and_bad_jobs():
    cfg = _config("verify_annulus")
    with pytest.raises(ValidationError):
        create_study(replace(cfg, study="bogus"))
    with pytest.raises(ValidationError):
        run_study(cfg, jobs=0)


def test_exact_study_has_agreement_point():
    cfg = _config("exact_log")
    points = create_study(cfg).sweep_points()
    compare = [p for p in points if p.param_name == "beta"]
    assert len(compare) == 1
    assert compare[0].extra["map"].kind == "power-beta"
    assert compare[0].extra["map"].beta == -0.5


def test_commutator_points_share_symbol():
    study = create_study(_config("commutator"))
    points = study.sweep_points()
    assert [p.extra["level"] for p in points] == [0, 1, 2, 3, 4]
    hs = [p.param_value for p in points]
    assert hs == pytest.approx([hs[0] / 2 ** k for k in range(5)])
    assert len({id(p.extra["symbol"]) for p in points}) == 1


@pytest.mark.slow
def test_parallel_run_matches_serial():
    cfg = _config("verify_annulus")
    serial = run_study(cfg, jobs=1)
    parallel = run_study(cfg, jobs=2)
    assert serial.rows == parallel.rows
    assert serial.summary == parallel.summary


@pytest.mark.slow
def test_truncation_error_decays_exponentially():
    cfg = _config("truncation")
    report = run_study(cfg, jobs=1)
    (row,) = _summary(report, "exponential")
    assert row.missed == 0
    assert row.log_slope < 0
    assert row.r_squared >= 0.9
    (points,) = report.series.values()
    assert points[0][1] / points[-1][1] >= 10
    assert all(check.passed for check in check_report(cfg, report))


@pytest.mark.slow
@pytest.mark.parametrize("name, degree", [("mesh_p1", 1), ("mesh_p2", 2)])
def test_mesh_refinement_rate(name, degree):
    cfg = _config(name)
    report = run_study(cfg, jobs=1)
    (row,) = _summary(report, "algebraic")
    assert row.slope == pytest.approx(2 * degree, abs=0.6)
    assert row.r_squared >= 0.95
    assert all(check.passed for check in check_report(cfg, report))


@pytest.mark.slow
def test_diagonal_sweep_decreases():
    cfg = _config("diagonal")
    report = run_study(cfg, jobs=1)
    (row,) = report.summary
    assert row.status == "decreasing"
    assert row.value <= 1e-3


@pytest.mark.slow
def test_commutator_rate_is_first_order():
    cfg = _config("commutator")
    report = run_study(cfg, jobs=1)
    (row,) = report.summary
    assert row.status == "decreasing"
    assert row.slope == pytest.approx(1.0, abs=0.3)


@pytest.mark.slow
@pytest.mark.parametrize("alpha0", [1.0, 3.0])
def test_coercivity_certificates_pass(tmp_path, alpha0):
    path = _write(tmp_path, f"""
[study]
type = "coercivity"
modes = [0, 2]

[profile]
kind = "affine"
alpha0 = {alpha0}

[domain]
r_b = 1.0
R = 4.0

[sweep]
elements = [16]
""")
    report = run_study(validate_config(path), jobs=1)
    assert len(report.summary) == 24
    assert all(row.status == "pass" for row in report.summary), [
        (row.tracked, row.value) for row in report.summary if row.status != "pass"]


@pytest.mark.slow
def test_exact_method_converges_and_maps_agree():
    cfg = _config("exact_log")
    report = run_study(cfg, jobs=1)
    (sweep,) = _summary(report, "algebraic")
    assert sweep.missed == 0
    assert sweep.value <= 1e-2
    (agreement,) = _summary(report, "agreement")
    assert agreement.value <= 5e-3
    assert all(check.passed for check in check_report(cfg, report))
