import os

import pytest

import resonalens
from core.errors import SolverError

pytestmark = pytest.mark.integration

CONFIGS_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


@pytest.fixture(autouse=True)
def _log_to_tmp(tmp_path, monkeypatch):
    monkeypatch.setattr(resonalens.config, "LOG_FILE", str(tmp_path / "resonalens.log"))


def test_oracle_command(capsys):
    assert resonalens.main(["oracle", "--n", "2", "--rb", "1.0"]) == resonalens.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    re, im, residual = lines[1].split()
    assert float(re) == pytest.approx(3 ** 0.5 / 2)
    assert float(im) == pytest.approx(-1.5)
    assert float(residual) <= 1e-10


def test_validate_command(tmp_path, capsys):
    good = os.path.join(CONFIGS_DIR, "truncation.toml")
    assert resonalens.main(["validate", good]) == resonalens.EXIT_OK
    assert "OK" in capsys.readouterr().out

    bad = tmp_path / "bad.toml"
    bad.write_text('[study]\ntype = "nothing"\n', encoding="utf-8")
    assert resonalens.main(["validate", str(bad)]) == resonalens.EXIT_CONFIG


def test_run_command_writes_report(tmp_path, capsys):
    out = tmp_path / "report"
    code = resonalens.main(["run", os.path.join(CONFIGS_DIR, "verify_annulus.toml"),
                            "--out", str(out), "--jobs", "1", "--check"])
    assert code == resonalens.EXIT_OK
    assert (out / "rows.csv").is_file()
    assert (out / "summary.csv").is_file()
    assert (out / "verify-annulus_n0_0.dat").is_file()
    printed = capsys.readouterr().out
    assert str(out / "rows.csv") in printed


def test_run_failure_exit_code(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise SolverError("сбой")

    monkeypatch.setattr("studies.base.resonances", broken)
    code = resonalens.main(["run", os.path.join(CONFIGS_DIR, "verify_annulus.toml"),
                            "--out", str(tmp_path / "r"), "--jobs", "1"])
    assert code == resonalens.EXIT_NUMERICAL
