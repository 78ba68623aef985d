import glob
import os
from importlib import reload

import pytest

import config as cfg_module
from core.errors import ConfigError, UnsupportedCombinationError
from studies import validate_config

CONFIGS_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def _write(tmp_path, text, name="study.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def restore_config():
    yield
    reload(cfg_module)


def test_environment_settings(monkeypatch, restore_config):
    monkeypatch.setenv("RESONALENS_RECORD_RUNTIME", "1")
    monkeypatch.setenv("RESONALENS_JOBS", "3")
    monkeypatch.setenv("RESONALENS_OUTPUT_DIR", "out-dir")
    reload(cfg_module)
    assert cfg_module.config.RECORD_RUNTIME is True
    assert cfg_module.config.JOBS == 3
    assert cfg_module.config.OUTPUT_DIR == "out-dir"
    monkeypatch.delenv("RESONALENS_RECORD_RUNTIME")
    monkeypatch.delenv("RESONALENS_JOBS")
    reload(cfg_module)
    assert cfg_module.config.RECORD_RUNTIME is False
    assert cfg_module.config.JOBS == 1


def test_ensure_output_directory(tmp_path):
    target = tmp_path / "a" / "b"
    assert cfg_module.ensure_output_directory(str(target)) == str(target)
    assert target.is_dir()


def test_minimal_truncation_config_gets_defaults(tmp_path):
    path = _write(tmp_path, """
[study]
type = "truncation"

[profile]
kind = "affine"

[domain]
r_b = 1.0

[sweep]
R = [2.0, 3.0, 4.0]
h = 0.1
""")
    cfg = validate_config(path)
    assert cfg.study == "truncation"
    assert cfg.name == "truncation"
    assert cfg.modes == [0]
    assert cfg.degree == 2
    assert cfg.sector == "lower"
    assert cfg.margin == 0.05
    assert cfg.tolerance == 1e-8
    assert cfg.match_radius == 0.05
    assert cfg.R_list == [2.0, 3.0, 4.0]
    assert cfg.h_list == [0.1]
    assert cfg.window is None
    assert cfg.reference == "oracle"
    assert cfg.reference_factor == 2
    assert cfg.profile.alpha0 == 1.0 and cfg.profile.r1_star == 1.0


def test_verify_annulus_defaults_to_unscaled(tmp_path):
    path = _write(tmp_path, """
[study]
type = "verify-annulus"

[domain]
r_b = 1.0
R = 2.0

[sweep]
elements = [4, 8, 16]
""")
    cfg = validate_config(path)
    assert cfg.profile.kind == "unscaled"
    assert cfg.sector == "all"


def test_diagonal_length_mismatch_names_both_keys(tmp_path):
    path = _write(tmp_path, """
[study]
type = "diagonal"

[profile]
kind = "affine"

[domain]
r_b = 1.0

[sweep]
R = [2.0, 3.0, 4.0]
h = [0.5, 0.25]
""")
    with pytest.raises(ConfigError) as info:
        validate_config(path)
    assert any("sweep.R" in v and "sweep.h" in v for v in info.value.violations)


def test_exact_with_power_profile_is_unsupported(tmp_path):
    path = _write(tmp_path, """
[study]
type = "exact"

[profile]
kind = "power"
m = 2

[domain]
r_b = 1.0

[sweep]
elements = [8, 16, 32]

[exact]
kind = "log"
r2_star = 2.0
""")
    with pytest.raises(UnsupportedCombinationError):
        validate_config(path)


def test_all_violations_reported_together(tmp_path):
    path = _write(tmp_path, """
[study]
type = "truncation"
modes = [-1]

[profile]
kind = "bogus"
alpha0 = -1.0

[domain]

[extras]
x = 1
""")
    with pytest.raises(ConfigError) as info:
        validate_config(path)
    keys = [v.split(":")[0] for v in info.value.violations]
    for key in ("extras", "profile.kind", "profile.alpha0", "study.modes", "domain.r_b", "sweep.R", "sweep.h"):
        assert key in keys, (key, info.value.violations)


def test_commutator_requires_doubling_elements(tmp_path):
    path = _write(tmp_path, """
[study]
type = "commutator"

[profile]
kind = "power"
m = 2

[domain]
r_b = 1.0
R = 4.0

[sweep]
elements = [12, 24, 36]

[symbol]
r_hat1 = 1.5
r_hat2 = 3.5
""")
    with pytest.raises(ConfigError) as info:
        validate_config(path)
    assert any(v.startswith("sweep.elements") for v in info.value.violations)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        validate_config(str(tmp_path / "absent.toml"))
    with pytest.raises(ConfigError):
        validate_config(_write(tmp_path, "[study\ntype = ", name="broken.toml"))


def test_shipped_configs_validate():
    paths = sorted(glob.glob(os.path.join(CONFIGS_DIR, "*.toml")))
    assert paths
    for path in paths:
        cfg = validate_config(path)
        assert cfg.source == os.path.abspath(path)
