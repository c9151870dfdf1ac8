"""Config schema: defaults, typing, rejection of unknown keys."""

import pytest

from ntnlink.config import default_config_text, load_config
from ntnlink.errors import ConfigurationError


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg["link.mod_order"] == 16
    assert cfg["link.code_rate"] == 0.75
    assert cfg["train.batch_size"] == 1024
    assert cfg["run.max_iterations"] == 100_000
    tc = cfg.train_config()
    assert tc.steps_per_epoch == 4
    assert tc.eb_n0_grid_db == tuple(float(v) for v in range(11))
    assert tc.lr_schedule.max_lr == 0.03
    assert tc.patience_epochs == 300
    sc = cfg.scenario_config()
    assert sc.eb_n0_db == 10.0 and sc.channel_profile == "NTN-TDL-C"


def test_file_overrides(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[link]\nmod_order = 64\ncode_rate = 1/2\n"
                 "[run]\nseed = 9\n[train]\nbatch_size = 32\n")
    cfg = load_config(str(p))
    assert cfg["link.mod_order"] == 64
    assert cfg["link.code_rate"] == 0.5
    assert cfg.train_config().seed == 9
    assert cfg.train_config(batch_size=8).batch_size == 8


def test_unknown_key_rejected(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[link]\nmod_oder = 64\n")
    with pytest.raises(ConfigurationError, match="mod_oder"):
        load_config(str(p))


def test_unknown_section_rejected(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[links]\nmod_order = 64\n")
    with pytest.raises(ConfigurationError, match="links"):
        load_config(str(p))


def test_bad_value_rejected(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[train]\nbatch_size = a_lot\n")
    with pytest.raises(ConfigurationError, match="batch_size"):
        load_config(str(p))


def test_semantic_validation(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[link]\nmod_order = 8\n")
    with pytest.raises(ConfigurationError, match="mod_order"):
        load_config(str(p))
    p.write_text("[train]\nmax_lr = 0.0001\n")  # below min_lr
    with pytest.raises(ConfigurationError):
        load_config(str(p))


def test_missing_file():
    with pytest.raises(ConfigurationError):
        load_config("/no/such/file.ini")


def test_default_text_round_trips(tmp_path):
    p = tmp_path / "defaults.ini"
    p.write_text(default_config_text())
    cfg = load_config(str(p))
    assert cfg.snapshot() == load_config(None).snapshot()
