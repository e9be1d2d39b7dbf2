import json
import os
import sys

import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import run_config
from core.errors import ConfigError


def test_defaults_are_complete():
    settings = run_config.ensure_complete_settings(None)
    assert settings == run_config.get_default_settings()
    assert settings["confidence"] == 0.95
    assert settings["equality_confidence"] == 0.999


def test_partial_settings_are_filled_and_coerced():
    settings = run_config.ensure_complete_settings({"samples": "2000", "confidence": 0.9, "workers": None})
    assert settings["samples"] == 2000
    assert settings["confidence"] == 0.9
    assert settings["workers"] == 1
    assert settings["batches"] == 32


@pytest.mark.parametrize("bad", [
    {"unknown_key": 1},
    {"samples": 0},
    {"batches": 1},
    {"confidence": 1.0},
    {"samples": 2.5},
    {"samples": "many"},
    {"output_format": "xml"},
])
def test_invalid_settings(bad):
    with pytest.raises(ConfigError):
        run_config.ensure_complete_settings(bad)


def test_settings_must_be_a_mapping():
    with pytest.raises(ConfigError):
        run_config.ensure_complete_settings([1, 2])


def test_output_dir_from_environment(monkeypatch):
    monkeypatch.setenv(run_config.OUTPUT_DIR_ENV, "/tmp/elsewhere")
    assert run_config.get_default_settings()["output_dir"] == "/tmp/elsewhere"
    monkeypatch.delenv(run_config.OUTPUT_DIR_ENV)
    assert run_config.get_default_settings()["output_dir"] == run_config.DEFAULT_OUTPUT_DIR


def test_load_run_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"samples": 500, "master_seed": 9}), encoding="utf-8")
    with patch('builtins.print') as mock_print:
        settings = run_config.load_run_config(path)
    assert settings["samples"] == 500
    assert settings["master_seed"] == 9
    mock_print.assert_any_call(f"[CONFIG] Loaded 2 settings from {path}")


def test_load_run_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        run_config.load_run_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        run_config.load_run_config(broken)


def test_run_config_output_path_and_echo(tmp_path):
    settings = run_config.ensure_complete_settings({"output_dir": str(tmp_path), "output_format": "csv"})
    config = run_config.RunConfig(subcommand="verify-pareto", params={"lam": 5.0}, settings=settings)
    assert config.resolve_output_path() == tmp_path / "verify-pareto.csv"
    assert config.master_seed == 1
    echo = config.as_dict()
    assert "output_dir" not in echo["settings"]
    assert echo["params"] == {"lam": 5.0}
    explicit = run_config.RunConfig(subcommand="x", settings=settings, output_path=str(tmp_path / "a.json"))
    assert explicit.resolve_output_path() == tmp_path / "a.json"
