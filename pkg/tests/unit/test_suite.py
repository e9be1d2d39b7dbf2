import json
import os
import sys

import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import suite
from core.errors import ConfigError, DomainError
from core.report_writer import load_report
from core.reports import FAIL, INCONCLUSIVE, PASS
from tests.fixtures.builders import small_settings


def _raising_job(seed, settings):
    raise DomainError("alpha must lie in (0, 1)")


def test_suite_verdict_precedence():
    assert suite.suite_verdict([PASS, PASS]) == PASS
    assert suite.suite_verdict([PASS, INCONCLUSIVE]) == INCONCLUSIVE
    assert suite.suite_verdict([INCONCLUSIVE, FAIL]) == FAIL
    assert suite.suite_verdict([FAIL, suite.ERROR, PASS]) == suite.ERROR


def test_run_job_captures_exceptions(monkeypatch, tmp_path):
    monkeypatch.setitem(suite.JOBS, "boom", _raising_job)
    with patch('builtins.print') as mock_print, patch('traceback.print_exc'):
        outcome = suite.run_job("boom", 1, small_settings(tmp_path))
    assert outcome["status"] == suite.ERROR
    assert outcome["result"] is None
    assert outcome["error"] == "DomainError: alpha must lie in (0, 1)"
    assert any("❌" in str(call) for call in mock_print.call_args_list)


def test_run_job_reports_verdict(tmp_path):
    with patch('builtins.print'):
        outcome = suite.run_job("constants", 1, small_settings(tmp_path))
    assert outcome["status"] == PASS
    assert outcome["result"].name == "constants"
    assert outcome["result"].summary["table"]


def test_unknown_jobs_are_rejected(tmp_path):
    with pytest.raises(ConfigError):
        suite.run_suite(small_settings(tmp_path), tmp_path, jobs=["constants", "nope"])


def test_run_suite_writes_job_reports_and_summary(tmp_path):
    with patch('builtins.print'):
        verdict, jobs = suite.run_suite(small_settings(tmp_path), tmp_path, jobs=["constants", "tightness"])
    assert verdict == PASS
    assert [j["job"] for j in jobs] == ["constants", "tightness"]
    assert jobs[0]["seed"] != jobs[1]["seed"]
    assert load_report(tmp_path / "constants.json")["verdict"] == PASS
    summary = load_report(tmp_path / "suite_summary.json")
    assert summary["config"]["verdict"] == PASS
    assert [j["path"] for j in summary["experiments"][0]["summary"]["jobs"]] == ["constants.json",
                                                                              "tightness.json"]


def test_job_error_sets_suite_verdict(monkeypatch, tmp_path):
    monkeypatch.setitem(suite.JOBS, "boom", _raising_job)
    with patch('builtins.print'), patch('traceback.print_exc'):
        verdict, jobs = suite.run_suite(small_settings(tmp_path), tmp_path, jobs=["constants", "boom"])
    assert verdict == suite.ERROR
    assert jobs[1]["path"] is None
    assert not (tmp_path / "boom.json").exists()
    data = json.loads((tmp_path / "suite_summary.json").read_text(encoding="utf-8"))
    assert data["experiments"][0]["summary"]["jobs"][1]["status"] == suite.ERROR


def test_job_seeds_do_not_depend_on_selection(tmp_path):
    with patch('builtins.print'):
        _, alone = suite.run_suite(small_settings(tmp_path / "a"), tmp_path / "a", jobs=["tightness"])
        _, both = suite.run_suite(small_settings(tmp_path / "b"), tmp_path / "b", jobs=["constants", "tightness"])
    assert alone[0]["seed"] == both[1]["seed"]
