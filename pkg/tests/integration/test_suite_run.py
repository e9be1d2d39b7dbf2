import os
import sys

from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core.cli import EXIT_ERROR, EXIT_PASS, run
from core.report_writer import load_report

ARGV = ["suite", "--jobs", "constants,lemmas,tightness", "--samples", "4000", "--batches", "8", "--seed", "21"]


def test_suite_subset_is_reproducible(tmp_path):
    with patch('builtins.print'):
        assert run(ARGV + ["--output", str(tmp_path / "a")]) == EXIT_PASS
        assert run(ARGV + ["--output", str(tmp_path / "b")]) == EXIT_PASS
    for name in ("constants.json", "lemmas.json", "tightness.json", "suite_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = load_report(tmp_path / "a" / "suite_summary.json")
    assert [j["status"] for j in summary["experiments"][0]["summary"]["jobs"]] == ["pass"] * 3


def test_suite_rejects_unknown_jobs(tmp_path):
    with patch('builtins.print'):
        assert run(["suite", "--jobs", "constants,nope", "--output", str(tmp_path)]) == EXIT_ERROR
