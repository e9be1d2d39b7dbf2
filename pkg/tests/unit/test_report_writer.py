import json
import os
import sys

import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import report_writer
from core.errors import ReportIntegrityError
from core.experiments import ExperimentResult
from core.reports import FAIL, PASS, bound_report


def _results():
    ok = bound_report("t", "ok", 1.0, 2.0, seed=3, samples=10)
    unbounded = bound_report("t", "unbounded", 1.0, float("inf"))
    rows = [[4, 0.5, 0.4, 0.6, 2.0], [16, 0.7, 0.6, 0.8, 4.0]]
    return [ExperimentResult(name="demo", reports=[ok, unbounded], plot_rows=rows, summary={"slope": 0.5})]


@pytest.fixture(autouse=True)
def quiet():
    with patch('builtins.print'):
        yield


def test_build_document():
    document = report_writer.build_document("demo", {"seed": 1}, _results())
    assert document["schema_version"] == report_writer.SCHEMA_VERSION
    assert document["verdict"] == PASS
    section = document["experiments"][0]
    assert section["records"][1]["rhs"] == "inf"
    assert section["plot_columns"] == ["n", "variance", "ci_low", "ci_high", "bound"]


def test_failing_record_sets_document_verdict():
    results = [ExperimentResult(name="x", reports=[bound_report("t", "bad", 3.0, 2.0)])]
    assert report_writer.build_document("x", {}, results)["verdict"] == FAIL


def test_json_report_round_trip(tmp_path):
    path = tmp_path / "out" / "demo.json"
    document, paths = report_writer.write_report("demo", {"seed": 1}, _results(), path)
    assert paths[0] == path
    assert paths[1] == tmp_path / "out" / "demo_demo_plot.csv"
    assert not path.with_suffix(".json.tmp").exists()
    assert report_writer.load_report(path) == document


def test_json_report_is_deterministic(tmp_path):
    report_writer.write_report("demo", {}, _results(), tmp_path / "a.json")
    report_writer.write_report("demo", {}, _results(), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_tampered_report_is_rejected(tmp_path):
    path = tmp_path / "demo.json"
    report_writer.write_report("demo", {}, _results(), path)
    data = json.loads(path.read_text(encoding="utf-8"))
    data["verdict"] = FAIL
    path.write_text(json.dumps(data, indent=4), encoding="utf-8")
    with pytest.raises(ReportIntegrityError):
        report_writer.load_report(path)

    del data["checksum"]
    path.write_text(json.dumps(data, indent=4), encoding="utf-8")
    with pytest.raises(ReportIntegrityError):
        report_writer.load_report(path)


def test_csv_report(tmp_path):
    path = tmp_path / "demo.csv"
    report_writer.write_report("demo", {}, _results(), path, "csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(report_writer.REPORT_CSV_COLUMNS)
    assert lines[1].startswith("demo,t,ok,1.0,1.0,1.0,2.0,1.0,pass,3,10")
    assert ",inf," in lines[2]


def test_plot_csv(tmp_path):
    report_writer.write_report("demo", {}, _results(), tmp_path / "demo.json")
    lines = (tmp_path / "demo_demo_plot.csv").read_text(encoding="utf-8").splitlines()
    assert lines == ["n,variance,ci_low,ci_high,bound", "4,0.5,0.4,0.6,2.0", "16,0.7,0.6,0.8,4.0"]
