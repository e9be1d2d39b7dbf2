"""
Report files: JSON with an embedded sha256 checksum, or CSV with a fixed header.

Nothing time-dependent is written, so one (argv, master seed) pair always
produces the same bytes.
"""

import csv
import hashlib
import json
import math
import shutil
import time
from pathlib import Path

import numpy as np

from . import helpers
from .errors import ReportIntegrityError
from .reports import CSV_COLUMNS, overall_verdict

SCHEMA_VERSION = 1
REPORT_CSV_COLUMNS = ["report"] + CSV_COLUMNS


def _jsonable(value):
    """Plain JSON types; inf and nan become strings."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def _checksum(data):
    json_bytes = json.dumps(data, indent=4).encode("utf-8")
    return hashlib.sha256(json_bytes).hexdigest()


def experiment_section(result):
    return {
        "name": result.name,
        "verdict": overall_verdict(result.reports),
        "records": [r.as_dict() for r in result.reports],
        "summary": result.summary,
        "plot_columns": result.plot_columns,
        "plot_rows": result.plot_rows,
    }


def build_document(name, config, results):
    """The report body: schema version, config echo, overall verdict and one section per experiment."""
    sections = [experiment_section(r) for r in results]
    records = [report for r in results for report in r.reports]
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "report": name,
        "config": config,
        "verdict": overall_verdict(records),
        "experiments": sections,
    })


def save_json_report(document, path):
    """Writes document plus checksum atomically (temp file, then move)."""
    start_time = time.time()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    final_data = dict(document)
    final_data["checksum"] = _checksum(document)
    temp_file_path = path.with_suffix(path.suffix + ".tmp")
    with open(temp_file_path, "w", encoding="utf-8") as f:
        json.dump(final_data, f, indent=4)
    shutil.move(str(temp_file_path), str(path))
    print(f"[REPORT] Saved {path} (took {helpers.elapsed_ms(start_time):.2f}ms)")
    return path


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_csv_report(document, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file_path = path.with_suffix(path.suffix + ".tmp")
    with open(temp_file_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_CSV_COLUMNS)
        for section in document["experiments"]:
            for record in section["records"]:
                writer.writerow([_csv_cell(section["name"])] + [_csv_cell(record.get(k)) for k in CSV_COLUMNS])
    shutil.move(str(temp_file_path), str(path))
    print(f"[REPORT] Saved {path}")
    return path


def save_plot_csv(section, path):
    """Plot-ready rows of one experiment, e.g. n,variance,ci_low,ci_high,bound."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(section["plot_columns"])
        for row in section["plot_rows"]:
            writer.writerow([_csv_cell(v) for v in row])
    return path


def write_report(name, config, results, output_path, output_format="json"):
    """Writes the report and any plot CSVs; returns (document, written paths)."""
    document = build_document(name, config, results)
    output_path = Path(output_path)
    if output_format == "csv":
        paths = [save_csv_report(document, output_path)]
    else:
        paths = [save_json_report(document, output_path)]
    for section in document["experiments"]:
        if section["plot_rows"]:
            plot_path = output_path.with_name(f"{output_path.stem}_{section['name']}_plot.csv")
            paths.append(save_plot_csv(section, plot_path))
    return document, paths


def _load_and_verify(filepath):
    """Loads a JSON report, verifies its checksum, and returns the body."""
    with open(filepath, "r", encoding="utf-8") as f:
        data = json.load(f)
    checksum = data.pop("checksum", None)
    if not checksum:
        raise ReportIntegrityError(f"{filepath}: missing checksum")
    if checksum != _checksum(data):
        raise ReportIntegrityError(f"{filepath}: checksum mismatch")
    return data


def load_report(path):
    return _load_and_verify(Path(path))
