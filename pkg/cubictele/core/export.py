# SPDX-License-Identifier: GPL-3.0-or-later
"""
Result export system for cubictele.

Writes sweep lattices, error curves and reports as plot-ready CSV and JSON.
CSV files are comma separated with a header row and LF endings; an optional
first line "# generated <timestamp>" is the only part that changes between
identical runs.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .teleport import SweepResult
from .utils import format_float, json_float, json_safe, safe_mkdir, timestamp

FORMATS = {
    "csv": {"file_extension": "csv", "description": "Long-format lattice: y1m, yinm, P, F"},
    "json": {"file_extension": "json", "description": "Axes plus row-major P and F arrays"},
}


def _write_csv(path: Path, header: Sequence[str], rows, stamp: bool) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as csvfile:
        if stamp:
            csvfile.write(f"# generated {timestamp()}\n")
        writer = csv.writer(csvfile, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def _write_json(path: Path, payload: Dict[str, Any], stamp: bool) -> Path:
    if stamp:
        payload = {"generated": timestamp(), **payload}
    with open(path, "w", encoding="utf-8") as jsonfile:
        json.dump(json_safe(payload), jsonfile, indent=2, ensure_ascii=False, allow_nan=False)
        jsonfile.write("\n")
    return path


def sweep_records(result: SweepResult):
    """Yield (y1m, yinm, P, F) rows, y1m slowest."""
    for i, y1m in enumerate(result.y1m_axis):
        for j, yinm in enumerate(result.yinm_axis):
            yield y1m, yinm, result.P[i, j], result.F[i, j]


class ResultExporter:
    """Writes sweep results in the configured formats."""

    def __init__(self, stamp: bool = True, metadata: Optional[Dict[str, Any]] = None):
        self.stamp = stamp
        self.metadata = metadata or {}

    def export_csv_format(self, result: SweepResult, output_file: Path) -> Path:
        rows = ([format_float(v) for v in record] for record in sweep_records(result))
        return _write_csv(Path(output_file), ["y1m", "yinm", "P", "F"], rows, self.stamp)

    def export_json_format(self, result: SweepResult, output_file: Path) -> Path:
        payload = {
            **self.metadata,
            "shape": [len(result.y1m_axis), len(result.yinm_axis)],
            "y1m_axis": [float(v) for v in result.y1m_axis],
            "yinm_axis": [float(v) for v in result.yinm_axis],
            "P": [float(v) for v in result.P.ravel()],
            "F": [json_float(v) for v in result.F.ravel()],
            "total_probability": result.total_probability,
            "postselect_stats": {str(k): v for k, v in result.postselect_stats.items()},
        }
        return _write_json(Path(output_file), payload, self.stamp)

    def export_all_formats(
        self,
        result: SweepResult,
        output_dir: Path,
        selected_formats: Optional[Sequence[str]] = None,
        stem: str = "sweep",
    ) -> List[Dict[str, str]]:
        """Export to every selected format and write the summary JSON alongside."""
        output_dir = safe_mkdir(Path(output_dir))
        exported_files = []

        for format_name in selected_formats or FORMATS.keys():
            if format_name not in FORMATS:
                print(f"⚠️  Unknown format: {format_name}")
                continue
            format_spec = FORMATS[format_name]
            output_file = output_dir / f"{stem}.{format_spec['file_extension']}"
            if format_name == "csv":
                self.export_csv_format(result, output_file)
            else:
                self.export_json_format(result, output_file)
            exported_files.append(
                {"format": format_name, "file": str(output_file), "description": format_spec["description"]}
            )
            print(f"  ✅ Exported {format_name}: {output_file}")

        summary_file = output_dir / f"{stem}_summary.json"
        write_report_json({**self.metadata, **result.summary()}, summary_file, self.stamp)
        exported_files.append({"format": "summary", "file": str(summary_file), "description": "Sweep summary"})
        print(f"  ✅ Exported summary: {summary_file}")
        return exported_files


def write_error_curve_csv(rows: List[Dict[str, float]], path: Path, stamp: bool = True) -> Path:
    """Write (alpha, err_y_estimate, baseline) rows."""
    header = ["alpha", "err_y_estimate", "baseline"]
    body = ([format_float(row[key]) for key in header] for row in rows)
    return _write_csv(Path(path), header, body, stamp)


def write_report_json(report: Dict[str, Any], path: Path, stamp: bool = True) -> Path:
    """Write a report dictionary (error budget, Monte-Carlo, summary) as JSON."""
    return _write_json(Path(path), report, stamp)
