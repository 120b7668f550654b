# SPDX-License-Identifier: GPL-3.0-or-later
"""
Validation runs for cubictele.

Checks the grids, compares the engine with the brute-force three-mode reference
and runs the Monte-Carlo consistency check, then prints and optionally saves a
pass/fail report.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from .heisenberg import monte_carlo
from .oracle import TOLERANCES, compare_with_engine
from .params import GridSet, ProtocolParams, validate_grid
from .utils import format_sig, json_safe, safe_mkdir, timestamp

MC_TOLERANCES = {"rel_dev_x": 0.02, "rel_dev_y": 0.10, "clip_fraction": 0.01}


def _check(name: str, status: str, detail: str, values: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {"check": name, "status": status, "detail": detail, "values": values or {}}


def check_grids(params: ProtocolParams, grids: GridSet) -> Dict[str, Any]:
    """Fail on an undersampled cubic phase, warn on any other grid message."""
    warnings = validate_grid(grids.resource, params)
    if any(w.startswith("undersampled phase") for w in warnings):
        return _check("grid", "fail", "; ".join(warnings))
    if warnings:
        return _check("grid", "warn", "; ".join(warnings))
    return _check("grid", "pass", f"resource grid n={grids.resource.n} resolves the cubic phase")


def check_oracle(params: ProtocolParams, n: int = 5, progress: bool = False) -> Dict[str, Any]:
    comparison = compare_with_engine(params, n=n, progress=progress)
    worst = {key: comparison.worst(key) for key in TOLERANCES}
    detail = ", ".join(f"{key}={format_sig(value)} (< {TOLERANCES[key]:g})" for key, value in worst.items())
    return _check("oracle", "pass" if comparison.passed else "fail", detail, comparison.to_dict())


def check_monte_carlo(
    params: ProtocolParams,
    n: int,
    seed: int,
    jobs: Optional[int] = None,
    progress: bool = False,
) -> Dict[str, Any]:
    report = monte_carlo(params, n, seed, jobs=jobs, progress=progress)
    values = report.to_dict()
    breaches = [key for key, tol in MC_TOLERANCES.items() if not values[key] <= tol]
    detail = ", ".join(f"{key}={format_sig(values[key])}" for key in MC_TOLERANCES)
    if report.low_power:
        return _check("monte_carlo", "warn", f"n={n} is too small for statistical power; {detail}", values)
    return _check("monte_carlo", "fail" if breaches else "pass", detail, values)


def run_validation(
    params: ProtocolParams,
    grids: GridSet,
    mc_samples: int,
    seed: int,
    report_dir: Optional[Path] = None,
    oracle: bool = True,
    jobs: Optional[int] = None,
    progress: bool = False,
) -> Dict[str, Any]:
    """
    Run every validation check and summarize.

    A failed grid check stops the run before the expensive checks.
    """
    print("🔍 Starting validation run...")
    checks: List[Dict[str, Any]] = [check_grids(params, grids)]
    if checks[0]["status"] != "fail":
        if oracle:
            print("🔍 Comparing with the three-mode reference...")
            checks.append(check_oracle(params, progress=progress))
        print(f"🔍 Monte-Carlo check with {mc_samples:,} samples...")
        checks.append(check_monte_carlo(params, mc_samples, seed, jobs=jobs, progress=progress))

    passed = all(c["status"] != "fail" for c in checks)
    icons = {"pass": "✅", "warn": "⚠️ ", "fail": "❌"}
    print("\n📊 VALIDATION RESULTS:")
    for c in checks:
        print(f"  {icons[c['status']]} {c['check']}: {c['detail']}")

    report = {
        "validation_timestamp": timestamp(),
        "passed": passed,
        "params": params.to_dict(),
        "grids": grids.to_dict(),
        "seed": seed,
        "checks": checks,
    }

    if report_dir:
        report_dir = safe_mkdir(Path(report_dir))
        report_file = report_dir / "validation_report.json"
        with open(report_file, "w", encoding="utf-8") as f:
            json.dump(json_safe(report), f, indent=2, allow_nan=False)
            f.write("\n")

        summary_file = report_dir / "validation_summary.csv"
        with open(summary_file, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["check", "status", "detail"])
            for c in checks:
                writer.writerow([c["check"], c["status"], c["detail"]])

        print(f"\n📄 Validation reports saved:")
        print(f"  Detailed report: {report_file}")
        print(f"  Summary CSV: {summary_file}")

    return report
