#!/usr/bin/env python3
# SPDX-License-Identifier: GPL-3.0-or-later
"""
cubictele - Command-line simulator for cubic-phase CV teleportation.

Reproduces the error curve, the outcome probability/fidelity lattices and the
pulse-energy estimate, and runs the validation suite.

Copyright (C) 2024 cubictele Contributors

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.
"""

import argparse
import logging
import os
import signal
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from cubictele.core.config import RunConfig, load_config, load_presets
from cubictele.core.errors import (
    BranchError,
    CubicTeleError,
    DegenerateOutcomeError,
    DomainError,
    GridError,
    ValidationFailure,
)
from cubictele.core.export import ResultExporter, write_error_curve_csv, write_report_json
from cubictele.core.heisenberg import (
    crossover_alpha,
    error_budget,
    error_curve,
    monte_carlo,
    original_scheme_error,
    pulse_energy,
)
from cubictele.core.params import EnergyParams, squeezing_db_to_r
from cubictele.core.teleport import TeleportEngine
from cubictele.core.utils import format_energy, format_sig, safe_mkdir
from cubictele.core.verification import run_validation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

logger = logging.getLogger("cubictele")


class RunState:
    """Tracks the running command so an interrupt can report where it stopped."""

    def __init__(self):
        self.interrupted = False
        self.current_operation = "Initializing"
        self.start_time = None

    def signal_handler(self, signum, frame):
        """Handle keyboard interrupt gracefully."""
        self.interrupted = True
        print(f"\n\n⚠️  Run interrupted by user (Ctrl+C)")
        print(f"📊 Current operation: {self.current_operation}")
        if self.start_time:
            print(f"   Elapsed: {time.time() - self.start_time:.1f} s")
        print(f"\n💡 Outputs are written only at the end of a run; rerun the same command.")
        sys.exit(EXIT_USAGE)


run_state = RunState()


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def configure_logging() -> None:
    level = logging.DEBUG if os.environ.get("CUBICTELE_DEBUG") else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _param_overrides(args) -> Dict[str, Any]:
    overrides = {}
    for key in ("alpha", "gamma", "squeeze_db", "r", "g"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if "squeeze_db" in overrides:
        overrides["r"] = squeezing_db_to_r(overrides.pop("squeeze_db"))
    return overrides


def build_run_config(args, default_preset: Optional[str] = None) -> RunConfig:
    """Resolve preset, config file and command-line overrides into a RunConfig."""
    preset = args.preset or (None if args.config else default_preset)
    data, name = load_config(preset, args.config)
    overrides = _param_overrides(args)
    if overrides:
        params = dict(data.get("params", {}))
        if "r" in overrides:
            params.pop("squeeze_db", None)
        params.update(overrides)
        data = {**data, "params": params}
    if getattr(args, "mc_samples", None) is not None:
        data = {**data, "mc_samples": args.mc_samples}
    if args.seed is not None:
        data = {**data, "seed": args.seed}

    config = RunConfig.from_dict(data, name)
    changes = {}
    if args.out is not None:
        changes["dir"] = args.out
    if args.format:
        changes["formats"] = tuple(args.format)
    if args.no_timestamp:
        changes["timestamp"] = False
    return config.with_outputs(**changes) if changes else config


def cmd_errors(args) -> int:
    """Tabulate the y-error estimate against the standard-teleportation baseline."""
    defaults = load_presets()["error-curve"]["errors"]
    alpha_min = args.alpha_min if args.alpha_min is not None else defaults["alpha_min"]
    alpha_max = args.alpha_max if args.alpha_max is not None else defaults["alpha_max"]
    steps = args.steps if args.steps is not None else defaults["steps"]
    gamma = args.gamma if args.gamma is not None else defaults["gamma"]
    squeeze_db = args.squeeze_db if args.squeeze_db is not None else defaults["squeeze_db"]
    if alpha_min <= 0 or alpha_max < alpha_min or steps < 1:
        print(f"❌ Bad alpha range [{alpha_min}, {alpha_max}] with {steps} steps", file=sys.stderr)
        return EXIT_USAGE

    r = squeezing_db_to_r(squeeze_db)
    rows = error_curve(alpha_min, alpha_max, steps, gamma, r)
    crossing = crossover_alpha(gamma, r)
    out_dir = safe_mkdir(args.out or Path("results"))
    out_file = write_error_curve_csv(rows, out_dir / "error_curve.csv", stamp=not args.no_timestamp)

    print(f"📊 Error curve: gamma={gamma:g}, {squeeze_db:g} dB, {steps} rows")
    print(f"   Baseline (standard teleportation): {format_sig(original_scheme_error(r), 4)}")
    print(f"   Crossover alpha*: {crossing:.4f}")
    below = [row for row in rows if row["err_y_estimate"] <= row["baseline"]]
    if below and below[0] is not rows[0]:
        before = rows[rows.index(below[0]) - 1]
        print(f"   Crossing between rows alpha={before['alpha']:.4g} and alpha={below[0]['alpha']:.4g}")
    print(f"  ✅ Exported csv: {out_file}")
    return EXIT_OK


def cmd_energy(args) -> int:
    """Print the displacement pulse energy."""
    energy = pulse_energy(EnergyParams(wavelength=args.wavelength, tau=args.tau, alpha=args.alpha))
    print(f"⚡ Pulse energy for alpha={args.alpha:g}, lambda={args.wavelength:g} m, tau={args.tau:g}:")
    print(f"W = {format_energy(energy)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    """Evaluate P and F on the outcome lattice and export the datasets."""
    config = build_run_config(args, default_preset="sweep-alpha20")
    params = config.params
    budget = error_budget(params)
    print(f"🔍 Sweep '{config.name}': alpha={params.alpha:g}, gamma={params.gamma:g}, r={params.r:.5g}, g={params.g:.5g}")
    print(f"   Grids: input n={config.grids.input.n}, resource n={config.grids.resource.n}")
    print(f"   Lattice: {config.lattice.n_y1m} x {config.lattice.n_yinm}")

    run_state.current_operation = "Building resource state"
    engine = TeleportEngine(params, config.grids)
    run_state.current_operation = "Sweeping outcome lattice"
    y1m_axis, yinm_axis = config.lattice.axes()
    result = engine.sweep(y1m_axis, yinm_axis, config.thresholds, jobs=args.jobs, progress=not args.quiet)
    summary = result.summary()

    print(f"\n📊 SWEEP SUMMARY:")
    mode = summary["modal_outcome"]
    print(f"  Modal outcome: y1m={mode['y1m']:.4g}, yinm={mode['yinm']:.4g}")
    print(f"  F at mode: {format_sig(summary['F_at_mode'] if summary['F_at_mode'] is not None else float('nan'), 5)}")
    print(f"  Total probability: {summary['total_probability']:.4f}")
    print(f"  High-fidelity mass (F > {summary['fidelity_threshold']:g}): {summary['high_fidelity_mass']:.4f}")
    for threshold, mass in summary["postselect_stats"].items():
        print(f"  Mass with y1m < {threshold}: {mass:.4f}")
    print(f"  Predicted errors: x {format_sig(budget.err_x)}, y {format_sig(budget.err_y)}, baseline {format_sig(budget.baseline)}")
    if summary["low_success"]:
        print(f"  ⚠️  Low success probability: most outcomes fall below F = {summary['fidelity_threshold']:g}")

    run_state.current_operation = "Exporting results"
    exporter = ResultExporter(
        stamp=config.outputs.timestamp,
        metadata={"name": config.name, "params": params.to_dict(), "grids": config.grids.to_dict()},
    )
    exporter.export_all_formats(result, config.outputs.dir, config.outputs.formats)
    return EXIT_OK


def cmd_validate(args) -> int:
    """Run the grid, three-mode reference and Monte-Carlo checks."""
    config = build_run_config(args, default_preset="validate")
    run_state.current_operation = "Validation"
    report = run_validation(
        config.params,
        config.grids,
        mc_samples=config.mc_samples,
        seed=config.seed,
        report_dir=config.outputs.dir,
        oracle=not args.skip_oracle,
        jobs=args.jobs,
        progress=not args.quiet,
    )
    if not report["passed"]:
        failed = [c["check"] for c in report["checks"] if c["status"] == "fail"]
        raise ValidationFailure(f"validation failed: {', '.join(failed)}", report["checks"])
    print("\n✅ Validation passed")
    return EXIT_OK


def cmd_mc(args) -> int:
    """Run the Monte-Carlo check of the linearized error formulas."""
    config = build_run_config(args, default_preset="sweep-alpha20")
    run_state.current_operation = "Monte-Carlo sampling"
    report = monte_carlo(config.params, config.mc_samples, config.seed, jobs=args.jobs, progress=not args.quiet)

    print(f"📊 MONTE-CARLO ({report.n_samples:,} samples, seed {report.seed}):")
    print(f"  x error: empirical {format_sig(report.emp_var_x, 4)}, closed form {format_sig(report.lin_var_x, 4)} (rel. dev. {report.rel_dev_x:.3%})")
    print(f"  y error: empirical {format_sig(report.emp_var_y, 4)}, closed form {format_sig(report.lin_var_y, 4)} (rel. dev. {report.rel_dev_y:.3%})")
    print(f"  y error estimate at mean photocurrent: {format_sig(report.est_var_y, 4)} (rel. dev. {report.rel_dev_est_y:.3%})")
    print(f"  Mean y1m: {report.mean_y1m:.5g} +- {report.sem_y1m:.2g} (expected {report.expected_mean_y1m:.5g})")
    print(f"  Clip fraction: {report.clip_fraction:.3g}")
    if report.low_power:
        print(f"  ⚠️  Only {report.n_samples} samples: statistical power is low")
    if not report.linear_regime:
        print(f"  ⚠️  Outside the linearization regime (clip fraction > 1%)")

    out_dir = safe_mkdir(config.outputs.dir)
    out_file = write_report_json(report.to_dict(), out_dir / "mc_report.json", config.outputs.timestamp)
    print(f"  ✅ Exported report: {out_file}")
    return EXIT_OK


def _shared_options() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="JSON run configuration (overlays the preset)")
    shared.add_argument("--preset", help="Named preset from presets.json (see --list-presets)")
    shared.add_argument("--out", type=Path, help="Output directory (default: from the configuration)")
    shared.add_argument(
        "--format",
        action="append",
        choices=["csv", "json"],
        help="Output format, repeat for several (default: from the configuration)",
    )
    shared.add_argument("--jobs", type=int, help="Worker count (default: available CPUs)")
    shared.add_argument("--seed", type=int, help="Random seed for Monte-Carlo runs")
    shared.add_argument("--no-timestamp", action="store_true", help="Omit the timestamp header from outputs")
    shared.add_argument("--quiet", action="store_true", help="Disable progress bars")
    return shared


def _param_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="Override the resource displacement alpha")
    parser.add_argument("--gamma", type=float, help="Override the cubic coefficient gamma")
    parser.add_argument("--squeeze-db", dest="squeeze_db", type=float, help="Override the squeezing in dB")
    parser.add_argument("--g", type=float, help="Override the CZ weight")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cubictele",
        description="Simulate CV teleportation through a cubic-phase resource",
        epilog="""
Commands:
  errors: y-error estimate vs. standard-teleportation baseline over alpha
  sweep: probability density and fidelity over the outcome lattice
  energy: displacement pulse energy
  validate: three-mode reference comparison and Monte-Carlo check
  mc: Monte-Carlo check of the linearized error formulas

Exit codes: 0 ok, 1 usage, 2 numerical or validation failure, 3 IO error.
Set CUBICTELE_DEBUG=1 for debug logging.
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--list-presets", action="store_true", help="List available presets")
    shared = _shared_options()
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    errors = sub.add_parser("errors", parents=[shared], help="Tabulate the error curve")
    errors.add_argument("--alpha-min", type=float, help="Smallest alpha (default 1)")
    errors.add_argument("--alpha-max", type=float, help="Largest alpha (default 30)")
    errors.add_argument("--steps", type=int, help="Number of rows (default 291)")
    errors.add_argument("--gamma", type=float, help="Cubic coefficient (default 0.1)")
    errors.add_argument("--squeeze-db", dest="squeeze_db", type=float, help="Squeezing in dB (default -15)")
    errors.set_defaults(handler=cmd_errors)

    energy = sub.add_parser("energy", parents=[shared], help="Displacement pulse energy")
    energy.add_argument("--alpha", type=float, default=20.0, help="Displacement (default 20)")
    energy.add_argument("--wavelength", type=float, default=430e-9, help="Wavelength in m (default 430e-9)")
    energy.add_argument("--tau", type=float, default=0.01, help="Beam-splitter transmittance (default 0.01)")
    energy.set_defaults(handler=cmd_energy)

    sweep = sub.add_parser("sweep", parents=[shared], help="P/F lattice (default preset sweep-alpha20)")
    _param_options(sweep)
    sweep.set_defaults(handler=cmd_sweep)

    validate = sub.add_parser("validate", parents=[shared], help="Validation suite (default preset validate)")
    _param_options(validate)
    validate.add_argument("--mc-samples", type=int, help="Monte-Carlo sample count")
    validate.add_argument("--skip-oracle", action="store_true", help="Skip the three-mode reference comparison")
    validate.set_defaults(handler=cmd_validate)

    mc = sub.add_parser("mc", parents=[shared], help="Monte-Carlo check (default preset sweep-alpha20)")
    _param_options(mc)
    mc.add_argument("--mc-samples", "-n", dest="mc_samples", type=int, help="Sample count (default 1e6)")
    mc.set_defaults(handler=cmd_mc)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    signal.signal(signal.SIGINT, run_state.signal_handler)
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_presets:
        print("📋 Available presets:")
        for name, preset in load_presets().items():
            print(f"  {name:14} {preset.get('description', '')}")
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    run_state.start_time = time.time()
    try:
        return args.handler(args)
    except OSError as e:
        print(f"❌ IO error: {e.filename or ''} {e.strerror or e}", file=sys.stderr)
        return EXIT_IO
    except (GridError, BranchError, DegenerateOutcomeError, ValidationFailure) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except CubicTeleError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
