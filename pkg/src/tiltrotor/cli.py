"""Command-line front end: simulations, gain synthesis, performance reports.

Exit codes follow one contract everywhere: 0 on success, 1 when a
simulation diverges, 2 for configuration or usage problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .config import ConfigError, RunConfig, build_scenario, dump_config, parse_config
from .linsys import DivergenceError
from .performance import (
    best_rate_of_climb,
    calibrate_from_table,
    endurance_consistency,
    fit_drag_polar,
    flight_mode_table,
    load_flight_table,
    solve_v_max,
    sweep_disk_loading,
    sweep_endurance_power,
    sweep_rate_of_climb,
    thrust_available,
)
from .report import (
    ensure_dir,
    figure_curves,
    figure_timeseries,
    metrics_mapping,
    round9,
    write_flight_table,
    write_summary,
    write_sweep_csv,
    write_timeseries_csv,
)
from .scenarios import inject_failure, run_scenario
from .tuning import PoleSumError, characteristic_poly, place_poles, stability_check

_SIM_KINDS = ("altitude-basic", "altitude-motor", "roll-motor")
_TABLE_SPEEDS = (52.0, 70.0, 93.0, 120.0, 0.0)
_TABLE_NAMES = ("Min power", "Cruise", "High Cruise", "Top speed", "Hover")


def _add_global_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file (defaults are bundled)")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: config output_dir)")
    parser.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective config as JSON and exit",
    )
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def _build_parser() -> argparse.ArgumentParser:
    # the global flags exist on the main parser with real defaults and, with
    # defaults suppressed, on a parent shared by the subparsers, so they are
    # accepted on either side of the command word
    shared = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    _add_global_flags(shared)

    parser = argparse.ArgumentParser(
        prog="tiltsim",
        description="Tilt-rotor control-loop simulation and performance sizing.",
    )
    _add_global_flags(parser)

    commands = parser.add_subparsers(dest="command")

    sim = commands.add_parser("sim", help="run a control-loop scenario", parents=[shared])
    sim.add_argument("kind", choices=_SIM_KINDS)
    sim.add_argument("--fail-duct", type=int, metavar="N", help="duct of the failed motor (1-based)")
    sim.add_argument("--fail-motor", type=int, metavar="M", help="motor within the duct (1-based)")
    sim.add_argument("--fail-at", type=float, default=0.0, metavar="T", help="failure time in seconds")

    tune = commands.add_parser("tune", help="synthesise PID gains by pole placement", parents=[shared])
    tune.add_argument(
        "--poles",
        required=True,
        metavar="LIST",
        help="four comma-separated poles in a+bi notation",
    )

    perf = commands.add_parser("perf", help="performance tables, sweeps, calibration", parents=[shared])
    perf.add_argument("subcommand", choices=("table", "sweep-dl", "roc", "calibrate"))
    perf.add_argument("--min", type=float, dest="range_min", help="sweep range lower bound")
    perf.add_argument("--max", type=float, dest="range_max", help="sweep range upper bound")
    perf.add_argument("--points", type=int, default=21, help="sweep sample count")
    perf.add_argument("--table", metavar="CSV", help="flight table for calibrate (default: bundled)")
    return parser


def parse_poles(text: str) -> tuple[complex, ...]:
    """Parse 'a+bi' pole notation, comma separated."""
    poles = []
    for token in text.split(","):
        cleaned = token.strip().replace(" ", "").replace("i", "j")
        if not cleaned:
            raise ValueError("empty pole entry in --poles")
        try:
            poles.append(complex(cleaned))
        except ValueError as exc:
            raise ValueError(f"cannot parse pole {token.strip()!r}; use a+bi notation") from exc
    return tuple(poles)


def _cmd_sim(args: argparse.Namespace, cfg: RunConfig, out_dir: str) -> int:
    scenario = build_scenario(cfg, args.kind)
    if (args.fail_duct is None) != (args.fail_motor is None):
        raise ValueError("--fail-duct and --fail-motor must be given together")
    if args.fail_duct is not None:
        airframe = scenario.airframe
        if not 1 <= args.fail_duct <= airframe.n_ducts:
            raise ValueError(f"--fail-duct must be between 1 and {airframe.n_ducts}")
        if not 1 <= args.fail_motor <= airframe.motors_per_duct:
            raise ValueError(f"--fail-motor must be between 1 and {airframe.motors_per_duct}")
        scenario = inject_failure(scenario, args.fail_duct - 1, args.fail_motor - 1, args.fail_at)
    ts, metrics = run_scenario(scenario)
    csv_path = write_timeseries_csv(os.path.join(out_dir, f"{args.kind}.csv"), ts)
    mapping = metrics_mapping(metrics, kind=args.kind, target=scenario.metrics_target())
    json_path, _ = write_summary(out_dir, "metrics", mapping)
    written = [csv_path, json_path]
    if not args.no_figures:
        written.append(figure_timeseries(os.path.join(out_dir, f"{args.kind}.png"), ts, args.kind))
    print(f"{args.kind}: wrote {', '.join(written)}")
    return 0


def _cmd_tune(args: argparse.Namespace, cfg: RunConfig) -> int:
    poles = parse_poles(args.poles)
    gains = place_poles(cfg.altitude_motor, cfg.airframe.m, cfg.airframe.lambda_up, poles)
    poly = characteristic_poly(cfg.altitude_motor, cfg.airframe.m, cfg.airframe.lambda_up, gains)
    verdict = stability_check(poly)
    document = {
        "gains": {"kp": round9(gains.kp), "ki": round9(gains.ki), "kd": round9(gains.kd)},
        "characteristic_poly_ascending": [round9(c) for c in poly.coefficients],
        "stable": verdict.stable,
        "stability_margin": round9(verdict.margin),
    }
    print(json.dumps(document, indent=2))
    return 0


def _perf_table(cfg: RunConfig, out_dir: str, figures: bool) -> int:
    rows = flight_mode_table(cfg.perf, _TABLE_SPEEDS, cfg.environment, names=_TABLE_NAMES)
    csv_path, json_path = write_flight_table(out_dir, rows, name="flight_modes")
    written = [csv_path, json_path]
    if figures:
        polar = cfg.perf.polar
        grid = [40.0 + 2.5 * i for i in range(41)]
        written.append(
            figure_curves(
                os.path.join(out_dir, "flight_modes.png"),
                grid,
                {
                    "drag (N)": [polar.drag(v) for v in grid],
                    "thrust available (N)": [thrust_available(v, cfg.perf.p_max_gen, cfg.perf.eta) for v in grid],
                },
                "airspeed (m/s)",
                "force (N)",
                "drag versus thrust available",
            )
        )
    print(f"flight-mode table: wrote {', '.join(written)}")
    return 0


def _perf_sweep_dl(args: argparse.Namespace, cfg: RunConfig, out_dir: str, figures: bool) -> int:
    if args.range_min is None or args.range_max is None:
        raise ValueError("sweep-dl needs --min and --max")
    points = sweep_disk_loading(cfg.perf, args.range_min, args.range_max, n=args.points, env=cfg.environment)
    csv_path = write_sweep_csv(
        os.path.join(out_dir, "sweep_dl.csv"),
        ("dl_kg_m2", "p_hover_electrical_w", "p_motor_healthy_w", "p_motor_failed_w"),
        points,
    )
    written = [csv_path]
    if figures:
        written.append(
            figure_curves(
                os.path.join(out_dir, "sweep_dl.png"),
                [p[0] for p in points],
                {
                    "hover electrical (W)": [p[1] for p in points],
                    "motor healthy (W)": [p[2] for p in points],
                    "motor failed (W)": [p[3] for p in points],
                },
                "disk loading (kg/m^2)",
                "power (W)",
                "hover power versus disk loading",
            )
        )
    print(f"disk-loading sweep: wrote {', '.join(written)}")
    return 0


def _perf_roc(args: argparse.Namespace, cfg: RunConfig, out_dir: str, figures: bool) -> int:
    v_min = args.range_min if args.range_min is not None else 20.0
    v_max = args.range_max if args.range_max is not None else 200.0
    n = args.points if args.points != 21 else 37
    points = sweep_rate_of_climb(cfg.perf, v_min, v_max, n=n, env=cfg.environment)
    csv_path = write_sweep_csv(os.path.join(out_dir, "roc.csv"), ("v_ms", "roc_ms"), points)
    summary = best_rate_of_climb(cfg.perf, cfg.environment)
    mapping = {
        "v_best_ms": summary.v_best,
        "roc_max_ms": summary.roc_max,
        "nameplate_ms": summary.nameplate,
        "note": summary.note,
    }
    try:
        mapping["v_top_speed_ms"] = solve_v_max(cfg.perf, cfg.environment)
    except RuntimeError:
        mapping["v_top_speed_ms"] = None
    json_path, _ = write_summary(out_dir, "roc_summary", mapping)
    written = [csv_path, json_path]
    if figures:
        written.append(
            figure_curves(
                os.path.join(out_dir, "roc.png"),
                [p[0] for p in points],
                {"rate of climb (m/s)": [p[1] for p in points]},
                "airspeed (m/s)",
                "rate of climb (m/s)",
                "climb rate versus airspeed",
            )
        )
    if summary.note:
        print(f"note: {summary.note}")
    print(f"climb-rate sweep: wrote {', '.join(written)}")
    return 0


def _perf_calibrate(args: argparse.Namespace, cfg: RunConfig, out_dir: str, figures: bool) -> int:
    rows = load_flight_table(args.table)
    result = calibrate_from_table(rows)
    polar = fit_drag_polar([(row.v, row.drag) for row in rows if row.v > 0.0])
    checks = endurance_consistency(rows, cfg.perf.fuel_mass)
    document = {
        "eta": result.eta,
        "sfc": result.sfc,
        "a_par": polar.a_par,
        "b_ind": polar.b_ind,
        "eta_by_row": dict(result.eta_by_row),
        "sfc_rows": list(result.sfc_rows),
        "endurance_checks": [
            {
                "name": check.name,
                "computed_h": check.computed_h,
                "claimed_h": check.claimed_h,
                "deviation": check.deviation,
                "consistent": check.consistent,
            }
            for check in checks
        ],
    }
    json_path, csv_path = write_summary(out_dir, "calibration", document)
    written = [json_path, csv_path]
    if figures:
        speeds = sorted(row.v for row in rows if row.v > 0.0)
        grid = [speeds[0] + (speeds[-1] - speeds[0]) * i / 80.0 for i in range(81)]
        written.append(
            figure_curves(
                os.path.join(out_dir, "calibration.png"),
                grid,
                {"fitted drag (N)": [polar.drag(v) for v in grid]},
                "airspeed (m/s)",
                "drag (N)",
                "fitted drag polar",
            )
        )
    print(json.dumps({"eta": round9(result.eta), "sfc": round9(result.sfc), "a_par": round9(polar.a_par), "b_ind": round9(polar.b_ind)}, indent=2))
    print(f"calibration: wrote {', '.join(written)}", file=sys.stderr)
    return 0


def _cmd_perf(args: argparse.Namespace, cfg: RunConfig, out_dir: str) -> int:
    figures = not args.no_figures
    if args.subcommand == "table":
        return _perf_table(cfg, out_dir, figures)
    if args.subcommand == "sweep-dl":
        return _perf_sweep_dl(args, cfg, out_dir, figures)
    if args.subcommand == "roc":
        return _perf_roc(args, cfg, out_dir, figures)
    return _perf_calibrate(args, cfg, out_dir, figures)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.dump_config:
        print(json.dumps(dump_config(cfg), indent=2))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        if args.command == "tune":
            return _cmd_tune(args, cfg)
        out_dir = ensure_dir(args.out if args.out is not None else cfg.output_dir)
        if args.command == "sim":
            return _cmd_sim(args, cfg, out_dir)
        return _cmd_perf(args, cfg, out_dir)
    except DivergenceError as exc:
        print(f"simulation diverged at t = {exc.time:.3f} s", file=sys.stderr)
        return 1
    except PoleSumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
