"""Report emission: delimited time series, JSON/CSV summary mirrors, figures.

Every number is printed through the same 9-significant-digit formatter in
both the CSV and the JSON outputs, so the two carry identical numeric
content and diff cleanly across tools.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Any, Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .linsys import TimeSeries
from .performance import FlightModeRow
from .scenarios import SimMetrics

_BASE_COLUMNS = ("t", "reference", "output", "error", "voltage", "force_total")
_MOTOR_COLUMNS = 8

_TABLE_HEADER = ("name", "v_ms", "drag_n", "p_gen_w", "ff_kg_per_s", "endurance_h", "range_km")


def fmt9(value: float | int | None) -> str:
    """Format a number to 9 significant digits; None becomes an empty cell."""
    if value is None:
        return ""
    return f"{value:.9g}"


def round9(value: float | None) -> float | None:
    """The float a 9-significant-digit print round-trips to."""
    if value is None:
        return None
    return float(f"{value:.9g}")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return fmt9(value)
    return str(value)


def _round9_tree(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return round9(obj)
    if isinstance(obj, Mapping):
        return {key: _round9_tree(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9_tree(val) for val in obj]
    return obj


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def timeseries_header(n_motors: int = _MOTOR_COLUMNS) -> tuple[str, ...]:
    return _BASE_COLUMNS + tuple(f"force_motor_{i}" for i in range(1, n_motors + 1))


def write_timeseries_csv(path: str, ts: TimeSeries) -> str:
    """Write a scenario trace under the fixed column schema.

    Channels the scenario does not produce (voltage for the basic loop, the
    force columns for the roll loop) are left as empty cells, so every run
    shares one header.
    """
    motor_keys = sorted(
        (key for key in ts.channels if key.startswith("force_motor_")),
        key=lambda key: int(key.rsplit("_", 1)[1]),
    )
    n_motors = len(motor_keys) if motor_keys else _MOTOR_COLUMNS
    header = timeseries_header(n_motors)
    columns = [ts.t] + [ts.channels.get(name) for name in header[1:]]
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(header)
        for i in range(len(ts)):
            writer.writerow([fmt9(col[i]) if col is not None else "" for col in columns])
    return path


def metrics_mapping(metrics: SimMetrics, **extra: Any) -> dict[str, Any]:
    """Flat mapping of a metrics record, with optional leading context keys."""
    mapping: dict[str, Any] = dict(extra)
    mapping.update(
        rise_time=metrics.rise_time,
        overshoot_abs=metrics.overshoot_abs,
        overshoot_pct=metrics.overshoot_pct,
        settling_time=metrics.settling_time,
        steady_state_error=metrics.steady_state_error,
        diverged=metrics.diverged,
    )
    return mapping


def write_summary(out_dir: str, name: str, mapping: Mapping[str, Any]) -> tuple[str, str]:
    """Write ``name.json`` and its two-column CSV mirror ``name.csv``."""
    json_path = os.path.join(out_dir, f"{name}.json")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    with open(json_path, "w", encoding="utf-8") as stream:
        json.dump(_round9_tree(dict(mapping)), stream, indent=2)
        stream.write("\n")
    flat = _flatten(mapping)
    with open(csv_path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(("key", "value"))
        for key, value in flat:
            writer.writerow((key, _cell(value)))
    return json_path, csv_path


def _flatten(mapping: Mapping[str, Any], prefix: str = "") -> list[tuple[str, Any]]:
    rows: list[tuple[str, Any]] = []
    for key, value in mapping.items():
        name = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, Mapping):
            rows.extend(_flatten(value, name))
        elif isinstance(value, (list, tuple)):
            for index, item in enumerate(value):
                if isinstance(item, Mapping):
                    rows.extend(_flatten(item, f"{name}[{index}]"))
                else:
                    rows.append((f"{name}[{index}]", item))
        else:
            rows.append((name, value))
    return rows


def write_flight_table(out_dir: str, rows: Sequence[FlightModeRow], name: str = "flight_modes") -> tuple[str, str]:
    """Write a flight-mode table as CSV plus a JSON mirror.

    The CSV uses the same header as the bundled reference table, so a
    generated table can be fed back through the loader and the calibrator.
    """
    csv_path = os.path.join(out_dir, f"{name}.csv")
    json_path = os.path.join(out_dir, f"{name}.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(_TABLE_HEADER)
        for row in rows:
            writer.writerow(
                (row.name, fmt9(row.v), fmt9(row.drag), fmt9(row.p_gen), fmt9(row.ff_rate), fmt9(row.endurance_h), fmt9(row.range_km))
            )
    payload = [
        {
            "name": row.name,
            "v_ms": round9(row.v),
            "drag_n": round9(row.drag),
            "p_gen_w": round9(row.p_gen),
            "ff_kg_per_s": round9(row.ff_rate),
            "endurance_h": round9(row.endurance_h),
            "range_km": round9(row.range_km),
        }
        for row in rows
    ]
    with open(json_path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, indent=2)
        stream.write("\n")
    return csv_path, json_path


def write_sweep_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    """Write one sweep curve with a labelled header row."""
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt9(value) for value in row])
    return path


def figure_timeseries(path: str, ts: TimeSeries, kind: str) -> str:
    """Two-panel trace figure: tracking on top, actuator effort below."""
    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax_top.plot(ts.t, ts.channels["output"], label="output")
    ax_top.plot(ts.t, ts.channels["reference"], linestyle="--", label="reference")
    ax_top.set_ylabel("roll angle (rad)" if kind == "roll-motor" else "altitude (m)")
    ax_top.legend(loc="best")
    ax_top.set_title(kind)

    if kind == "roll-motor":
        ax_bottom.plot(ts.t, ts.channels["voltage"], label="voltage (V)")
        ax_bottom.plot(ts.t, ts.channels["torque"], label="torque (N m)")
        ax_bottom.set_ylabel("actuation")
    else:
        ax_bottom.plot(ts.t, ts.channels["force_total"], label="total force (N)")
        if "voltage" in ts.channels:
            ax_voltage = ax_bottom.twinx()
            ax_voltage.plot(ts.t, ts.channels["voltage"], color="tab:orange", label="voltage (V)")
            ax_voltage.set_ylabel("voltage (V)")
        ax_bottom.set_ylabel("force (N)")
    ax_bottom.legend(loc="best")
    ax_bottom.set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def figure_curves(
    path: str,
    x: Sequence[float],
    curves: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: str,
) -> str:
    """Single-axis line figure for sweep outputs."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, values in curves.items():
        ax.plot(x, values, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.4)
    if len(curves) > 1:
        ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
