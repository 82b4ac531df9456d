"""Hover sizing, drag-polar calibration, and forward-flight performance.

Hover figures come from actuator-disk momentum theory. Forward flight uses a
two-term drag polar ``D = A*V^2 + B/V^2`` whose coefficients, together with a
transmission efficiency and a fuel-burn slope, are calibrated against a
tabulated set of flight modes by least squares.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import IO, Iterable, Sequence

import numpy as np

_TABLE_COLUMNS = ("name", "v_ms", "drag_n", "p_gen_w", "ff_kg_per_s", "endurance_h", "range_km")


@dataclass(frozen=True)
class Environment:
    """Ambient air density (kg/m^3) and gravitational acceleration (m/s^2)."""

    rho: float = 1.225
    g: float = 9.81

    def __post_init__(self) -> None:
        if self.rho <= 0.0:
            raise ValueError(f"air density must be positive, got {self.rho}")
        if self.g <= 0.0:
            raise ValueError(f"gravity must be positive, got {self.g}")


SEA_LEVEL = Environment()


@dataclass(frozen=True)
class DragPolar:
    """Two-term drag model ``D(V) = a_par*V^2 + b_ind/V^2``.

    ``a_par`` collects parasite drag (N s^2/m^2), ``b_ind`` induced drag
    (N m^2/s^2). Both must be positive for the polar to have a minimum.
    """

    a_par: float
    b_ind: float

    def __post_init__(self) -> None:
        if self.a_par <= 0.0 or self.b_ind <= 0.0:
            raise ValueError(f"polar coefficients must be positive, got ({self.a_par}, {self.b_ind})")

    def drag(self, v: float) -> float:
        if v <= 0.0:
            raise ValueError(f"airspeed must be positive, got {v}")
        return self.a_par * v * v + self.b_ind / (v * v)

    @property
    def v_min_drag(self) -> float:
        """Airspeed of minimum drag, ``(b_ind / a_par) ** 0.25``."""
        return (self.b_ind / self.a_par) ** 0.25


@dataclass(frozen=True)
class PerfConfig:
    """Vehicle-level inputs for the performance estimates.

    ``p_max_gen`` is the usable generator output; ``p_nameplate`` and
    ``roc_nameplate`` carry the published headline figures so reports can
    state how far the calibrated model lands from them.
    """

    m: float
    n_rotors: int
    rotor_area_each: float
    fuel_mass: float
    p_max_gen: float
    eta: float
    sfc: float
    polar: DragPolar
    motor_peak: float
    p_nameplate: float = 340000.0
    roc_nameplate: float = 31.82

    def __post_init__(self) -> None:
        for field_name in ("m", "rotor_area_each", "fuel_mass", "p_max_gen", "motor_peak", "sfc", "p_nameplate", "roc_nameplate"):
            value = getattr(self, field_name)
            if value <= 0.0:
                raise ValueError(f"{field_name} must be positive, got {value}")
        if self.n_rotors < 1:
            raise ValueError(f"n_rotors must be at least 1, got {self.n_rotors}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def rotor_area_total(self) -> float:
        return self.n_rotors * self.rotor_area_each


@dataclass(frozen=True)
class FlightModeRow:
    """One operating point: airspeed, drag, generator power, fuel flow, endurance, range."""

    name: str
    v: float
    drag: float
    p_gen: float
    ff_rate: float
    endurance_h: float
    range_km: float

    def __post_init__(self) -> None:
        if self.v < 0.0:
            raise ValueError(f"airspeed must be non-negative, got {self.v}")
        if self.p_gen <= 0.0:
            raise ValueError(f"generator power must be positive, got {self.p_gen}")


@dataclass(frozen=True)
class CalibrationResult:
    """Transmission efficiency and fuel-burn slope fitted from a flight table."""

    eta: float
    sfc: float
    eta_by_row: tuple[tuple[str, float], ...]
    sfc_rows: tuple[str, ...]


@dataclass(frozen=True)
class EnduranceCheck:
    """Endurance implied by fuel mass and fuel flow versus the tabulated claim."""

    name: str
    computed_h: float
    claimed_h: float
    deviation: float
    consistent: bool


@dataclass(frozen=True)
class ClimbSummary:
    """Best-climb operating point, with a note when the nameplate rate is out of reach."""

    v_best: float
    roc_max: float
    nameplate: float
    note: str | None


@dataclass(frozen=True)
class MassLedger:
    """Component masses (kg) against a declared all-up total."""

    pilot: float = 0.0
    fuel: float = 0.0
    arms: float = 0.0
    propulsion: float = 0.0
    airframe: float = 0.0
    misc: float = 0.0
    margin: float = 0.0
    declared_total: float = 0.0

    def __post_init__(self) -> None:
        for field_name in ("pilot", "fuel", "arms", "propulsion", "airframe", "misc", "margin", "declared_total"):
            if getattr(self, field_name) < 0.0:
                raise ValueError(f"{field_name} must be non-negative")

    def component_sum(self) -> float:
        return self.pilot + self.fuel + self.arms + self.propulsion + self.airframe + self.misc + self.margin


@dataclass(frozen=True)
class MassReport:
    component_sum: float
    declared_total: float
    discrepancy: float

    @property
    def flagged(self) -> bool:
        return abs(self.discrepancy) > 1e-9


def disk_loading(m: float, area_total: float) -> float:
    """Mass per unit total disk area, kg/m^2."""
    if area_total <= 0.0:
        raise ValueError(f"rotor area must be positive, got {area_total}")
    if m < 0.0:
        raise ValueError(f"mass must be non-negative, got {m}")
    return m / area_total


def rotor_radius_for_dl(m: float, dl: float, n_rotors: int) -> float:
    """Rotor radius (m) that realises disk loading ``dl`` with ``n_rotors`` equal disks."""
    if m <= 0.0:
        raise ValueError(f"mass must be positive, got {m}")
    if dl <= 0.0:
        raise ValueError(f"disk loading must be positive, got {dl}")
    if n_rotors < 1:
        raise ValueError(f"n_rotors must be at least 1, got {n_rotors}")
    return math.sqrt(m / (n_rotors * dl * math.pi))


def induced_velocity(dl: float, env: Environment = SEA_LEVEL) -> float:
    """Hover induced velocity ``sqrt(dl * g / (2 rho))`` in m/s."""
    if dl < 0.0:
        raise ValueError(f"disk loading must be non-negative, got {dl}")
    return math.sqrt(dl * env.g / (2.0 * env.rho))


def hover_power_ideal(m: float, dl: float, load_factor: float = 1.0, env: Environment = SEA_LEVEL) -> float:
    """Momentum-theory hover power ``T * sqrt(T / (2 rho A))`` in W.

    ``load_factor`` scales the supported weight, so accelerated hover
    (climb initiation) is covered by values above 1.
    """
    if m <= 0.0:
        raise ValueError(f"mass must be positive, got {m}")
    if dl <= 0.0:
        raise ValueError(f"disk loading must be positive, got {dl}")
    if load_factor < 0.0:
        raise ValueError(f"load factor must be non-negative, got {load_factor}")
    thrust = load_factor * m * env.g
    area = m / dl
    if thrust == 0.0:
        return 0.0
    return thrust * math.sqrt(thrust / (2.0 * env.rho * area))


def hover_power_electrical(
    m: float, dl: float, load_factor: float, eta: float, env: Environment = SEA_LEVEL
) -> float:
    """Generator power needed to hover: ideal momentum power divided by ``eta``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return hover_power_ideal(m, dl, load_factor, env) / eta


def motor_power_draw(
    m: float,
    dl: float,
    load_factor: float,
    failed: bool = False,
    env: Environment = SEA_LEVEL,
    n_rotors: int = 4,
) -> float:
    """Ideal per-motor power (W) with two coaxial motors sharing each rotor disk.

    A healthy motor carries half the disk's momentum power. When its twin has
    failed the survivor carries the whole disk, exactly doubling the draw.
    """
    if n_rotors < 1:
        raise ValueError(f"n_rotors must be at least 1, got {n_rotors}")
    thrust_rotor = load_factor * m * env.g / n_rotors
    area_rotor = m / (n_rotors * dl)
    per_rotor = thrust_rotor * math.sqrt(thrust_rotor / (2.0 * env.rho * area_rotor))
    return per_rotor if failed else per_rotor / 2.0


def fit_drag_polar(points: Iterable[tuple[float, float]]) -> DragPolar:
    """Least-squares fit of ``D = a*V^2 + b/V^2`` to ``(V, D)`` samples.

    Needs at least two distinct positive airspeeds; with exactly two the fit
    interpolates them exactly.
    """
    samples = [(float(v), float(d)) for v, d in points]
    if any(v <= 0.0 for v, _ in samples):
        raise ValueError("airspeed samples must be positive")
    if len({v for v, _ in samples}) < 2:
        raise ValueError("need at least two distinct airspeeds to fit the polar")
    speeds = np.array([v for v, _ in samples])
    drags = np.array([d for _, d in samples])
    design = np.column_stack([speeds**2, speeds**-2.0])
    coeffs, *_ = np.linalg.lstsq(design, drags, rcond=None)
    a_par, b_ind = float(coeffs[0]), float(coeffs[1])
    if a_par <= 0.0 or b_ind <= 0.0:
        raise ValueError(f"fitted polar is non-physical: ({a_par}, {b_ind})")
    return DragPolar(a_par, b_ind)


def calibrate_from_table(rows: Sequence[FlightModeRow]) -> CalibrationResult:
    """Fit transmission efficiency and fuel-burn slope from a flight-mode table.

    Efficiency is the mean of ``D*V/P`` over the forward-flight rows. The
    fuel-burn slope ``sfc`` (kg/s per W) is a least-squares fit of fuel flow
    against generator power, restricted to rows whose flow-to-power ratio sits
    within 10% of the table median; rows outside that band are internally
    inconsistent and would drag the slope off the cluster the rest agrees on.
    """
    forward = [r for r in rows if r.v > 0.0]
    if not forward:
        raise ValueError("at least one forward-flight row is required")
    eta_by_row = tuple((r.name, r.drag * r.v / r.p_gen) for r in forward)
    eta = sum(value for _, value in eta_by_row) / len(eta_by_row)

    ratios = np.array([r.ff_rate / r.p_gen for r in rows])
    median = float(np.median(ratios))
    kept = [r for r, ratio in zip(rows, ratios) if abs(ratio - median) <= 0.10 * median]
    powers = np.array([r.p_gen for r in kept])
    flows = np.array([r.ff_rate for r in kept])
    sfc = float(flows @ powers / (powers @ powers))
    return CalibrationResult(eta=eta, sfc=sfc, eta_by_row=eta_by_row, sfc_rows=tuple(r.name for r in kept))


def endurance_consistency(
    rows: Sequence[FlightModeRow], fuel_mass: float, rel_tol: float = 0.02
) -> tuple[EnduranceCheck, ...]:
    """Compare each row's tabulated endurance against ``fuel_mass / ff_rate``."""
    if fuel_mass <= 0.0:
        raise ValueError(f"fuel mass must be positive, got {fuel_mass}")
    checks = []
    for row in rows:
        if row.ff_rate <= 0.0 or row.endurance_h <= 0.0:
            raise ValueError(f"row {row.name!r} has no usable fuel-flow or endurance entry")
        computed = fuel_mass / row.ff_rate / 3600.0
        deviation = (computed - row.endurance_h) / row.endurance_h
        checks.append(
            EnduranceCheck(
                name=row.name,
                computed_h=computed,
                claimed_h=row.endurance_h,
                deviation=deviation,
                consistent=abs(deviation) <= rel_tol,
            )
        )
    return tuple(checks)


def thrust_available(v: float, p_gen: float, eta: float) -> float:
    """Propulsive thrust ``eta * P / V`` in N at airspeed ``v``."""
    if v <= 0.0:
        raise ValueError(f"airspeed must be positive, got {v}")
    if p_gen < 0.0:
        raise ValueError(f"generator power must be non-negative, got {p_gen}")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return eta * p_gen / v


def rate_of_climb(v: float, cfg: PerfConfig, env: Environment = SEA_LEVEL) -> float:
    """Specific excess power ``(eta*P_max - D(V)*V) / (m*g)`` in m/s, unclamped."""
    drag = cfg.polar.drag(v)
    return (cfg.eta * cfg.p_max_gen - drag * v) / (cfg.m * env.g)


def best_rate_of_climb(cfg: PerfConfig, env: Environment = SEA_LEVEL) -> ClimbSummary:
    """Maximum climb rate and its airspeed ``(b_ind / (3 a_par)) ** 0.25``.

    When the result misses the configured nameplate rate by more than 10%
    the summary carries a note saying so, since downstream reports should
    not present the headline figure as reachable.
    """
    v_best = (cfg.polar.b_ind / (3.0 * cfg.polar.a_par)) ** 0.25
    roc_max = rate_of_climb(v_best, cfg, env)
    note = None
    if abs(roc_max - cfg.roc_nameplate) > 0.10 * cfg.roc_nameplate:
        note = (
            f"computed best climb rate {roc_max:.2f} m/s at {v_best:.1f} m/s differs from the "
            f"{cfg.roc_nameplate:g} m/s nameplate figure by more than 10%; the calibrated drag "
            f"polar and efficiency do not reproduce the quoted value"
        )
    return ClimbSummary(v_best=v_best, roc_max=roc_max, nameplate=cfg.roc_nameplate, note=note)


def solve_v_max(cfg: PerfConfig, env: Environment = SEA_LEVEL, v_upper: float = 300.0, tol: float = 0.01) -> float:
    """Top speed where thrust available meets drag, by bisection.

    Brackets the crossing between the minimum-drag speed and ``v_upper``;
    the thrust margin is positive at the left end and negative at the right
    end whenever a solution exists.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")

    def margin(v: float) -> float:
        return cfg.eta * cfg.p_max_gen / v - cfg.polar.drag(v)

    lo = cfg.polar.v_min_drag
    hi = v_upper
    if hi <= lo:
        raise ValueError(f"upper bracket {hi} must exceed the minimum-drag speed {lo:.1f}")
    if margin(lo) <= 0.0 or margin(hi) >= 0.0:
        raise RuntimeError(
            f"no crossing of thrust available and drag in [{lo:.1f}, {hi:.1f}] m/s; "
            f"the configured power cannot reach a top speed in the bracket"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def endurance_and_range(
    v: float, p_gen: float, cfg: PerfConfig, ff_rate: float | None = None
) -> tuple[float, float]:
    """Endurance (h) and still-air range (km) at one operating point.

    Fuel flow defaults to ``sfc * p_gen``; passing ``ff_rate`` overrides it,
    which is how tabulated rows are re-checked without touching the slope.
    """
    if v < 0.0:
        raise ValueError(f"airspeed must be non-negative, got {v}")
    if ff_rate is None:
        if p_gen <= 0.0:
            raise ValueError(f"generator power must be positive, got {p_gen}")
        ff_rate = cfg.sfc * p_gen
    elif ff_rate <= 0.0:
        raise ValueError(f"fuel flow must be positive, got {ff_rate}")
    endurance_h = cfg.fuel_mass / ff_rate / 3600.0
    range_km = v * endurance_h * 3.6
    return endurance_h, range_km


def flight_mode_table(
    cfg: PerfConfig,
    speeds: Sequence[float],
    env: Environment = SEA_LEVEL,
    names: Sequence[str] | None = None,
) -> tuple[FlightModeRow, ...]:
    """Generate flight-mode rows from the calibrated model at the given airspeeds.

    Forward rows take drag from the polar and power from ``D*V/eta``. A zero
    airspeed produces a hover row: the drag column holds the required thrust
    (the vehicle weight) and power comes from momentum theory, so its range
    is zero rather than a loiter-converted figure.
    """
    if names is not None and len(names) != len(speeds):
        raise ValueError(f"names length {len(names)} does not match speeds length {len(speeds)}")
    rows = []
    for index, v in enumerate(speeds):
        if v < 0.0:
            raise ValueError(f"airspeed must be non-negative, got {v}")
        if v == 0.0:
            dl = disk_loading(cfg.m, cfg.rotor_area_total)
            p_gen = hover_power_electrical(cfg.m, dl, 1.0, cfg.eta, env)
            drag = cfg.m * env.g
            name = "hover"
        else:
            drag = cfg.polar.drag(v)
            p_gen = drag * v / cfg.eta
            name = f"V={v:g}"
        if names is not None:
            name = names[index]
        endurance_h, range_km = endurance_and_range(v, p_gen, cfg)
        rows.append(
            FlightModeRow(
                name=name,
                v=float(v),
                drag=drag,
                p_gen=p_gen,
                ff_rate=cfg.sfc * p_gen,
                endurance_h=endurance_h,
                range_km=range_km,
            )
        )
    return tuple(rows)


def mass_ledger_check(ledger: MassLedger) -> MassReport:
    """Sum the component masses and report the gap to the declared total."""
    component_sum = ledger.component_sum()
    return MassReport(
        component_sum=component_sum,
        declared_total=ledger.declared_total,
        discrepancy=ledger.declared_total - component_sum,
    )


def _parse_flight_table(stream: IO[str]) -> tuple[FlightModeRow, ...]:
    reader = csv.DictReader(stream)
    header = tuple(reader.fieldnames or ())
    if header != _TABLE_COLUMNS:
        raise ValueError(f"flight table header {header} does not match {_TABLE_COLUMNS}")
    rows = []
    for record in reader:
        rows.append(
            FlightModeRow(
                name=record["name"],
                v=float(record["v_ms"]),
                drag=float(record["drag_n"]),
                p_gen=float(record["p_gen_w"]),
                ff_rate=float(record["ff_kg_per_s"]),
                endurance_h=float(record["endurance_h"]),
                range_km=float(record["range_km"]),
            )
        )
    if not rows:
        raise ValueError("flight table contains no rows")
    return tuple(rows)


def load_flight_table(path: str | None = None) -> tuple[FlightModeRow, ...]:
    """Load a flight-mode table CSV; with no path, the bundled reference table."""
    if path is None:
        source = resources.files("tiltrotor").joinpath("data/flight_modes.csv")
        with source.open("r", encoding="utf-8") as stream:
            return _parse_flight_table(stream)
    with open(path, "r", encoding="utf-8", newline="") as stream:
        return _parse_flight_table(stream)


def _check_sweep_range(lo: float, hi: float, n: int) -> None:
    if lo <= 0.0 or hi <= lo:
        raise ValueError(f"sweep range must satisfy 0 < min < max, got [{lo}, {hi}]")
    if n < 2:
        raise ValueError(f"sweep needs at least 2 points, got {n}")


def sweep_disk_loading(
    cfg: PerfConfig,
    dl_min: float,
    dl_max: float,
    n: int = 21,
    load_factor: float = 1.2,
    env: Environment = SEA_LEVEL,
) -> tuple[tuple[float, float, float, float], ...]:
    """Hover power and per-motor draw (healthy, failed) across a disk-loading range."""
    _check_sweep_range(dl_min, dl_max, n)
    points = []
    for dl in np.linspace(dl_min, dl_max, n):
        dl = float(dl)
        points.append(
            (
                dl,
                hover_power_electrical(cfg.m, dl, load_factor, cfg.eta, env),
                motor_power_draw(cfg.m, dl, load_factor, False, env, cfg.n_rotors),
                motor_power_draw(cfg.m, dl, load_factor, True, env, cfg.n_rotors),
            )
        )
    return tuple(points)


def sweep_rate_of_climb(
    cfg: PerfConfig, v_min: float, v_max: float, n: int = 35, env: Environment = SEA_LEVEL
) -> tuple[tuple[float, float], ...]:
    """Climb-rate curve over an airspeed range, clamped at zero for display."""
    _check_sweep_range(v_min, v_max, n)
    return tuple(
        (float(v), max(0.0, rate_of_climb(float(v), cfg, env))) for v in np.linspace(v_min, v_max, n)
    )


def sweep_endurance_power(
    cfg: PerfConfig, p_min: float, p_max: float, n: int = 21
) -> tuple[tuple[float, float], ...]:
    """Endurance versus generator power under the calibrated fuel-burn slope."""
    _check_sweep_range(p_min, p_max, n)
    return tuple(
        (float(p), cfg.fuel_mass / (cfg.sfc * float(p)) / 3600.0) for p in np.linspace(p_min, p_max, n)
    )
