"""Versioned JSON configuration with calibrated defaults.

A config document is a single JSON object. Every field is optional except
``schema_version``: omitted fields fall back to the bundled defaults, which
hold the calibrated vehicle, gain, and performance values. Unknown keys and
type mismatches are rejected with the dotted path of the offending key so a
typo never silently reverts a value to its default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Any, Mapping

from .performance import DragPolar, Environment, MassLedger, PerfConfig
from .scenarios import (
    FailureEvent,
    Scenario,
    altitude_voltage_bounds,
    roll_voltage_bounds,
)
from .tuning import PidGains
from .vehicle import AirframeParams, DuctState, MotorParams

SCHEMA_VERSION = 1

_SCENARIO_KEYS = ("altitude_basic", "altitude_motor", "roll_motor")


class ConfigError(ValueError):
    """Configuration problem, labelled with the dotted path of the bad key."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class ScenarioSettings:
    """Per-scenario reference and integration settings.

    ``saturation`` of None means the actuator bounds are computed from the
    vehicle at build time rather than stored literally. The string "off"
    disables actuator limits entirely (the linear-analysis mode).
    """

    target: float
    reference_shape: str
    disturbance: float
    duration: float
    dt: float
    saturation: tuple[float, float] | str | None

    def __post_init__(self) -> None:
        if self.reference_shape not in ("step", "initial-error"):
            raise ValueError(f"reference_shape must be 'step' or 'initial-error', got {self.reference_shape!r}")
        if self.duration <= 0.0 or self.dt <= 0.0 or self.dt > self.duration:
            raise ValueError(f"need 0 < dt <= duration, got dt={self.dt}, duration={self.duration}")
        if isinstance(self.saturation, str):
            if self.saturation != "off":
                raise ValueError(f'saturation string must be "off", got {self.saturation!r}')
        elif self.saturation is not None and not self.saturation[0] < self.saturation[1]:
            raise ValueError(f"saturation bounds must be ordered, got {self.saturation}")


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration: vehicle, gains, scenarios, performance."""

    environment: Environment
    airframe: AirframeParams
    altitude_motor: MotorParams
    roll_motor: MotorParams
    gains_basic: PidGains
    gains_motor: PidGains
    gains_roll: PidGains
    scenario_basic: ScenarioSettings
    scenario_motor: ScenarioSettings
    scenario_roll: ScenarioSettings
    perf: PerfConfig
    mass_ledger: MassLedger
    output_dir: str


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_leaf(default: Any, value: Any, path: str) -> Any:
    if default is None or path.endswith(".saturation"):
        if value is None:
            return None
        if value == "off":
            return "off"
        if isinstance(value, (list, tuple)) and len(value) == 2 and all(_is_number(v) for v in value):
            return [float(value[0]), float(value[1])]
        raise ConfigError(path, 'saturation must be null, "off", or a [lo, hi] pair of numbers')
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {type(value).__name__}")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {type(value).__name__}")
        return value
    if isinstance(default, int) and not isinstance(default, float):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(path, f"expected an integer, got {type(value).__name__}")
        return value
    if isinstance(default, float):
        if not _is_number(value):
            raise ConfigError(path, f"expected a number, got {type(value).__name__}")
        return float(value)
    raise ConfigError(path, f"unsupported default type {type(default).__name__}")


def _merge(defaults: Mapping[str, Any], user: Mapping[str, Any], path: str) -> dict[str, Any]:
    merged: dict[str, Any] = dict(defaults)
    for key, value in user.items():
        joined = _join(path, key)
        if key not in defaults:
            raise ConfigError(joined, "unknown key")
        base = defaults[key]
        if isinstance(base, dict):
            if not isinstance(value, dict):
                raise ConfigError(joined, f"expected an object, got {type(value).__name__}")
            merged[key] = _merge(base, value, joined)
        else:
            merged[key] = _check_leaf(base, value, joined)
    return merged


def _default_document() -> dict[str, Any]:
    text = resources.files("tiltrotor").joinpath("data/default_config.json").read_text(encoding="utf-8")
    return json.loads(text)


def _built(path: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _build_settings(path: str, block: Mapping[str, Any]) -> ScenarioSettings:
    saturation = block["saturation"]
    if isinstance(saturation, list):
        saturation = (saturation[0], saturation[1])
    return _built(
        path,
        ScenarioSettings,
        target=float(block["target"]),
        reference_shape=block["reference_shape"],
        disturbance=float(block["disturbance"]),
        duration=float(block["duration"]),
        dt=float(block["dt"]),
        saturation=saturation,
    )


def parse_config_dict(document: Any) -> RunConfig:
    """Validate a parsed JSON object against the schema and build a RunConfig."""
    if not isinstance(document, dict):
        raise ConfigError("", f"config must be a JSON object, got {type(document).__name__}")
    if "schema_version" not in document:
        raise ConfigError("schema_version", "required field is missing")
    version = document["schema_version"]
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}, expected {SCHEMA_VERSION}")

    remainder = {k: v for k, v in document.items() if k != "schema_version"}
    defaults = _default_document()
    del defaults["schema_version"]
    doc = _merge(defaults, remainder, "")

    environment = _built("environment", Environment, rho=doc["environment"]["rho"], g=doc["environment"]["g"])
    af = doc["airframe"]
    airframe = _built(
        "airframe",
        AirframeParams,
        m=af["m"],
        lambda_up=af["lambda_up"],
        f_max_total=af["f_max_total"],
        f_motor_cont=af["f_motor_cont"],
        peak_factor=af["peak_factor"],
        j_roll=af["j_roll"],
        c_roll=af["c_roll"],
        n_ducts=af["n_ducts"],
        motors_per_duct=af["motors_per_duct"],
    )
    motors = {}
    for key in ("altitude_motor", "roll_motor"):
        block = doc[key]
        motors[key] = _built(key, MotorParams, k_m=block["k_m"], l_m=block["l_m"], r_m=block["r_m"], k_t=block["k_t"])
    gains = {}
    for key in _SCENARIO_KEYS:
        block = doc["gains"][key]
        gains[key] = _built(f"gains.{key}", PidGains, kp=block["kp"], ki=block["ki"], kd=block["kd"])
    settings = {
        key: _build_settings(f"scenarios.{key}", doc["scenarios"][key]) for key in _SCENARIO_KEYS
    }
    perf_doc = doc["performance"]
    polar = _built(
        "performance.drag_polar",
        DragPolar,
        a_par=perf_doc["drag_polar"]["a_par"],
        b_ind=perf_doc["drag_polar"]["b_ind"],
    )
    perf = _built(
        "performance",
        PerfConfig,
        m=perf_doc["m"],
        n_rotors=perf_doc["n_rotors"],
        rotor_area_each=perf_doc["rotor_area_each"],
        fuel_mass=perf_doc["fuel_mass"],
        p_max_gen=perf_doc["p_max_gen"],
        eta=perf_doc["eta"],
        sfc=perf_doc["sfc"],
        polar=polar,
        motor_peak=perf_doc["motor_peak"],
        p_nameplate=perf_doc["p_nameplate"],
        roc_nameplate=perf_doc["roc_nameplate"],
    )
    ledger = _built("mass_ledger", MassLedger, **doc["mass_ledger"])

    return RunConfig(
        environment=environment,
        airframe=airframe,
        altitude_motor=motors["altitude_motor"],
        roll_motor=motors["roll_motor"],
        gains_basic=gains["altitude_basic"],
        gains_motor=gains["altitude_motor"],
        gains_roll=gains["roll_motor"],
        scenario_basic=settings["altitude_basic"],
        scenario_motor=settings["altitude_motor"],
        scenario_roll=settings["roll_motor"],
        perf=perf,
        mass_ledger=ledger,
        output_dir=doc["output_dir"],
    )


def parse_config(path: str | None = None) -> RunConfig:
    """Load and validate a config file; with no path, the bundled defaults."""
    if path is None:
        return parse_config_dict(_default_document())
    try:
        with open(path, "r", encoding="utf-8") as stream:
            document = json.load(stream)
    except OSError as exc:
        raise ConfigError("", f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"config file is not valid JSON: {exc}") from exc
    return parse_config_dict(document)


def _gains_doc(gains: PidGains) -> dict[str, float]:
    return {"kp": gains.kp, "ki": gains.ki, "kd": gains.kd}


def _motor_doc(motor: MotorParams) -> dict[str, float]:
    return {"k_m": motor.k_m, "l_m": motor.l_m, "r_m": motor.r_m, "k_t": motor.k_t}


def _settings_doc(settings: ScenarioSettings) -> dict[str, Any]:
    saturation: Any = settings.saturation
    if isinstance(saturation, tuple):
        saturation = [saturation[0], saturation[1]]
    return {
        "target": settings.target,
        "reference_shape": settings.reference_shape,
        "disturbance": settings.disturbance,
        "duration": settings.duration,
        "dt": settings.dt,
        "saturation": saturation,
    }


def dump_config(cfg: RunConfig) -> dict[str, Any]:
    """Rebuild the canonical JSON document for a RunConfig.

    The result re-parses to an equal RunConfig and serialises cleanly with
    the standard json module.
    """
    airframe = cfg.airframe
    perf = cfg.perf
    ledger = cfg.mass_ledger
    return {
        "schema_version": SCHEMA_VERSION,
        "output_dir": cfg.output_dir,
        "environment": {"rho": cfg.environment.rho, "g": cfg.environment.g},
        "airframe": {
            "m": airframe.m,
            "lambda_up": airframe.lambda_up,
            "f_max_total": airframe.f_max_total,
            "f_motor_cont": airframe.f_motor_cont,
            "peak_factor": airframe.peak_factor,
            "j_roll": airframe.j_roll,
            "c_roll": airframe.c_roll,
            "n_ducts": airframe.n_ducts,
            "motors_per_duct": airframe.motors_per_duct,
        },
        "altitude_motor": _motor_doc(cfg.altitude_motor),
        "roll_motor": _motor_doc(cfg.roll_motor),
        "gains": {
            "altitude_basic": _gains_doc(cfg.gains_basic),
            "altitude_motor": _gains_doc(cfg.gains_motor),
            "roll_motor": _gains_doc(cfg.gains_roll),
        },
        "scenarios": {
            "altitude_basic": _settings_doc(cfg.scenario_basic),
            "altitude_motor": _settings_doc(cfg.scenario_motor),
            "roll_motor": _settings_doc(cfg.scenario_roll),
        },
        "performance": {
            "m": perf.m,
            "n_rotors": perf.n_rotors,
            "rotor_area_each": perf.rotor_area_each,
            "fuel_mass": perf.fuel_mass,
            "p_max_gen": perf.p_max_gen,
            "p_nameplate": perf.p_nameplate,
            "eta": perf.eta,
            "sfc": perf.sfc,
            "drag_polar": {"a_par": perf.polar.a_par, "b_ind": perf.polar.b_ind},
            "motor_peak": perf.motor_peak,
            "roc_nameplate": perf.roc_nameplate,
        },
        "mass_ledger": {
            "pilot": ledger.pilot,
            "fuel": ledger.fuel,
            "arms": ledger.arms,
            "propulsion": ledger.propulsion,
            "airframe": ledger.airframe,
            "misc": ledger.misc,
            "margin": ledger.margin,
            "declared_total": ledger.declared_total,
        },
    }


def build_scenario(
    cfg: RunConfig,
    kind: str,
    failures: tuple[FailureEvent, ...] = (),
    duct_states: DuctState | None = None,
) -> Scenario:
    """Assemble a runnable Scenario for one of the three loop kinds.

    Stored ``saturation: null`` resolves here: total thrust limits for the
    basic loop, supply-referred voltage bounds for the motor loops. The
    string "off" removes the limits and the allocator, so the loop runs as
    the pure linear model.
    """
    if kind == "altitude-basic":
        settings, gains, motor = cfg.scenario_basic, cfg.gains_basic, cfg.altitude_motor
        computed = (0.0, cfg.airframe.f_max_total)
    elif kind == "altitude-motor":
        settings, gains, motor = cfg.scenario_motor, cfg.gains_motor, cfg.altitude_motor
        computed = altitude_voltage_bounds(cfg.airframe, motor, cfg.environment.g)
    elif kind == "roll-motor":
        settings, gains, motor = cfg.scenario_roll, cfg.gains_roll, cfg.roll_motor
        computed = roll_voltage_bounds(cfg.airframe, motor)
    else:
        raise ValueError(f"unknown scenario kind {kind!r}; expected altitude-basic, altitude-motor, or roll-motor")
    if settings.saturation == "off":
        saturation = None
        allocation_enabled = False
    else:
        saturation = settings.saturation if settings.saturation is not None else computed
        allocation_enabled = True
    return Scenario(
        kind=kind,
        airframe=cfg.airframe,
        motor=motor,
        gains=gains,
        target=settings.target,
        reference_shape=settings.reference_shape,
        disturbance=settings.disturbance,
        duct_states=duct_states,
        failures=failures,
        dt=settings.dt,
        duration=settings.duration,
        saturation=saturation,
        allocation_enabled=allocation_enabled,
        gravity=cfg.environment.g,
    )
