"""Closed-loop flight scenarios and response metrics.

Three nonlinear time simulations share one structure: PID (or PD) on the
tracking error, an actuator saturation, an optional first-order motor
stage, thrust allocation across ducts, and a rigid-body plant integrated
with fixed-step RK4.

The simulations track total thrust about the hover trim m*g: the motor
state is a force deviation, the saturation bound applies to the total
voltage (or total force for the basic loop), and the allocator caps
total thrust at the installed capacity. A zero-reference scenario
therefore holds its initial state exactly, with no trim drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .linsys import TimeSeries, integrate_fixed_step, saturate
from .tuning import PidGains
from .vehicle import AirframeParams, DuctState, MotorParams, allocate_thrust

__all__ = [
    "Scenario",
    "FailureEvent",
    "SimMetrics",
    "run_altitude_basic",
    "run_altitude_motor",
    "run_roll_motor",
    "run_scenario",
    "inject_failure",
    "compute_metrics",
    "altitude_voltage_bounds",
    "roll_voltage_bounds",
]

GRAVITY = 9.81


def _voltage_span(airframe: AirframeParams, motor: MotorParams) -> float:
    # the voltage that drives the force path to the total thrust cap:
    # F_max / (K_m/R_m), deliberately excluding the torque arm k_t
    return airframe.f_max_total * motor.r_m / motor.k_m


def altitude_voltage_bounds(
    airframe: AirframeParams, motor: MotorParams, gravity: float = GRAVITY
) -> tuple[float, float]:
    """Default voltage limits for the altitude motor loop.

    The span maps the total force cap back through the motor DC gain;
    the window sits about the hover trim voltage and is floored at 0 V.
    """
    span = _voltage_span(airframe, motor)
    v_trim = airframe.m * gravity * motor.r_m / (motor.k_m * motor.k_t)
    return (max(0.0, v_trim - span), v_trim + span)


def roll_voltage_bounds(
    airframe: AirframeParams, motor: MotorParams
) -> tuple[float, float]:
    """Default voltage limits for the roll loop: symmetric about 0 trim."""
    span = _voltage_span(airframe, motor)
    return (-span, span)

ScenarioKind = Literal["altitude-basic", "altitude-motor", "roll-motor"]
_KINDS = ("altitude-basic", "altitude-motor", "roll-motor")


@dataclass(frozen=True)
class FailureEvent:
    """One motor flipping to failed at a point in simulation time."""

    duct: int
    motor: int
    t_fail: float


@dataclass(frozen=True)
class Scenario:
    """Complete, immutable description of one closed-loop run.

    reference_shape 'step' commands `target` from t = 0 with the plant at
    rest; 'initial-error' starts the output at `target` and regulates it
    back to zero, which is how the roll loop rides out a crosswind upset.
    saturation is (lo, hi) on total force for the basic loop and on
    voltage for the motor-included loops; None disables the actuator
    limit entirely and also lifts the allocator caps, which is the
    configuration the linear-oracle tests use.
    """

    kind: ScenarioKind
    airframe: AirframeParams
    motor: MotorParams
    gains: PidGains
    target: float
    reference_shape: Literal["step", "initial-error"] = "step"
    disturbance: float = 0.0
    duct_states: DuctState | None = None
    failures: tuple[FailureEvent, ...] = ()
    dt: float = 1e-3
    duration: float = 60.0
    saturation: tuple[float, float] | None = None
    allocation_enabled: bool = True
    gravity: float = GRAVITY

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must cover at least one step")
        if self.saturation is not None:
            lo, hi = self.saturation
            if lo > hi:
                raise ValueError(f"saturation bounds reversed: {lo} > {hi}")
        if self.duct_states is None:
            object.__setattr__(
                self,
                "duct_states",
                DuctState.all_healthy(
                    self.airframe.n_ducts, self.airframe.motors_per_duct
                ),
            )

    def metrics_target(self) -> float:
        return self.target if self.reference_shape == "step" else 0.0


@dataclass(frozen=True)
class SimMetrics:
    """Step/regulation response metrics; fields are None when undefined."""

    rise_time: float | None
    overshoot_abs: float | None
    overshoot_pct: float | None
    settling_time: float | None
    steady_state_error: float | None
    diverged: bool = False


def inject_failure(
    sc: Scenario, duct: int, motor: int, t_fail: float
) -> Scenario:
    """A copy of the scenario with one motor failing at t_fail.

    A t_fail at or beyond the duration is recorded but never fires, so
    the run is unchanged in effect. Negative times are rejected.
    """
    if not (0 <= duct < sc.airframe.n_ducts):
        raise IndexError(f"duct index {duct} out of range")
    if not (0 <= motor < sc.airframe.motors_per_duct):
        raise IndexError(f"motor index {motor} out of range")
    if t_fail < 0:
        raise ValueError("failure time must be non-negative")
    events = sorted(
        sc.failures + (FailureEvent(duct, motor, t_fail),), key=lambda e: e.t_fail
    )
    return replace(sc, failures=tuple(events))


class _HealthTimeline:
    """Piecewise-constant duct state and capacity over the run."""

    def __init__(self, sc: Scenario):
        state = sc.duct_states
        segments = [(0.0, state)]
        for ev in sorted(sc.failures, key=lambda e: e.t_fail):
            state = state.with_failed(ev.duct, ev.motor)
            segments.append((ev.t_fail, state))
        self._times = [t for t, _ in segments]
        self._states = [s for _, s in segments]
        self._caps = [s.capacity(sc.airframe) for s in self._states]

    def state_at(self, t: float) -> DuctState:
        return self._states[self._index(t)]

    def capacity_at(self, t: float) -> float:
        return self._caps[self._index(t)]

    def _index(self, t: float) -> int:
        i = 0
        for j, start in enumerate(self._times):
            if t >= start:
                i = j
            else:
                break
        return i


def _deliver(f_cmd: float, capacity: float, enabled: bool) -> float:
    if not enabled:
        return f_cmd
    return min(max(f_cmd, 0.0), capacity)


def run_altitude_basic(sc: Scenario) -> tuple[TimeSeries, SimMetrics]:
    """Altitude hold with PD acceleration command and direct force actuation.

    error -> PD acceleration -> F = m (a_c + g) -> force saturation ->
    allocation -> vertical plant.
    """
    if sc.kind != "altitude-basic":
        raise ValueError(f"scenario kind {sc.kind!r} is not altitude-basic")
    if sc.gains.ki != 0.0:
        raise ValueError("the basic altitude loop is PD only: ki must be 0")
    af, g = sc.airframe, sc.gains
    kp, kd = g.kp, g.kd
    m, lam, grav = af.m, af.lambda_up, sc.gravity
    f_trim = m * grav
    r = sc.target if sc.reference_shape == "step" else 0.0
    timeline = _HealthTimeline(sc)
    sat = sc.saturation

    def dyn(t: float, x: np.ndarray, u: float) -> np.ndarray:
        z, v = x
        a_c = kp * (r - z) - kd * v
        f_cmd = m * (a_c + grav)
        if sat is not None:
            f_cmd = saturate(f_cmd, sat[0], sat[1])
        f_del = _deliver(f_cmd, timeline.capacity_at(t), sc.allocation_enabled)
        acc = (f_del + sc.disturbance - f_trim - lam * v) / m
        return np.array([v, acc])

    x0 = [0.0, 0.0] if sc.reference_shape == "step" else [sc.target, 0.0]
    if sc.reference_shape == "step" and sat is None:
        # reference step through the derivative branch is an impulse in
        # commanded acceleration: a velocity jump of kd*target, kept so
        # the trace matches the linear closed loop exactly
        x0[1] += kd * sc.target
    states = integrate_fixed_step(
        dyn, x0, lambda t: 0.0, sc.dt, sc.duration, channel_names=("z", "v")
    )

    z, v = states["z"], states["v"]
    a_c = kp * (r - z) - kd * v
    f_cmd = m * (a_c + grav)
    if sat is not None:
        f_cmd = np.clip(f_cmd, sat[0], sat[1])
    channels = {
        "reference": np.full_like(z, r),
        "output": z,
        "error": r - z,
        "velocity": v,
        "force_total": np.empty_like(z),
    }
    motor_cols = [np.empty_like(z) for _ in range(af.n_motors)]
    for i, t in enumerate(states.t):
        if sc.allocation_enabled:
            res = allocate_thrust(max(f_cmd[i], 0.0), af, timeline.state_at(t))
            channels["force_total"][i] = res.total_delivered
            for j, f in enumerate(res.flat_forces()):
                motor_cols[j][i] = f
        else:
            channels["force_total"][i] = f_cmd[i]
            for j in range(af.n_motors):
                motor_cols[j][i] = f_cmd[i] / af.n_motors
    for j, col in enumerate(motor_cols):
        channels[f"force_motor_{j + 1}"] = col
    ts = TimeSeries(states.t, channels)
    return ts, compute_metrics(ts, sc.metrics_target())


def run_altitude_motor(sc: Scenario) -> tuple[TimeSeries, SimMetrics]:
    """Altitude hold through the first-order motor stage.

    error -> PID -> total voltage -> saturation -> motor lag (force
    deviation about trim) -> total thrust -> allocation -> vertical
    plant. The voltage channel records the saturated total voltage.
    """
    if sc.kind != "altitude-motor":
        raise ValueError(f"scenario kind {sc.kind!r} is not altitude-motor")
    af, g, mo = sc.airframe, sc.gains, sc.motor
    kp, ki, kd = g.kp, g.ki, g.kd
    m, lam, grav = af.m, af.lambda_up, sc.gravity
    f_trim = m * grav
    gain = mo.k_m * mo.k_t
    v_trim = f_trim * mo.r_m / gain
    r = sc.target if sc.reference_shape == "step" else 0.0
    timeline = _HealthTimeline(sc)
    sat = sc.saturation

    def voltage_total(e: float, ie: float, v: float) -> float:
        v_cmd = v_trim + kp * e + ki * ie - kd * v
        if sat is not None:
            return saturate(v_cmd, sat[0], sat[1])
        return v_cmd

    def dyn(t: float, x: np.ndarray, u: float) -> np.ndarray:
        z, v, df, ie = x
        e = r - z
        dv = voltage_total(e, ie, v) - v_trim
        df_dot = (gain * dv - mo.r_m * df) / mo.l_m
        f_del = _deliver(
            f_trim + df, timeline.capacity_at(t), sc.allocation_enabled
        )
        acc = (f_del + sc.disturbance - f_trim - lam * v) / m
        return np.array([v, acc, df_dot, e])

    x0 = [0.0, 0.0, 0.0, 0.0]
    if sc.reference_shape == "initial-error":
        x0[0] = sc.target
    elif sat is None:
        # the reference step's derivative impulse lands on the motor
        # state through the voltage channel gain
        x0[2] += gain * kd * sc.target / mo.l_m
    states = integrate_fixed_step(
        dyn, x0, lambda t: 0.0, sc.dt, sc.duration,
        channel_names=("z", "v", "df", "ie"),
    )

    z, v, df, ie = states["z"], states["v"], states["df"], states["ie"]
    volts = np.array(
        [voltage_total(r - z[i], ie[i], v[i]) for i in range(len(z))]
    )
    channels = {
        "reference": np.full_like(z, r),
        "output": z,
        "error": r - z,
        "velocity": v,
        "voltage": volts,
        "force_total": np.empty_like(z),
    }
    motor_cols = [np.empty_like(z) for _ in range(af.n_motors)]
    for i, t in enumerate(states.t):
        f_total = f_trim + df[i]
        if sc.allocation_enabled:
            res = allocate_thrust(max(f_total, 0.0), af, timeline.state_at(t))
            channels["force_total"][i] = res.total_delivered
            for j, f in enumerate(res.flat_forces()):
                motor_cols[j][i] = f
        else:
            channels["force_total"][i] = f_total
            for j in range(af.n_motors):
                motor_cols[j][i] = f_total / af.n_motors
    for j, col in enumerate(motor_cols):
        channels[f"force_motor_{j + 1}"] = col
    ts = TimeSeries(states.t, channels)
    return ts, compute_metrics(ts, sc.metrics_target())


def run_roll_motor(sc: Scenario) -> tuple[TimeSeries, SimMetrics]:
    """Roll regulation through the motor stage and torque arm.

    roll error -> PID -> voltage -> saturation -> motor lag -> force ->
    x k_t -> torque (+ constant disturbance torque) -> roll plant.
    """
    if sc.kind != "roll-motor":
        raise ValueError(f"scenario kind {sc.kind!r} is not roll-motor")
    af, g, mo = sc.airframe, sc.gains, sc.motor
    kp, ki, kd = g.kp, g.ki, g.kd
    j_roll, c_roll = af.j_roll, af.c_roll
    r = sc.target if sc.reference_shape == "step" else 0.0
    sat = sc.saturation

    def voltage(e: float, ie: float, w: float) -> float:
        v_cmd = kp * e + ki * ie - kd * w
        if sat is not None:
            return saturate(v_cmd, sat[0], sat[1])
        return v_cmd

    def dyn(t: float, x: np.ndarray, u: float) -> np.ndarray:
        phi, w, f, ie = x
        e = r - phi
        f_dot = (mo.k_m * voltage(e, ie, w) - mo.r_m * f) / mo.l_m
        torque = mo.k_t * f + sc.disturbance
        w_dot = (torque - c_roll * w) / j_roll
        return np.array([w, w_dot, f_dot, e])

    x0 = [0.0, 0.0, 0.0, 0.0]
    if sc.reference_shape == "initial-error":
        x0[0] = sc.target
    elif sat is None:
        x0[2] += mo.k_m * kd * sc.target / mo.l_m
    states = integrate_fixed_step(
        dyn, x0, lambda t: 0.0, sc.dt, sc.duration,
        channel_names=("phi", "w", "f", "ie"),
    )

    phi, w, f, ie = states["phi"], states["w"], states["f"], states["ie"]
    volts = np.array(
        [voltage(r - phi[i], ie[i], w[i]) for i in range(len(phi))]
    )
    ts = TimeSeries(
        states.t,
        {
            "reference": np.full_like(phi, r),
            "output": phi,
            "error": r - phi,
            "rate": w,
            "voltage": volts,
            "torque": mo.k_t * f + sc.disturbance,
        },
    )
    return ts, compute_metrics(ts, sc.metrics_target())


_RUNNERS = {
    "altitude-basic": run_altitude_basic,
    "altitude-motor": run_altitude_motor,
    "roll-motor": run_roll_motor,
}


def run_scenario(sc: Scenario) -> tuple[TimeSeries, SimMetrics]:
    """Dispatch a scenario to its runner by kind."""
    return _RUNNERS[sc.kind](sc)


def compute_metrics(
    ts: TimeSeries, target: float, output_channel: str = "output"
) -> SimMetrics:
    """Step/regulation metrics of one output channel.

    rise_time: first 10% to 90% crossing interval of the approach from
    the initial value to the target. overshoot: largest excursion past
    the target in the direction of travel, clipped at zero (and its
    percentage of the commanded span, undefined for zero span).
    settling_time: time after which the output stays inside the 2% band
    of the span around the target; 0 if it never leaves, None if it
    never settles. steady_state_error: |mean of the final 10% of samples
    minus target|. A non-finite output marks the run diverged and leaves
    every other field None.
    """
    y = ts[output_channel]
    if not np.all(np.isfinite(y)):
        return SimMetrics(None, None, None, None, None, diverged=True)
    t = ts.t
    initial = y[0]
    span = target - initial
    direction = math.copysign(1.0, span) if span != 0.0 else 1.0

    rise = None
    if span != 0.0:
        progress = (y - initial) / span
        idx10 = np.flatnonzero(progress >= 0.1)
        idx90 = np.flatnonzero(progress >= 0.9)
        if idx10.size and idx90.size:
            rise = float(t[idx90[0]] - t[idx10[0]])

    overshoot = max(0.0, float(np.max(direction * (y - target))))
    overshoot_pct = 100.0 * overshoot / abs(span) if span != 0.0 else None

    band = 0.02 * abs(span)
    outside = np.abs(y - target) > band
    if not outside.any():
        settling = 0.0
    elif outside[-1]:
        settling = None
    else:
        settling = float(t[np.flatnonzero(outside)[-1] + 1])

    tail = y[-max(1, len(y) // 10):]
    sse = abs(float(np.mean(tail)) - target)
    return SimMetrics(
        rise_time=rise,
        overshoot_abs=overshoot,
        overshoot_pct=overshoot_pct,
        settling_time=settling,
        steady_state_error=sse,
        diverged=False,
    )
