"""Vehicle component models.

Electric-motor models (a simplified voltage-to-force lag and the full
electrical/mechanical/square-law chain), the vertical and roll rigid-body
plants, the cascaded voltage-to-displacement plant, and the duct-level
thrust allocator with motor-failure handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .linsys import Polynomial, RationalTransfer, tf_series

__all__ = [
    "MotorParams",
    "FullMotorParams",
    "AirframeParams",
    "DuctState",
    "AllocationResult",
    "motor_simplified_tf",
    "motor_full_chain_steady_state",
    "motor_full_chain_dynamics",
    "motor_full_chain_force",
    "motor_full_chain_small_signal_gain",
    "altitude_plant_tf",
    "combined_plant_tf",
    "roll_plant_tf",
    "allocate_thrust",
]


def _require_positive(**named: float) -> None:
    for name, value in named.items():
        if not value > 0:
            raise ValueError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class MotorParams:
    """Simplified motor: voltage in, force out through a first-order lag.

    k_t is a force-to-torque arm constant and stays 1.0 for pure-force
    loops; the roll loop uses it to express torque per volt directly.
    """

    k_m: float
    l_m: float
    r_m: float
    k_t: float = 1.0

    def __post_init__(self):
        _require_positive(k_m=self.k_m, l_m=self.l_m, r_m=self.r_m, k_t=self.k_t)


@dataclass(frozen=True)
class FullMotorParams:
    """Full chain: electrical lag, rotor mechanics, square-law propeller."""

    k_m: float
    l_f: float
    r_f: float
    j_motor: float
    b: float
    k_f: float

    def __post_init__(self):
        _require_positive(
            k_m=self.k_m, l_f=self.l_f, r_f=self.r_f,
            j_motor=self.j_motor, b=self.b, k_f=self.k_f,
        )


@dataclass(frozen=True)
class AirframeParams:
    """Rigid-body and thrust-plant limits shared by every scenario.

    The total thrust cap must equal the per-motor continuous cap summed
    over all installed motors; the constructor enforces this so a config
    cannot silently disagree with itself. c_roll is the rotational
    damping of the roll plant (default 0: no aerodynamic roll damping,
    all stabilization comes from the controller).
    """

    m: float
    lambda_up: float
    f_max_total: float
    f_motor_cont: float
    peak_factor: float
    j_roll: float
    n_ducts: int = 4
    motors_per_duct: int = 2
    c_roll: float = 0.0

    def __post_init__(self):
        _require_positive(m=self.m, f_max_total=self.f_max_total,
                          f_motor_cont=self.f_motor_cont, j_roll=self.j_roll)
        if self.lambda_up < 0:
            raise ValueError("lambda_up must be non-negative")
        if self.c_roll < 0:
            raise ValueError("c_roll must be non-negative")
        if self.peak_factor < 1.0:
            raise ValueError("peak_factor must be at least 1")
        if self.n_ducts < 1 or self.motors_per_duct < 1:
            raise ValueError("need at least one duct and one motor per duct")
        expected = self.n_ducts * self.motors_per_duct * self.f_motor_cont
        if not math.isclose(self.f_max_total, expected, rel_tol=1e-9):
            raise ValueError(
                f"F_max_total={self.f_max_total} != n_ducts*motors_per_duct*"
                f"F_motor_cont={expected}"
            )

    @property
    def n_motors(self) -> int:
        return self.n_ducts * self.motors_per_duct


@dataclass(frozen=True)
class DuctState:
    """Per-duct, per-motor health flags. True means healthy."""

    health: tuple[tuple[bool, ...], ...]

    @classmethod
    def all_healthy(cls, n_ducts: int, motors_per_duct: int) -> "DuctState":
        return cls(tuple(tuple([True] * motors_per_duct) for _ in range(n_ducts)))

    def with_failed(self, duct: int, motor: int) -> "DuctState":
        """A copy of this state with one more motor marked failed."""
        if not (0 <= duct < len(self.health)):
            raise IndexError(f"duct index {duct} out of range")
        if not (0 <= motor < len(self.health[duct])):
            raise IndexError(f"motor index {motor} out of range")
        rows = [list(d) for d in self.health]
        rows[duct][motor] = False
        return DuctState(tuple(tuple(r) for r in rows))

    def motor_caps(self, airframe: AirframeParams) -> tuple[tuple[float, ...], ...]:
        """Per-motor force caps for the current health pattern.

        A failed motor contributes nothing. A healthy motor sharing its
        duct with a failed one may transiently run at peak_factor times
        the continuous rating to cover for its twin.
        """
        if len(self.health) != airframe.n_ducts or any(
            len(d) != airframe.motors_per_duct for d in self.health
        ):
            raise ValueError("duct state shape does not match the airframe")
        caps = []
        for duct in self.health:
            duct_degraded = not all(duct)
            row = []
            for healthy in duct:
                if not healthy:
                    row.append(0.0)
                elif duct_degraded:
                    row.append(airframe.peak_factor * airframe.f_motor_cont)
                else:
                    row.append(airframe.f_motor_cont)
            caps.append(tuple(row))
        return tuple(caps)

    def capacity(self, airframe: AirframeParams) -> float:
        """Total deliverable force for the current health pattern."""
        return sum(sum(row) for row in self.motor_caps(airframe))


@dataclass(frozen=True)
class AllocationResult:
    """Per-motor forces after one allocation pass.

    total_delivered is the sum of the per-motor forces; saturated is set
    when the demand could not be met in full.
    """

    forces: tuple[tuple[float, ...], ...]
    total_delivered: float
    saturated: bool

    def flat_forces(self) -> tuple[float, ...]:
        """Motor forces flattened duct-major: duct 0 motor 0, duct 0 motor 1, ..."""
        return tuple(f for duct in self.forces for f in duct)

    def by_motor(self) -> Iterator[tuple[tuple[int, int], float]]:
        for i, duct in enumerate(self.forces):
            for j, f in enumerate(duct):
                yield (i, j), f


def motor_simplified_tf(p: MotorParams) -> RationalTransfer:
    """Voltage-to-force (or torque, via k_t) lag K_m*k_t/(L_m s + R_m)."""
    return RationalTransfer(
        Polynomial((p.k_m * p.k_t,)), Polynomial((p.r_m, p.l_m))
    )


def motor_full_chain_steady_state(p: FullMotorParams, v: float) -> float:
    """Steady thrust of the full chain at constant voltage.

    Steady current is V/R_f, steady speed K_m V/(R_f b), thrust the
    square law k_f omega^2.
    """
    if v < 0:
        raise ValueError("voltage must be non-negative")
    omega = p.k_m * v / (p.r_f * p.b)
    return p.k_f * omega * omega


def motor_full_chain_dynamics(
    p: FullMotorParams,
) -> Callable[[float, np.ndarray, float], np.ndarray]:
    """Nonlinear state derivative for the integrator; state is [current, omega]."""

    def dyn(t: float, x: np.ndarray, v: float) -> np.ndarray:
        current, omega = x
        di = (v - p.r_f * current) / p.l_f
        domega = (p.k_m * current - p.b * omega) / p.j_motor
        return np.array([di, domega])

    return dyn


def motor_full_chain_force(p: FullMotorParams, omega: float) -> float:
    """Square-law propeller thrust at shaft speed omega."""
    return p.k_f * omega * omega


def motor_full_chain_small_signal_gain(p: FullMotorParams, v0: float) -> float:
    """dF/dV of the steady map at operating voltage v0: 2 k_f omega0 K_m/(R_f b)."""
    omega0 = p.k_m * v0 / (p.r_f * p.b)
    return 2.0 * p.k_f * omega0 * p.k_m / (p.r_f * p.b)


def altitude_plant_tf(m: float, lambda_up: float) -> RationalTransfer:
    """Force-to-displacement vertical plant (1/m)/(s^2 + (lambda_up/m) s)."""
    _require_positive(m=m)
    if lambda_up < 0:
        raise ValueError("lambda_up must be non-negative")
    return RationalTransfer(
        Polynomial((1.0,)), Polynomial((0.0, lambda_up, m))
    ).canonical()


def combined_plant_tf(
    motor: MotorParams, m: float, lambda_up: float
) -> RationalTransfer:
    """Voltage-to-displacement plant: motor lag cascaded with the vertical body."""
    return tf_series(motor_simplified_tf(motor), altitude_plant_tf(m, lambda_up))


def roll_plant_tf(airframe: AirframeParams) -> RationalTransfer:
    """Torque-to-roll-angle plant 1/(J_roll s^2 + c_roll s)."""
    return RationalTransfer(
        Polynomial((1.0,)), Polynomial((0.0, airframe.c_roll, airframe.j_roll))
    ).canonical()


def allocate_thrust(
    f_cmd: float, airframe: AirframeParams, states: DuctState
) -> AllocationResult:
    """Split a total thrust demand across ducts and motors.

    Demand is shared equally across ducts; a duct that cannot take its
    share (failed or capped motors) sheds the excess to the ducts that
    still have headroom, so the vehicle delivers min(f_cmd, capacity).
    Within a duct the same equal-share-then-shed rule applies across
    healthy motors. saturated is set when the full demand could not be
    delivered, and always when no capacity remains at all.
    """
    if f_cmd < 0:
        raise ValueError("thrust demand must be non-negative")
    caps = states.motor_caps(airframe)
    duct_caps = [sum(row) for row in caps]
    capacity = sum(duct_caps)
    target = min(f_cmd, capacity)

    duct_alloc = _water_fill(target, duct_caps)
    forces = []
    for row_caps, duct_share in zip(caps, duct_alloc):
        forces.append(tuple(_water_fill(duct_share, list(row_caps))))
    total = sum(sum(row) for row in forces)
    saturated = (f_cmd > capacity + 1e-9) or capacity == 0.0
    return AllocationResult(tuple(forces), total, saturated)


def _water_fill(amount: float, caps: list[float]) -> list[float]:
    """Distribute ``amount`` equally across bins, shedding overflow.

    Classic water-filling: every open bin receives the same share until
    it hits its cap; capped bins drop out and the remainder is reshared.
    Assumes amount <= sum(caps).
    """
    alloc = [0.0] * len(caps)
    remaining = amount
    active = [i for i, c in enumerate(caps) if c > 0.0]
    while remaining > 1e-12 and active:
        share = remaining / len(active)
        still_open = []
        for i in active:
            take = min(share, caps[i] - alloc[i])
            alloc[i] += take
            remaining -= take
            if caps[i] - alloc[i] > 1e-12:
                still_open.append(i)
        active = still_open
    return alloc
