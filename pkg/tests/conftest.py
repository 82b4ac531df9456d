"""Shared fixtures. The headline simulations are expensive (around 100k
RK4 steps each), so they run once per session and are reused by the
scenario, reporting, and acceptance tests."""

import pytest

from tiltrotor.scenarios import (
    Scenario,
    altitude_voltage_bounds,
    inject_failure,
    roll_voltage_bounds,
    run_scenario,
)
from tiltrotor.tuning import PidGains
from tiltrotor.vehicle import AirframeParams, MotorParams

ROLL_GAINS = PidGains(
    kp=3.014659824877878, ki=0.1779264644926727, kd=12.730201799511512
)


@pytest.fixture(scope="session")
def airframe():
    return AirframeParams(
        m=577.0,
        lambda_up=9.0,
        f_max_total=7100.0,
        f_motor_cont=887.5,
        peak_factor=2.0,
        j_roll=350.0,
    )


@pytest.fixture(scope="session")
def motor():
    return MotorParams(k_m=10.0, l_m=0.110, r_m=0.140)


@pytest.fixture(scope="session")
def roll_motor():
    return MotorParams(k_m=10.0, l_m=0.110, r_m=0.140, k_t=1.2)


@pytest.fixture(scope="session")
def basic_scenario(airframe, motor):
    return Scenario(
        kind="altitude-basic",
        airframe=airframe,
        motor=motor,
        gains=PidGains(kp=0.65, ki=0.0, kd=5.0),
        target=50.0,
        duration=60.0,
        saturation=(0.0, airframe.f_max_total),
    )


@pytest.fixture(scope="session")
def basic_run(basic_scenario):
    return run_scenario(basic_scenario)


@pytest.fixture(scope="session")
def motor_scenario(airframe, motor):
    return Scenario(
        kind="altitude-motor",
        airframe=airframe,
        motor=motor,
        gains=PidGains(kp=4.142, ki=0.004, kd=30.48),
        target=50.0,
        duration=120.0,
        saturation=altitude_voltage_bounds(airframe, motor),
    )


@pytest.fixture(scope="session")
def motor_run(motor_scenario):
    return run_scenario(motor_scenario)


@pytest.fixture(scope="session")
def roll_scenario(airframe, roll_motor):
    return Scenario(
        kind="roll-motor",
        airframe=airframe,
        motor=roll_motor,
        gains=ROLL_GAINS,
        target=1.0,
        reference_shape="initial-error",
        disturbance=50.0,
        duration=120.0,
        saturation=roll_voltage_bounds(airframe, roll_motor),
    )


@pytest.fixture(scope="session")
def roll_run(roll_scenario):
    return run_scenario(roll_scenario)


@pytest.fixture(scope="session")
def basic_failed_run(basic_scenario):
    """Basic scenario with one motor of duct 0 failed from t = 0."""
    return run_scenario(inject_failure(basic_scenario, 0, 0, 0.0))


@pytest.fixture(scope="session")
def basic_midfail_run(basic_scenario):
    """Basic scenario losing a motor at t = 30 s, after the step transient."""
    return run_scenario(inject_failure(basic_scenario, 0, 1, 30.0))
