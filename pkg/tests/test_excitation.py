import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from cantilever.exceptions import ConfigError, UnknownScenarioError
from cantilever.excitation import (
    HOLD,
    BoundaryDriver,
    DriverKind,
    Ramp,
    boundary_position,
    excitation_for_scenario,
)


def test_z_pulse_reaches_amplitude_and_holds():
    driver = BoundaryDriver(DriverKind.Z_PULSE, 2.9, 0.4)

    assert_allclose(driver.offset(0.0), [0.0, 0.0])
    assert_allclose(driver.offset(0.2), [0.0, 1.45])
    assert_allclose(driver.offset(0.4), [0.0, 2.9])
    assert_allclose(driver.offset(10.0), [0.0, 2.9])
    assert_allclose(driver.velocity(10.0), 0.0)
    assert driver.settle_time() == 0.4


def test_pulse_velocity_integrates_to_shift():
    driver = BoundaryDriver(DriverKind.X_PULSE, 0.37, 0.25, ramp=Ramp.SMOOTH_STEP)
    t = np.linspace(0.0, 0.3, 30001)
    rates = np.array([driver.velocity(s)[0] for s in t])

    assert_allclose(trapezoid(rates, t), 0.37, rtol=1e-6)
    assert_allclose([driver.velocity(s)[1] for s in t[::1000]], 0.0)


@pytest.mark.parametrize("ramp, middle", [(Ramp.LINEAR, 0.5), (Ramp.SMOOTH_STEP, 0.5)])
def test_ramps_are_clamped(ramp: Ramp, middle: float):
    assert ramp.shape(-1.0) == 0.0
    assert ramp.shape(2.0) == 1.0
    assert ramp.shape(0.5) == pytest.approx(middle)
    assert ramp.rate(1.5) == 0.0


def test_harmonic_burst_holds_after_last_cycle():
    omega = 2.0
    burst = 3 * 2 * math.pi / omega
    driver = BoundaryDriver(DriverKind.HARMONIC, 0.29, drive_frequency=omega, burst_duration=burst)

    assert_allclose(driver.offset(0.3), [0.0, 0.29 * math.sin(0.6)])
    assert_allclose(driver.velocity(0.0), [0.0, 0.29 * omega])
    assert_allclose(driver.offset(burst + 1.0), driver.offset(burst))
    assert_allclose(driver.velocity(burst + 1.0), 0.0)
    assert driver.settle_time() == burst


def test_endless_harmonic_never_settles():
    assert BoundaryDriver(DriverKind.HARMONIC, 0.1, drive_frequency=1.0).settle_time() == math.inf


def test_boundary_position_shifts_every_point():
    rest = np.array([[0.0, -0.5], [0.0, 0.5], [-1.0, 0.0]])
    driver = BoundaryDriver(DriverKind.Z_PULSE, 1.0, 0.1)

    assert_allclose(boundary_position(driver, rest, 1.0), rest + [0.0, 1.0])
    assert_allclose(boundary_position(HOLD, rest, 1.0), rest)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": DriverKind.Z_PULSE, "amplitude": 1.0},
        {"kind": DriverKind.HARMONIC, "amplitude": 1.0},
        {"kind": DriverKind.HOLD, "amplitude": math.nan},
        {"kind": DriverKind.HARMONIC, "drive_frequency": 1.0, "burst_duration": -1.0},
    ],
)
def test_invalid_drivers(kwargs):
    with pytest.raises(ConfigError):
        BoundaryDriver(**kwargs)


def test_long_pulse_is_reported(caplog):
    with caplog.at_level("WARNING"):
        BoundaryDriver(DriverKind.Z_PULSE, 1.0, 0.1).check_pulse(1.0)

    assert "overtones" in caplog.text


def test_short_pulse_is_silent(caplog):
    with caplog.at_level("WARNING"):
        BoundaryDriver(DriverKind.Z_PULSE, 1.0, 5 / 240).check_pulse(1.0)

    assert caplog.text == ""


def test_scenario_drivers():
    period = 120.0
    uniform = excitation_for_scenario("fig4", period)
    sphere = excitation_for_scenario("fig7", period)
    burst = excitation_for_scenario("fig8", period, drive_frequency=0.05)

    assert (uniform.kind, uniform.amplitude) == (DriverKind.Z_PULSE, 5.0)
    assert_allclose(uniform.pulse_duration, 2.5)
    assert (sphere.kind, sphere.amplitude) == (DriverKind.X_PULSE, 0.37)
    assert burst.kind == DriverKind.HARMONIC
    assert_allclose(burst.burst_duration, 3 * 2 * math.pi / 0.05)
    assert excitation_for_scenario("hold") is HOLD
    with pytest.raises(UnknownScenarioError):
        excitation_for_scenario("fig99")
