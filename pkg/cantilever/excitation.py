"""Prescribed motion of the clamped end."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike

from cantilever.exceptions import ConfigError, UnknownScenarioError
from common.config import DEFAULT_PULSE_PERIODS, PULSE_LIMIT_PERIODS
from common.geometry import FloatArray

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("excitation")

Z_PULSE_AMPLITUDE = 5.0
"""End shift of the uniform beam runs (um)."""

LOADED_Z_PULSE_AMPLITUDE = 2.9
"""End shift of the stepped-density run (um)."""

X_PULSE_AMPLITUDE = 0.37
"""Horizontal end shift of the sphere runs (um)."""

HARMONIC_AMPLITUDE = 0.29
"""Drive amplitude of the harmonic burst (um)."""

BURST_CYCLES = 3
"""Drive periods in the harmonic burst."""


class DriverKind(Enum):
    """Enum of boundary excitation protocols."""

    Z_PULSE = "z_pulse"
    X_PULSE = "x_pulse"
    HARMONIC = "harmonic"
    HOLD = "hold"


class Ramp(Enum):
    """Enum of pulse shapes on the unit interval."""

    LINEAR = "linear"
    SMOOTH_STEP = "smooth_step"

    def shape(self, u: float) -> float:
        u = min(max(u, 0.0), 1.0)
        match self:
            case Ramp.LINEAR:
                return u
            case Ramp.SMOOTH_STEP:
                return u * u * (3.0 - 2.0 * u)

    def rate(self, u: float) -> float:
        if not 0.0 < u < 1.0:
            return 0.0
        match self:
            case Ramp.LINEAR:
                return 1.0
            case Ramp.SMOOTH_STEP:
                return 6.0 * u * (1.0 - u)


@dataclass(frozen=True, slots=True)
class BoundaryDriver:
    """Motion rule shared by all anchored points.

    Args:
        kind: Excitation protocol.
        amplitude: Shift (pulses) or drive amplitude (harmonic), in um.
        pulse_duration: tau of the pulse kinds, in model time.
        drive_frequency: omega_ex of the harmonic kind.
        ramp: Pulse shape.
        burst_duration: Harmonic driving stops after this time and the end holds still.
            None drives forever.
    """

    kind: DriverKind
    amplitude: float = 0.0
    pulse_duration: float = 0.0
    drive_frequency: float = 0.0
    ramp: Ramp = Ramp.SMOOTH_STEP
    burst_duration: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.amplitude):
            raise ConfigError(f"driver amplitude must be finite, got {self.amplitude}")
        match self.kind:
            case DriverKind.Z_PULSE | DriverKind.X_PULSE if self.pulse_duration <= 0.0:
                raise ConfigError("pulse drivers need a positive pulse_duration")
            case DriverKind.HARMONIC if self.drive_frequency <= 0.0:
                raise ConfigError("harmonic driver needs a positive drive_frequency")
            case _:
                pass
        if self.burst_duration is not None and self.burst_duration < 0.0:
            raise ConfigError("burst_duration must be non-negative")

    def offset(self, t: float) -> FloatArray:
        """Displacement of the anchored points from rest at time t."""
        match self.kind:
            case DriverKind.Z_PULSE:
                return np.array([0.0, self.amplitude * self.ramp.shape(t / self.pulse_duration)])
            case DriverKind.X_PULSE:
                return np.array([self.amplitude * self.ramp.shape(t / self.pulse_duration), 0.0])
            case DriverKind.HARMONIC:
                t = self._driven_time(t)
                return np.array([0.0, self.amplitude * math.sin(self.drive_frequency * t)])
            case DriverKind.HOLD:
                return np.zeros(2)

    def velocity(self, t: float) -> FloatArray:
        """Rate of offset at time t."""
        match self.kind:
            case DriverKind.Z_PULSE:
                rate = self.amplitude * self.ramp.rate(t / self.pulse_duration) / self.pulse_duration
                return np.array([0.0, rate])
            case DriverKind.X_PULSE:
                rate = self.amplitude * self.ramp.rate(t / self.pulse_duration) / self.pulse_duration
                return np.array([rate, 0.0])
            case DriverKind.HARMONIC:
                if self.burst_duration is not None and t >= self.burst_duration:
                    return np.zeros(2)
                return np.array([0.0, self.amplitude * self.drive_frequency * math.cos(self.drive_frequency * t)])
            case DriverKind.HOLD:
                return np.zeros(2)

    def position(self, rest: ArrayLike, t: float) -> FloatArray:
        """Positions of points with the given rest positions, shape (2,) or (n, 2)."""
        return np.asarray(rest, dtype=float) + self.offset(t)

    def settle_time(self) -> float:
        """Time after which the boundary no longer moves; inf for endless driving."""
        match self.kind:
            case DriverKind.Z_PULSE | DriverKind.X_PULSE:
                return self.pulse_duration
            case DriverKind.HARMONIC:
                return math.inf if self.burst_duration is None else self.burst_duration
            case DriverKind.HOLD:
                return 0.0

    def check_pulse(self, period: float) -> None:
        """Warns when a pulse is not short against the fundamental period."""
        if self.kind in (DriverKind.Z_PULSE, DriverKind.X_PULSE) and self.pulse_duration > PULSE_LIMIT_PERIODS * period:
            LOGGER.warning(
                f"Pulse lasts {self.pulse_duration / period:.3f} T0, above {PULSE_LIMIT_PERIODS} T0; "
                "overtones will be weakly excited"
            )

    def _driven_time(self, t: float) -> float:
        if self.burst_duration is None:
            return t
        return min(t, self.burst_duration)


HOLD = BoundaryDriver(DriverKind.HOLD)
"""Driver that never moves."""


def boundary_position(driver: BoundaryDriver, rest_position: ArrayLike, t: float) -> FloatArray:
    """Position of an anchored point at time t >= 0."""
    return driver.position(rest_position, t)


def excitation_for_scenario(name: str, period: float = 1.0, drive_frequency: float | None = None) -> BoundaryDriver:
    """Driver used by a built-in scenario.

    Args:
        name: Scenario id.
        period: Unloaded fundamental period T0 in model time, sets the pulse duration.
        drive_frequency: omega_ex for the harmonic burst. Defaults to 2 pi / period.

    Raises:
        UnknownScenarioError: raised for a scenario without a driver.

    Returns:
        BoundaryDriver: driver with scenario defaults.
    """
    tau = DEFAULT_PULSE_PERIODS * period
    match name:
        case "fig4" | "table-eq6":
            return BoundaryDriver(DriverKind.Z_PULSE, Z_PULSE_AMPLITUDE, tau)
        case "fig5":
            return BoundaryDriver(DriverKind.Z_PULSE, LOADED_Z_PULSE_AMPLITUDE, tau)
        case "fig7" | "fig10" | "fig11" | "fig12":
            return BoundaryDriver(DriverKind.X_PULSE, X_PULSE_AMPLITUDE, tau)
        case "fig8":
            omega = drive_frequency if drive_frequency is not None else 2 * math.pi / period
            return BoundaryDriver(
                DriverKind.HARMONIC,
                HARMONIC_AMPLITUDE,
                drive_frequency=omega,
                burst_duration=BURST_CYCLES * 2 * math.pi / omega,
            )
        case "hold":
            return HOLD
        case _:
            raise UnknownScenarioError(f"no driver for scenario {name!r}")
