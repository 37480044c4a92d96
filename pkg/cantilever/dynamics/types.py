from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from cantilever.exceptions import IntegrationError
from cantilever.rigid.sphere import RigidState
from common.config import DEFAULT_ITERATION_TOL, DEFAULT_MAX_HALVINGS, DEFAULT_MAX_ITERATIONS
from common.geometry import FloatArray

ExternalForceField = Callable[[float, FloatArray], FloatArray]
"""Maps (time, (N, 2) midpoint positions) to (N, 2) extra forces on the points."""


class IterationScheme(Enum):
    """Enum of fixed-point preconditioners for the implicit step."""

    PICARD = "picard"
    """Plain fixed-point sweep preconditioned by the mass matrix."""
    TANGENT = "tangent"
    """Newton-like chord iteration on M + (dt^2 / 4) K with K frozen until the contraction stalls."""


@dataclass(frozen=True, slots=True)
class IntegratorConfig:
    """Settings of the implicit midpoint integrator.

    Args:
        dt: Time step.
        iteration_tol: Fixed-point tolerance on max |delta| / (1 + |value|).
        max_iterations: Sweeps allowed per step.
        scheme: PICARD sweeps with the mass matrix only; TANGENT adds the frozen tangent stiffness.
        refresh_every: Steps between tangent refactorizations.
        max_halvings: Times an unconverged step is retried as two half steps; 0 raises at once.
    """

    dt: float
    iteration_tol: float = DEFAULT_ITERATION_TOL
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    scheme: IterationScheme = IterationScheme.TANGENT
    refresh_every: int = 1
    max_halvings: int = DEFAULT_MAX_HALVINGS

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise IntegrationError(f"dt must be positive, got {self.dt}")
        if not 0.0 < self.iteration_tol <= 1e-6:
            raise IntegrationError(f"iteration_tol must lie in (0, 1e-6], got {self.iteration_tol}")
        if self.max_iterations < 2:
            raise IntegrationError(f"max_iterations must be at least 2, got {self.max_iterations}")
        if self.refresh_every < 1:
            raise IntegrationError(f"refresh_every must be at least 1, got {self.refresh_every}")
        if self.max_halvings < 0:
            raise IntegrationError(f"max_halvings must be non-negative, got {self.max_halvings}")


@dataclass(frozen=True, eq=False)
class SimState:
    """Snapshot of the lattice and the sphere.

    Args:
        time: Model time.
        positions: (N, 2) positions of every lattice point.
        velocities: (N, 2) velocities of every lattice point.
        rigid: Sphere pose, None without a sphere.
    """

    time: float
    positions: FloatArray
    velocities: FloatArray
    rigid: RigidState | None = None

    def with_time(self, time: float) -> SimState:
        return replace(self, time=time)

    def reversed(self) -> SimState:
        """Same configuration with every rate negated."""
        rigid = None
        if self.rigid is not None:
            rigid = replace(self.rigid, center_velocity=-self.rigid.center_velocity, omega=-self.rigid.omega)
        return replace(self, velocities=-self.velocities, rigid=rigid)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.velocities)))
