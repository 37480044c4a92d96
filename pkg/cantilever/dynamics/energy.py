from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cantilever.dynamics.forces import elastic_energy
from cantilever.dynamics.types import SimState
from cantilever.lattice.types import Lattice, PointKind
from cantilever.rigid.sphere import RigidSphere


@dataclass(frozen=True, slots=True)
class EnergySample:
    """Energy split of one state.

    boundary_work and external_work are cumulative since the start of the run, so
    total - boundary_work - external_work stays constant.
    """

    time: float
    kinetic: float
    elastic: float
    rigid_kinetic: float
    boundary_work: float = 0.0
    external_work: float = 0.0

    @property
    def total(self) -> float:
        return self.kinetic + self.elastic + self.rigid_kinetic

    @property
    def conserved(self) -> float:
        return self.total - self.boundary_work - self.external_work


def energy_breakdown(
    lattice: Lattice,
    sphere: RigidSphere | None,
    state: SimState,
    boundary_work: float = 0.0,
    external_work: float = 0.0,
) -> EnergySample:
    """Kinetic energy of FREE points, spring energy and sphere kinetic energy.

    Anchored points are driven, attached points move with the sphere, so neither
    carries kinetic energy of its own.
    """
    free = lattice.kinds == PointKind.FREE
    v = state.velocities[free]
    kinetic = float(0.5 * np.sum(lattice.masses[free] * np.sum(v * v, axis=1)))
    rigid_kinetic = 0.0
    if sphere is not None and state.rigid is not None:
        vc = state.rigid.center_velocity
        rigid_kinetic = 0.5 * sphere.mass * float(vc @ vc) + 0.5 * sphere.inertia * state.rigid.omega**2
    return EnergySample(
        state.time,
        kinetic,
        elastic_energy(lattice, state.positions),
        rigid_kinetic,
        boundary_work,
        external_work,
    )


def total_energy(lattice: Lattice, sphere: RigidSphere | None, state: SimState) -> float:
    """Mechanical energy of the state, without work done by the driver."""
    return energy_breakdown(lattice, sphere, state).total
