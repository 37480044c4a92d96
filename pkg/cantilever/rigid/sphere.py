from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from cantilever.exceptions import EmptySegmentError, MissingAttachmentForceError, RigidCouplingError, RigidStateError
from cantilever.lattice.types import Lattice, LoadKind, LoadSpec
from common.geometry import FloatArray, cross2, perp, rotate

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("sphere")


@dataclass(frozen=True, eq=False)
class RigidSphere:
    """Rigid particle glued to the segment cd.

    Args:
        mass: m_sp.
        radius: R.
        inertia: I_sp about the sphere center.
        center_rest: Sphere center in the unstressed configuration.
        attachment_ids: Lattice ids of the rigidly attached points.
        attachment_offsets: (N_f, 2) body-frame offsets from the center at beta = 0.
    """

    mass: float
    radius: float
    inertia: float
    center_rest: FloatArray
    attachment_ids: tuple[int, ...]
    attachment_offsets: FloatArray = field(repr=False)


@dataclass(frozen=True, eq=False)
class RigidState:
    """Pose and rates of the sphere.

    Args:
        center: Sphere center (x, z).
        center_velocity: Rate of the center.
        beta: Rotation angle in radians, counter-clockwise in the xz-plane.
        omega: Rate of beta.
    """

    center: FloatArray
    center_velocity: FloatArray
    beta: float = 0.0
    omega: float = 0.0

    @classmethod
    def at_rest(cls, sphere: RigidSphere) -> RigidState:
        return cls(np.array(sphere.center_rest, dtype=float), np.zeros(2))

    def validate(self) -> None:
        """Checks the pose is finite and the tilt below a quarter turn.

        Raises:
            RigidStateError: raised on a non-finite value or |beta| >= pi/2.
        """
        values = np.concatenate([self.center, self.center_velocity, [self.beta, self.omega]])
        if not np.all(np.isfinite(values)):
            raise RigidStateError(f"non-finite rigid state: {values}")
        if abs(self.beta) >= math.pi / 2:
            raise RigidStateError(f"sphere tilt {math.degrees(self.beta):.2f} deg exceeds 90 deg")


def init_sphere(lattice: Lattice, spec: LoadSpec) -> RigidSphere:
    """Places the sphere on top of the segment cd.

    The center sits above the midpoint of cd, high enough that both ends of cd on
    the top face lie on the sphere surface. The sphere mass is mass_ratio times the
    lattice mass.

    Args:
        lattice: Lattice with a marked attachment segment.
        spec: Load with kind RIGID_SPHERE.

    Raises:
        RigidCouplingError: raised for a load of another kind or a lattice without config.
        EmptySegmentError: raised if the lattice has no attachment segment.

    Returns:
        RigidSphere: sphere with inertia from spec.
    """
    if spec.kind != LoadKind.RIGID_SPHERE or spec.sphere_radius is None:
        raise RigidCouplingError(f"expected a rigid sphere load, got {spec.kind.value}")
    if lattice.n_f == 0:
        raise EmptySegmentError("lattice has no attachment segment")
    if lattice.config is None:
        raise RigidCouplingError("sphere placement needs a lattice built from a config")

    l, a = lattice.config.length, lattice.config.width
    radius = spec.sphere_radius
    half_chord = spec.lf_hat * l / 2
    if radius < half_chord:
        LOGGER.warning(f"Sphere radius {radius} is below half the contact chord {half_chord:.4g}")
    height = math.sqrt(max(radius**2 - half_chord**2, 0.0))
    center = np.array([l - half_chord, a / 2 + height])

    ids = np.asarray(lattice.attachment_ids)
    offsets = lattice.rest_positions[ids] - center
    slack = a + lattice.config.spacing
    if np.any(np.linalg.norm(offsets, axis=1) > radius + slack):
        LOGGER.warning("Some attached points lie farther than R from the sphere center")

    mass = spec.mass_ratio * lattice.total_mass
    inertia = spec.inertia_override if spec.inertia_override is not None else spec.inertia_model.factor * mass * radius**2
    LOGGER.info(f"Sphere m_sp={mass:.6g}, R={radius}, I_sp={inertia:.6g}, {ids.size} attached points")
    offsets.flags.writeable = False
    return RigidSphere(mass, radius, inertia, center, tuple(ids.tolist()), offsets)


def rigid_point_positions(sphere: RigidSphere, state: RigidState) -> tuple[FloatArray, FloatArray]:
    """Positions and velocities of the attached points for a sphere pose.

    Returns:
        tuple[FloatArray, FloatArray]: (N_f, 2) positions center + Rot(beta) offset and
        velocities center_velocity + omega x offset.
    """
    arms = rotate(sphere.attachment_offsets, state.beta)
    positions = state.center + arms
    velocities = state.center_velocity + state.omega * perp(arms)
    return positions, velocities


def aggregate_array(sphere: RigidSphere, state: RigidState, forces: FloatArray) -> tuple[FloatArray, float]:
    """Net force and torque about the current center from (N_f, 2) forces on the attached points."""
    arms = rotate(sphere.attachment_offsets, state.beta)
    return forces.sum(axis=0), float(cross2(arms, forces).sum())


def aggregate_force_torque(
    sphere: RigidSphere, state: RigidState, spring_forces: Iterable[tuple[int, ArrayLike]]
) -> tuple[FloatArray, float]:
    """Net elastic force and torque the lattice exerts on the sphere.

    Args:
        sphere: Sphere description.
        state: Current pose.
        spring_forces: Pairs (point id, force) for the attached points. Several
            entries for one point are summed.

    Raises:
        MissingAttachmentForceError: raised if an attached point has no entry.
        RigidCouplingError: raised for an entry of a point that is not attached.

    Returns:
        tuple[FloatArray, float]: force and scalar torque about the sphere center.
    """
    slots = {point_id: i for i, point_id in enumerate(sphere.attachment_ids)}
    forces = np.zeros((len(slots), 2))
    seen = np.zeros(len(slots), dtype=bool)
    for point_id, force in spring_forces:
        if point_id not in slots:
            raise RigidCouplingError(f"point {point_id} is not attached to the sphere")
        forces[slots[point_id]] += np.asarray(force, dtype=float)
        seen[slots[point_id]] = True
    if not seen.all():
        missing = [pid for pid, i in slots.items() if not seen[i]]
        raise MissingAttachmentForceError(f"no force for attached points {missing[:5]}")
    return aggregate_array(sphere, state, forces)
