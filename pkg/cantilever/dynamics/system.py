from __future__ import annotations

import math
from dataclasses import dataclass
from logging import Logger

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from cantilever.dynamics.forces import spring_forces, tangent_stiffness
from cantilever.dynamics.types import SimState
from cantilever.exceptions import IntegrationError, RigidCouplingError
from cantilever.excitation import HOLD, BoundaryDriver
from cantilever.lattice.types import Lattice, PointKind
from cantilever.rigid.sphere import RigidSphere, RigidState, rigid_point_positions
from common.geometry import FloatArray, cross2, perp, rotate

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("system")

DENSE_MODES_LIMIT = 400
"""Up to this many DOFs the linear modes come from a dense solve."""


@dataclass(frozen=True, eq=False)
class LinearModes:
    """Small-amplitude eigenpairs of the clamped system at rest.

    Args:
        omegas: Angular frequencies, ascending.
        shapes: (n_dofs, n_modes) mass-normalized generalized displacements.
    """

    omegas: FloatArray
    shapes: FloatArray

    @property
    def fundamental(self) -> float:
        """Lowest non-rigid angular frequency."""
        floor = 1e-6 * float(self.omegas[-1])
        elastic = self.omegas[self.omegas > floor]
        if elastic.size == 0:
            raise IntegrationError("system has no elastic mode")
        return float(elastic[0])

    @property
    def period(self) -> float:
        return 2 * math.pi / self.fundamental


class CantileverSystem:
    """Lattice with an optional sphere seen as one mechanical system.

    The generalized coordinates y are the x, z of every FREE point followed by the
    sphere pose (cx, cz, beta). ANCHORED points follow the boundary driver and
    RIGID_ATTACHED points follow the sphere.
    """

    __slots__ = (
        "lattice",
        "sphere",
        "driver",
        "free_ids",
        "anchored_ids",
        "attached_ids",
        "mass_vector",
        "_logger",
    )

    def __init__(
        self,
        lattice: Lattice,
        sphere: RigidSphere | None = None,
        driver: BoundaryDriver = HOLD,
        *,
        logger: Logger = LOGGER,
    ) -> None:
        """
        Args:
            lattice: Spring network.
            sphere: Sphere coupled to the RIGID_ATTACHED points, if any.
            driver: Motion of the ANCHORED points.
            logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.

        Raises:
            RigidCouplingError: raised if attached points and sphere do not match.
        """
        self.lattice = lattice
        self.sphere = sphere
        self.driver = driver
        self._logger = logger
        self.free_ids = lattice.ids_of(PointKind.FREE)
        self.anchored_ids = lattice.ids_of(PointKind.ANCHORED)
        self.attached_ids = lattice.ids_of(PointKind.RIGID_ATTACHED)

        if sphere is None and self.attached_ids.size:
            raise RigidCouplingError("lattice has rigidly attached points but no sphere")
        if sphere is not None and not np.array_equal(self.attached_ids, np.asarray(sphere.attachment_ids)):
            raise RigidCouplingError("sphere attachment ids differ from the lattice segment")

        masses = np.repeat(lattice.masses[self.free_ids], 2)
        if sphere is not None:
            masses = np.concatenate([masses, [sphere.mass, sphere.mass, sphere.inertia]])
        if np.any(masses <= 0.0):
            raise RigidCouplingError("every moving degree of freedom needs a positive mass")
        self.mass_vector = masses

    @property
    def n_dofs(self) -> int:
        return self.mass_vector.size

    @property
    def n_free_dofs(self) -> int:
        return 2 * self.free_ids.size

    def pack(self, state: SimState) -> tuple[FloatArray, FloatArray]:
        """Generalized coordinates and rates of a state."""
        y = state.positions[self.free_ids].ravel()
        u = state.velocities[self.free_ids].ravel()
        if self.sphere is not None:
            if state.rigid is None:
                raise RigidCouplingError("state has no sphere pose")
            rigid = state.rigid
            y = np.concatenate([y, rigid.center, [rigid.beta]])
            u = np.concatenate([u, rigid.center_velocity, [rigid.omega]])
        return y, u

    def rigid_state(self, y: FloatArray, u: FloatArray | None = None) -> RigidState | None:
        if self.sphere is None:
            return None
        if u is None:
            return RigidState(y[-3:-1].copy(), np.zeros(2), float(y[-1]), 0.0)
        return RigidState(y[-3:-1].copy(), u[-3:-1].copy(), float(y[-1]), float(u[-1]))

    def positions(self, y: FloatArray, anchors: FloatArray) -> FloatArray:
        """(N, 2) positions from generalized coordinates and anchored positions."""
        full = np.array(self.lattice.rest_positions)
        full[self.free_ids] = y[: self.n_free_dofs].reshape(-1, 2)
        full[self.anchored_ids] = anchors
        if self.sphere is not None:
            rigid = self.rigid_state(y)
            assert rigid is not None
            full[self.attached_ids], _ = rigid_point_positions(self.sphere, rigid)
        return full

    def unpack(self, time: float, y: FloatArray, u: FloatArray) -> SimState:
        """Full state at time with the anchored points placed by the driver."""
        rest = self.lattice.rest_positions
        positions = self.positions(y, self.driver.position(rest[self.anchored_ids], time))
        velocities = np.zeros_like(positions)
        velocities[self.free_ids] = u[: self.n_free_dofs].reshape(-1, 2)
        velocities[self.anchored_ids] = self.driver.velocity(time)
        rigid = self.rigid_state(y, u)
        if rigid is not None and self.sphere is not None:
            _, velocities[self.attached_ids] = rigid_point_positions(self.sphere, rigid)
        return SimState(time, positions, velocities, rigid)

    def anchor_positions(self, time: float) -> FloatArray:
        return self.driver.position(self.lattice.rest_positions[self.anchored_ids], time)

    def initial_state(self) -> SimState:
        """Lattice at rest, sphere at its rest pose."""
        rigid = RigidState.at_rest(self.sphere) if self.sphere is not None else None
        positions = np.array(self.lattice.rest_positions)
        return SimState(0.0, positions, np.zeros_like(positions), rigid)

    def generalized(self, forces: FloatArray, y: FloatArray) -> FloatArray:
        """Projects (N, 2) point forces onto the generalized coordinates."""
        q = forces[self.free_ids].ravel()
        if self.sphere is None:
            return q
        arms = rotate(self.sphere.attachment_offsets, float(y[-1]))
        on_sphere = forces[self.attached_ids]
        torque = float(cross2(arms, on_sphere).sum())
        return np.concatenate([q, on_sphere.sum(axis=0), [torque]])

    def generalized_forces(self, y: FloatArray, anchors: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Generalized elastic forces and the (N, 2) point forces they come from."""
        forces = spring_forces(self.lattice, self.positions(y, anchors))
        return self.generalized(forces, y), forces

    def jacobian(self, y: FloatArray) -> sparse.csr_matrix:
        """d(flattened point positions) / dy; rows of anchored points are zero."""
        n = self.lattice.n_points
        rows = [2 * self.free_ids, 2 * self.free_ids + 1]
        cols = [np.arange(0, self.n_free_dofs, 2), np.arange(1, self.n_free_dofs, 2)]
        data = [np.ones(self.free_ids.size), np.ones(self.free_ids.size)]
        if self.sphere is not None:
            k = self.n_free_dofs
            ids = self.attached_ids
            turn = perp(rotate(self.sphere.attachment_offsets, float(y[-1])))
            ones = np.ones(ids.size)
            rows += [2 * ids, 2 * ids + 1, 2 * ids, 2 * ids + 1]
            cols += [np.full(ids.size, k), np.full(ids.size, k + 1), np.full(ids.size, k + 2), np.full(ids.size, k + 2)]
            data += [ones, ones, turn[:, 0], turn[:, 1]]
        return sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, self.n_dofs)
        ).tocsr()

    def generalized_stiffness(self, y: FloatArray, anchors: FloatArray) -> sparse.csr_matrix:
        """-dQ/dy at y with the anchored points held.

        Includes the change of the torque arms with beta, sum over attached points of arm . f.
        """
        positions = self.positions(y, anchors)
        jac = self.jacobian(y)
        stiffness = (jac.T @ tangent_stiffness(self.lattice, positions) @ jac).tocsr()
        if self.sphere is None:
            return stiffness
        arms = rotate(self.sphere.attachment_offsets, float(y[-1]))
        forces = spring_forces(self.lattice, positions)[self.attached_ids]
        k = self.n_dofs - 1
        geometric = sparse.coo_matrix(([float(np.sum(arms * forces))], ([k], [k])), shape=stiffness.shape)
        return (stiffness + geometric).tocsr()

    def linear_modes(self, n_modes: int = 6) -> LinearModes:
        """Lowest eigenpairs of K v = omega^2 M v at rest.

        Args:
            n_modes: Number of modes, capped at n_dofs - 1 for the sparse solver.

        Returns:
            LinearModes: frequencies and shapes.
        """
        y, _ = self.pack(self.initial_state())
        stiffness = self.generalized_stiffness(y, self.lattice.rest_positions[self.anchored_ids])
        mass = self.mass_vector
        if self.n_dofs <= DENSE_MODES_LIMIT:
            count = min(n_modes, self.n_dofs)
            values, vectors = linalg.eigh(stiffness.toarray(), np.diag(mass), subset_by_index=(0, count - 1))
        else:
            count = min(n_modes, self.n_dofs - 1)
            shift = -1e-9 * float(np.mean(stiffness.diagonal() / mass))
            values, vectors = sparse_linalg.eigsh(
                stiffness.tocsc(), k=count, M=sparse.diags(mass).tocsc(), sigma=shift, which="LM"
            )
            order = np.argsort(values)
            values, vectors = values[order], vectors[:, order]
        omegas = np.sqrt(np.clip(values, 0.0, None))
        self._logger.debug(f"Linear modes of {self.n_dofs} DOFs: omega = {np.array2string(omegas, precision=6)}")
        return LinearModes(omegas, vectors)
