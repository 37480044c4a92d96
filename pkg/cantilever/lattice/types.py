from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from cantilever.exceptions import LatticeError
from common.config import SHELL_INERTIA_FACTOR, SOLID_INERTIA_FACTOR
from common.geometry import FloatArray


class LoadKind(Enum):
    """Enum of ways the attached particle is represented."""

    DISTRIBUTED_MASS = "distributed_mass"
    RIGID_SPHERE = "rigid_sphere"


class InertiaModel(Enum):
    """Enum of sphere mass distributions."""

    SOLID = "solid"
    SHELL = "shell"

    @property
    def factor(self) -> float:
        """I_sp / (m_sp R^2) of this distribution."""
        match self:
            case InertiaModel.SOLID:
                return SOLID_INERTIA_FACTOR
            case InertiaModel.SHELL:
                return SHELL_INERTIA_FACTOR


class PointKind(Enum):
    """Enum of material point roles."""

    FREE = "free"
    ANCHORED = "anchored"
    RIGID_ATTACHED = "rigid_attached"


@dataclass(frozen=True, slots=True)
class LoadSpec:
    """Description of the particle attached near the free end.

    Args:
        kind: Distributed density step or rigid sphere.
        mass_ratio: m_sp / m0, particle mass over the beam mass.
        lf_hat: Attachment length over beam length, l_f / l.
        sphere_radius: Sphere radius R (rigid sphere only).
        inertia_model: Solid or shell sphere (rigid sphere only).
        inertia_override: Explicit I_sp, replaces the inertia model when given.
    """

    kind: LoadKind
    mass_ratio: float
    lf_hat: float
    sphere_radius: float | None = None
    inertia_model: InertiaModel = InertiaModel.SOLID
    inertia_override: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.lf_hat <= 1.0:
            raise LatticeError(f"lf_hat must lie in (0, 1], got {self.lf_hat}")
        if self.mass_ratio < 0.0:
            raise LatticeError(f"mass_ratio must be non-negative, got {self.mass_ratio}")
        if self.kind == LoadKind.RIGID_SPHERE:
            if self.sphere_radius is None or self.sphere_radius <= 0.0:
                raise LatticeError("rigid sphere needs a positive sphere_radius")
            if self.lf_hat >= 1.0:
                raise LatticeError("rigid sphere segment must be shorter than the beam")
        if self.inertia_override is not None and self.inertia_override <= 0.0:
            raise LatticeError(f"inertia_override must be positive, got {self.inertia_override}")


@dataclass(frozen=True, slots=True)
class LatticeConfig:
    """Geometry and material of the discrete cantilever.

    Args:
        length: Beam length l (um).
        width: Beam thickness a along z (um).
        points_outer_row: N_r, points in each outermost row.
        rows: Number of horizontal rows, 3 or 5.
        point_mass: m0 of one material point (model units).
        spring_stiffness: k0 of one spring (model units).
        load: Attached particle, if any.
        anchor_columns: Leftmost points of each row held by the boundary driver.
        breadth: Beam width b along y (um). Eigenfrequencies do not depend on it.
    """

    length: float
    width: float
    points_outer_row: int
    rows: int = 3
    point_mass: float = 1.0
    spring_stiffness: float = 1.0
    load: LoadSpec | None = None
    anchor_columns: int = 1
    breadth: float | None = None

    def __post_init__(self) -> None:
        if self.rows not in (3, 5):
            raise LatticeError(f"rows must be 3 or 5, got {self.rows}")
        if self.points_outer_row < 3:
            raise LatticeError(f"points_outer_row must be at least 3, got {self.points_outer_row}")
        if self.length <= self.width or self.width <= 0.0:
            raise LatticeError(f"beam must be slender: length={self.length}, width={self.width}")
        if self.point_mass <= 0.0 or self.spring_stiffness <= 0.0:
            raise LatticeError("point_mass and spring_stiffness must be positive")
        if self.anchor_columns not in (0, 1, 2):
            raise LatticeError(f"anchor_columns must be 0, 1 or 2, got {self.anchor_columns}")

    @property
    def spacing(self) -> float:
        """Horizontal distance h between neighbours of one row."""
        return self.length / (self.points_outer_row - 1)


@dataclass(frozen=True, slots=True)
class MaterialPoint:
    """One mass of the lattice.

    Args:
        id: Index of the point in the lattice.
        rest_position: (x, z) in the unstressed configuration (um).
        mass: Point mass.
        kind: Role of the point in the dynamics.
        row: Horizontal row the point belongs to, counted from the bottom.
    """

    id: int
    rest_position: tuple[float, float]
    mass: float
    kind: PointKind = PointKind.FREE
    row: int = 0


@dataclass(frozen=True, slots=True)
class Spring:
    """Linear spring between two points."""

    endpoint_a: int
    endpoint_b: int
    rest_length: float
    stiffness: float


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable mass-spring network.

    Args:
        points: Material points ordered by id.
        springs: Springs, no duplicates.
        attachment_ids: Points of the loaded segment cd.
        config: Configuration the lattice was built from. None for hand-made lattices.
    """

    points: tuple[MaterialPoint, ...]
    springs: tuple[Spring, ...]
    attachment_ids: tuple[int, ...] = ()
    config: LatticeConfig | None = field(default=None)

    @property
    def n_points(self) -> int:
        """Total number of material points N."""
        return len(self.points)

    @property
    def n_f(self) -> int:
        """Number of points in the attachment segment."""
        return len(self.attachment_ids)

    @cached_property
    def rest_positions(self) -> FloatArray:
        return _frozen(np.array([p.rest_position for p in self.points], dtype=float).reshape(-1, 2))

    @cached_property
    def masses(self) -> FloatArray:
        return _frozen(np.array([p.mass for p in self.points], dtype=float))

    @cached_property
    def kinds(self) -> np.ndarray:
        return _frozen(np.array([p.kind for p in self.points], dtype=object))

    @cached_property
    def rows(self) -> np.ndarray:
        return _frozen(np.array([p.row for p in self.points], dtype=int))

    @cached_property
    def spring_endpoints(self) -> np.ndarray:
        """(S, 2) integer array of spring endpoints."""
        return _frozen(np.array([(s.endpoint_a, s.endpoint_b) for s in self.springs], dtype=np.intp).reshape(-1, 2))

    @cached_property
    def rest_lengths(self) -> FloatArray:
        return _frozen(np.array([s.rest_length for s in self.springs], dtype=float))

    @cached_property
    def stiffnesses(self) -> FloatArray:
        return _frozen(np.array([s.stiffness for s in self.springs], dtype=float))

    def ids_of(self, kind: PointKind) -> np.ndarray:
        """Ids of all points of the given kind, ascending."""
        return np.flatnonzero(self.kinds == kind)

    def degrees(self) -> np.ndarray:
        """Number of springs attached to each point."""
        return np.bincount(self.spring_endpoints.ravel(), minlength=self.n_points)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array
