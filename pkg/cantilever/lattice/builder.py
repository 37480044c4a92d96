from __future__ import annotations

from abc import ABC, abstractmethod
from logging import Logger
from typing import NamedTuple, NotRequired, TypedDict

import numpy as np
from typing_extensions import override

from cantilever.lattice.loads import apply_distributed_load, mark_attachment_segment
from cantilever.lattice.types import Lattice, LatticeConfig, LoadKind, MaterialPoint, PointKind, Spring

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("builder")

MIN_BEAM_POINTS = 10
"""Below this many points per row the lattice is a toy, not a beam."""


class RowLayout(NamedTuple):
    """One horizontal row of the lattice."""

    z: float
    staggered: bool


class LatticeBuilderKwargs(TypedDict):
    """Key-word arguments dict for a LatticeBuilder."""

    logger: NotRequired[Logger]


class LatticeBuilder(ABC):
    """Abstract class for lattice construction."""

    __slots__ = ("_logger",)

    def __init__(self, *, logger: Logger = LOGGER) -> None:
        """
        Args:
            logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.
        """
        self._logger = logger

    @abstractmethod
    def build(self, config: LatticeConfig) -> Lattice:
        """Builds the unstressed lattice described by config, load included.

        Args:
            config: Geometry, material and load.

        Raises:
            LatticeError: raised if config can not host a lattice or its load segment.

        Returns:
            Lattice: lattice in equilibrium.
        """
        ...


class TriangularLatticeBuilder(LatticeBuilder):
    """Rows of equally spaced points, every second row staggered by h/2 and one point longer.

    Springs join horizontal neighbours and each staggered point to its two nearest
    points in every adjacent row. There are no vertical springs.
    """

    @override
    def build(self, config: LatticeConfig) -> Lattice:
        if config.points_outer_row < MIN_BEAM_POINTS:
            self._logger.warning(f"Only {config.points_outer_row} points per row, lattice is too coarse for a beam")

        layouts = self.row_layouts(config)
        h = config.spacing
        points: list[MaterialPoint] = []
        row_ids: list[list[int]] = []
        for row, layout in enumerate(layouts):
            count = config.points_outer_row + 1 if layout.staggered else config.points_outer_row
            shift = -0.5 * h if layout.staggered else 0.0
            ids = []
            for column in range(count):
                kind = PointKind.ANCHORED if column < config.anchor_columns else PointKind.FREE
                point = MaterialPoint(
                    id=len(points),
                    rest_position=(shift + column * h, layout.z),
                    mass=config.point_mass,
                    kind=kind,
                    row=row,
                )
                points.append(point)
                ids.append(point.id)
            row_ids.append(ids)

        edges: list[tuple[int, int]] = []
        for ids in row_ids:
            edges.extend(zip(ids[:-1], ids[1:]))
        for lower, upper in zip(range(len(layouts) - 1), range(1, len(layouts))):
            staggered, plain = (lower, upper) if layouts[lower].staggered else (upper, lower)
            for j, point_id in enumerate(row_ids[staggered]):
                for i in (j - 1, j):
                    if 0 <= i < len(row_ids[plain]):
                        edges.append((min(point_id, row_ids[plain][i]), max(point_id, row_ids[plain][i])))

        positions = np.array([p.rest_position for p in points])
        springs = tuple(
            Spring(a, b, float(np.linalg.norm(positions[b] - positions[a])), config.spring_stiffness)
            for a, b in edges
        )
        lattice = Lattice(points=tuple(points), springs=springs, config=config)
        self._logger.debug(f"Built {config.rows}-row lattice: {lattice.n_points} points, {len(springs)} springs")

        match config.load:
            case None:
                return lattice
            case load if load.kind == LoadKind.DISTRIBUTED_MASS:
                return apply_distributed_load(lattice, load)
            case load:
                return mark_attachment_segment(lattice, load.lf_hat)

    @staticmethod
    def row_layouts(config: LatticeConfig) -> list[RowLayout]:
        """Rows from the bottom face to the top face."""
        a = config.width
        if config.rows == 3:
            return [RowLayout(-a / 2, False), RowLayout(0.0, True), RowLayout(a / 2, False)]
        return [
            RowLayout(-a / 2, False),
            RowLayout(-a / 4, True),
            RowLayout(0.0, False),
            RowLayout(a / 4, True),
            RowLayout(a / 2, False),
        ]


def build_lattice(config: LatticeConfig) -> Lattice:
    """Builds a lattice with the default triangular builder."""
    return TriangularLatticeBuilder().build(config)
