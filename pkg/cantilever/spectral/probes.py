from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from cantilever.dynamics.types import SimState
from cantilever.exceptions import SpectralError
from cantilever.lattice.types import Lattice
from common.geometry import Component, FloatArray


class ProbeKind(Enum):
    """Enum of signals read from a simulation."""

    SINGLE_POINT = "single_point"
    AVERAGE_RIGHTMOST_THREE = "average_rightmost_three"
    AVERAGE_ATTACHMENT_REGION = "average_attachment_region"
    SPHERE_ANGLE = "sphere_angle"
    MID_SPAN_POINT = "mid_span_point"


@dataclass(frozen=True, slots=True)
class ProbeSpec:
    """What to record.

    Point probes record the displacement from rest of one component, averaged over
    the selected points. SPHERE_ANGLE records beta in radians.

    Args:
        kind: Signal kind.
        component: Displacement component of point probes.
        point_id: Point of SINGLE_POINT; defaults to the free end of the middle row.
    """

    kind: ProbeKind
    component: Component = Component.Z
    point_id: int | None = None

    @property
    def label(self) -> str:
        if self.kind == ProbeKind.SPHERE_ANGLE:
            return "beta"
        name = f"{self.component.name.lower()}_{self.kind.value}"
        return name if self.point_id is None else f"{name}_{self.point_id}"

    def resolve(self, lattice: Lattice) -> ResolvedProbe:
        """Binds the probe to the points of a lattice.

        Raises:
            SpectralError: raised if the probe selects no point.
        """
        positions = lattice.rest_positions
        match self.kind:
            case ProbeKind.SINGLE_POINT:
                point = self.point_id if self.point_id is not None else _end_of_middle_row(lattice)
                if not 0 <= point < lattice.n_points:
                    raise SpectralError(f"probe point {point} outside lattice of {lattice.n_points} points")
                ids = np.array([point])
            case ProbeKind.AVERAGE_RIGHTMOST_THREE:
                order = np.lexsort((np.arange(lattice.n_points), -positions[:, 0]))
                ids = np.sort(order[:3])
            case ProbeKind.AVERAGE_ATTACHMENT_REGION:
                if not lattice.attachment_ids:
                    raise SpectralError("lattice has no attachment region to average over")
                ids = np.asarray(lattice.attachment_ids)
            case ProbeKind.SPHERE_ANGLE:
                ids = np.zeros(0, dtype=np.intp)
            case ProbeKind.MID_SPAN_POINT:
                middle = np.flatnonzero(lattice.rows == _middle_row(lattice))
                target = 0.5 * float(positions[:, 0].max() + positions[:, 0].min())
                ids = np.array([middle[np.argmin(np.abs(positions[middle, 0] - target))]])
        return ResolvedProbe(self, ids, positions[ids, self.component.value].mean() if ids.size else 0.0)


@dataclass(frozen=True, eq=False)
class ResolvedProbe:
    """Probe bound to point ids of one lattice."""

    spec: ProbeSpec
    ids: np.ndarray
    rest_value: float

    def sample(self, state: SimState) -> float:
        """Signal value of a state.

        Raises:
            SpectralError: raised for an angle probe on a state without sphere.
        """
        if self.spec.kind == ProbeKind.SPHERE_ANGLE:
            if state.rigid is None:
                raise SpectralError("sphere angle probe on a run without sphere")
            return state.rigid.beta
        return float(state.positions[self.ids, self.spec.component.value].mean()) - self.rest_value


@dataclass(frozen=True, eq=False)
class Trace:
    """Uniformly sampled probe signal."""

    sample_times: FloatArray
    values: FloatArray
    probe: ProbeSpec

    def __post_init__(self) -> None:
        if self.sample_times.shape != self.values.shape or self.sample_times.ndim != 1:
            raise SpectralError("trace times and values must be 1-D arrays of one length")

    @property
    def duration(self) -> float:
        return float(self.sample_times[-1] - self.sample_times[0]) if self.sample_times.size else 0.0

    def interval(self) -> float:
        """Sampling interval.

        Raises:
            SpectralError: raised for fewer than 2 samples or non-uniform sampling.
        """
        if self.sample_times.size < 2:
            raise SpectralError(f"trace of {self.probe.label} needs at least 2 samples")
        steps = np.diff(self.sample_times)
        dt = float(steps.mean())
        if dt <= 0.0 or np.max(np.abs(steps - dt)) > 1e-9 * max(dt, abs(float(self.sample_times[-1]))):
            raise SpectralError(f"trace of {self.probe.label} is not uniformly sampled")
        return dt


def _middle_row(lattice: Lattice) -> int:
    return int(lattice.rows.max()) // 2


def _end_of_middle_row(lattice: Lattice) -> int:
    middle = np.flatnonzero(lattice.rows == _middle_row(lattice))
    return int(middle[np.argmax(lattice.rest_positions[middle, 0])])
