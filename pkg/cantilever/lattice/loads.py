from __future__ import annotations

from dataclasses import replace

import numpy as np

from cantilever.exceptions import EmptySegmentError, LatticeError
from cantilever.lattice.types import Lattice, LoadKind, LoadSpec, PointKind

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("loads")


def segment_ids(lattice: Lattice, lf_hat: float) -> np.ndarray:
    """Ids of the points lying in the segment cd at the free end.

    A point belongs to cd when its rest x is at least l(1 - lf_hat) - h/4, so the
    staggered end point past x = l is always included. lf_hat = 1 covers the whole beam.

    Args:
        lattice: Lattice built from a config.
        lf_hat: Segment length over beam length.

    Raises:
        LatticeError: raised if the lattice has no config to read l and h from.

    Returns:
        np.ndarray: ascending point ids.
    """
    if lattice.config is None:
        raise LatticeError("segment selection needs a lattice built from a config")
    if lf_hat >= 1.0:
        return np.arange(lattice.n_points)
    l = lattice.config.length
    threshold = l * (1.0 - lf_hat) - lattice.config.spacing / 4
    return np.flatnonzero(lattice.rest_positions[:, 0] >= threshold)


def apply_distributed_load(lattice: Lattice, spec: LoadSpec) -> Lattice:
    """Smears the particle mass over the segment cd.

    Each of the N_f segment points gets mass m0 * (1 + (m_sp/m0) * N / N_f), so the
    added mass sums to m_sp = (m_sp/m0) * N * m0.

    Args:
        lattice: Unloaded lattice.
        spec: Load with kind DISTRIBUTED_MASS.

    Raises:
        LatticeError: raised for a load of another kind.
        EmptySegmentError: raised if no point lies in the segment.

    Returns:
        Lattice: lattice with scaled masses and attachment_ids set.
    """
    if spec.kind != LoadKind.DISTRIBUTED_MASS:
        raise LatticeError(f"expected a distributed mass load, got {spec.kind.value}")
    if spec.mass_ratio == 0.0:
        return lattice

    ids = segment_ids(lattice, spec.lf_hat)
    if ids.size == 0:
        raise EmptySegmentError(f"no material point within lf_hat={spec.lf_hat}")

    assert lattice.config is not None
    factor = 1.0 + spec.mass_ratio * lattice.n_points / ids.size
    loaded = set(ids.tolist())
    points = tuple(
        replace(p, mass=lattice.config.point_mass * factor) if p.id in loaded else p for p in lattice.points
    )
    LOGGER.debug(f"Distributed load over {ids.size} points, mass factor {factor:.6g}")
    return replace(lattice, points=points, attachment_ids=tuple(ids.tolist()))


def mark_attachment_segment(lattice: Lattice, lf_hat: float) -> Lattice:
    """Marks the segment cd as rigidly attached to the sphere.

    Springs joining two attached points are dropped; springs with one attached
    endpoint stay and carry the force and torque passed to the sphere.

    Args:
        lattice: Lattice built from a config.
        lf_hat: Segment length over beam length, in (0, 1).

    Raises:
        LatticeError: raised if lf_hat is outside (0, 1).
        EmptySegmentError: raised if no point lies in the segment.

    Returns:
        Lattice: lattice with RIGID_ATTACHED points and attachment_ids set.
    """
    if not 0.0 < lf_hat < 1.0:
        raise LatticeError(f"lf_hat must lie in (0, 1), got {lf_hat}")
    ids = segment_ids(lattice, lf_hat)
    if ids.size == 0:
        raise EmptySegmentError(f"no material point within lf_hat={lf_hat}")

    attached = set(ids.tolist())
    if any(lattice.points[i].kind == PointKind.ANCHORED for i in attached):
        raise LatticeError("attachment segment reaches the clamped end")
    points = tuple(replace(p, kind=PointKind.RIGID_ATTACHED) if p.id in attached else p for p in lattice.points)
    springs = tuple(s for s in lattice.springs if not (s.endpoint_a in attached and s.endpoint_b in attached))
    LOGGER.debug(f"Attachment segment: {len(attached)} points, {len(lattice.springs) - len(springs)} springs removed")
    return replace(lattice, points=points, springs=springs, attachment_ids=tuple(ids.tolist()))
