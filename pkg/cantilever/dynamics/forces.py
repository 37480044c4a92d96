"""Elastic forces of the spring network and their derivatives."""

from __future__ import annotations

import numpy as np
from scipy import sparse

from cantilever.exceptions import DegenerateSpringError
from cantilever.lattice.types import Lattice
from common.geometry import FloatArray


def _spring_geometry(lattice: Lattice, positions: FloatArray) -> tuple[FloatArray, FloatArray]:
    ends = lattice.spring_endpoints
    d = positions[ends[:, 1]] - positions[ends[:, 0]]
    length = np.hypot(d[:, 0], d[:, 1])
    if np.any(length == 0.0):
        bad = int(np.flatnonzero(length == 0.0)[0])
        raise DegenerateSpringError(f"spring {ends[bad].tolist()} has coincident endpoints")
    return d, length


def spring_forces(lattice: Lattice, positions: FloatArray) -> FloatArray:
    """Net elastic force on every point.

    Each spring pulls its endpoints together with k (|d| - L0) along the current axis.

    Args:
        lattice: Spring network.
        positions: (N, 2) current positions.

    Raises:
        DegenerateSpringError: raised if two joined points coincide.

    Returns:
        FloatArray: (N, 2) forces.
    """
    d, length = _spring_geometry(lattice, positions)
    pull = (lattice.stiffnesses * (length - lattice.rest_lengths) / length)[:, None] * d
    ends = lattice.spring_endpoints
    n = lattice.n_points
    forces = np.empty((n, 2))
    for c in range(2):
        forces[:, c] = np.bincount(ends[:, 0], pull[:, c], n) - np.bincount(ends[:, 1], pull[:, c], n)
    return forces


def elastic_energy(lattice: Lattice, positions: FloatArray) -> float:
    """Sum of k (|d| - L0)^2 / 2 over all springs."""
    _, length = _spring_geometry(lattice, positions)
    return float(0.5 * np.sum(lattice.stiffnesses * (length - lattice.rest_lengths) ** 2))


def tangent_stiffness(lattice: Lattice, positions: FloatArray) -> sparse.csr_matrix:
    """Derivative of minus the spring forces over the flattened positions.

    Per spring the block is k [e e^T + (1 - L0/|d|)(I - e e^T)], entering
    [[K, -K], [-K, K]] on its two endpoints.

    Returns:
        sparse.csr_matrix: symmetric (2N, 2N) matrix with x, z of point i at 2i, 2i + 1.
    """
    d, length = _spring_geometry(lattice, positions)
    e = d / length[:, None]
    outer = e[:, :, None] * e[:, None, :]
    soft = 1.0 - lattice.rest_lengths / length
    blocks = lattice.stiffnesses[:, None, None] * (outer + soft[:, None, None] * (np.eye(2) - outer))

    ends = lattice.spring_endpoints
    rows, cols, data = [], [], []
    ij = np.arange(2)
    for p, q, sign in ((0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)):
        r = 2 * ends[:, p][:, None, None] + ij[None, :, None]
        c = 2 * ends[:, q][:, None, None] + ij[None, None, :]
        rows.append(np.broadcast_to(r, blocks.shape).ravel())
        cols.append(np.broadcast_to(c, blocks.shape).ravel())
        data.append((sign * blocks).ravel())
    size = 2 * lattice.n_points
    return sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
