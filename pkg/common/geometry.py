from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]
"""Array of float64 values."""


class Component(Enum):
    """Enum of in-plane coordinate components."""

    X = 0
    Z = 1

    @classmethod
    def parse(cls, value: str) -> "Component":
        """Reads a component from its lowercase name.

        Args:
            value: "x" or "z".

        Raises:
            ValueError: raised for any other name.

        Returns:
            Component: matching component.
        """
        match value.lower():
            case "x":
                return cls.X
            case "z":
                return cls.Z
            case _:
                raise ValueError(f"Unknown component: {value!r}")


def rotation(beta: float) -> FloatArray:
    """2D rotation matrix acting on (x, z) column vectors."""
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -s], [s, c]])


def rotate(vectors: ArrayLike, beta: float) -> FloatArray:
    """Rotates row vectors of shape (n, 2) by beta."""
    return np.asarray(vectors, dtype=float) @ rotation(beta).T


def perp(vectors: ArrayLike) -> FloatArray:
    """Quarter turn (x, z) -> (-z, x); equals d/dbeta of a rotated vector."""
    v = np.asarray(vectors, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def cross2(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """Scalar cross product a_x * b_z - a_z * b_x, row-wise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
