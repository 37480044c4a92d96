"""Clamped-free eigenfunctions of the uniform beam.

phi_k(x) = cosh(l x) - cos(l x) - s (sinh(l x) - sin(l x)) with l = lambda_k and
s = (cosh l + cos l) / (sinh l + sin l). These are orthonormal on [0, 1]. The growing
and decaying exponentials are paired so evaluation stays finite for large lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize

from cantilever.exceptions import ContinuumError
from common.geometry import FloatArray


def sech(x: float) -> float:
    """1 / cosh x without overflow."""
    e = math.exp(-abs(x))
    return 2.0 * e / (1.0 + e * e)


def characteristic(lam: float) -> float:
    """cos(lambda) cosh(lambda) + 1 divided by cosh(lambda)."""
    return math.cos(lam) + sech(lam)


def beam_lambdas(m: int) -> FloatArray:
    """First m roots of cos(lambda) cosh(lambda) + 1 = 0, ascending.

    The k-th root (k >= 1) is bracketed by [(k - 1) pi, k pi], where the characteristic
    changes sign, and found with Brent's method.

    Raises:
        ContinuumError: raised for m < 1.
    """
    if m < 1:
        raise ContinuumError(f"basis size must be at least 1, got {m}")
    roots = [
        optimize.brentq(characteristic, (k - 1) * math.pi, k * math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        for k in range(1, m + 1)
    ]
    return np.array(roots)


@dataclass(frozen=True, eq=False)
class BeamBasis:
    """Roots and mode constants of the first M clamped-free eigenfunctions."""

    lambdas: FloatArray
    sigmas: FloatArray

    @classmethod
    def of_size(cls, m: int) -> BeamBasis:
        lambdas = beam_lambdas(m)
        e = np.exp(-lambdas)
        denominator = 1.0 - e * e + 2.0 * e * np.sin(lambdas)
        sigmas = (1.0 + e * e + 2.0 * e * np.cos(lambdas)) / denominator
        return cls(lambdas, sigmas)

    @property
    def size(self) -> int:
        return self.lambdas.size

    @property
    def frequencies(self) -> FloatArray:
        """Dimensionless uniform-beam frequencies lambda_k^2."""
        return self.lambdas**2

    def evaluate(self, x: ArrayLike, derivative: int = 0) -> FloatArray:
        """d^n phi_k / dx^n at every x.

        Args:
            x: Points of [0, 1].
            derivative: Order 0 to 3.

        Raises:
            ContinuumError: raised for x outside [0, 1] or an unsupported order.

        Returns:
            FloatArray: (M, len(x)) values.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise ContinuumError("eigenfunctions are defined on [0, 1] only")
        if derivative not in (0, 1, 2, 3):
            raise ContinuumError(f"derivative order must be 0..3, got {derivative}")
        lam = self.lambdas[:, None]
        sigma = self.sigmas[:, None]
        e = np.exp(-lam)
        denominator = 1.0 - e * e + 2.0 * e * np.sin(lam)
        grow = (np.sin(lam) - np.cos(lam) - e) * np.exp(lam * (x - 1.0)) / denominator
        decay = 0.5 * (1.0 + sigma) * np.exp(-lam * x)
        s, c = np.sin(lam * x), np.cos(lam * x)
        match derivative:
            case 0:
                return grow + decay - c + sigma * s
            case 1:
                return lam * (grow - decay + s + sigma * c)
            case 2:
                return lam**2 * (grow + decay + c - sigma * s)
            case _:
                return lam**3 * (grow - decay - s - sigma * c)


def eval_phi(basis: BeamBasis, k: int, x: ArrayLike, derivative: int = 0) -> FloatArray:
    """d^n phi_k / dx^n for the 0-based basis index k."""
    if not 0 <= k < basis.size:
        raise ContinuumError(f"basis index {k} outside 0..{basis.size - 1}")
    single = BeamBasis(basis.lambdas[k : k + 1], basis.sigmas[k : k + 1])
    return single.evaluate(x, derivative)[0]
