"""Exact frequencies of the two-segment beam.

On a segment of density rho the deflection solves w'''' = omega_bar^2 rho w, spanned
by the Krylov functions of beta x with beta^4 = omega_bar^2 rho. The state
(w, w', w'', w''') is carried from the clamp to the free end by the product of the
segment transfer matrices. With w = w' = 0 at the clamp the free-end conditions
w'' = w''' = 0 leave a 2x2 determinant whose roots are the eigenfrequencies.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from cantilever.continuum.galerkin import DensityProfile
from cantilever.exceptions import ContinuumError
from common.geometry import FloatArray

SCAN_STEP = 0.02
"""Step of the root scan in sqrt(omega_bar)."""

SCAN_START = 0.05


def transfer_matrix(beta: float, length: float) -> FloatArray:
    """Maps the state at the start of a uniform segment to its end."""
    z = beta * length
    ch, c, sh, s = math.cosh(z), math.cos(z), math.sinh(z), math.sin(z)
    k_s, k_t, k_u, k_v = 0.5 * (ch + c), 0.5 * (sh + s), 0.5 * (ch - c), 0.5 * (sh - s)
    return np.array(
        [
            [k_s, k_t / beta, k_u / beta**2, k_v / beta**3],
            [beta * k_v, k_s, k_t / beta, k_u / beta**2],
            [beta**2 * k_u, beta * k_v, k_s, k_t / beta],
            [beta**3 * k_t, beta**2 * k_u, beta * k_v, k_s],
        ]
    )


def _segments(profile: DensityProfile) -> list[tuple[float, float]]:
    heavy = 1.0 + profile.mass_ratio / profile.lf_hat
    return [(length, rho) for length, rho in ((profile.step, 1.0), (profile.lf_hat, heavy)) if length > 0.0]


def frequency_determinant(root: float, profile: DensityProfile) -> float:
    """Free-end determinant at omega_bar = root^2, divided by cosh of the total phase."""
    transfer = np.eye(4)
    phase = 0.0
    for length, rho in _segments(profile):
        beta = root * rho**0.25
        transfer = transfer_matrix(beta, length) @ transfer
        phase += beta * length
    return float(np.linalg.det(transfer[2:, 2:]) / math.cosh(phase))


def stepped_frequencies(profile: DensityProfile, n_modes: int) -> FloatArray:
    """First n_modes omega_bar of the stepped beam, ascending.

    Sign changes of the determinant are scanned in sqrt(omega_bar) and refined with
    Brent's method.

    Raises:
        ContinuumError: raised for n_modes < 1 or if the scan misses roots.
    """
    if n_modes < 1:
        raise ContinuumError(f"n_modes must be at least 1, got {n_modes}")
    limit = (n_modes + 2) * math.pi
    roots: list[float] = []
    low, f_low = SCAN_START, frequency_determinant(SCAN_START, profile)
    while len(roots) < n_modes:
        high = low + SCAN_STEP
        if high > limit:
            raise ContinuumError(f"found {len(roots)} of {n_modes} roots below sqrt(omega_bar) = {limit:.3g}")
        f_high = frequency_determinant(high, profile)
        if f_low == 0.0:
            roots.append(low)
        elif f_low * f_high < 0.0:
            roots.append(optimize.brentq(frequency_determinant, low, high, args=(profile,), xtol=1e-14))
        low, f_low = high, f_high
    return np.array(roots) ** 2
