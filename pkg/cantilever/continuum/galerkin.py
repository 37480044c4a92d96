from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from cantilever.continuum.basis import BeamBasis
from cantilever.continuum.quadrature import GaussLegendreRule
from cantilever.exceptions import ContinuumError, ModalSolveError
from common.config import CONTINUUM_BASIS_SIZE, ORTHOGONALITY_LIMIT
from common.geometry import FloatArray

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("galerkin")

IMAGINARY_LIMIT = 1e-8
"""Largest relative imaginary part accepted for an eigenvalue of the alpha matrix."""

CHECKED_MODES = 6
"""Modes covered by the orthogonality check."""


class Formulation(Enum):
    """Enum of the discrete eigenproblems for the Galerkin coefficients."""

    SYMMETRIC = "symmetric"
    """diag(lambda^4) c = omega_bar^2 M c with M_km = integral rho phi_k phi_m."""
    ALPHA = "alpha"
    """omega_bar^2 c = alpha c, exact only in the limit of a complete basis."""


@dataclass(frozen=True, slots=True)
class DensityProfile:
    """Stepped density of the beam with the particle smeared over its end.

    rho(x) = 1 on [0, 1 - lf_hat) and 1 + mass_ratio / lf_hat on (1 - lf_hat, 1].
    """

    lf_hat: float
    mass_ratio: float

    def __post_init__(self) -> None:
        if not 0.0 < self.lf_hat <= 1.0:
            raise ContinuumError(f"lf_hat must lie in (0, 1], got {self.lf_hat}")
        if self.mass_ratio < 0.0:
            raise ContinuumError(f"mass_ratio must be non-negative, got {self.mass_ratio}")

    @classmethod
    def uniform(cls) -> DensityProfile:
        return cls(1.0, 0.0)

    @property
    def step(self) -> float:
        """Position of the density jump."""
        return 1.0 - self.lf_hat

    @property
    def total_mass(self) -> float:
        """Integral of rho over [0, 1], equal to 1 + mass_ratio."""
        return 1.0 + self.mass_ratio

    def density(self, x: ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        return np.where(x < self.step, 1.0, 1.0 + self.mass_ratio / self.lf_hat)

    def rule(self) -> GaussLegendreRule:
        """Quadrature with a panel edge at the density jump."""
        return GaussLegendreRule.composite(() if self.step <= 0.0 else (self.step,))


def alpha_matrix(basis: BeamBasis, profile: DensityProfile, rule: GaussLegendreRule | None = None) -> FloatArray:
    """alpha_km = lambda_m^4 * integral of phi_k phi_m / rho over [0, 1]."""
    rule = rule if rule is not None else profile.rule()
    phi = basis.evaluate(rule.nodes)
    gram = (phi * (rule.weights / profile.density(rule.nodes))) @ phi.T
    return gram * (basis.lambdas**4)[None, :]


def mass_matrix(basis: BeamBasis, profile: DensityProfile, rule: GaussLegendreRule | None = None) -> FloatArray:
    """M_km = integral of rho phi_k phi_m over [0, 1]."""
    rule = rule if rule is not None else profile.rule()
    phi = basis.evaluate(rule.nodes)
    return (phi * (rule.weights * profile.density(rule.nodes))) @ phi.T


@dataclass(frozen=True, eq=False)
class ModalSolution:
    """Eigenpairs of the loaded beam.

    Args:
        eigenfrequencies: omega_bar_n ascending, 0-based (index 0 is the fundamental).
        coefficients: (M, M) matrix, column n holds c_kn of f_n.
        profile: Density the modes belong to.
        basis: Expansion basis.
        orthogonality_residual: Largest |integral rho f_n f_m| / total mass over the checked modes, n != m.
        normalization_residual: Largest deviation of integral rho f_n^2 / total mass from 1.
    """

    eigenfrequencies: FloatArray
    coefficients: FloatArray
    profile: DensityProfile
    basis: BeamBasis
    orthogonality_residual: float
    normalization_residual: float

    @property
    def ratios(self) -> FloatArray:
        """omega_bar_n over the uniform-beam fundamental lambda_1^2."""
        return self.eigenfrequencies / self.basis.frequencies[0]

    @property
    def self_ratios(self) -> FloatArray:
        """omega_bar_n over the fundamental of the same loaded beam."""
        return self.eigenfrequencies / self.eigenfrequencies[0]


def _weighted_overlap(solution_shapes: FloatArray, rule: GaussLegendreRule, profile: DensityProfile) -> FloatArray:
    weighted = solution_shapes * (rule.weights * profile.density(rule.nodes))
    return weighted @ solution_shapes.T / profile.total_mass


def solve_modes(
    alpha: FloatArray,
    basis: BeamBasis,
    profile: DensityProfile,
    rule: GaussLegendreRule | None = None,
    checked_modes: int = CHECKED_MODES,
) -> ModalSolution:
    """Solves omega_bar^2 c = alpha c and normalizes the eigenfunctions.

    alpha is solved as a general real matrix. Each f_n = sum_k c_kn phi_k is scaled
    so integral rho f_n^2 equals integral rho, with f_n(1) > 0.

    Raises:
        ModalSolveError: raised if an eigenvalue is complex or not positive.

    Returns:
        ModalSolution: eigenpairs sorted ascending.
    """
    values, vectors = linalg.eig(alpha)
    scale = np.maximum(np.abs(values), np.finfo(float).tiny)
    worst = float(np.max(np.abs(values.imag) / scale))
    if worst > IMAGINARY_LIMIT:
        raise ModalSolveError(f"alpha matrix has complex eigenvalues (relative imaginary part {worst:.2e})")
    order = np.argsort(values.real)
    return _normalized(values.real[order], vectors[:, order].real, basis, profile, rule, checked_modes)


def solve_symmetric(
    basis: BeamBasis,
    profile: DensityProfile,
    rule: GaussLegendreRule | None = None,
    checked_modes: int = CHECKED_MODES,
) -> ModalSolution:
    """Solves diag(lambda^4) c = omega_bar^2 M c with the mass matrix of the profile.

    The stiffness is diagonal in the basis because phi_k'''' = lambda_k^4 phi_k, so this
    is the Rayleigh-Ritz problem of the loaded beam. Its eigenvalues converge from above
    as the basis grows and its modes are M-orthogonal up to rounding.

    Raises:
        ModalSolveError: raised if the mass matrix is not positive definite.

    Returns:
        ModalSolution: eigenpairs sorted ascending.
    """
    rule = rule if rule is not None else profile.rule()
    try:
        values, vectors = linalg.eigh(np.diag(basis.lambdas**4), mass_matrix(basis, profile, rule))
    except linalg.LinAlgError as err:
        raise ModalSolveError(f"mass matrix is not positive definite: {err}") from err
    return _normalized(values, vectors, basis, profile, rule, checked_modes)


def _normalized(
    values: FloatArray,
    vectors: FloatArray,
    basis: BeamBasis,
    profile: DensityProfile,
    rule: GaussLegendreRule | None,
    checked_modes: int,
) -> ModalSolution:
    """Scales ascending eigenpairs to integral rho f_n^2 = integral rho with f_n(1) > 0."""
    if np.any(values <= 0.0):
        raise ModalSolveError("eigenproblem has non-positive eigenvalues")
    rule = rule if rule is not None else profile.rule()
    phi = basis.evaluate(rule.nodes)
    norms = (vectors.T @ phi) ** 2 @ (rule.weights * profile.density(rule.nodes))
    tip = vectors.T @ basis.evaluate([1.0])[:, 0]
    vectors = vectors * (np.sign(np.where(tip == 0.0, 1.0, tip)) * np.sqrt(profile.total_mass / norms))[None, :]

    count = min(checked_modes, values.size)
    overlap = _weighted_overlap(vectors[:, :count].T @ phi, rule, profile)
    normalization = float(np.max(np.abs(np.diag(overlap) - 1.0)))
    orthogonality = float(np.max(np.abs(overlap - np.diag(np.diag(overlap))), initial=0.0))
    if orthogonality > ORTHOGONALITY_LIMIT:
        LOGGER.warning(f"Cross-orthogonality residual {orthogonality:.3g} exceeds {ORTHOGONALITY_LIMIT}")

    solution = ModalSolution(np.sqrt(values), vectors, profile, basis, orthogonality, normalization)
    LOGGER.debug(
        f"Modes for lf_hat={profile.lf_hat}, ratio={profile.mass_ratio}: "
        f"Omega = {np.array2string(solution.ratios[:count], precision=4)}"
    )
    return solution


def solve_profile(
    profile: DensityProfile,
    basis_size: int = CONTINUUM_BASIS_SIZE,
    formulation: Formulation = Formulation.SYMMETRIC,
) -> ModalSolution:
    """Basis and eigenpairs for one density profile."""
    basis = BeamBasis.of_size(basis_size)
    rule = profile.rule()
    match formulation:
        case Formulation.SYMMETRIC:
            return solve_symmetric(basis, profile, rule)
        case Formulation.ALPHA:
            return solve_modes(alpha_matrix(basis, profile, rule), basis, profile, rule)


def eval_mode_shape(solution: ModalSolution, n: int, x: ArrayLike, derivative: int = 0) -> FloatArray:
    """f_n or one of its derivatives on a grid of [0, 1], n 0-based.

    Raises:
        ContinuumError: raised for a mode index out of range.
    """
    if not 0 <= n < solution.eigenfrequencies.size:
        raise ContinuumError(f"mode {n} outside 0..{solution.eigenfrequencies.size - 1}")
    return solution.coefficients[:, n] @ solution.basis.evaluate(x, derivative)


def rayleigh_quotient(solution: ModalSolution, n: int) -> float:
    """integral (f_n'')^2 over integral rho f_n^2, which equals omega_bar_n^2."""
    rule = solution.profile.rule()
    curvature = eval_mode_shape(solution, n, rule.nodes, derivative=2)
    shape = eval_mode_shape(solution, n, rule.nodes)
    return float(rule.integrate(curvature**2) / rule.integrate(solution.profile.density(rule.nodes) * shape**2))


def dimensional_frequency(omega_bar: float, a: float, l: float, e_modulus: float, rho0: float) -> float:
    """omega_n = omega_bar_n (a / l^2) sqrt(E / (12 rho0)).

    Raises:
        ContinuumError: raised for a negative omega_bar or a non-positive physical parameter.
    """
    if omega_bar < 0.0:
        raise ContinuumError(f"omega_bar must be non-negative, got {omega_bar}")
    if min(a, l, e_modulus, rho0) <= 0.0:
        raise ContinuumError("a, l, E and rho0 must be positive")
    return omega_bar * a / l**2 * math.sqrt(e_modulus / (12.0 * rho0))


@dataclass(frozen=True, slots=True)
class SweepRow:
    """Frequency ratios at one attachment length."""

    lf_hat: float
    ratios: tuple[float, ...]


def sweep_lf_hat(
    lf_values: Sequence[float],
    mass_ratio: float,
    n_modes: int = 5,
    basis_size: int = CONTINUUM_BASIS_SIZE,
) -> list[SweepRow]:
    """Omega_n of the first n_modes over a list of attachment lengths at fixed mass ratio."""
    basis = BeamBasis.of_size(basis_size)
    rows = []
    for lf_hat in lf_values:
        solution = solve_symmetric(basis, DensityProfile(lf_hat, mass_ratio))
        rows.append(SweepRow(lf_hat, tuple(float(r) for r in solution.ratios[:n_modes])))
    return rows
