from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass, replace
from enum import Enum
from logging import Logger
from typing import NotRequired, TypedDict

import numpy as np
from numpy.typing import ArrayLike
from typing_extensions import override

from cantilever.exceptions import SpectralError
from cantilever.spectral.probes import Trace
from common.config import (
    DEFAULT_GRID_POINTS,
    DEFAULT_PEAK_THRESHOLD,
    GRID_POINTS_PER_CELL,
    LEAKAGE_CELLS,
    LEAKAGE_LEVEL,
    MIN_TRACE_PERIODS,
    SIDELOBE_MARGIN,
)
from common.geometry import FloatArray

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("spectrum")

CHUNK_ELEMENTS = 1 << 22
"""Phase-matrix entries evaluated at once."""

MERGE_CELLS = 3
"""Maxima closer than this many grid cells are one peak."""


class Window(Enum):
    """Enum of taper functions applied before the transform."""

    RECTANGULAR = "rectangular"
    HANN = "hann"

    def weights(self, n: int) -> FloatArray:
        match self:
            case Window.RECTANGULAR:
                return np.ones(n)
            case Window.HANN:
                return np.hanning(n) if n > 2 else np.ones(n)


@dataclass(frozen=True, slots=True)
class Peak:
    """Refined local maximum of a spectrum."""

    omega: float
    magnitude: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Magnitude |A(omega)| on a grid.

    Args:
        omega_grid: Strictly increasing angular frequencies.
        magnitude: |A| at each grid point.
        peaks: Peaks sorted by omega.
        resolution: 2 pi / t_calc of the analysed trace.
        window: Taper the magnitudes were computed with.
    """

    omega_grid: FloatArray
    magnitude: FloatArray
    peaks: tuple[Peak, ...] = ()
    resolution: float = 0.0
    window: Window = Window.HANN

    @property
    def strongest(self) -> Peak | None:
        return max(self.peaks, key=lambda p: p.magnitude, default=None)


def default_grid(t_calc: float, omega_max: float) -> FloatArray:
    """Grid on [0, omega_max] with at least GRID_POINTS_PER_CELL points per resolution cell."""
    if t_calc <= 0.0 or omega_max <= 0.0:
        raise SpectralError(f"grid needs positive t_calc and omega_max, got {t_calc}, {omega_max}")
    n = max(DEFAULT_GRID_POINTS, math.ceil(GRID_POINTS_PER_CELL * omega_max * t_calc / (2 * math.pi)))
    return np.linspace(0.0, omega_max, n)


def spectrum(
    trace: Trace,
    omega_grid: ArrayLike | None = None,
    window: Window = Window.HANN,
    threshold_rel: float = DEFAULT_PEAK_THRESHOLD,
) -> Spectrum:
    """Magnitude of A(omega) = sum_k (z_k - mean z) w_k exp(i omega t_k) dt on a grid.

    The quadrature is evaluated directly, so the grid is free of the FFT bin spacing.
    A tapered trace is rescaled by the mean weight to keep tone magnitudes comparable.

    Args:
        trace: Uniformly sampled signal with at least 2 samples.
        omega_grid: Angular frequencies. Defaults to default_grid up to the Nyquist frequency.
        window: Taper.
        threshold_rel: Peak threshold passed to find_peaks.

    Raises:
        SpectralError: raised for a short or non-uniform trace or a bad grid.

    Returns:
        Spectrum: magnitudes and peaks.
    """
    dt = trace.interval()
    t = trace.sample_times - trace.sample_times[0]
    t_calc = float(t[-1])
    grid = default_grid(t_calc, math.pi / dt) if omega_grid is None else np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0.0):
        raise SpectralError("omega grid must be strictly increasing with at least 3 points")

    weights = window.weights(t.size)
    z = (trace.values - trace.values.mean()) * weights / weights.mean()
    magnitude = np.empty(grid.size)
    chunk = max(1, CHUNK_ELEMENTS // t.size)
    for start in range(0, grid.size, chunk):
        omegas = grid[start : start + chunk]
        magnitude[start : start + chunk] = np.abs(np.exp(1j * np.outer(omegas, t)) @ z) * dt

    raw = Spectrum(grid, magnitude, resolution=2 * math.pi / t_calc, window=window)
    result = replace(raw, peaks=tuple(find_peaks(raw, threshold_rel)))
    if result.peaks and result.peaks[0].omega * t_calc / (2 * math.pi) < MIN_TRACE_PERIODS:
        LOGGER.warning(
            f"Trace {trace.probe.label} spans {result.peaks[0].omega * t_calc / (2 * math.pi):.1f} periods "
            f"of its fundamental, fewer than {MIN_TRACE_PERIODS:g}"
        )
    return result


def find_peaks(
    spectrum: Spectrum,
    threshold_rel: float = DEFAULT_PEAK_THRESHOLD,
    leakage_cells: float = LEAKAGE_CELLS,
    leakage_level: float = LEAKAGE_LEVEL,
    sidelobe_margin: float = SIDELOBE_MARGIN,
) -> list[Peak]:
    """Local maxima above threshold_rel * max, refined in log-magnitude.

    Maxima closer than MERGE_CELLS grid cells are merged into the stronger one. A
    maximum within leakage_cells resolution cells of a stronger peak and below
    leakage_level of it is a window sidelobe and is dropped. An untapered spectrum
    leaks as sin(x) / x, so there a maximum n cells from a stronger peak is also
    dropped while it stays below sidelobe_margin / (pi n) of that peak.

    Args:
        spectrum: Grid and magnitudes.
        threshold_rel: Share of the maximum, in (0, 1).
        leakage_cells: Sidelobe radius in units of spectrum.resolution; 0 disables the rule.
        leakage_level: Relative sidelobe level.
        sidelobe_margin: Factor on the sin(x) / x envelope of a rectangular window; 0 disables the rule.

    Raises:
        SpectralError: raised for an empty spectrum or a threshold outside (0, 1).

    Returns:
        list[Peak]: peaks sorted by omega.
    """
    if not 0.0 < threshold_rel < 1.0:
        raise SpectralError(f"threshold_rel must lie in (0, 1), got {threshold_rel}")
    m, w = spectrum.magnitude, spectrum.omega_grid
    if m.size == 0:
        raise SpectralError("empty spectrum")
    top = float(m.max())
    if m.size < 3 or top <= 0.0:
        return []

    inner = np.arange(1, m.size - 1)
    candidates = inner[(m[inner] > m[inner - 1]) & (m[inner] >= m[inner + 1]) & (m[inner] >= threshold_rel * top)]

    kept: list[int] = []
    for i in candidates:
        if kept and i - kept[-1] < MERGE_CELLS:
            if m[i] > m[kept[-1]]:
                kept[-1] = int(i)
            continue
        kept.append(int(i))

    peaks = [_refine(w, m, i) for i in kept]
    if leakage_cells > 0.0 and spectrum.resolution > 0.0:
        radius = leakage_cells * spectrum.resolution
        peaks = [
            p
            for p in peaks
            if not any(
                q.magnitude > p.magnitude
                and abs(q.omega - p.omega) <= radius
                and p.magnitude < leakage_level * q.magnitude
                for q in peaks
            )
        ]
    if sidelobe_margin > 0.0 and spectrum.window == Window.RECTANGULAR and spectrum.resolution > 0.0:
        peaks = [
            p
            for p in peaks
            if not any(
                q.magnitude > p.magnitude
                and p.magnitude * math.pi * abs(q.omega - p.omega) < sidelobe_margin * q.magnitude * spectrum.resolution
                for q in peaks
            )
        ]
    return sorted(peaks, key=lambda p: p.omega)


def _refine(w: FloatArray, m: FloatArray, i: int) -> Peak:
    tiny = np.finfo(float).tiny
    a, b, c = np.log(np.maximum(m[i - 1 : i + 2], tiny))
    curvature = a - 2.0 * b + c
    if curvature >= 0.0:
        return Peak(float(w[i]), float(m[i]))
    shift = 0.5 * (a - c) / curvature
    step = w[i + 1] - w[i] if shift >= 0.0 else w[i] - w[i - 1]
    return Peak(float(w[i] + shift * step), float(np.exp(b - 0.25 * (a - c) * shift)))


def normalize_ratios(peaks: Sequence[Peak], omega0_reference: float) -> list[float]:
    """Omega_k = omega_k / omega_0 of the unloaded reference.

    Raises:
        SpectralError: raised for a non-positive reference.
    """
    if not omega0_reference > 0.0:
        raise SpectralError(f"reference frequency must be positive, got {omega0_reference}")
    return [p.omega / omega0_reference for p in peaks]


class SpectrumAnalyzerKwargs(TypedDict):
    """Key-word arguments dict for a SpectrumAnalyzer."""

    window: NotRequired[Window]
    threshold_rel: NotRequired[float]
    leakage_cells: NotRequired[float]
    leakage_level: NotRequired[float]
    logger: NotRequired[Logger]


class SpectrumAnalyzer(ABC):
    """Abstract class turning traces into spectra with peaks."""

    __slots__ = ("window", "threshold_rel", "leakage_cells", "leakage_level", "_logger")

    def __init__(
        self,
        *,
        window: Window = Window.HANN,
        threshold_rel: float = DEFAULT_PEAK_THRESHOLD,
        leakage_cells: float = LEAKAGE_CELLS,
        leakage_level: float = LEAKAGE_LEVEL,
        logger: Logger = LOGGER,
    ) -> None:
        """
        Args:
            window: (optional) Keyword parameter. Taper, Hann by default.
            threshold_rel: (optional) Keyword parameter. Peak threshold.
            leakage_cells: (optional) Keyword parameter. Sidelobe radius in resolution cells.
            leakage_level: (optional) Keyword parameter. Relative sidelobe level.
            logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.
        """
        self.window = window
        self.threshold_rel = threshold_rel
        self.leakage_cells = leakage_cells
        self.leakage_level = leakage_level
        self._logger = logger

    @abstractmethod
    def analyze(self, trace: Trace, omega_max: float) -> Spectrum:
        """Spectrum of trace on [0, omega_max].

        Raises:
            SpectralError: raised if the trace can not be analysed.
        """
        ...


class DirectQuadratureAnalyzer(SpectrumAnalyzer):
    """Direct evaluation of the Fourier integral on default_grid."""

    @override
    def analyze(self, trace: Trace, omega_max: float) -> Spectrum:
        grid = default_grid(trace.duration, omega_max)
        result = spectrum(trace, grid, self.window, self.threshold_rel)
        peaks = find_peaks(result, self.threshold_rel, self.leakage_cells, self.leakage_level)
        self._logger.debug(f"{trace.probe.label}: {len(peaks)} peaks on {grid.size} grid points")
        return replace(result, peaks=tuple(peaks))
