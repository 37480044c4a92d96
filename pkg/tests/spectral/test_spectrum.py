import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from cantilever.exceptions import SpectralError
from cantilever.spectral.probes import ProbeKind, ProbeSpec, Trace
from cantilever.spectral.spectrum import (
    DirectQuadratureAnalyzer,
    Peak,
    Spectrum,
    Window,
    default_grid,
    find_peaks,
    normalize_ratios,
    spectrum,
)

PROBE = ProbeSpec(ProbeKind.SINGLE_POINT)


def _trace(values_of, dt: float = 0.05, t_calc: float = 200.0) -> Trace:
    t = np.arange(int(round(t_calc / dt)) + 1) * dt
    return Trace(t, values_of(t), PROBE)


def test_single_tone_peak():
    trace = _trace(lambda t: 0.3 + np.sin(3.0 * t))

    result = spectrum(trace, np.linspace(0.0, 10.0, 2001))

    assert len(result.peaks) >= 1
    assert result.strongest is not None
    assert abs(result.strongest.omega - 3.0) < 0.005
    assert_allclose(result.resolution, 2 * math.pi / 200.0)


def test_two_tones_keep_their_ratio():
    trace = _trace(lambda t: np.sin(3.0 * t) + 0.5 * np.sin(7.5 * t))

    result = spectrum(trace, np.linspace(0.0, 10.0, 2001))
    strong = sorted(result.peaks, key=lambda p: p.magnitude)[-2:]

    assert_allclose(sorted(p.omega for p in strong), [3.0, 7.5], atol=0.005)
    by_omega = sorted(strong, key=lambda p: p.omega)
    assert_allclose(by_omega[0].magnitude, 100.0, rtol=0.02)
    assert_allclose(by_omega[1].magnitude / by_omega[0].magnitude, 0.5, rtol=0.02)


def test_hann_window_keeps_tone_positions():
    trace = _trace(lambda t: np.sin(3.0 * t) + 0.5 * np.sin(7.5 * t))

    result = spectrum(trace, np.linspace(0.0, 10.0, 2001), window=Window.HANN)

    assert_allclose([p.omega for p in result.peaks], [3.0, 7.5], atol=0.005)


def test_parseval(rng: np.random.Generator):
    dt = 0.1
    values = rng.normal(size=200)
    trace = Trace(np.arange(200) * dt, values, PROBE)
    grid = np.linspace(0.0, math.pi / dt, 20001)

    result = spectrum(trace, grid, window=Window.RECTANGULAR)

    expected = math.pi * dt * np.sum((values - values.mean()) ** 2)
    assert_allclose(trapezoid(result.magnitude**2, grid), expected, rtol=1e-6)


def test_default_grid_resolves_trace():
    grid = default_grid(1000.0, 50.0)

    assert grid[0] == 0.0 and grid[-1] == 50.0
    assert grid.size >= 2048
    assert np.diff(grid).max() <= 1.001 * 2 * math.pi / 1000.0 / 4


@pytest.mark.parametrize("t_calc, omega_max", [(0.0, 1.0), (1.0, 0.0)])
def test_default_grid_rejects_empty_window(t_calc: float, omega_max: float):
    with pytest.raises(SpectralError):
        default_grid(t_calc, omega_max)


def _bumps(resolution: float = 0.1) -> Spectrum:
    grid = np.linspace(0.0, 10.0, 1001)
    magnitude = sum(h * np.exp(-((grid - c) ** 2) / (2 * 0.05**2)) for c, h in ((3.0, 1.0), (3.3, 0.02), (6.0, 0.02)))
    return Spectrum(grid, magnitude, resolution=resolution)


def test_weak_neighbour_is_leakage():
    peaks = find_peaks(_bumps(), threshold_rel=0.01)

    assert_allclose([p.omega for p in peaks], [3.0, 6.0], atol=1e-6)
    assert_allclose([p.magnitude for p in peaks], [1.0, 0.02], rtol=1e-6)


def test_leakage_rule_can_be_disabled():
    peaks = find_peaks(_bumps(), threshold_rel=0.01, leakage_cells=0.0)

    assert_allclose([p.omega for p in peaks], [3.0, 3.3, 6.0], atol=1e-6)


def test_threshold_drops_weak_peaks():
    assert_allclose([p.omega for p in find_peaks(_bumps(), threshold_rel=0.05)], [3.0], atol=1e-6)


@pytest.mark.parametrize("threshold", [0.0, 1.0])
def test_threshold_must_be_a_share(threshold: float):
    with pytest.raises(SpectralError):
        find_peaks(_bumps(), threshold_rel=threshold)


def test_flat_spectrum_has_no_peaks():
    assert find_peaks(Spectrum(np.linspace(0.0, 1.0, 10), np.zeros(10))) == []


def test_normalize_ratios():
    assert_allclose(normalize_ratios([Peak(2.0, 1.0), Peak(5.0, 0.1)], 2.0), [1.0, 2.5])
    with pytest.raises(SpectralError):
        normalize_ratios([Peak(2.0, 1.0)], 0.0)


def test_short_grid_is_rejected():
    with pytest.raises(SpectralError):
        spectrum(_trace(np.sin, t_calc=10.0), [1.0, 0.5, 2.0])


def test_analyzer_finds_tone_below_limit():
    analyzer = DirectQuadratureAnalyzer()
    trace = _trace(lambda t: np.sin(3.0 * t) + 0.2 * np.sin(8.0 * t))

    result = analyzer.analyze(trace, omega_max=10.0)

    assert result.omega_grid[-1] == 10.0
    assert_allclose([p.omega for p in result.peaks], [3.0, 8.0], atol=0.01)


def test_short_trace_is_reported(caplog):
    with caplog.at_level("WARNING"):
        spectrum(_trace(lambda t: np.sin(3.0 * t), t_calc=20.0), np.linspace(0.0, 10.0, 501))

    assert "fewer than" in caplog.text


def _two_tones() -> Trace:
    return _trace(lambda t: np.sin(1.3 * t) + 0.2 * np.sin(3.7 * t))


def test_default_window_keeps_only_the_two_tones():
    result = spectrum(_two_tones(), threshold_rel=0.02)

    assert result.window == Window.HANN
    assert_allclose([p.omega for p in result.peaks], [1.3, 3.7], atol=0.01)


def test_rectangular_sidelobes_are_dropped():
    result = spectrum(_two_tones(), window=Window.RECTANGULAR, threshold_rel=0.02)

    assert_allclose([p.omega for p in result.peaks], [1.3, 3.7], atol=0.01)


def test_rectangular_sidelobes_without_envelope_rule():
    raw = spectrum(_two_tones(), window=Window.RECTANGULAR, threshold_rel=0.02)

    assert len(find_peaks(raw, 0.02, sidelobe_margin=0.0)) > 2


def test_magnitude_scales_with_the_signal():
    grid = np.linspace(0.0, 6.0, 1201)
    once = spectrum(_two_tones(), grid)
    scaled = spectrum(Trace(_two_tones().sample_times, 3.0 * _two_tones().values, PROBE), grid)

    assert_allclose(scaled.magnitude, 3.0 * once.magnitude, rtol=1e-9, atol=1e-12 * once.magnitude.max())
    assert_allclose([p.omega for p in scaled.peaks], [p.omega for p in once.peaks], rtol=1e-9)


def test_time_shift_keeps_the_magnitude():
    grid = np.linspace(0.0, 6.0, 1201)
    trace = _two_tones()
    shifted = Trace(trace.sample_times + 37.5, trace.values, PROBE)

    assert_allclose(spectrum(shifted, grid).magnitude, spectrum(trace, grid).magnitude, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("t_calc", [100.0, 200.0, 400.0])
def test_resolution_follows_trace_length(t_calc: float):
    result = spectrum(_trace(lambda t: np.sin(3.0 * t), t_calc=t_calc))

    assert_allclose(result.resolution, 2 * math.pi / t_calc)
    assert np.diff(result.omega_grid).max() <= 1.001 * result.resolution / 4
    assert abs(result.peaks[0].omega - 3.0) < result.resolution / 4


def test_short_trace_warning_uses_the_fundamental(caplog):
    # the strong tone spans 31.8 periods, the weak fundamental 6.4
    trace = _trace(lambda t: 0.3 * np.sin(1.0 * t) + np.sin(5.0 * t), t_calc=40.0)

    with caplog.at_level("WARNING"):
        spectrum(trace, np.linspace(0.0, 10.0, 1001))

    assert "fewer than" in caplog.text
    assert "fundamental" in caplog.text


@pytest.mark.parametrize("t_calc", [100.0, 200.0])
def test_tones_four_cells_apart_are_resolved(t_calc: float):
    gap = 4 * 2 * math.pi / t_calc
    trace = _trace(lambda t: np.sin(3.0 * t) + np.sin((3.0 + gap) * t), t_calc=t_calc)

    result = spectrum(trace, np.linspace(0.0, 6.0, 3001))

    assert len(result.peaks) == 2
    assert_allclose([p.omega for p in result.peaks], [3.0, 3.0 + gap], atol=result.resolution / 4)
