import numpy as np
import pytest

from tcrystal.features import analysis
from tcrystal.features.collision import TrajectoryRecord
from tcrystal.features.errors import ConfigError, InvalidStateError, NumericalError


def _record(times, values, config=None):
    return TrajectoryRecord(times=times, observables={'y': values}, seed=0, collision_count=0,
                            config=config or {})


def _uneven_times(rng, size=2000, t_final=500.0):
    return np.sort(rng.uniform(0, t_final, size))


def test_periodogram_finds_synthetic_frequency(rng):
    t = _uneven_times(rng)
    grid = np.linspace(0.001, 4.0, 4000)
    p = analysis.periodogram(_record(t, np.cos(1.7 * t)), 'y', 0.0, grid)
    freq, power = analysis.dominant_frequency(p)
    assert abs(freq - 1.7) < p.resolution
    assert power > 0
    assert p.method is analysis.SpectralMethod.LOMB_SCARGLE
    assert len(p.rows()) == grid.size


def test_constant_series_has_no_peak(rng):
    t = _uneven_times(rng)
    p = analysis.periodogram(_record(t, np.full(t.size, 0.3)), 'y', 0.0, np.linspace(0.01, 4, 400))
    assert p.power.max() < 1e-10
    with pytest.raises(NumericalError):
        analysis.dominant_frequency(p)


def test_periodogram_invariances(rng):
    t = _uneven_times(rng)
    y = np.cos(1.3 * t) + 0.2 * rng.normal(size=t.size)
    grid = np.linspace(0.01, 4, 1000)
    base = analysis.periodogram(_record(t, y), 'y', 0.0, grid)
    shifted = analysis.periodogram(_record(t + 100.0, y), 'y', 0.0, grid)
    assert np.abs(base.power - shifted.power).max() < 1e-10 * base.power.max()
    scaled = analysis.periodogram(_record(t, 3 * y), 'y', 0.0, grid)
    assert abs(analysis.dominant_frequency(base)[0] - analysis.dominant_frequency(scaled)[0]) < 1e-9


def test_resampled_transform_agrees(rng):
    t = np.sort(np.concatenate([[0.0, 400.0], rng.uniform(0, 400, 4000)]))
    grid = np.linspace(0.005, 4, 800)
    record = _record(t, np.sin(2.1 * t))
    ls, _ = analysis.dominant_frequency(analysis.periodogram(record, 'y', 0.0, grid))
    fft, _ = analysis.dominant_frequency(analysis.periodogram(record, 'y', 0.0, grid, method='resample_fft'))
    step = grid[1] - grid[0]
    assert abs(ls - 2.1) < step
    assert abs(fft - 2.1) < step


def test_periodogram_guards(rng):
    t = _uneven_times(rng, size=10)
    with pytest.raises(NumericalError):
        analysis.periodogram(_record(t, np.cos(t)), 'y', 0.0)
    t = _uneven_times(rng)
    with pytest.raises(InvalidStateError):
        analysis.periodogram(_record(t, np.cos(t)), 'y', 1.0)
    with pytest.raises(InvalidStateError):
        analysis.periodogram(_record(t, np.cos(t)), 'y', 0.0, [0.0, 1.0])
    with pytest.raises(InvalidStateError):
        analysis.periodogram(_record(t, np.cos(t)), 'missing', 0.0)


def test_default_grid_reaches_nyquist():
    t = np.arange(0, 100, 0.5)
    grid = analysis.default_frequency_grid(t, points=64)
    assert grid.size == 64
    assert abs(grid[-1] - 2 * np.pi) < 1e-12
    assert grid[0] > 0


def test_envelope_of_clean_cosine():
    t = np.arange(0, 500, 0.05)
    series = analysis.amplitude_envelope(_record(t, 0.8 * np.cos(1.7 * t)), 'y', 20.0)
    assert series.window_centers.size == 24
    assert np.abs(series.amplitude - 0.8).max() < 0.02 * 0.8


def test_envelope_of_damped_cosine():
    t = np.arange(0, 1000, 0.05)
    y = np.exp(-t / 200) * np.cos(1.7 * t)
    series = analysis.amplitude_envelope(_record(t, y), 'y', 20.0, period=2 * np.pi / 1.7)
    slope = np.polyfit(series.window_centers, np.log(series.peak_to_peak), 1)[0]
    assert abs(slope + 1 / 200) < 0.1 / 200


def test_envelope_window_must_cover_two_periods():
    t = np.arange(0, 100, 0.05)
    with pytest.raises(NumericalError):
        analysis.amplitude_envelope(_record(t, np.cos(1.7 * t)), 'y', 5.0, period=2 * np.pi / 1.7)
    with pytest.raises(NumericalError):
        analysis.amplitude_envelope(_record(t, np.cos(1.7 * t)), 'y', 5.0)


def _bath_config(beta):
    return {'model': {'kind': 'lmg', 'n_qubits': 3}, 'bath': {'beta': beta, 'tau': 0.5}, 'n_collisions': 400}


def test_melting_curve_ratios():
    t = np.arange(0, 600, 0.05)
    reference = _record(t, np.cos(1.7 * t), _bath_config(float('inf')))
    records = {beta: _record(t, np.exp(-t / (100 * beta)) * np.cos(1.7 * t), _bath_config(beta))
               for beta in [1.0, 5.0]}
    curve = analysis.melting_curve(records, reference, 'y', [200, 350, 500], window=20.0)
    assert len(curve) == 6
    for beta in [1.0, 5.0]:
        ratios = [r for b, _, r in curve if b == beta]
        assert all(a > b for a, b in zip(ratios, ratios[1:]))
        assert abs(ratios[0] - np.exp(-200 / (100 * beta))) < 0.1
    assert analysis.decay_onset(curve, threshold=0.5) == 5.0
    assert analysis.decay_onset(curve, threshold=1e-6) is None
    assert analysis.decay_onset([]) is None


def test_melting_curve_rejects_mismatched_runs():
    t = np.arange(0, 600, 0.05)
    reference = _record(t, np.cos(1.7 * t), _bath_config(float('inf')))
    other = _bath_config(1.0)
    other['n_collisions'] = 300
    with pytest.raises(ConfigError):
        analysis.melting_curve({1.0: _record(t, np.cos(1.7 * t), other)}, reference, 'y', [200], window=20.0)


def test_frequency_law_rows():
    rows = analysis.frequency_law([3, 100], [0.5])
    assert rows[0] == (3, 0.5, pytest.approx(2 / 3 + 1.0))
    assert rows[1][2] == pytest.approx(0.02 + 1.0)

    t = np.sort(np.random.default_rng(4).uniform(0, 500, 3000))
    records = {B: _record(t, np.cos((2 / 3 + 2 * B) * t)) for B in [0.2, 0.6]}
    grid = np.linspace(0.002, 4, 2000)
    for B, measured, predicted in analysis.frequency_vs_field(records, 'y', 3, 0.0, grid):
        assert abs(measured - predicted) / predicted < 0.02


def test_decay_onset_interpolates_in_log_beta():
    curve = [(1.0, 100.0, 0.9), (4.0, 100.0, 0.95), (16.0, 100.0, 1.0),
             (1.0, 500.0, 0.1), (4.0, 500.0, 0.3), (16.0, 500.0, 0.7)]
    assert abs(analysis.decay_onset(curve, threshold=0.5) - 8.0) < 1e-12
    assert abs(analysis.decay_onset(curve, threshold=0.2) - 2.0) < 1e-12
    assert analysis.decay_onset(curve, threshold=0.8) == 16.0
    assert analysis.decay_onset(curve, threshold=0.05) is None
