#!/usr/bin/env python3
"""
Frequency, amplitude and melting analysis of trajectories

Collision times are random, so spectra come from a Lomb-Scargle periodogram of
the unevenly sampled series; a resample-then-transform estimate is kept as a
cross-check. All frequencies are angular.
"""

import copy
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.signal import lombscargle

from .collision import TrajectoryRecord
from .errors import ConfigError, InvalidStateError, NumericalError
from .models import lmg_prediction

logger = logging.getLogger(__name__)

MIN_SAMPLES = 16
DEFAULT_GRID_POINTS = 512


class SpectralMethod(str, Enum):
    LOMB_SCARGLE = 'lomb_scargle'
    RESAMPLE_FFT = 'resample_fft'


@dataclass(frozen=True)
class Periodogram:
    frequencies: np.ndarray
    power: np.ndarray
    method: SpectralMethod

    def __post_init__(self):
        if self.frequencies.shape != self.power.shape:
            raise InvalidStateError("Periodogram frequencies and power differ in length")
        if self.frequencies.size > 1 and not np.all(np.diff(self.frequencies) > 0):
            raise InvalidStateError("Periodogram frequencies must be strictly increasing")

    @property
    def resolution(self) -> float:
        if self.frequencies.size < 2:
            return 0.0
        return float(np.median(np.diff(self.frequencies)))

    def rows(self) -> list:
        return [(float(f), float(p)) for f, p in zip(self.frequencies, self.power)]


@dataclass(frozen=True)
class AmplitudeSeries:
    window_centers: np.ndarray
    peak_to_peak: np.ndarray

    def __post_init__(self):
        if self.window_centers.shape != self.peak_to_peak.shape:
            raise InvalidStateError("Amplitude series arrays differ in length")

    @property
    def amplitude(self) -> np.ndarray:
        """Half the peak-to-peak value: the cosine amplitude of a clean oscillation"""
        return self.peak_to_peak / 2


def _post_transient(record: TrajectoryRecord, observable: str, transient_fraction: float):
    if not 0 <= transient_fraction < 1:
        raise InvalidStateError(f"transient_fraction must lie in [0, 1), got {transient_fraction}")
    t, y = record.times, record.series(observable)
    if t.size == 0:
        raise NumericalError("Empty trajectory")
    start = t[0] + transient_fraction * (t[-1] - t[0])
    mask = t >= start
    return t[mask], y[mask]


def default_frequency_grid(times, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """`points` angular frequencies spanning (0, pi / median sampling interval]"""
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise NumericalError("Need at least two samples to build a frequency grid")
    w_max = np.pi / float(np.median(np.diff(times)))
    return np.linspace(w_max / points, w_max, points)


def _resample_fft(t: np.ndarray, y: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    uniform = np.linspace(t[0], t[-1], t.size)
    resampled = np.interp(uniform, t, y)
    resampled = resampled - resampled.mean()
    phases = np.exp(-1j * np.outer(freqs, uniform - uniform[0]))
    return np.abs(phases @ resampled) ** 2 / uniform.size


def periodogram(record: TrajectoryRecord, observable: str, transient_fraction: float = 0.5,
                freq_grid=None, method: str = 'lomb_scargle') -> Periodogram:
    """Power spectrum of the mean-subtracted post-transient series"""
    method = SpectralMethod(method)
    t, y = _post_transient(record, observable, transient_fraction)
    if t.size < MIN_SAMPLES:
        raise NumericalError(f"Periodogram needs at least {MIN_SAMPLES} samples, got {t.size}")
    freqs = default_frequency_grid(t) if freq_grid is None else np.asarray(freq_grid, dtype=float)
    if freqs.size == 0 or np.any(freqs <= 0):
        raise InvalidStateError("Frequency grid must be nonempty and strictly positive")
    y = y - y.mean() if np.ptp(y) > 0 else np.zeros_like(y)
    if method is SpectralMethod.LOMB_SCARGLE:
        power = lombscargle(t - t[0], y, freqs)
    else:
        power = _resample_fft(t, y, freqs)
    return Periodogram(frequencies=freqs, power=np.clip(power, 0.0, None), method=method)


def dominant_frequency(p: Periodogram) -> tuple[float, float]:
    """Peak frequency and power with 3-point parabolic refinement"""
    power, freqs = p.power, p.frequencies
    if power.size == 0:
        raise NumericalError("Empty periodogram")
    top = float(power.max())
    if top == 0 or np.ptp(power) <= 1e-12 * top:
        raise NumericalError("Flat spectrum: no dominant frequency")
    idx = int(np.argmax(power))
    if idx == 0 or idx == power.size - 1:
        return float(freqs[idx]), top
    y0, y1, y2 = power[idx - 1], power[idx], power[idx + 1]
    curvature = y0 - 2 * y1 + y2
    if curvature >= 0:
        return float(freqs[idx]), top
    offset = 0.5 * (y0 - y2) / curvature
    step = 0.5 * (freqs[idx + 1] - freqs[idx - 1])
    return float(freqs[idx] + offset * step), float(y1 - 0.25 * (y0 - y2) * offset)


def estimate_period(record: TrajectoryRecord, observable: str, transient_fraction: float = 0.5) -> float:
    freq, _ = dominant_frequency(periodogram(record, observable, transient_fraction))
    return 2 * np.pi / freq


def amplitude_envelope(record: TrajectoryRecord, observable: str, window: float,
                       transient_fraction: float = 0.0, period: Optional[float] = None) -> AmplitudeSeries:
    """Peak-to-peak amplitude in consecutive windows of length `window`

    The window must cover at least two periods; without an explicit `period` it is
    estimated from the dominant frequency when the spectrum allows it.
    """
    if not window > 0:
        raise InvalidStateError(f"window must be positive, got {window}")
    if period is None:
        try:
            period = estimate_period(record, observable, transient_fraction)
        except NumericalError:
            logger.debug(f"⚠️ No period estimate for '{observable}', window length not checked")
    if period is not None and window < 2 * period:
        raise NumericalError(f"Window {window:.4g} spans fewer than two periods ({period:.4g})")

    t, y = _post_transient(record, observable, transient_fraction)
    count = int((t[-1] - t[0]) // window)
    if count == 0:
        raise NumericalError(f"Window {window:.4g} is longer than the analysed series")
    centers, amplitudes = [], []
    for k in range(count):
        lo = t[0] + k * window
        mask = (t >= lo) & (t < lo + window)
        if np.count_nonzero(mask) < 2:
            continue
        centers.append(lo + window / 2)
        amplitudes.append(float(np.ptp(y[mask])))
    return AmplitudeSeries(window_centers=np.array(centers), peak_to_peak=np.array(amplitudes))


def window_amplitude(record: TrajectoryRecord, observable: str, center: float, window: float) -> float:
    """Peak-to-peak amplitude in [center - window/2, center + window/2]"""
    t, y = record.times, record.series(observable)
    mask = (t >= center - window / 2) & (t <= center + window / 2)
    if np.count_nonzero(mask) < 2:
        raise NumericalError(f"No samples around t={center:.4g} for window {window:.4g}")
    return float(np.ptp(y[mask]))


def _without_temperature(cfg: dict) -> dict:
    cfg = copy.deepcopy(cfg)
    cfg.pop('n_bar', None)
    cfg.pop('beta', None)
    if isinstance(cfg.get('bath'), dict):
        cfg['bath'].pop('beta', None)
    return cfg


def melting_curve(records: dict, reference: TrajectoryRecord, observable: str, probe_times,
                  window: Optional[float] = None) -> list[tuple[float, float, float]]:
    """Rows (beta, t, amplitude ratio to the reference run) at each probe time"""
    base = _without_temperature(reference.config)
    for beta, record in records.items():
        if _without_temperature(record.config) != base:
            raise ConfigError(f"Record at beta={beta} differs from the reference in more than beta")
    if window is None:
        window = 4 * estimate_period(reference, observable)
    rows = []
    for beta in sorted(records):
        for t in probe_times:
            ref = window_amplitude(reference, observable, t, window)
            if ref == 0:
                raise NumericalError(f"Reference amplitude vanishes at t={t}")
            amp = window_amplitude(records[beta], observable, t, window)
            rows.append((float(beta), float(t), amp / ref))
    logger.info(f"✅ Melting curve: {len(records)} temperatures x {len(probe_times)} probe times")
    return rows


def decay_onset(curve, threshold: float = 0.5) -> Optional[float]:
    """Beta at which the last-probe ratio crosses threshold, interpolated linearly in log beta

    The crossing is taken between the largest melted beta and the next colder run.
    Returns that beta itself when no colder run stays above threshold, and None
    when nothing melts.
    """
    if not curve:
        return None
    last = max(t for _, t, _ in curve)
    points = sorted((beta, ratio) for beta, t, ratio in curve if t == last)
    melted = [k for k, (_, ratio) in enumerate(points) if ratio < threshold]
    if not melted:
        return None
    k = melted[-1]
    if k == len(points) - 1:
        return float(points[k][0])
    (b0, r0), (b1, r1) = points[k], points[k + 1]
    frac = (threshold - r0) / (r1 - r0)
    if b0 <= 0:
        return float(b0 + frac * (b1 - b0))
    return float(np.exp(np.log(b0) + frac * (np.log(b1) - np.log(b0))))


def frequency_vs_field(records: dict, observable: str, n_qubits: int,
                       transient_fraction: float = 0.5, freq_grid=None) -> list[tuple[float, float, float]]:
    """Rows (B, measured dominant frequency, LMG prediction)"""
    rows = []
    for B in sorted(records):
        p = periodogram(records[B], observable, transient_fraction, freq_grid)
        measured, _ = dominant_frequency(p)
        rows.append((float(B), measured, lmg_prediction(n_qubits, B).lam))
        logger.debug(f"🔬 B={B}: measured {measured:.5f}")
    return rows


def frequency_law(n_values, B_values) -> list[tuple[int, float, float]]:
    """Rows (N, B, 2/N + 2B) for plotting the analytic lines"""
    return [(int(n), float(B), lmg_prediction(int(n), float(B)).lam)
            for n in n_values for B in B_values]
