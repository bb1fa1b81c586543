"""
Observables extracted from order-parameter series and bifurcation sweeps.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from center_manifold import (
    SINE,
    CmCoefficients,
    OrbitPrediction,
    coefficients_second_harmonic,
    coefficients_sine,
    predict_orbit,
)
from distributions import AnalyticDistribution
from errors import NonDecaying, WindowTooShort
from simulate import ModelParams, OrderParameterSeries, SimulationSettings, run_simulation
from spectral import TransitionReport, verify_assumptions

logger = logging.getLogger(__name__)

MIN_PERIODS = 10
MAX_HORIZON = 2000.0
FLAT_TOLERANCE = 1e-9


@dataclass
class SweepRow:
    K: float
    epsilon: float
    measured_amplitude: float
    predicted_amplitude: float
    measured_frequency: float
    predicted_frequency: float
    source: str

    def as_row(self) -> Tuple[float, float, float, float, float, float, str]:
        return (self.K, self.epsilon, self.measured_amplitude, self.predicted_amplitude,
                self.measured_frequency, self.predicted_frequency, self.source)


@dataclass
class SweepResult:
    rows: List[SweepRow]
    exponent: Optional[float]
    K_c: float
    kind: str
    predictions: List[OrbitPrediction] = field(default_factory=list)


def _is_uniform(times: np.ndarray) -> bool:
    steps = np.diff(times)
    dt = float(np.mean(steps))
    return bool(np.max(np.abs(steps - dt)) <= 1e-6 * dt)


def _estimated_frequency(times: np.ndarray, eta: np.ndarray) -> float:
    if not _is_uniform(times):
        grid = np.linspace(times[0], times[-1], len(times))
        eta = np.interp(grid, times, eta.real) + 1j * np.interp(grid, times, eta.imag)
        times = grid
    frequency = _spectral_peak(times, eta)
    if frequency == 0.0:
        scale = float(np.max(np.abs(eta)))
        if scale > 0 and np.max(np.abs(eta - eta.mean())) > FLAT_TOLERANCE * scale:
            raise WindowTooShort("no oscillation resolved in the post-transient window")
    return frequency


def _window(series: OrderParameterSeries, transient_fraction: float,
            reference_frequency: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
    if not 0 <= transient_fraction < 1:
        raise ValueError("transient_fraction must lie in [0, 1)")
    times = np.asarray(series.times)
    if len(times) < 2:
        raise WindowTooShort("series has fewer than two samples")
    start = times[0] + transient_fraction * (times[-1] - times[0])
    mask = times >= start
    if mask.sum() < 4:
        raise WindowTooShort("fewer than four samples after the transient")
    times, eta = times[mask], np.asarray(series.eta1)[mask]

    # without a predicted frequency the window is measured against its own spectral peak
    frequency = reference_frequency if reference_frequency else _estimated_frequency(times, eta)
    span = times[-1] - times[0]
    periods = span * frequency / (2.0 * np.pi)
    if frequency > 0 and periods < MIN_PERIODS:
        raise WindowTooShort(f"window of length {span:.4g} holds {periods:.2f} periods, need {MIN_PERIODS}")
    return times, eta


def steady_amplitude(series: OrderParameterSeries, transient_fraction: float = 0.5,
                     reference_frequency: Optional[float] = None) -> float:
    """max |η₁| over the post-transient window"""
    _, eta = _window(series, transient_fraction, reference_frequency)
    return float(np.max(np.abs(eta)))


def dominant_frequency(series: OrderParameterSeries, transient_fraction: float = 0.5,
                       reference_frequency: Optional[float] = None) -> float:
    """Angular frequency of the largest Hann-windowed spectral peak of η₁, folded to positive"""
    times = np.asarray(series.times)
    if len(times) > 2 and not _is_uniform(times):
        raise ValueError("dominant_frequency needs uniformly sampled data")
    times, eta = _window(series, transient_fraction, reference_frequency)
    return _spectral_peak(times, eta)


def _spectral_peak(times: np.ndarray, eta: np.ndarray) -> float:
    dt = float(np.mean(np.diff(times)))
    n = len(eta)
    spectrum = np.abs(np.fft.fft(eta * np.hanning(n)))
    k = int(np.argmax(spectrum))
    if k == 0 or spectrum[k] == 0:
        logger.info("no oscillatory peak in the window; reporting frequency 0")
        return 0.0

    a, b, c = spectrum[(k - 1) % n], spectrum[k], spectrum[(k + 1) % n]
    denominator = a - 2.0 * b + c
    shift = 0.5 * (a - c) / denominator if denominator != 0 else 0.0
    index = k + shift
    if k > n // 2:
        index -= n
    return abs(2.0 * np.pi * index / (n * dt))


def _crossing_frequency(times: np.ndarray, signal: np.ndarray) -> float:
    sign = np.signbit(signal)
    idx = np.nonzero(sign[1:] != sign[:-1])[0]
    if len(idx) < 2:
        return 0.0
    t0, t1 = times[idx], times[idx + 1]
    s0, s1 = signal[idx], signal[idx + 1]
    crossings = t0 - s0 * (t1 - t0) / (s1 - s0)
    return float(np.pi / np.mean(np.diff(crossings)))


def fit_decay_rate(series: OrderParameterSeries, t_window: Tuple[float, float],
                   allow_growth: bool = False) -> Tuple[float, float]:
    """(rate, frequency) from a log-linear fit to the |η₁| envelope and zero-crossing spacing"""
    times = np.asarray(series.times)
    mask = (times >= t_window[0]) & (times <= t_window[1])
    t, eta = times[mask], np.asarray(series.eta1)[mask]
    if len(t) < 8:
        raise WindowTooShort(f"only {len(t)} samples in {t_window}")

    magnitude = np.abs(eta)
    peaks, _ = find_peaks(magnitude)
    if len(peaks) >= 3:
        peaks = peaks[(peaks > 0) & (peaks < len(t) - 1)]
        left, mid, right = magnitude[peaks - 1], magnitude[peaks], magnitude[peaks + 1]
        curvature = left - 2.0 * mid + right
        offset = np.where(curvature != 0, 0.5 * (left - right) / np.where(curvature != 0, curvature, 1.0), 0.0)
        step = t[1] - t[0]
        envelope_t = t[peaks] + offset * step
        envelope = mid - 0.25 * (left - right) * offset
    else:
        # rotating signal: |η₁| is already the envelope
        envelope_t, envelope = t, magnitude

    positive = envelope > 0
    if positive.sum() < 2:
        raise NonDecaying("envelope vanishes inside the window")
    rate = float(np.polyfit(envelope_t[positive], np.log(envelope[positive]), 1)[0])
    frequency = _crossing_frequency(t, eta.real)
    if rate >= 0 and not allow_growth:
        raise NonDecaying(f"fitted rate {rate:.4g} is not negative")
    return rate, frequency


def fit_scaling_exponent(rows: Sequence[SweepRow]) -> Optional[float]:
    """Slope of log amplitude against log ε over supercritical rows"""
    usable = [r for r in rows if r.epsilon > 0 and r.measured_amplitude > 0]
    if len(usable) < 2:
        return None
    x = np.log([r.epsilon for r in usable])
    y = np.log([r.measured_amplitude for r in usable])
    return float(np.polyfit(x, y, 1)[0])


def reduction_for(dist: AnalyticDistribution, h: float,
                  report: Optional[TransitionReport] = None) -> Tuple[TransitionReport, CmCoefficients]:
    """Transition report and the reduction that matches the coupling"""
    report = verify_assumptions(dist, h, report)
    if h == 0:
        return report, coefficients_sine(dist, report)
    return report, coefficients_second_harmonic(dist, h, report)


def auto_horizon(coeffs: CmCoefficients, epsilon: float) -> float:
    """Run length long enough to saturate near onset, capped for the sweep budget"""
    rate = abs(epsilon * coeffs.growth.real)
    if rate == 0:
        return MAX_HORIZON
    return min(MAX_HORIZON, 400.0 + 80.0 / rate)


def _sweep_point(dist: AnalyticDistribution, h: float, K: float, coeffs: CmCoefficients,
                 settings: SimulationSettings, transient_fraction: float) -> Tuple[SweepRow, OrbitPrediction]:
    epsilon = K - coeffs.K_c
    prediction = predict_orbit(coeffs, epsilon)
    t_end = settings.t_end or auto_horizon(coeffs, epsilon)
    series = run_simulation(dist, ModelParams(K, h), settings, t_end)

    amplitude = steady_amplitude(series, transient_fraction, coeffs.y_c)
    frequency = dominant_frequency(series, transient_fraction, coeffs.y_c)
    row = SweepRow(
        K=K,
        epsilon=epsilon,
        measured_amplitude=amplitude,
        predicted_amplitude=prediction.amplitude if prediction.stable else 0.0,
        measured_frequency=frequency,
        predicted_frequency=coeffs.y_c,
        source=series.source,
    )
    logger.info("sweep K=%.4f eps=%.4f amp=%.5f (pred %.5f) freq=%.4f",
                K, epsilon, amplitude, row.predicted_amplitude, frequency)
    return row, prediction


def bifurcation_sweep(dist: AnalyticDistribution, h: float, K_list: Sequence[float],
                      settings: SimulationSettings, transient_fraction: float = 0.5,
                      threads: int = 1, report: Optional[TransitionReport] = None) -> SweepResult:
    """Simulate each K, pair with the predicted orbit and fit the amplitude exponent"""
    if not K_list:
        raise ValueError("K_list is empty")
    report, coeffs = reduction_for(dist, h, report)
    ordered = sorted(float(K) for K in K_list)

    def work(K: float) -> Tuple[SweepRow, OrbitPrediction]:
        return _sweep_point(dist, h, K, coeffs, replace(settings), transient_fraction)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, ordered))
    else:
        results = [work(K) for K in ordered]

    rows = [row for row, _ in results]
    exponent = fit_scaling_exponent(rows)
    logger.info("sweep over %d points: exponent %s", len(rows), exponent)
    return SweepResult(rows=rows, exponent=exponent, K_c=report.K_c, kind=coeffs.kind,
                       predictions=[p for _, p in results])


def sweep_summary(result: SweepResult) -> Dict[str, object]:
    return {
        "K_c": result.K_c,
        "kind": result.kind,
        "exponent": result.exponent,
        "expected_exponent": 0.5 if result.kind == SINE else 1.0,
        "rows": len(result.rows),
    }
