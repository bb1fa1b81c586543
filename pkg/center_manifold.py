"""
Center-manifold coefficients, averaged fixed points and the predicted Hopf orbit.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from distributions import AnalyticDistribution
from errors import AssumptionViolated
from spectral import TransitionReport, continued_dispersion, verify_assumptions

logger = logging.getLogger(__name__)

SINE = "sine"
SECOND_HARMONIC = "second_harmonic"

STABLE = "stable"
SADDLE = "saddle"
UNSTABLE = "unstable"
NEUTRAL = "neutral"

H_MIN = 0.05
FREQUENCY_BAND = 1.0


@dataclass
class CmCoefficients:
    kind: str
    y_c: float
    K_c: float
    h: float
    d1: complex
    p1: Optional[complex] = None
    p2: Optional[complex] = None
    p3: Optional[complex] = None
    p4: Optional[complex] = None
    q1: Optional[complex] = None
    q2: Optional[complex] = None
    q3: Optional[complex] = None

    @property
    def growth(self) -> complex:
        """Coefficient of ε in the linear part, p1 or q1"""
        return self.p1 if self.kind == SINE else self.q1


@dataclass
class FixedPoint:
    r_plus: float
    r_minus: float
    stability: str


@dataclass
class OrbitPrediction:
    epsilon: float
    exists: bool
    stable: bool
    r_star: float
    amplitude: float
    frequency: float
    frequency_tolerance: float
    scaling: str
    subcritical: bool
    eta2_amplitude: float
    beta_free: str = "orbit phase β is set by the initial condition and is not predicted"


def _require(report: TransitionReport, names: List[str]) -> None:
    flags = report.flags
    failed = [name for name in names if not getattr(flags, name)]
    if failed:
        raise AssumptionViolated(f"assumptions {failed} fail: "
                                 + "; ".join(str(flags.diagnostics.get(n)) for n in failed))


def _onset_derivatives(dist: AnalyticDistribution, report: TransitionReport):
    point = 1j * report.y_c
    return continued_dispersion(dist, point, 1), continued_dispersion(dist, point, 2)


def coefficients_sine(dist: AnalyticDistribution, report: Optional[TransitionReport] = None) -> CmCoefficients:
    """p1..p4 of the reduced system for pure sine coupling"""
    if report is None or report.flags is None:
        report = verify_assumptions(dist, 0.0, report)
    _require(report, ["A3", "A4", "A5"])

    y_c, K_c = report.y_c, report.K_c
    d1, d2 = _onset_derivatives(dist, report)
    K2 = K_c * K_c
    coeffs = CmCoefficients(
        kind=SINE, y_c=y_c, K_c=K_c, h=0.0, d1=d1,
        p1=-2.0 / (K2 * d1),
        p2=K2 * d2 / (8.0 * d1),
        p3=-K2 * np.conj(d1) / (8.0 * 1j * y_c * d1),
        p4=K2 / (4.0 * 1j * y_c),
    )
    logger.info("sine coefficients: p1=%s p2=%s p3=%s p4=%s", coeffs.p1, coeffs.p2, coeffs.p3, coeffs.p4)
    return coeffs


def coefficients_second_harmonic(dist: AnalyticDistribution, h: float,
                                 report: Optional[TransitionReport] = None) -> CmCoefficients:
    """q1..q3 of the reduced system with a second-harmonic coupling term"""
    if h == 0 or abs(h) < H_MIN:
        raise AssumptionViolated(f"|h| = {abs(h):g} is below {H_MIN}; use the sine reduction")
    if report is None or report.flags is None:
        report = verify_assumptions(dist, h, report)
    _require(report, ["A1", "A3", "A4", "A5"])

    y_c, K_c = report.y_c, report.K_c
    d1, _ = _onset_derivatives(dist, report)
    q2 = h * K_c / (1.0 - h)
    return CmCoefficients(
        kind=SECOND_HARMONIC, y_c=y_c, K_c=K_c, h=h, d1=d1,
        q1=-2.0 / (K_c * K_c * d1),
        q2=complex(q2, 0.0),
        q3=q2 * np.conj(d1) / d1,
    )


def _radius(coeffs: CmCoefficients, epsilon: float) -> Optional[float]:
    """r* if the nontrivial averaged equilibrium exists"""
    if coeffs.kind == SINE:
        radicand = -epsilon * coeffs.p1.real / coeffs.p2.real
        return math.sqrt(radicand) if radicand > 0 else None
    r_star = -epsilon * coeffs.q1.real / coeffs.q2.real
    return r_star if r_star > 0 else None


def _label(factors) -> str:
    if all(f < 0 for f in factors):
        return STABLE
    if all(f > 0 for f in factors):
        return UNSTABLE
    return SADDLE


def averaged_fixed_points(coeffs: CmCoefficients, epsilon: float) -> List[FixedPoint]:
    """Equilibria of the averaged radial system with their stability"""
    rate = epsilon * coeffs.growth.real
    r_star = _radius(coeffs, epsilon)
    c = -2.0 if coeffs.kind == SINE else -1.0

    candidates = [((0.0, 0.0), (1.0, 1.0))]
    if r_star is not None:
        candidates += [
            ((r_star, 0.0), (c, 1.0)),
            ((0.0, r_star), (1.0, c)),
            ((r_star, r_star), (c, c)),
        ]

    points = []
    for (r_plus, r_minus), factors in candidates:
        if rate == 0:
            label = NEUTRAL
        else:
            label = _label([f * rate for f in factors])
        points.append(FixedPoint(r_plus, r_minus, label))
    return points


def predict_orbit(coeffs: CmCoefficients, epsilon: float) -> OrbitPrediction:
    """Amplitude, frequency and stability of the bifurcating two-cluster orbit"""
    r_star = _radius(coeffs, epsilon)
    exists = r_star is not None
    r = r_star or 0.0

    if coeffs.kind == SINE:
        subcritical = coeffs.p2.real > 0
        stable = exists and epsilon > 0 and coeffs.p2.real < 0
        scaling = "sqrt"
    else:
        subcritical = coeffs.q2.real > 0
        stable = exists and epsilon > 0 and coeffs.q2.real < 0
        scaling = "linear"

    # Z2 on the manifold is -(K_c^2/(4(1-h)))(D'(iy_c)α₊² + conj(D'(iy_c))α₋²)
    eta2 = coeffs.K_c ** 2 * r * r * abs(coeffs.d1) / (2.0 * (1.0 - coeffs.h))

    return OrbitPrediction(
        epsilon=epsilon,
        exists=exists,
        stable=stable,
        r_star=r,
        amplitude=2.0 * r,
        frequency=coeffs.y_c,
        frequency_tolerance=FREQUENCY_BAND * abs(epsilon),
        scaling=scaling,
        subcritical=subcritical,
        eta2_amplitude=eta2,
    )


def _pair(value: Optional[complex]) -> Optional[List[float]]:
    return None if value is None else [float(np.real(value)), float(np.imag(value))]


def coefficients_record(coeffs: CmCoefficients) -> Dict[str, object]:
    record: Dict[str, object] = {"kind": coeffs.kind, "y_c": coeffs.y_c, "K_c": coeffs.K_c, "h": coeffs.h}
    names = ["p1", "p2", "p3", "p4"] if coeffs.kind == SINE else ["q1", "q2", "q3"]
    for name in names:
        record[name] = _pair(getattr(coeffs, name))
    return record


def prediction_record(coeffs: CmCoefficients, prediction: OrbitPrediction) -> Dict[str, object]:
    record = coefficients_record(coeffs)
    record.update({
        "epsilon": prediction.epsilon,
        "exists": prediction.exists,
        "r_star": prediction.r_star,
        "amplitude": prediction.amplitude,
        "frequency": prediction.frequency,
        "frequency_tolerance": prediction.frequency_tolerance,
        "stable": prediction.stable,
        "subcritical": prediction.subcritical,
        "scaling": prediction.scaling,
        "eta2_amplitude": prediction.eta2_amplitude,
    })
    return record
