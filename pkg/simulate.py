"""
Direct simulation of the Kuramoto-Daido model at three fidelities.

* finite-N phase oscillators in order-parameter form (O(N) per step)
* Galerkin discretisation of the Fourier hierarchy Z_j(ω) on quadrature nodes
* the two-population Ott-Antonsen reduction of the bimodal Lorentzian case

plus the linearised continuum used to measure decay rates.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from distributions import BIMODAL_LORENTZIAN, AnalyticDistribution, adaptive_quad, sample_frequencies
from errors import TruncationWarning
from integrators import IntegratingFactorRK4, rk4_step

logger = logging.getLogger(__name__)

FINITE_N = "finite_n"
GALERKIN = "galerkin"
OA_ORACLE = "oa_oracle"
LINEARIZED = "linearized"
SOURCES = (FINITE_N, GALERKIN, OA_ORACLE, LINEARIZED)

DEFAULT_M = 400
DEFAULT_J = 8
DEFAULT_DT = 0.02
INITIAL_AMPLITUDE = 1e-3
WINDOW_FACTOR = 15.0
SHIFT_FRACTION = 0.8
TRUNCATION_RATIO = 0.1


@dataclass(frozen=True)
class ModelParams:
    K: float
    h: float = 0.0

    @property
    def f1(self) -> complex:
        return 1.0 / 2j

    @property
    def f2(self) -> complex:
        return self.h / 2j

    def check(self, gate_h: bool = True) -> None:
        if self.K < 0:
            raise ValueError("K must be nonnegative")
        if gate_h and self.h >= 1:
            raise ValueError(f"h = {self.h:g} violates h < 1")


@dataclass
class FiniteNState:
    theta: np.ndarray
    omega: np.ndarray

    def order_parameters(self) -> Tuple[complex, complex]:
        return order_parameters(self.theta)


@dataclass
class GalerkinState:
    nodes: np.ndarray
    weights: np.ndarray
    J: int
    Z: np.ndarray

    def order_parameters(self) -> Tuple[complex, complex]:
        eta = self.Z @ self.weights
        return complex(eta[0]), (complex(eta[1]) if self.J >= 2 else 0j)


@dataclass
class OrderParameterSeries:
    times: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    source: str

    def __post_init__(self):
        if not (len(self.times) == len(self.eta1) == len(self.eta2)):
            raise ValueError("series arrays must have equal length")

    def rows(self) -> List[Tuple[float, float, float, float, float]]:
        """Rows for the series CSV"""
        return [(float(t), a.real, a.imag, b.real, b.imag)
                for t, a, b in zip(self.times, self.eta1, self.eta2)]


def order_parameters(theta: np.ndarray) -> Tuple[complex, complex]:
    """η̂₁, η̂₂ of a phase population"""
    rotor = np.exp(1j * theta)
    return complex(np.mean(rotor)), complex(np.mean(rotor * rotor))


def wrap_phase(theta: np.ndarray) -> np.ndarray:
    return np.mod(theta, 2.0 * np.pi)


def initial_phases(N: int, amplitude: float = INITIAL_AMPLITUDE, seed: Optional[int] = None) -> np.ndarray:
    """Quantiles of ρ₀(θ) = (1 + 2a cos θ)/2π, shuffled by a seeded permutation"""
    if not 0 <= amplitude <= 0.5:
        raise ValueError("amplitude must lie in [0, 1/2] for a valid density")
    targets = 2.0 * np.pi * (np.arange(1, N + 1) - 0.5) / N
    theta = targets.copy()
    # θ + 2a sin θ is monotone for a <= 1/2
    for _ in range(50):
        residual = theta + 2.0 * amplitude * np.sin(theta) - targets
        theta -= residual / (1.0 + 2.0 * amplitude * np.cos(theta))
        if np.max(np.abs(residual)) < 1e-14:
            break
    rng = np.random.default_rng(seed)
    return wrap_phase(rng.permutation(theta))


def simulate_finite_n(params: ModelParams, omegas: Sequence[float], theta0: Sequence[float],
                      t_end: float, dt: float, record_stride: int = 10) -> OrderParameterSeries:
    """RK4 on N phases with the mean-field right-hand side"""
    omega = np.asarray(omegas, dtype=float)
    state = FiniteNState(theta=wrap_phase(np.asarray(theta0, dtype=float)), omega=omega)
    if len(state.theta) < 2 or len(state.theta) != len(omega):
        raise ValueError("need at least two oscillators with matching frequencies")
    if dt <= 0:
        raise ValueError("dt must be positive")
    K, h = params.K, params.h

    def rhs(theta: np.ndarray) -> np.ndarray:
        rotor = np.exp(-1j * theta)
        eta1 = np.mean(np.conj(rotor))
        drift = eta1 * rotor
        if h != 0:
            eta2 = np.mean(np.conj(rotor) ** 2)
            drift = drift + h * eta2 * rotor * rotor
        return omega + K * drift.imag

    steps = int(round(t_end / dt))
    times, eta1s, eta2s = [0.0], [], []
    first = state.order_parameters()
    eta1s.append(first[0])
    eta2s.append(first[1])
    theta = state.theta
    for n in range(1, steps + 1):
        theta = wrap_phase(rk4_step(rhs, theta, dt))
        if n % record_stride == 0:
            e1, e2 = order_parameters(theta)
            times.append(n * dt)
            eta1s.append(e1)
            eta2s.append(e2)
    state.theta = theta
    logger.info("finite-N run: N=%d K=%g h=%g to t=%g", len(theta), K, h, t_end)
    return OrderParameterSeries(np.array(times), np.array(eta1s), np.array(eta2s), FINITE_N)


def default_contour_shift(dist: AnalyticDistribution, h: float) -> float:
    """Shift of the Galerkin nodes into the upper half plane; zero when Z₋₁ is coupled in"""
    return SHIFT_FRACTION * dist.strip_width if h == 0 else 0.0


def galerkin_quadrature(dist: AnalyticDistribution, M: int = DEFAULT_M, contour_shift: float = 0.0,
                        window: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes ω_k = x_k + iγ and weights w_k with Σ w_k = 1

    Gauss-Legendre in u = arctan x on |x| <= window, plus one lumped node on each
    side at ±2·window carrying the exact tail mass.
    """
    if M < 8:
        raise ValueError("need at least 8 nodes")
    if not 0 <= contour_shift <= dist.strip_width:
        raise ValueError(f"contour shift {contour_shift:g} must lie in [0, {dist.strip_width:g}]")
    window = window or WINDOW_FACTOR * dist.frequency_scale
    edge = math.atan(window)

    u, gl = roots_legendre(M - 2)
    u = edge * u
    x = np.tan(u)
    nodes = x + 1j * contour_shift
    body = np.asarray(dist.density_complex(nodes), dtype=complex) * gl * edge / np.cos(u) ** 2

    def tail_mass(sign: float) -> complex:
        def part(u_: float) -> complex:
            return complex(dist.density_complex(sign * math.tan(u_) + 1j * contour_shift)) / math.cos(u_) ** 2
        re = adaptive_quad(lambda s: part(s).real, edge, 0.5 * np.pi)
        im = adaptive_quad(lambda s: part(s).imag, edge, 0.5 * np.pi)
        return complex(re, im)

    tail_nodes = np.array([-2.0 * window, 2.0 * window]) + 1j * contour_shift
    tails = np.array([tail_mass(-1.0), tail_mass(1.0)])
    nodes = np.concatenate(([tail_nodes[0]], nodes, [tail_nodes[1]]))
    weights = np.concatenate(([tails[0]], body, [tails[1]]))

    total = weights.sum()
    if abs(total - 1.0) > 1e-6:
        logger.warning("Galerkin weights sum to %s before renormalisation", total)
    weights = weights / total
    if contour_shift == 0:
        weights = weights.real.astype(complex)
    return nodes, weights


class GalerkinModel:
    """Fourier hierarchy dZ_j/dt = ijωZ_j + N_j(Z) on a fixed node set"""

    def __init__(self, params: ModelParams, nodes: np.ndarray, weights: np.ndarray, J: int, dt: float):
        if J < 1:
            raise ValueError("J must be at least 1")
        self.params = params
        self.nodes = nodes
        self.weights = weights
        self.J = J
        self.real_axis = bool(np.all(nodes.imag == 0))
        if params.h != 0 and not self.real_axis:
            raise ValueError("second-harmonic coupling needs Z₋₁ = conj(Z₁), i.e. real nodes")
        harmonics = np.arange(1, J + 1)
        self.scale = 0.5 * params.K * harmonics[:, None]
        self.stepper = IntegratingFactorRK4(1j * harmonics[:, None] * nodes[None, :], dt)

    def order_parameters(self, Z: np.ndarray) -> Tuple[complex, complex]:
        eta = Z[:2] @ self.weights
        return complex(eta[0]), (complex(eta[1]) if self.J >= 2 else 0j)

    def nonlinear(self, Z: np.ndarray) -> np.ndarray:
        J, M = Z.shape
        # rows hold Z_j for j = -1 .. J+2
        ext = np.zeros((J + 4, M), dtype=complex)
        ext[1] = 1.0
        ext[2:J + 2] = Z
        if self.params.h != 0:
            ext[0] = np.conj(Z[0])
        eta1, eta2 = self.order_parameters(Z)
        coupling = eta1 * ext[1:J + 1] - np.conj(eta1) * ext[3:J + 3]
        if self.params.h != 0:
            coupling += self.params.h * (eta2 * ext[0:J] - np.conj(eta2) * ext[4:J + 4])
        return self.scale * coupling

    def linear_coupling(self, Z: np.ndarray) -> np.ndarray:
        eta1 = Z[0] @ self.weights
        return np.broadcast_to(0.5 * self.params.K * eta1, Z.shape).astype(complex)

    def step(self, Z: np.ndarray, linearized: bool = False) -> np.ndarray:
        return self.stepper.step(self.linear_coupling if linearized else self.nonlinear, Z)

    def weighted_norm(self, row: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(self.weights) * np.abs(row) ** 2)))


def _run(model: GalerkinModel, Z: np.ndarray, t_end: float, dt: float, record_stride: int,
         linearized: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    steps = int(round(t_end / dt))
    times = [0.0]
    first = model.order_parameters(Z)
    eta1s, eta2s = [first[0]], [first[1]]
    for n in range(1, steps + 1):
        Z = model.step(Z, linearized)
        if n % record_stride == 0:
            e1, e2 = model.order_parameters(Z)
            times.append(n * dt)
            eta1s.append(e1)
            eta2s.append(e2)
    return Z, np.array(times), np.array(eta1s), np.array(eta2s)


def simulate_galerkin(params: ModelParams, dist: AnalyticDistribution, M: int = DEFAULT_M,
                      J: int = DEFAULT_J, Z0: Optional[np.ndarray] = None, t_end: float = 1000.0,
                      dt: float = DEFAULT_DT, record_stride: int = 10,
                      contour_shift: Optional[float] = None,
                      initial_amplitude: float = INITIAL_AMPLITUDE, return_state: bool = False):
    """Integrating-factor RK4 on the truncated hierarchy Z_1..Z_J

    Returns the OrderParameterSeries, or (series, final GalerkinState) with return_state.
    """
    if J < 2:
        raise ValueError("the nonlinear hierarchy needs J >= 2")
    params.check()
    shift = default_contour_shift(dist, params.h) if contour_shift is None else contour_shift
    nodes, weights = galerkin_quadrature(dist, M, shift)
    model = GalerkinModel(params, nodes, weights, J, dt)

    if Z0 is None:
        Z = np.zeros((J, len(nodes)), dtype=complex)
        Z[0] = initial_amplitude
    else:
        Z = np.array(Z0, dtype=complex)
        if Z.shape != (J, len(nodes)):
            raise ValueError(f"Z0 must have shape {(J, len(nodes))}")

    Z, times, eta1, eta2 = _run(model, Z, t_end, dt, record_stride, linearized=False)
    last, first = model.weighted_norm(Z[-1]), model.weighted_norm(Z[0])
    if first > 0 and last > TRUNCATION_RATIO * first:
        warnings.warn(f"|Z_{J}| = {last:.3g} exceeds {TRUNCATION_RATIO:.0%} of |Z_1| = {first:.3g}; increase J",
                      TruncationWarning)
    logger.info("Galerkin run: K=%g h=%g M=%d J=%d shift=%g to t=%g", params.K, params.h, len(nodes), J, shift, t_end)
    series = OrderParameterSeries(times, eta1, eta2, GALERKIN)
    if return_state:
        return series, GalerkinState(nodes=nodes, weights=weights, J=J, Z=Z)
    return series


def simulate_linearized(params: ModelParams, dist: AnalyticDistribution, M: int = DEFAULT_M,
                        Z1_0: complex = 1.0, t_end: float = 60.0, dt: float = DEFAULT_DT,
                        record_stride: int = 1, contour_shift: Optional[float] = None) -> OrderParameterSeries:
    """Z₁ under T₁ = iω + (K/2)𝒫 only"""
    shift = SHIFT_FRACTION * dist.strip_width if contour_shift is None else contour_shift
    nodes, weights = galerkin_quadrature(dist, M, shift)
    model = GalerkinModel(ModelParams(params.K, 0.0), nodes, weights, 1, dt)
    Z = np.full((1, len(nodes)), Z1_0, dtype=complex)
    _, times, eta1, _ = _run(model, Z, t_end, dt, record_stride, linearized=True)
    return OrderParameterSeries(times, eta1, np.zeros_like(eta1), LINEARIZED)


def oracle_field(omega0: float, K: float):
    """Two-population reduction for the bimodal Lorentzian with h = 0"""
    sigma = np.array([1.0, -1.0])
    diagonal = 1j * sigma * omega0 - 1.0

    def rhs(z: np.ndarray) -> np.ndarray:
        total = z[0] + z[1]
        return diagonal * z + 0.25 * K * (total - np.conj(total) * z * z)
    return rhs


def linearize_oracle(omega0: float, K: float) -> np.ndarray:
    """Jacobian of the oracle at z = 0"""
    return np.diag([1j * omega0 - 1.0, -1j * omega0 - 1.0]) + 0.25 * K * np.ones((2, 2))


def ott_antonsen_oracle(omega0: float, K: float, z0: Sequence[complex], t_end: float,
                        dt: float = 0.01, record_stride: int = 10) -> OrderParameterSeries:
    """RK4 on the sub-population order parameters z₁, z₂; η₁ = (z₁+z₂)/2"""
    rhs = oracle_field(omega0, K)
    z = np.asarray(z0, dtype=complex)
    if z.shape != (2,):
        raise ValueError("z0 must hold two complex values")
    steps = int(round(t_end / dt))
    times = [0.0]
    eta1s, eta2s = [0.5 * (z[0] + z[1])], [0.5 * (z[0] ** 2 + z[1] ** 2)]
    for n in range(1, steps + 1):
        z = rk4_step(rhs, z, dt)
        if n % record_stride == 0:
            times.append(n * dt)
            eta1s.append(0.5 * (z[0] + z[1]))
            eta2s.append(0.5 * (z[0] ** 2 + z[1] ** 2))
    return OrderParameterSeries(np.array(times), np.array(eta1s), np.array(eta2s), OA_ORACLE)


@dataclass
class SimulationSettings:
    kind: str = GALERKIN
    N: int = 100000
    M: int = DEFAULT_M
    J: int = DEFAULT_J
    dt: float = DEFAULT_DT
    t_end: Optional[float] = None
    seed: int = 0
    record_stride: int = 10
    contour_shift: Optional[float] = None
    initial_amplitude: float = INITIAL_AMPLITUDE
    sample_mode: str = "quantile"


def run_simulation(dist: AnalyticDistribution, params: ModelParams, settings: SimulationSettings,
                   t_end: float) -> OrderParameterSeries:
    """Dispatch one run of the configured simulator"""
    a = settings.initial_amplitude
    if settings.kind == GALERKIN:
        return simulate_galerkin(params, dist, settings.M, settings.J, t_end=t_end, dt=settings.dt,
                                 record_stride=settings.record_stride, contour_shift=settings.contour_shift,
                                 initial_amplitude=a)
    if settings.kind == LINEARIZED:
        return simulate_linearized(params, dist, settings.M, a, t_end, settings.dt,
                                   settings.record_stride, settings.contour_shift)
    if settings.kind == FINITE_N:
        omegas = sample_frequencies(dist, settings.N, settings.sample_mode, settings.seed)
        theta0 = initial_phases(settings.N, a, settings.seed)
        return simulate_finite_n(params, omegas, theta0, t_end, settings.dt, settings.record_stride)
    if settings.kind == OA_ORACLE:
        if dist.family != BIMODAL_LORENTZIAN or params.h != 0:
            raise ValueError("the oracle covers only the bimodal Lorentzian with h = 0")
        return ott_antonsen_oracle(dist.params["omega0"], params.K, (a, a), t_end, settings.dt,
                                   settings.record_stride)
    raise ValueError(f"unknown simulation kind '{settings.kind}'")
