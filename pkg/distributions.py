"""
Analytic frequency distributions g(ω).

Evaluation on the real line and on the strip |Im z| ≤ δ, the Hilbert transform
in its symmetric principal-value form, its zeros, and frequency sampling.
All quadratures run on the tangent-substituted line ω = tan u because the
reference family has only quadratically decaying tails.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.optimize import bisect

from errors import PoleProximity, QuadratureFailure

logger = logging.getLogger(__name__)

BIMODAL_LORENTZIAN = "bimodal_lorentzian"
CUSTOM = "custom_tabulated_analytic"
FAMILIES = (BIMODAL_LORENTZIAN, CUSTOM)

POLE_GUARD = 1e-6
QUAD_TOLERANCE = 1e-10
QUAD_LIMIT = 400
ZERO_GRID_STEP = 0.01
NORMALIZATION_WINDOW = 1e3
CAUCHY_POINTS = 64
CDF_POINTS = 200001
CDF_TOLERANCE = 1e-8
CDF_CHECKS = (-2.0, -0.5, 0.0, 1.0, 3.0)

RealLike = Union[float, np.ndarray]
ComplexLike = Union[complex, np.ndarray]


@dataclass(frozen=True, eq=False)
class AnalyticDistribution:
    """Frequency density with its analytic continuation to a strip"""
    family: str
    params: Dict[str, Union[float, str]]
    strip_width: float
    decay_constant: float
    is_even: bool
    density: Callable[[np.ndarray], np.ndarray]
    density_complex: Callable[[np.ndarray], np.ndarray]
    frequency_scale: float = 1.0
    poles: Tuple[complex, ...] = ()
    # (z, n) -> g^(n)(z); Cauchy-circle differentiation is used when absent
    density_derivative: Optional[Callable[[complex, int], complex]] = None
    # (λ, n) -> D^(n)(λ) of the continued dispersion, valid on both sheets
    closed_dispersion: Optional[Callable[[complex, int], complex]] = None
    dispersion_poles: Tuple[complex, ...] = field(default=())

    @property
    def has_closed_dispersion(self) -> bool:
        return self.closed_dispersion is not None

    @property
    def label(self) -> str:
        if self.family == BIMODAL_LORENTZIAN:
            return f"{self.family}(omega0={self.params['omega0']:g})"
        return str(self.params.get("name", self.family))


def bimodal_lorentzian(omega0: float, strip_width: float = 0.5) -> AnalyticDistribution:
    """Equal mixture of two unit-width Lorentzians centred at ±ω₀"""
    if omega0 <= 0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    if not 0 < strip_width < 1:
        raise ValueError("strip_width must lie in (0, 1) for unit-width Lorentzians")

    centres = (omega0, -omega0)

    def density(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return (1.0 / (1.0 + (w - omega0) ** 2) + 1.0 / (1.0 + (w + omega0) ** 2)) / (2.0 * np.pi)

    def density_complex(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (1.0 / (1.0 + (z - omega0) ** 2) + 1.0 / (1.0 + (z + omega0) ** 2)) / (2.0 * np.pi)

    def density_derivative(z: complex, n: int) -> complex:
        # 1/(1+(z-s)^2) = (1/2i)[1/(z-s-i) - 1/(z-s+i)]
        total = 0j
        for s in centres:
            total += (z - s - 1j) ** (-n - 1) - (z - s + 1j) ** (-n - 1)
        return complex((-1) ** n * math.factorial(n) * total / (2j * 2.0 * np.pi))

    def closed_dispersion(lam: complex, n: int) -> complex:
        u = lam + 1.0
        a, b = u - 1j * omega0, u + 1j * omega0
        return complex(0.5 * (-1) ** n * math.factorial(n) * (a ** (-n - 1) + b ** (-n - 1)))

    decay = (1.0 + (omega0 + 1.0) ** 2) / (np.pi * (1.0 - strip_width ** 2))
    return AnalyticDistribution(
        family=BIMODAL_LORENTZIAN,
        params={"omega0": float(omega0)},
        strip_width=strip_width,
        decay_constant=decay,
        is_even=True,
        density=density,
        density_complex=density_complex,
        frequency_scale=omega0 + 1.0,
        poles=(omega0 + 1j, omega0 - 1j, -omega0 + 1j, -omega0 - 1j),
        density_derivative=density_derivative,
        closed_dispersion=closed_dispersion,
        dispersion_poles=(-1.0 + 1j * omega0, -1.0 - 1j * omega0),
    )


def custom_distribution(
    density: Callable[[np.ndarray], np.ndarray],
    density_complex: Callable[[np.ndarray], np.ndarray],
    strip_width: float,
    decay_constant: float,
    is_even: bool = False,
    frequency_scale: float = 1.0,
    poles: Sequence[complex] = (),
    density_derivative: Optional[Callable[[complex, int], complex]] = None,
    name: str = CUSTOM,
) -> AnalyticDistribution:
    """Wrap user-supplied real and complex evaluators of an analytic density"""
    if strip_width <= 0 or decay_constant <= 0:
        raise ValueError("strip_width and decay_constant must be positive")
    return AnalyticDistribution(
        family=CUSTOM,
        params={"name": name},
        strip_width=float(strip_width),
        decay_constant=float(decay_constant),
        is_even=is_even,
        density=density,
        density_complex=density_complex,
        frequency_scale=float(frequency_scale),
        poles=tuple(complex(p) for p in poles),
        density_derivative=density_derivative,
    )


def _scalar_or_array(values: np.ndarray, like) -> Union[float, complex, np.ndarray]:
    if np.ndim(like) == 0:
        return values.item()
    return values


def eval_density(dist: AnalyticDistribution, omega: RealLike) -> RealLike:
    """g(ω) on the real line"""
    values = np.asarray(dist.density(np.asarray(omega, dtype=float)), dtype=float)
    return _scalar_or_array(values, omega)


def check_pole_guard(poles: Sequence[complex], z: ComplexLike, guard: float = POLE_GUARD) -> None:
    """Raise PoleProximity if any z lies within guard of a listed pole"""
    if not poles:
        return
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    for pole in poles:
        distance = np.abs(zs - pole)
        if np.any(distance < guard):
            bad = complex(zs[int(np.argmin(distance))])
            raise PoleProximity(bad, pole, guard)


def eval_density_complex(dist: AnalyticDistribution, z: ComplexLike) -> ComplexLike:
    """g(z) on the analyticity strip"""
    z_arr = np.asarray(z, dtype=complex)
    check_pole_guard(dist.poles, z_arr)
    if dist.family != BIMODAL_LORENTZIAN and np.any(np.abs(z_arr.imag) > dist.strip_width + 1e-12):
        raise ValueError(f"|Im z| exceeds the strip width {dist.strip_width}")
    values = np.asarray(dist.density_complex(z_arr), dtype=complex)
    return _scalar_or_array(values, z)


def density_derivative_complex(dist: AnalyticDistribution, z: complex, n: int) -> complex:
    """g^(n)(z), analytic when the family supplies it, Cauchy-circle otherwise"""
    if n == 0:
        return complex(eval_density_complex(dist, z))
    check_pole_guard(dist.poles, z)
    if dist.density_derivative is not None:
        return complex(dist.density_derivative(complex(z), n))
    return cauchy_derivative(dist.density_complex, complex(z), n, 0.25 * dist.strip_width)


def cauchy_derivative(func: Callable[[np.ndarray], np.ndarray], z: complex, n: int,
                      radius: float, points: int = CAUCHY_POINTS) -> complex:
    """n-th derivative of an analytic function from a trapezoid rule on a circle"""
    # half-step offset keeps the nodes off the horizontal through z
    theta = 2.0 * np.pi * (np.arange(points) + 0.5) / points
    nodes = z + radius * np.exp(1j * theta)
    values = np.asarray(func(nodes), dtype=complex)
    total = np.sum(values * np.exp(-1j * n * theta)) / points
    return complex(math.factorial(n) * total / radius ** n)


def adaptive_quad(func: Callable[[float], float], a: float, b: float,
                  tolerance: float = QUAD_TOLERANCE,
                  points: Optional[Sequence[float]] = None) -> float:
    """scipy quad that raises QuadratureFailure instead of warning"""
    result = quad(func, a, b, epsabs=tolerance * 1e-2, epsrel=1e-12,
                  limit=QUAD_LIMIT, points=points, full_output=1)
    value, error = result[0], result[1]
    if not np.isfinite(value) or error > tolerance:
        message = result[3] if len(result) > 3 else "error estimate above tolerance"
        raise QuadratureFailure(f"quad on [{a:.6g}, {b:.6g}] gave error {error:.3g}: {message}")
    if len(result) > 3:
        logger.debug("quad reported '%s' but error %.3g is within tolerance", result[3], error)
    return value


def _density_on_u(dist: AnalyticDistribution, u: RealLike) -> RealLike:
    omega = np.tan(u)
    return dist.density(omega) / np.cos(u) ** 2


def normalization(dist: AnalyticDistribution, window: float = NORMALIZATION_WINDOW) -> Tuple[float, float]:
    """Mass inside |ω| ≤ window and the tail correction outside it"""
    edge = math.atan(window)
    inside = adaptive_quad(lambda u: float(_density_on_u(dist, u)), -edge, edge,
                           points=[math.atan(c) for c in _density_breakpoints(dist) if abs(c) < window])
    tail = adaptive_quad(lambda u: float(_density_on_u(dist, u)), edge, 0.5 * np.pi)
    tail += adaptive_quad(lambda u: float(_density_on_u(dist, u)), -0.5 * np.pi, -edge)
    return inside, tail


def _density_breakpoints(dist: AnalyticDistribution) -> List[float]:
    return sorted({float(p.real) for p in dist.poles})


def cdf(dist: AnalyticDistribution, omega: float) -> float:
    """G(ω) = ∫_{-∞}^{ω} g"""
    upper = math.atan(omega)
    points = [math.atan(c) for c in _density_breakpoints(dist) if c < omega]
    return adaptive_quad(lambda u: float(_density_on_u(dist, u)), -0.5 * np.pi, upper,
                         points=points or None)


def hilbert_transform(dist: AnalyticDistribution, y: float, tolerance: float = QUAD_TOLERANCE) -> float:
    """H[g](y) = (-1/π) ∫_0^∞ (g(y+t) - g(y-t))/t dt with t = tan u"""

    def integrand(u: float) -> float:
        t = math.tan(u)
        return float(dist.density(y + t) - dist.density(y - t)) / (math.sin(u) * math.cos(u))

    shifts = [abs(c - y) for c in _density_breakpoints(dist)]
    points = sorted({math.atan(s) for s in shifts if s > 0})
    return -adaptive_quad(integrand, 0.0, 0.5 * np.pi, tolerance=tolerance, points=points or None) / np.pi


def hilbert_transform_grid(dist: AnalyticDistribution, ys: Sequence[float],
                           tolerance: float = QUAD_TOLERANCE) -> np.ndarray:
    """H[g] on a grid in one vector quadrature"""
    ys = np.asarray(ys, dtype=float)

    def integrand(u: float) -> np.ndarray:
        t = math.tan(u)
        return (dist.density(ys + t) - dist.density(ys - t)) / (math.sin(u) * math.cos(u))

    values, error = quad_vec(integrand, 0.0, 0.5 * np.pi, epsabs=tolerance * 1e-2, epsrel=1e-12,
                             norm="max", limit=10 * QUAD_LIMIT)
    if not np.all(np.isfinite(values)) or error > tolerance:
        raise QuadratureFailure(f"vector Hilbert quadrature error {error:.3g} above {tolerance:g}")
    return -values / np.pi


def closed_hilbert(dist: AnalyticDistribution, y: RealLike) -> RealLike:
    """Closed-form Hilbert transform of the bimodal Lorentzian"""
    if dist.family != BIMODAL_LORENTZIAN:
        raise ValueError("closed Hilbert transform exists only for the bimodal Lorentzian")
    w0 = dist.params["omega0"]
    y = np.asarray(y, dtype=float)
    values = ((y - w0) / (1 + (y - w0) ** 2) + (y + w0) / (1 + (y + w0) ** 2)) / (2 * np.pi)
    return _scalar_or_array(np.asarray(values), y)


def find_hilbert_zeros(dist: AnalyticDistribution, search_interval: Tuple[float, float],
                       tol: float = 1e-10, step: float = ZERO_GRID_STEP) -> List[float]:
    """All sign-change roots of H[g] in the interval, refined by bisection"""
    lo, hi = float(search_interval[0]), float(search_interval[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ValueError(f"search interval must be bounded and increasing, got {search_interval}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    count = int(math.ceil((hi - lo) / step)) + 1
    grid = np.linspace(lo, hi, count)
    values = hilbert_transform_grid(dist, grid)

    roots: List[float] = [float(y) for y, v in zip(grid, values) if v == 0.0]
    xtol = max(min(tol, 1e-6) * 1e-3, 1e-15)
    for i in range(count - 1):
        if values[i] * values[i + 1] < 0:
            root = bisect(lambda y: hilbert_transform(dist, y), grid[i], grid[i + 1], xtol=xtol, maxiter=200)
            roots.append(float(root))

    roots.sort()
    merged: List[float] = []
    for root in roots:
        if merged and abs(root - merged[-1]) < 0.5 * step:
            continue
        merged.append(root)
    logger.debug("Hilbert zeros of %s in [%g, %g]: %s", dist.label, lo, hi, merged)
    return merged


def check_strip_bound(dist: AnalyticDistribution, nx: int = 81, ny: int = 11,
                      x_extent: float = 20.0) -> Tuple[bool, float]:
    """Spot-check |g(z)| ≤ C/(1+|z|²) on a grid of the closed strip; returns (ok, worst ratio)"""
    xs = np.linspace(-x_extent, x_extent, nx) * max(1.0, dist.frequency_scale)
    ys = np.linspace(-dist.strip_width, dist.strip_width, ny)
    z = (xs[None, :] + 1j * ys[:, None]).ravel()
    if dist.poles:
        far = np.min(np.abs(z[:, None] - np.asarray(dist.poles)[None, :]), axis=1) >= POLE_GUARD
        z = z[far]
    values = np.abs(np.asarray(dist.density_complex(z), dtype=complex))
    bound = dist.decay_constant / (1.0 + np.abs(z) ** 2)
    worst = float(np.max(values / bound))
    return worst <= 1.0, worst


@functools.lru_cache(maxsize=8)
def _tabulated_cdf(dist: AnalyticDistribution, points: int = CDF_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoint-rule CDF on a uniform grid in u = arctan ω, cross-checked against cdf()"""
    edges = np.linspace(-0.5 * np.pi, 0.5 * np.pi, points)
    mids = 0.5 * (edges[1:] + edges[:-1])
    mass = _density_on_u(dist, mids) * np.diff(edges)
    table = np.concatenate(([0.0], np.cumsum(mass)))

    for omega in CDF_CHECKS:
        omega *= dist.frequency_scale
        gap = abs(float(np.interp(math.atan(omega), edges, table)) - cdf(dist, omega))
        if gap > CDF_TOLERANCE:
            raise QuadratureFailure(f"tabulated CDF of {dist.label} is off by {gap:.3g} at ω = {omega:g}")
    return edges, table / table[-1]


def _invert_cdf(edges: np.ndarray, table: np.ndarray, probabilities: np.ndarray) -> np.ndarray:
    # bisection on the tabulated CDF, vectorised over all probabilities
    index = np.searchsorted(table, probabilities, side="left")
    index = np.clip(index, 1, len(table) - 1)
    lower, upper = table[index - 1], table[index]
    span = np.where(upper > lower, upper - lower, 1.0)
    fraction = np.clip((probabilities - lower) / span, 0.0, 1.0)
    u = edges[index - 1] + fraction * (edges[index] - edges[index - 1])
    return np.tan(u)


def sample_frequencies(dist: AnalyticDistribution, N: int, mode: str = "quantile",
                       seed: Optional[int] = None) -> np.ndarray:
    """Natural frequencies by deterministic quantiles or seeded i.i.d. draws"""
    if N < 1:
        raise ValueError("N must be at least 1")
    edges, table = _tabulated_cdf(dist)

    if mode == "random":
        rng = np.random.default_rng(seed)
        return _invert_cdf(edges, table, rng.random(N))
    if mode != "quantile":
        raise ValueError(f"unknown sampling mode '{mode}'")

    probabilities = (np.arange(1, N + 1) - 0.5) / N
    if not dist.is_even:
        return _invert_cdf(edges, table, probabilities)

    # mirror the upper half so the sample is exactly symmetric
    half = N // 2
    upper = _invert_cdf(edges, table, probabilities[N - half:]) if half else np.empty(0)
    middle = np.zeros(N % 2)
    return np.concatenate((-upper[::-1], middle, upper))
