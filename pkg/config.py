"""
Run configuration: the JSON schema every subcommand reads, environment defaults from .env,
and the hash recorded in artifact sidecars.
"""

import hashlib
import importlib
import json
import os
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from distributions import BIMODAL_LORENTZIAN, CUSTOM, AnalyticDistribution, bimodal_lorentzian
from errors import ConfigError
from simulate import GALERKIN, SimulationSettings

VERSION = "0.3.0"

DEFAULT_OUTPUT_DIR = "output"
DEFAULT_LOG_LEVEL = "WARNING"

# Acceptance tolerances keyed by criterion; the verify section may override any of them.
DEFAULT_TOLERANCES: Dict[str, float] = {
    "transition": 1e-6,
    "coefficients": 1e-6,
    "quadrature": 1e-8,
    "eigenvalues": 1e-6,
    "branch_crossing": 1e-3,
    "pairings": 1e-8,
    "decay_rate": 0.10,
    "decay_frequency": 0.02,
    "hopf_amplitude": 0.15,
    "hopf_frequency": 0.05,
    "exponent_sine": 0.10,
    "exponent_second_harmonic": 0.15,
    "amplitude_second_harmonic": 0.20,
    "oracle": 1e-2,
    "reduced_radius": 0.10,
    "equivariance": 1e-10,
    "below_onset": 1e-4,
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DistributionConfig(_Section):
    family: Literal["bimodal_lorentzian", "custom_tabulated_analytic"] = BIMODAL_LORENTZIAN
    omega0: Optional[float] = Field(default=None, gt=0)
    strip_width: float = Field(default=0.5, gt=0, lt=1)
    # "module:callable" returning an AnalyticDistribution
    factory: Optional[str] = None
    factory_args: Dict[str, Union[float, int, str, bool]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _family_fields(self) -> "DistributionConfig":
        if self.family == BIMODAL_LORENTZIAN and self.omega0 is None:
            raise ValueError("bimodal_lorentzian needs omega0")
        if self.family == CUSTOM:
            if not self.factory or ":" not in self.factory:
                raise ValueError("custom_tabulated_analytic needs factory = 'module:callable'")
        return self


class ModelConfig(_Section):
    K: float = Field(default=4.16, ge=0)
    h: float = 0.0


class SimulationConfig(_Section):
    kind: Literal["finite_n", "galerkin", "oa_oracle", "linearized"] = GALERKIN
    N: int = Field(default=100000, ge=2)
    M: int = Field(default=400, ge=8)
    J: int = Field(default=8, ge=2)
    dt: float = Field(default=0.02, gt=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    seed: Optional[int] = Field(default=None, ge=0)
    record_stride: int = Field(default=10, ge=1)
    contour_shift: Optional[float] = Field(default=None, ge=0)
    initial_amplitude: float = Field(default=1e-3, ge=0, le=0.5)
    sample_mode: Literal["quantile", "random"] = "quantile"


class AnalysisConfig(_Section):
    transient_fraction: float = Field(default=0.5, ge=0, lt=1)


class SpectrumConfig(_Section):
    K_min: float = Field(default=0.1, gt=0)
    K_max: float = Field(default=11.0, gt=0)
    steps: int = Field(default=109, ge=1)
    K_values: Optional[List[float]] = None
    track: bool = True

    @field_validator("K_values")
    @classmethod
    def _non_empty(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is not None:
            if not values:
                raise ValueError("K grid is empty")
            if any(K <= 0 for K in values):
                raise ValueError("K grid values must be positive")
        return values

    @model_validator(mode="after")
    def _ordered(self) -> "SpectrumConfig":
        if self.K_values is None and self.K_max <= self.K_min:
            raise ValueError("K grid is empty: K_max must exceed K_min")
        return self

    def grid(self) -> List[float]:
        if self.K_values is not None:
            return sorted(float(K) for K in self.K_values)
        return [float(K) for K in np.linspace(self.K_min, self.K_max, self.steps + 1)]


class SweepConfig(_Section):
    K_list: List[float] = Field(default_factory=lambda: [4.04, 4.09, 4.16, 4.25], min_length=1)


class ReduceConfig(_Section):
    system: Literal["full", "polar", "averaged"] = "full"
    epsilon: Optional[float] = None
    alpha_plus: Tuple[float, float] = (0.01, 0.0)
    alpha_minus: Tuple[float, float] = (0.01, 0.0)
    t_end: Optional[float] = Field(default=None, gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    record_stride: int = Field(default=10, ge=1)


class VerifyConfig(_Section):
    tolerances: Dict[str, float] = Field(default_factory=dict)
    criteria: Optional[List[int]] = None
    slow: bool = True

    @field_validator("tolerances")
    @classmethod
    def _known_keys(cls, values: Dict[str, float]) -> Dict[str, float]:
        unknown = sorted(set(values) - set(DEFAULT_TOLERANCES))
        if unknown:
            raise ValueError(f"unknown tolerance keys: {', '.join(unknown)}")
        return values

    @field_validator("criteria")
    @classmethod
    def _known_criteria(cls, values: Optional[List[int]]) -> Optional[List[int]]:
        if values is not None and any(not 1 <= c <= 14 for c in values):
            raise ValueError("criteria are numbered 1..14")
        return values

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


class OutputConfig(_Section):
    directory: Optional[str] = None
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"], min_length=1)


class RunConfig(_Section):
    distribution: DistributionConfig
    model: ModelConfig = Field(default_factory=ModelConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    reduce: ReduceConfig = Field(default_factory=ReduceConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


def environment_defaults() -> Dict[str, Optional[str]]:
    """KDLAB_* variables from the process environment or a .env file"""
    load_dotenv()
    return {
        "output_dir": os.getenv("KDLAB_OUTPUT_DIR"),
        "threads": os.getenv("KDLAB_THREADS"),
        "log_level": os.getenv("KDLAB_LOG_LEVEL"),
        "seed": os.getenv("KDLAB_SEED"),
    }


def _env_int(name: str, raw: Optional[str]) -> Optional[int]:
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got '{raw}'")


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config:\n{e}")


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)


def resolve_runtime(config: RunConfig, out: Optional[str] = None,
                    seed: Optional[int] = None) -> RunConfig:
    """Apply flag > config > environment precedence and return the effective config"""
    env = environment_defaults()
    effective = config.model_copy(deep=True)

    if out is not None:
        effective.output.directory = out
    elif effective.output.directory is None:
        effective.output.directory = env["output_dir"] or DEFAULT_OUTPUT_DIR

    if seed is not None:
        effective.simulation.seed = seed
    elif effective.simulation.seed is None:
        env_seed = _env_int("KDLAB_SEED", env["seed"])
        effective.simulation.seed = env_seed if env_seed is not None else 0

    if effective.simulation.seed < 0:
        raise ConfigError("seed must be nonnegative")
    return effective


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        threads = _env_int("KDLAB_THREADS", environment_defaults()["threads"]) or 1
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    return threads


def resolve_log_level(flag: Optional[str]) -> str:
    level = (flag or environment_defaults()["log_level"] or DEFAULT_LOG_LEVEL).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ConfigError(f"unknown log level '{level}'")
    return level


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _load_factory(target: str):
    module_name, _, attribute = target.partition(":")
    try:
        module = importlib.import_module(module_name)
        return getattr(module, attribute)
    except (ImportError, AttributeError) as e:
        raise ConfigError(f"cannot load distribution factory '{target}': {e}")


def build_distribution(section: DistributionConfig) -> AnalyticDistribution:
    if section.family == BIMODAL_LORENTZIAN:
        return bimodal_lorentzian(section.omega0, section.strip_width)
    factory = _load_factory(section.factory)
    dist = factory(**section.factory_args)
    if not isinstance(dist, AnalyticDistribution):
        raise ConfigError(f"factory '{section.factory}' did not return an AnalyticDistribution")
    return dist


def simulation_settings(section: SimulationConfig) -> SimulationSettings:
    return SimulationSettings(
        kind=section.kind,
        N=section.N,
        M=section.M,
        J=section.J,
        dt=section.dt,
        t_end=section.t_end,
        seed=section.seed or 0,
        record_stride=section.record_stride,
        contour_shift=section.contour_shift,
        initial_amplitude=section.initial_amplitude,
        sample_mode=section.sample_mode,
    )


def default_config_dict() -> dict:
    """Reference run: ω₀ = 2, K = 4.16, h = 0, Galerkin M = 400, J = 8"""
    return {
        "distribution": {"family": BIMODAL_LORENTZIAN, "omega0": 2.0},
        "model": {"K": 4.16, "h": 0.0},
        "simulation": {"kind": GALERKIN, "M": 400, "J": 8, "dt": 0.02, "t_end": 1000.0,
                       "seed": 0, "record_stride": 10},
        "analysis": {"transient_fraction": 0.5},
        "spectrum": {"K_min": 0.1, "K_max": 11.0, "steps": 109},
        "sweep": {"K_list": [4.04, 4.09, 4.16, 4.25]},
        "output": {"directory": DEFAULT_OUTPUT_DIR, "formats": ["csv", "json"]},
    }


