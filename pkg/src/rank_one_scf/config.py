"""
Configuration management for rank-one solvers and experiments.
"""

import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Self

from .constants import (
    DEFAULT_MAX_ITERS,
    DEFAULT_SEEDS,
    DEFAULT_TOL,
    DENSE_RESIDUAL_LIMIT,
    GENERATOR_DEFAULT_DIMS,
)
from .exceptions import ConfigurationError


class InitKind(str, Enum):
    UNIFORM01 = "uniform01"
    PROVIDED = "provided"


class StopRule(str, Enum):
    """Stopping rule; AUTO picks EQ11 for the SCF solvers and KKT for the baselines."""

    AUTO = "auto"
    EQ11 = "eq11"
    KKT = "kkt"
    LAMBDA = "lambda"
    ANGLE = "angle"


class RqiAcceptRule(str, Enum):
    MAGNITUDE = "magnitude"
    SIGNED = "signed"


class PairSchedule(str, Enum):
    AUTO = "auto"
    ADJACENT = "adjacent"
    DISJOINT = "disjoint"


class Algorithm(str, Enum):
    HOSCF = "hoscf"
    IHOSCF = "ihoscf"
    HOPM = "hopm"
    JACOBI_HOPM = "jacobi_hopm"
    ASVD = "asvd"
    JACOBI_ASVD = "jacobi_asvd"


class Generator(str, Enum):
    GAUSSIAN = "gaussian"
    EXP = "exp"
    ARCSIN = "arcsin"
    TAN = "tan"
    RANK1 = "rank1"
    FILE = "file"


def _env_value(env_var: str, default: Any) -> Any:
    """Read one environment variable, converting it to the type of ``default``."""
    value = os.getenv(env_var)
    if not value:
        return default
    if isinstance(default, bool):
        return value.lower() in ('true', '1', 'yes', 'on')
    if isinstance(default, int):
        try:
            return int(value)
        except ValueError:
            raise ConfigurationError(f"Invalid integer value for {env_var}: {value}")
    if isinstance(default, float):
        try:
            return float(value)
        except ValueError:
            raise ConfigurationError(f"Invalid float value for {env_var}: {value}")
    return value


class SolveOptions(BaseModel):
    """Options shared by every rank-one solver."""

    model_config = {"frozen": True}

    tol: float = Field(default=DEFAULT_TOL, gt=0, description="Stopping tolerance")
    max_iters: int = Field(default=DEFAULT_MAX_ITERS, ge=1, description="Iteration cap")
    seed: int = Field(default=0, ge=0, lt=2 ** 64, description="Seed of the initial guess")
    init: InitKind = Field(default=InitKind.UNIFORM01, description="Initial guess kind")
    stop_rule: StopRule = Field(default=StopRule.AUTO, description="Stopping rule")
    rqi_accept_rule: RqiAcceptRule = Field(
        default=RqiAcceptRule.MAGNITUDE, description="iHOSCF Rayleigh step acceptance"
    )
    pairs: PairSchedule = Field(
        default=PairSchedule.AUTO,
        description="ASVD pair schedule; auto is adjacent for ASVD and disjoint for Jacobi-ASVD",
    )
    threads: int = Field(default=1, ge=1, description="Worker threads for J construction")
    deterministic: bool = Field(default=True, description="Bit-reproducible J construction")
    reuse_intermediates: bool = Field(
        default=False, description="Share partial contractions between blocks of J"
    )
    dense_residual_limit: int = Field(
        default=DENSE_RESIDUAL_LIMIT, ge=1, description="Entry count above which residual_norm avoids expansion"
    )

    @model_validator(mode='after')
    def validate_reuse(self) -> Self:
        """Intermediate reuse changes summation order, so it needs determinism off."""
        if self.reuse_intermediates and self.deterministic:
            raise ValueError("reuse_intermediates requires deterministic=False")
        return self

    def with_seed(self, seed: int) -> "SolveOptions":
        return self.model_copy(update={"seed": seed})

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "SolveOptions":
        """
        Create solver options from environment variables.

        Args:
            env_file: Optional path to .env file

        Returns:
            SolveOptions instance

        Raises:
            ConfigurationError: If a variable cannot be converted or validated
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        env_vars = {
            "RANK1_TOL": ("tol", DEFAULT_TOL),
            "RANK1_MAX_ITERS": ("max_iters", DEFAULT_MAX_ITERS),
            "RANK1_SEED": ("seed", 0),
            "RANK1_THREADS": ("threads", 1),
            "RANK1_DETERMINISTIC": ("deterministic", True),
            "RANK1_STOP_RULE": ("stop_rule", StopRule.AUTO.value),
            "RANK1_RQI_ACCEPT_RULE": ("rqi_accept_rule", RqiAcceptRule.MAGNITUDE.value),
            "RANK1_DENSE_RESIDUAL_LIMIT": ("dense_residual_limit", DENSE_RESIDUAL_LIMIT),
        }

        config_data = {
            config_key: _env_value(env_var, default)
            for env_var, (config_key, default) in env_vars.items()
        }

        try:
            return cls(**config_data)
        except Exception as e:
            raise ConfigurationError(f"Configuration validation failed: {str(e)}")

    def to_dict(self) -> Dict[str, Any]:
        """Convert options to a JSON-friendly dictionary."""
        return self.model_dump(mode="json")


class ExperimentSpec(BaseModel):
    """Description of a multi-start experiment or a scaling benchmark."""

    generator: Generator = Field(default=Generator.EXP)
    dims: Optional[Tuple[int, ...]] = Field(default=None, description="Tensor dimensions")
    seeds: int = Field(default=DEFAULT_SEEDS, ge=1, description="Number of initial guesses")
    first_seed: int = Field(default=0, ge=0)
    tensor_seed: int = Field(default=0, ge=0, description="Seed of the gaussian generator")
    algorithms: List[Algorithm] = Field(default_factory=lambda: [Algorithm.HOSCF])
    opts: SolveOptions = Field(default_factory=SolveOptions)
    threads: List[int] = Field(default_factory=lambda: [1])
    input_path: Optional[Path] = None
    record_timings: bool = True
    workers: int = Field(default=1, ge=1, description="Pool size for independent cells")
    repeats: int = Field(default=1, ge=1, description="Timing repetitions in scaling mode")
    fixed_iters: Optional[int] = Field(default=None, ge=1, description="Scaling iteration count")

    @field_validator('algorithms')
    @classmethod
    def validate_algorithms(cls, v: List[Algorithm]) -> List[Algorithm]:
        if not v:
            raise ValueError("At least one algorithm is required")
        return v

    @field_validator('threads')
    @classmethod
    def validate_threads(cls, v: List[int]) -> List[int]:
        if not v or any(t < 1 for t in v):
            raise ValueError("Thread counts must be positive")
        return v

    @model_validator(mode='after')
    def validate_generator_dims(self) -> Self:
        """Fill default shapes per generator and check the dimension vector."""
        if self.generator == Generator.FILE:
            if self.input_path is None:
                raise ValueError("Generator 'file' requires input_path")
            return self
        if self.dims is None:
            self.dims = GENERATOR_DEFAULT_DIMS[self.generator.value]
        if len(self.dims) < 2:
            raise ValueError("Tensors must have order d >= 2")
        if any(n < 1 for n in self.dims):
            raise ValueError("Dimensions must be positive")
        if self.generator == Generator.ARCSIN:
            if any(n < j for j, n in enumerate(self.dims, start=1)):
                raise ValueError("ARCSIN needs I_j >= j in every mode, else the tensor is zero")
        return self


class RuntimeSettings(BaseModel):
    """Process-wide settings."""

    log_level: str = Field(default="WARNING")

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.strip().upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level: {v}")
        return level

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "RuntimeSettings":
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()
        try:
            return cls(log_level=os.getenv("RANK1_LOG_LEVEL") or "WARNING")
        except Exception as e:
            raise ConfigurationError(f"Configuration validation failed: {str(e)}")
